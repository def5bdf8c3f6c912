#pragma once

#define SPECINIT_VERSION "0.1.0"
