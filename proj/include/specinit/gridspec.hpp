#pragma once

#include <string>
#include <vector>

#include "specinit/errors.hpp"

namespace specinit::gridspec {

// "start:stop:step" (endpoints inclusive within half a step), or a
// comma-separated list "2,3,5", or a single value.
std::vector<double> parse_alpha_grid(const std::string& spec);

// Fixed %.12g formatting so identical runs emit identical bytes.
std::string format_number(double v);

} // namespace specinit::gridspec
