#pragma once

#include <string>
#include <vector>

namespace specinit::svgplot {

struct Series {
    std::vector<double> x, y;
    std::vector<double> yerr; // empty: plain line; else markers with error bars
    std::string color = "#1f77b4";
    std::string label;
    bool line = true;
};

struct Figure {
    std::string title, xlabel, ylabel;
    std::vector<Series> series;
    int width = 640, height = 440;
};

// Minimal self-contained line/marker chart; no external renderer.
std::string render(const Figure& fig);
void write(const Figure& fig, const std::string& path);

} // namespace specinit::svgplot
