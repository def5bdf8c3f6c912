#include "specinit/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "specinit/errors.hpp"
#include "specinit/gridspec.hpp"

namespace specinit::svgplot {

namespace {

struct Range {
    double lo = 0.0, hi = 1.0;
};

Range span_of(const Figure& fig, bool y_axis) {
    double lo = 1e300, hi = -1e300;
    for (const auto& s : fig.series) {
        const auto& vals = y_axis ? s.y : s.x;
        for (std::size_t i = 0; i < vals.size(); ++i) {
            double v = vals[i];
            if (!std::isfinite(v)) continue;
            double e = (y_axis && i < s.yerr.size()) ? s.yerr[i] : 0.0;
            lo = std::min(lo, v - e);
            hi = std::max(hi, v + e);
        }
    }
    if (lo > hi) return {0.0, 1.0};
    if (lo == hi) return {lo - 0.5, hi + 0.5};
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

double nice_step(double span) {
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double mult : {1.0, 2.0, 5.0, 10.0})
        if (raw <= mult * mag) return mult * mag;
    return 10.0 * mag;
}

std::string fmt(double v) { return gridspec::format_number(v); }

} // namespace

std::string render(const Figure& fig) {
    const int W = fig.width, H = fig.height;
    const int ml = 62, mr = 16, mt = 34, mb = 48;
    const Range rx = span_of(fig, false), ry = span_of(fig, true);
    auto px = [&](double x) { return ml + (x - rx.lo) / (rx.hi - rx.lo) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - ry.lo) / (ry.hi - ry.lo) * (H - mt - mb); };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    s << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    s << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\""
      << H - mt - mb << "\" fill=\"none\" stroke=\"#444\"/>\n";

    // ticks
    const double sx = nice_step(rx.hi - rx.lo), sy = nice_step(ry.hi - ry.lo);
    for (double x = std::ceil(rx.lo / sx) * sx; x <= rx.hi + 1e-12 * sx; x += sx) {
        s << "<line x1=\"" << px(x) << "\" y1=\"" << H - mb << "\" x2=\"" << px(x) << "\" y2=\""
          << H - mb + 5 << "\" stroke=\"#444\"/>\n";
        s << "<text x=\"" << px(x) << "\" y=\"" << H - mb + 18
          << "\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">" << fmt(x)
          << "</text>\n";
    }
    for (double y = std::ceil(ry.lo / sy) * sy; y <= ry.hi + 1e-12 * sy; y += sy) {
        s << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(y) << "\" x2=\"" << ml << "\" y2=\""
          << py(y) << "\" stroke=\"#444\"/>\n";
        s << "<text x=\"" << ml - 8 << "\" y=\"" << py(y) + 4
          << "\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">" << fmt(y)
          << "</text>\n";
    }
    s << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12
      << "\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\">" << fig.xlabel
      << "</text>\n";
    s << "<text x=\"16\" y=\"" << (mt + H - mb) / 2
      << "\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\" transform=\"rotate(-90 16 "
      << (mt + H - mb) / 2 << ")\">" << fig.ylabel << "</text>\n";
    s << "<text x=\"" << W / 2 << "\" y=\"20\" font-size=\"14\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\">"
      << fig.title << "</text>\n";

    int legend_row = 0;
    for (const auto& ser : fig.series) {
        if (ser.line && ser.x.size() > 1) {
            s << "<polyline fill=\"none\" stroke=\"" << ser.color << "\" stroke-width=\"1.6\" points=\"";
            for (std::size_t i = 0; i < ser.x.size(); ++i) {
                if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i])) continue;
                s << px(ser.x[i]) << "," << py(ser.y[i]) << " ";
            }
            s << "\"/>\n";
        }
        if (!ser.yerr.empty()) {
            for (std::size_t i = 0; i < ser.x.size(); ++i) {
                if (!std::isfinite(ser.y[i])) continue;
                const double X = px(ser.x[i]), Y = py(ser.y[i]);
                const double e = i < ser.yerr.size() ? ser.yerr[i] : 0.0;
                s << "<line x1=\"" << X << "\" y1=\"" << py(ser.y[i] - e) << "\" x2=\"" << X
                  << "\" y2=\"" << py(ser.y[i] + e) << "\" stroke=\"" << ser.color << "\"/>\n";
                s << "<circle cx=\"" << X << "\" cy=\"" << Y << "\" r=\"3\" fill=\"" << ser.color
                  << "\"/>\n";
            }
        }
        if (!ser.label.empty()) {
            const int ly = mt + 16 + 16 * legend_row++;
            s << "<line x1=\"" << ml + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << ml + 34
              << "\" y2=\"" << ly - 4 << "\" stroke=\"" << ser.color << "\" stroke-width=\"2\"/>\n";
            s << "<text x=\"" << ml + 40 << "\" y=\"" << ly
              << "\" font-size=\"11\" font-family=\"sans-serif\">" << ser.label << "</text>\n";
        }
    }
    s << "</svg>\n";
    return s.str();
}

void write(const Figure& fig, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << render(fig);
}

} // namespace specinit::svgplot
