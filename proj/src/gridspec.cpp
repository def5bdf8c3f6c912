#include "specinit/gridspec.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace specinit::gridspec {

namespace {

double parse_double(const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError("bad number in grid spec: '" + s + "'");
    }
    if (pos != s.size()) throw ConfigError("trailing junk in grid spec: '" + s + "'");
    return v;
}

} // namespace

std::vector<double> parse_alpha_grid(const std::string& spec) {
    if (spec.empty()) throw ConfigError("empty alpha grid");
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        std::istringstream ss(spec);
        std::string a, b, c;
        if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c))
            throw ConfigError("grid spec must be start:stop:step");
        const double start = parse_double(a), stop = parse_double(b), step = parse_double(c);
        if (!(step > 0.0)) throw ConfigError("grid step must be positive");
        if (stop < start) throw ConfigError("grid stop must be >= start");
        for (int k = 0;; ++k) {
            const double v = start + k * step;
            if (v > stop + 0.5 * step) break;
            out.push_back(v);
            if (k > 1000000) throw ConfigError("grid too large");
        }
        return out;
    }
    std::istringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(parse_double(tok));
    if (out.empty()) throw ConfigError("empty alpha grid");
    return out;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

} // namespace specinit::gridspec
