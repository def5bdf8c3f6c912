#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "specinit/channels.hpp"

namespace specinit::channels {

using numerics::kInf;
using numerics::normal_pdf;
using numerics::PchipInterpolant;

namespace {

std::shared_ptr<const ChannelFunctions> finalize_custom(ChannelFunctions chf,
                                                        const Quadrature& q) {
    chf.support.validate();
    chf.eta_integral = channel_integral(chf, [](double, double e, double) { return e; }, q);
    chf.mu_integral = channel_integral(chf, [](double, double, double m) { return m; }, q);
    if (std::abs(chf.eta_integral - 1.0) > 1e-6 || std::abs(chf.mu_integral - 1.0) > 1e-6)
        throw NormalizationFailure("custom channel eta/mu do not integrate to 1: got " +
                                   std::to_string(chf.eta_integral) + ", " +
                                   std::to_string(chf.mu_integral));
    return std::make_shared<const ChannelFunctions>(std::move(chf));
}

// E over |S| of f(|S|): complex mode |S| has density 2 s exp(-s^2), real mode
// the half-normal 2 phi(s).
double expect_over_magnitude(const std::function<double(double)>& f, Mode mode,
                             const Quadrature& q) {
    SupportDescriptor half_line;
    auto integrand = [&](double s) {
        const double w = mode == Mode::Complex ? 2.0 * s * std::exp(-s * s)
                                               : 2.0 * normal_pdf(s);
        return f(s) * w;
    };
    return numerics::integrate(integrand, half_line, q);
}

// Composite Simpson on a uniform grid with an even interval count; trapezoid
// otherwise (user grids should be fine enough either way).
double integrate_samples(const std::vector<double>& x, const std::vector<double>& f) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    const double h = x[1] - x[0];
    bool uniform = true;
    for (std::size_t i = 1; i + 1 < n; ++i)
        if (std::abs((x[i + 1] - x[i]) - h) > 1e-9 * std::max(1.0, std::abs(h))) {
            uniform = false;
            break;
        }
    if (uniform && n % 2 == 1) {
        double s = f.front() + f.back();
        for (std::size_t i = 1; i + 1 < n; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * f[i];
        return s * h / 3.0;
    }
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) s += 0.5 * (x[i + 1] - x[i]) * (f[i] + f[i + 1]);
    return s;
}

// Adaptive tabulation of a smooth function on [lo, hi]: refine intervals
// whose pchip midpoint misses the true value.
void refine_knots(const std::function<double(double)>& f, std::vector<double>& xs,
                  std::vector<double>& ys) {
    for (int pass = 0; pass < 6 && xs.size() < 3000; ++pass) {
        PchipInterpolant interp(xs, ys);
        std::vector<double> nx, ny;
        bool refined = false;
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
            nx.push_back(xs[i]);
            ny.push_back(ys[i]);
            const double mid = 0.5 * (xs[i] + xs[i + 1]);
            const double truth = f(mid);
            if (std::abs(interp(mid) - truth) > std::max(1e-9, 1e-6 * std::abs(truth))) {
                nx.push_back(mid);
                ny.push_back(truth);
                refined = true;
            }
        }
        nx.push_back(xs.back());
        ny.push_back(ys.back());
        xs = std::move(nx);
        ys = std::move(ny);
        if (!refined) break;
    }
}

} // namespace

Channel Channel::custom(std::function<double(double, double)> density,
                        SupportDescriptor support, Mode mode, const Quadrature& q) {
    support.validate();
    auto eta_exact = [&](double y) {
        return expect_over_magnitude([&](double s) { return density(y, s); }, mode, q);
    };
    auto mu_exact = [&](double y) {
        return expect_over_magnitude([&](double s) { return s * s * density(y, s); }, mode, q);
    };

    ChannelFunctions chf;
    chf.support = support;
    if (support.kind == SupportKind::DiscreteNonnegativeIntegers) {
        std::vector<double> ev, mv;
        double upper = std::isfinite(support.continuum_upper) ? support.continuum_upper : kInf;
        for (long y = 0;; ++y) {
            ev.push_back(eta_exact(static_cast<double>(y)));
            mv.push_back(mu_exact(static_cast<double>(y)));
            if (std::isfinite(upper) && y >= static_cast<long>(upper)) break;
            if (!std::isfinite(upper) && y >= 16 && ev.back() + mv.back() < 1e-14) break;
            if (y > 100000) throw NonConvergent("custom discrete channel pmf did not decay");
        }
        return custom_tabulated({}, std::move(ev), std::move(mv), support, mode, q);
    }

    const double lo = support.continuum_lower;
    double hi = support.continuum_upper;
    if (!std::isfinite(hi)) {
        hi = std::max(50.0, lo + 50.0);
        while (eta_exact(hi) + mu_exact(hi) > 1e-13) {
            hi *= 2.0;
            if (hi > 1e5) throw NonConvergent("custom channel density did not decay");
        }
    }
    std::vector<double> xs, etas, mus;
    const int n0 = 129;
    for (int i = 0; i < n0; ++i) xs.push_back(lo + (hi - lo) * i / (n0 - 1.0));
    for (double x : xs) {
        etas.push_back(eta_exact(x));
        mus.push_back(mu_exact(x));
    }
    auto xs_eta = xs;
    refine_knots(eta_exact, xs_eta, etas);
    refine_knots(mu_exact, xs, mus);
    SupportDescriptor sup = support;
    sup.continuum_upper = hi;
    // resolve both onto the mu grid for storage simplicity
    PchipInterpolant eta_i(xs_eta, etas);
    std::vector<double> etas_on_xs;
    etas_on_xs.reserve(xs.size());
    for (double x : xs) etas_on_xs.push_back(eta_i(x));
    return custom_tabulated(std::move(xs), std::move(etas_on_xs), std::move(mus), sup, mode, q);
}

Channel Channel::custom_tabulated(std::vector<double> y, std::vector<double> eta,
                                  std::vector<double> mu, SupportDescriptor support,
                                  Mode mode, const Quadrature& q) {
    Channel ch;
    ch.kind_ = ChannelKind::Custom;
    ch.mode_ = mode;
    ChannelFunctions chf;
    chf.support = support;

    if (support.kind == SupportKind::DiscreteNonnegativeIntegers) {
        if (eta.size() != mu.size() || eta.empty())
            throw ConfigError("discrete tables need matched, nonempty eta/mu columns");
        auto lookup = [](std::vector<double> table) {
            return [t = std::move(table)](double yv) {
                const long i = std::lround(yv);
                return (i < 0 || i >= static_cast<long>(t.size())) ? 0.0
                                                                   : t[static_cast<size_t>(i)];
            };
        };
        chf.discrete_upper = static_cast<double>(eta.size() - 1);
        chf.eta = lookup(std::move(eta));
        chf.mu = lookup(std::move(mu));
    } else {
        if (y.size() != eta.size() || y.size() != mu.size() || y.size() < 2)
            throw ConfigError("tabulated channels need matched y/eta/mu columns");
        chf.support.continuum_lower = y.front();
        chf.support.continuum_upper = y.back();
        chf.eta = PchipInterpolant(y, std::move(eta));
        chf.mu = PchipInterpolant(std::move(y), std::move(mu));
    }
    ch.functions_ = finalize_custom(std::move(chf), q);
    return ch;
}

// File schema (see README): directive lines `kind`, `mode`, optional `atom`
// lines, then a `columns` line naming either `y eta mu` or `y s density`,
// followed by whitespace-separated numeric rows.
Channel Channel::from_file(const std::string& path, const Quadrature& q) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open channel file: " + path);

    SupportDescriptor support;
    Mode mode = Mode::Complex;
    enum class Layout { EtaMu, Density } layout = Layout::EtaMu;
    bool saw_columns = false;
    std::vector<std::array<double, 3>> rows;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string first;
        if (!(ss >> first)) continue;
        auto fail = [&](const std::string& what) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": " + what);
        };
        if (!saw_columns) {
            if (first == "kind") {
                std::string k;
                ss >> k;
                if (k == "continuous") support.kind = SupportKind::ContinuousHalfLine;
                else if (k == "discrete") support.kind = SupportKind::DiscreteNonnegativeIntegers;
                else if (k == "mixed") support.kind = SupportKind::Mixed;
                else fail("unknown kind '" + k + "'");
            } else if (first == "mode") {
                std::string m;
                ss >> m;
                if (m == "complex") mode = Mode::Complex;
                else if (m == "real") mode = Mode::Real;
                else fail("unknown mode '" + m + "'");
            } else if (first == "atom") {
                Atom a;
                if (!(ss >> a.location >> a.eta_weight >> a.mu_weight)) fail("bad atom line");
                support.atoms.push_back(a);
            } else if (first == "columns") {
                std::string c1, c2, c3;
                if (!(ss >> c1 >> c2 >> c3) || c1 != "y") fail("bad columns line");
                if (c2 == "eta" && c3 == "mu") layout = Layout::EtaMu;
                else if (c2 == "s" && c3 == "density") layout = Layout::Density;
                else fail("columns must be 'y eta mu' or 'y s density'");
                saw_columns = true;
            } else {
                fail("unknown directive '" + first + "'");
            }
        } else {
            std::array<double, 3> row{};
            std::istringstream rs(line);
            if (!(rs >> row[0] >> row[1] >> row[2])) fail("bad data row");
            rows.push_back(row);
        }
    }
    if (!saw_columns || rows.empty()) throw ConfigError(path + ": no data rows");

    if (layout == Layout::EtaMu) {
        std::vector<double> y, eta, mu;
        for (const auto& r : rows) {
            y.push_back(r[0]);
            eta.push_back(r[1]);
            mu.push_back(r[2]);
        }
        return custom_tabulated(std::move(y), std::move(eta), std::move(mu), support, mode, q);
    }

    // p(y|s) samples on a rectangular grid: reduce to eta/mu columns by
    // integrating against the |S| density along s.
    std::map<double, std::map<double, double>> grid; // y -> s -> density
    for (const auto& r : rows) grid[r[0]][r[1]] = r[2];
    std::vector<double> y, eta, mu;
    for (const auto& [yv, srow] : grid) {
        if (srow.size() < 3) throw ConfigError(path + ": need >= 3 s-samples per y");
        std::vector<double> s, fe, fm;
        for (const auto& [sv, dv] : srow) {
            const double w = mode == Mode::Complex ? 2.0 * sv * std::exp(-sv * sv)
                                                   : 2.0 * normal_pdf(sv);
            s.push_back(sv);
            fe.push_back(dv * w);
            fm.push_back(sv * sv * dv * w);
        }
        y.push_back(yv);
        eta.push_back(integrate_samples(s, fe));
        mu.push_back(integrate_samples(s, fm));
    }
    return custom_tabulated(std::move(y), std::move(eta), std::move(mu), support, mode, q);
}

} // namespace specinit::channels
