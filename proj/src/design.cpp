#include "specinit/design.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace specinit::design {

using channels::channel_integral;
using channels::ChannelKind;
using channels::Mode;
using channels::mu_over_eta_infimum;
using numerics::find_root_increasing;
using numerics::kInf;
using numerics::SupportDescriptor;
using numerics::SupportKind;

CFunction CFunction::zero(const Channel& ch) {
    return CFunction([](double, double, double) { return 0.0; }, ch.functions_ptr());
}

CFunction CFunction::tabulated(const Channel& ch, std::vector<double> y, std::vector<double> c) {
    if (y.size() != c.size() || y.empty()) throw Error("tabulated c needs matched columns");
    auto eval = [y = std::move(y), c = std::move(c)](double yv, double, double) {
        if (yv < y.front() || yv > y.back()) return 0.0;
        const auto it = std::upper_bound(y.begin(), y.end(), yv);
        if (it == y.begin()) return c.front();
        const std::size_t i = static_cast<std::size_t>(it - y.begin()) - 1;
        if (i + 1 >= y.size()) return c.back();
        const double w = (yv - y[i]) / (y[i + 1] - y[i]);
        return (1.0 - w) * c[i] + w * c[i + 1];
    };
    return CFunction(eval, ch.functions_ptr());
}

double f_beta_poisson_closed(double kappa, double beta) {
    // Cancellation-free rearrangement of the textbook closed form
    //   C * int_0^v x^u/(1-x) dx - beta(beta+1),  u = beta(kappa+1), v = kappa/(kappa+1):
    // expanding the integral as a series and folding C in term by term gives
    //   beta(beta+1)/(kappa+1) * sum_y v^y (kappa - y)/(y + u + 1).
    const double v = kappa / (kappa + 1.0);
    const double u = beta * (kappa + 1.0);
    double sum = 0.0, pw = 1.0;
    for (long y = 0; y < 2000000; ++y) {
        const double yd = static_cast<double>(y);
        sum += pw * (kappa - yd) / (yd + u + 1.0);
        pw *= v;
        if (yd > kappa + 8.0 && pw * (yd + kappa + 2.0) / (yd + u + 1.0) <
                                    1e-22 * (std::abs(sum) + 1e-300) * (1.0 - v))
            return beta * (beta + 1.0) / (kappa + 1.0) * sum;
    }
    throw NonConvergent("poisson closed-form series did not converge");
}

double f_beta(const Channel& ch, double beta, const Quadrature& q) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw Error("f_beta requires beta > 0");
    auto g = [beta](double, double e, double m) {
        const double den = e + m / beta;
        if (den <= 0.0) return 0.0;
        const double d = m - e;
        return d * d / den;
    };
    const double val = channel_integral(ch.functions(), g, q);
    if (ch.kind() == ChannelKind::Poisson && ch.mode() == Mode::Complex) {
        const double closed = f_beta_poisson_closed(ch.kappa(), beta);
        if (std::abs(val - closed) > 1e-8 * std::max(1.0, std::abs(val)))
            throw Error("f(beta) series and closed form disagree: " + std::to_string(val) +
                        " vs " + std::to_string(closed));
    }
    return val;
}

double beta_alpha(const Channel& ch, double alpha, const Quadrature& q) {
    if (!(alpha > 0.0)) throw Error("beta_alpha requires alpha > 0");
    const double aw = channels::alpha_weak(ch, q);
    if (!(alpha > aw)) return kInf;
    const double target = 1.0 / alpha;
    auto g = [&](double beta) { return f_beta(ch, beta, q) - target; };
    double lo = 1e-6, hi = 1.0;
    while (g(lo) > 0.0 && lo > 1e-18) lo *= 0.1;
    while (g(hi) < 0.0) {
        hi *= 10.0;
        if (hi > 1e12) {
            // near-threshold alpha whose root escapes the cap: treat as below
            // threshold and surface the f(inf) vs 1/alpha_weak discrepancy
            std::fprintf(stderr,
                         "specinit: beta_alpha bracket cap hit at alpha=%g "
                         "(f(1e12)=%.12g vs 1/alpha=%.12g); reporting below-threshold\n",
                         alpha, f_beta(ch, 1e12, q), target);
            return kInf;
        }
    }
    return find_root_increasing(g, lo, hi, 1e-13);
}

double rho_optimal(const Channel& ch, double alpha, const Quadrature& q) {
    const double beta = beta_alpha(ch, alpha, q);
    return std::isfinite(beta) ? 1.0 / (1.0 + beta) : 0.0;
}

DesignResult design_at(const Channel& ch, double alpha, const Quadrature& q) {
    DesignResult r;
    r.alpha = alpha;
    r.alpha_weak = channels::alpha_weak(ch, q);
    r.beta_alpha = beta_alpha(ch, alpha, q);
    if (std::isfinite(r.beta_alpha)) {
        r.rho_opt = 1.0 / (1.0 + r.beta_alpha);
        r.regime = Regime::AboveThreshold;
    } else {
        r.rho_opt = 0.0;
        r.regime = Regime::BelowThreshold;
    }
    return r;
}

OptimalDesign optimal_preprocessor(const Channel& ch) {
    OptimalDesign od;
    const auto inf = mu_over_eta_infimum(ch);
    od.inf_mu_over_eta = inf.value;
    if (inf.value > 0.0) {
        Preprocessor star = Preprocessor::optimal_star(ch);
        const auto b = star.bounds(ch);
        od.feasible = true;
        od.tau = b.tau;
        od.t_min = b.t_min;
        od.preprocessor = std::move(star);
        od.note = "uniformly optimal: T(y) = 1 - eta(y)/mu(y)";
    } else {
        od.feasible = false;
        od.note = "inf mu/eta = 0: the optimum is not attained by any bounded "
                  "preprocessor; use epsilon_preprocessor";
    }
    return od;
}

double L(const CFunction& c, const Channel& ch, const Quadrature& q) {
    return channel_integral(
        ch.functions(), [&](double y, double e, double m) { return c.eval(y, e, m) * (m - e); },
        q);
}

double Q(const CFunction& c, const Channel& ch, double beta, const Quadrature& q) {
    if (!(beta > 0.0)) throw Error("Q requires beta > 0");
    return channel_integral(
        ch.functions(),
        [&](double y, double e, double m) {
            const double cv = c.eval(y, e, m);
            return cv * cv * (m / beta + e);
        },
        q);
}

CFunction c_min_norm(const Channel& ch, double alpha, double beta, const Quadrature& q) {
    if (!(alpha > 0.0)) throw Error("c_min_norm requires alpha > 0");
    const double scale = 1.0 / (alpha * f_beta(ch, beta, q));
    auto eval = [scale, beta](double, double e, double m) {
        const double den = e + m / beta;
        return den > 0.0 ? scale * (m - e) / den : 0.0;
    };
    return CFunction(eval, ch.functions_ptr());
}

CFunction c_star(const Channel& ch, double alpha, const Quadrature& q) {
    const double beta = beta_alpha(ch, alpha, q);
    if (!std::isfinite(beta))
        throw BelowThreshold("c_star requires alpha > alpha_weak");
    auto eval = [beta](double, double e, double m) {
        const double den = e + m / beta;
        return den > 0.0 ? (m - e) / den : 0.0;
    };
    return CFunction(eval, ch.functions_ptr());
}

namespace {

// L(c_v) with c_v = max{ v c*, -1+eps }. On continua with monotone mu/eta the
// clip seam is located exactly and the integral split there; otherwise the
// max() goes straight into adaptive quadrature.
double L_clipped(const Channel& ch, double v, double beta, double eps, const Quadrature& q) {
    const auto& chf = ch.functions();
    const double floor_c = -1.0 + eps;
    auto cstar = [beta](double e, double m) {
        const double den = e + m / beta;
        return den > 0.0 ? (m - e) / den : 0.0;
    };
    auto full = [&](double, double e, double m) {
        return std::max(v * cstar(e, m), floor_c) * (m - e);
    };

    if (chf.support.kind == SupportKind::DiscreteNonnegativeIntegers || !chf.ratio_monotone)
        return channel_integral(chf, full, q);

    // atoms are pointwise either way
    double total = 0.0;
    for (const auto& a : chf.support.atoms)
        total += std::max(v * cstar(a.eta_weight, a.mu_weight), floor_c) *
                 (a.mu_weight - a.eta_weight);

    const double thresh = floor_c / v; // clip binds where c*(y) < thresh
    const double lo = chf.support.continuum_lower;
    auto cstar_at = [&](double y) { return cstar(chf.eta(y), chf.mu(y)); };

    double seam = lo;
    if (cstar_at(lo + 1e-300) < thresh) {
        double hi = std::max(1.0, 2.0 * lo + 1.0);
        while (cstar_at(hi) <= thresh) {
            hi *= 2.0;
            if (hi > 1e9) throw NonConvergent("clip seam search ran away");
        }
        seam = find_root_increasing([&](double y) { return cstar_at(y) - thresh; },
                                    lo + 1e-300, hi, 1e-13);
    }

    if (seam > lo)
        total += floor_c * numerics::integrate_interval(
                               [&](double y) { return chf.mu(y) - chf.eta(y); }, lo, seam, q);
    SupportDescriptor upper_part = chf.support;
    upper_part.atoms.clear();
    upper_part.continuum_lower = seam;
    total += v * numerics::integrate(
                     [&](double y) {
                         const double e = chf.eta(y), m = chf.mu(y);
                         return cstar(e, m) * (m - e);
                     },
                     upper_part, q);
    return total;
}

} // namespace

Preprocessor epsilon_preprocessor(const Channel& ch, double alpha, double eps,
                                  const Quadrature& q) {
    if (!(eps > 0.0 && eps < 1.0)) throw Error("epsilon must lie in (0, 1)");
    const double beta = beta_alpha(ch, alpha, q);
    if (!std::isfinite(beta))
        throw BelowThreshold("epsilon_preprocessor requires alpha > alpha_weak");
    const double target = 1.0 / alpha;
    auto g = [&](double v) { return L_clipped(ch, v, beta, eps, q) - target; };

    double v_solution;
    const double g1 = g(1.0);
    if (g1 >= 0.0) {
        // unclipped c* already meets the constraint (possible only up to
        // quadrature noise, since L(c_1) <= 1/alpha)
        if (g1 > 1e-8 * std::max(1.0, target))
            throw Error("epsilon family: L(c_1) > 1/alpha beyond tolerance");
        v_solution = 1.0;
    } else {
        double hi = 2.0;
        while (g(hi) < 0.0) {
            hi *= 2.0;
            if (hi > 1e9) throw NonConvergent("epsilon family: v bracket ran away");
        }
        v_solution = find_root_increasing(g, 1.0, hi, 1e-12);
    }
    return Preprocessor::epsilon_family(ch, alpha, eps, v_solution, beta);
}

} // namespace specinit::design
