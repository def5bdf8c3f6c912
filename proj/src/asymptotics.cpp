#include "specinit/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace specinit::asymptotics {

using channels::channel_integral;

namespace {

double require_above_tau(const Channel& ch, const Preprocessor& T, double lambda) {
    const double tau = T.bounds(ch).tau;
    if (!(lambda > tau))
        throw DomainError("psi/phi need lambda > tau = " + std::to_string(tau));
    return tau;
}

} // namespace

double psi(const Channel& ch, const Preprocessor& T, double lambda, const Quadrature& q) {
    require_above_tau(ch, T, lambda);
    return lambda * channel_integral(
                        ch.functions(),
                        [&](double y, double e, double m) {
                            const double w = T.evaluate_with(y, e, m);
                            return w / (lambda - w) * m;
                        },
                        q);
}

double phi(const Channel& ch, const Preprocessor& T, double alpha, double lambda,
           const Quadrature& q) {
    require_above_tau(ch, T, lambda);
    return lambda / alpha + lambda * channel_integral(
                                         ch.functions(),
                                         [&](double y, double e, double m) {
                                             const double w = T.evaluate_with(y, e, m);
                                             return w / (lambda - w) * e;
                                         },
                                         q);
}

double psi_prime(const Channel& ch, const Preprocessor& T, double lambda, const Quadrature& q) {
    require_above_tau(ch, T, lambda);
    return -channel_integral(
        ch.functions(),
        [&](double y, double e, double m) {
            const double w = T.evaluate_with(y, e, m);
            const double r = w / (lambda - w);
            return r * r * m;
        },
        q);
}

double phi_prime(const Channel& ch, const Preprocessor& T, double alpha, double lambda,
                 const Quadrature& q) {
    require_above_tau(ch, T, lambda);
    return 1.0 / alpha - channel_integral(
                             ch.functions(),
                             [&](double y, double e, double m) {
                                 const double w = T.evaluate_with(y, e, m);
                                 const double r = w / (lambda - w);
                                 return r * r * e;
                             },
                             q);
}

namespace {

// Plain bisection on a sign-changing bracket, relative tolerance in lambda.
double bisect_sign(const std::function<double(double)>& g, double lo, double hi, double glo,
                   double rel_tol) {
    while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double gm = g(mid);
        if (gm == 0.0) return mid;
        if ((gm < 0.0) == (glo < 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

Prediction solve_lambda_star(const Channel& ch, const Preprocessor& T, double alpha,
                             const Quadrature& q) {
    if (!T.is_feasible(ch))
        throw InfeasiblePreprocessor("prediction requested for infeasible preprocessor " +
                                     T.name());
    Prediction pred;
    pred.alpha = alpha;

    const double tau = T.bounds(ch).tau;
    // phi - psi as a single integral pass
    auto g = [&](double lambda) {
        return lambda / alpha + lambda * channel_integral(
                                             ch.functions(),
                                             [&](double y, double e, double m) {
                                                 const double w = T.evaluate_with(y, e, m);
                                                 return w / (lambda - w) * (e - m);
                                             },
                                             q);
    };

    // geometric scan toward the largest sign change
    const double lo0 = tau * (1.0 + 1e-6);
    const double hi0 = tau * 1e8;
    const int per_decade = 400;
    const int n_pts = static_cast<int>(std::ceil(per_decade * std::log10(hi0 / lo0))) + 1;
    const double step = std::pow(hi0 / lo0, 1.0 / (n_pts - 1));
    std::vector<double> lambdas(n_pts), values(n_pts);
    for (int i = 0; i < n_pts; ++i) {
        lambdas[i] = lo0 * std::pow(step, i);
        values[i] = g(lambdas[i]);
    }

    double best_lambda = 0.0, best_phi_p = 0.0, best_psi_p = 0.0;
    int qualifying = 0;
    for (int i = n_pts - 2; i >= 0; --i) {
        if (!(values[i] == 0.0 || values[i] * values[i + 1] < 0.0)) continue;
        // refine x10 inside the scan cell, then bisect the sub-bracket
        double a = lambdas[i], b = lambdas[i + 1], ga = values[i];
        const double sub = std::pow(b / a, 0.1);
        double prev = a, gprev = ga;
        for (int k = 1; k <= 10; ++k) {
            const double x = k == 10 ? b : a * std::pow(sub, k);
            const double gx = k == 10 ? values[i + 1] : g(x);
            if (gprev == 0.0 || gprev * gx < 0.0) {
                a = prev;
                ga = gprev;
                b = x;
            }
            prev = x;
            gprev = gx;
        }
        const double root = bisect_sign(g, a, b, ga, 1e-10);
        const double pp = phi_prime(ch, T, alpha, root, q);
        if (pp > 0.0) {
            ++qualifying;
            if (root > best_lambda) {
                best_lambda = root;
                best_phi_p = pp;
                best_psi_p = psi_prime(ch, T, root, q);
            }
        }
    }

    pred.diag.qualifying_roots = qualifying;
    if (qualifying == 0) {
        pred.phase = Phase::Uncorrelated;
        pred.rho = 0.0;
        return pred;
    }
    pred.phase = Phase::Correlated;
    pred.lambda_star = best_lambda;
    pred.diag.phi_prime = best_phi_p;
    pred.diag.psi_prime = best_psi_p;
    pred.diag.residual = std::abs(phi(ch, T, alpha, best_lambda, q) - psi(ch, T, best_lambda, q));
    pred.rho = best_phi_p / (best_phi_p - best_psi_p);
    return pred;
}

} // namespace specinit::asymptotics
