#pragma once

#include <optional>

#include "specinit/channels.hpp"
#include "specinit/preprocess.hpp"

namespace specinit::asymptotics {

using channels::Channel;
using numerics::Quadrature;
using preprocess::Preprocessor;

enum class Phase { Correlated, Uncorrelated };

struct Diagnostics {
    double phi_prime = 0.0;
    double psi_prime = 0.0;
    double residual = 0.0;      // |phi - psi| at lambda*
    int qualifying_roots = 0;   // >1 means several fixed points passed the slope test
};

// Asymptotic outcome for (channel, T, alpha).
struct Prediction {
    double alpha = 0.0;
    std::optional<double> lambda_star;
    double rho = 0.0;
    Phase phase = Phase::Uncorrelated;
    Diagnostics diag;
};

// psi(lambda) = lambda * integral of T/(lambda-T) mu,
// phi(lambda) = lambda/alpha + lambda * integral of T/(lambda-T) eta,
// both on (tau, inf); psi strictly decreasing, both convex.
double psi(const Channel& ch, const Preprocessor& T, double lambda, const Quadrature& q = {});
double phi(const Channel& ch, const Preprocessor& T, double alpha, double lambda,
           const Quadrature& q = {});

// Analytic derivatives:
// psi'(lambda) = -integral of [T/(lambda-T)]^2 mu  (<= 0),
// phi'(lambda) = 1/alpha - integral of [T/(lambda-T)]^2 eta.
double psi_prime(const Channel& ch, const Preprocessor& T, double lambda,
                 const Quadrature& q = {});
double phi_prime(const Channel& ch, const Preprocessor& T, double alpha, double lambda,
                 const Quadrature& q = {});

// Locates the largest lambda* > tau with phi(lambda*) = psi(lambda*) and
// phi'(lambda*) > 0, then evaluates rho = phi'/(phi' - psi'). No qualifying
// root means the uncorrelated phase, rho = 0.
Prediction solve_lambda_star(const Channel& ch, const Preprocessor& T, double alpha,
                             const Quadrature& q = {});

} // namespace specinit::asymptotics
