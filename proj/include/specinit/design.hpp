#pragma once

#include <functional>
#include <optional>
#include <string>

#include "specinit/channels.hpp"
#include "specinit/preprocess.hpp"

namespace specinit::design {

using channels::Channel;
using channels::ChannelFunctions;
using numerics::Quadrature;
using preprocess::Preprocessor;

enum class Regime { BelowThreshold, AboveThreshold };

struct DesignResult {
    double alpha = 0.0;
    double alpha_weak = 0.0;
    double beta_alpha = 0.0; // +inf below threshold
    double rho_opt = 0.0;
    Regime regime = Regime::BelowThreshold;
};

// c(y) = T(y)/(1 - T(y)), the variable in which the design problem is a
// minimum-norm problem. Evaluated against (eta, mu) values so atoms work the
// same way they do in channel_integral.
class CFunction {
  public:
    CFunction() = default;
    CFunction(std::function<double(double, double, double)> eval,
              std::shared_ptr<const ChannelFunctions> chf)
        : eval_(std::move(eval)), chf_(std::move(chf)) {}

    double eval(double y, double eta, double mu) const { return eval_(y, eta, mu); }
    double operator()(double y) const { return eval_(y, chf_->eta_at(y), chf_->mu_at(y)); }

    static CFunction zero(const Channel& ch);
    // zero outside the grid; linear inside
    static CFunction tabulated(const Channel& ch, std::vector<double> y, std::vector<double> c);

  private:
    std::function<double(double, double, double)> eval_;
    std::shared_ptr<const ChannelFunctions> chf_;
};

// f(beta): integral of (mu-eta)^2 / (eta + mu/beta); strictly increasing from
// 0 to 1/alpha_weak. For the complex Poisson channel the value is
// cross-checked against the closed form every call.
double f_beta(const Channel& ch, double beta, const Quadrature& q = {});

// The closed form itself (complex Poisson only); exposed for tests.
double f_beta_poisson_closed(double kappa, double beta);

// Unique positive root of f(beta) = 1/alpha; +inf at or below threshold.
double beta_alpha(const Channel& ch, double alpha, const Quadrature& q = {});

// 1/(1 + beta_alpha) above threshold, 0 otherwise.
double rho_optimal(const Channel& ch, double alpha, const Quadrature& q = {});

DesignResult design_at(const Channel& ch, double alpha, const Quadrature& q = {});

struct OptimalDesign {
    bool feasible = false;
    std::optional<Preprocessor> preprocessor; // set when feasible
    double inf_mu_over_eta = 0.0;
    double tau = 0.0, t_min = 0.0; // feasibility certificate when feasible
    std::string note;
};

// T_opt = 1 - eta/mu when inf mu/eta > 0; otherwise an infeasibility report
// pointing at epsilon_preprocessor.
OptimalDesign optimal_preprocessor(const Channel& ch);

// L(c) = integral of c (mu - eta);  Q(c) = integral of c^2 (mu/beta + eta).
double L(const CFunction& c, const Channel& ch, const Quadrature& q = {});
double Q(const CFunction& c, const Channel& ch, double beta, const Quadrature& q = {});

// Minimum-norm solution of { min Q(c) : L(c) = 1/alpha } at a given beta:
// c(y) = (mu-eta) / (alpha f(beta) (eta + mu/beta)); attains Q = 1/(alpha^2 f(beta)).
CFunction c_min_norm(const Channel& ch, double alpha, double beta, const Quadrature& q = {});

// The same at beta = beta_alpha, where alpha f(beta_alpha) = 1:
// c*(y) = (mu-eta)/(eta + mu/beta_alpha), bounded in [-1, beta_alpha].
CFunction c_star(const Channel& ch, double alpha, const Quadrature& q = {});

// The feasible clipped family: c_v = max{ v c*, -1+eps } with v >= 1 solved
// from L(c_v) = 1/alpha; returns T = c/(1+c).
Preprocessor epsilon_preprocessor(const Channel& ch, double alpha, double eps,
                                  const Quadrature& q = {});

} // namespace specinit::design
