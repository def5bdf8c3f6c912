#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "specinit/numerics.hpp"

namespace specinit::channels {

using numerics::Atom;
using numerics::Quadrature;
using numerics::Rng;
using numerics::SupportDescriptor;
using numerics::SupportKind;

enum class Mode { Complex, Real };

enum class ChannelKind { Poisson, GaussianNoise, Noiseless, Custom };

// The channel-derived measure pair:
//   eta(y) = E_S[ p(y | |S|) ],   mu(y) = E_S[ |S|^2 p(y | |S|) ],
// with S standard complex (or real) Gaussian. eta/mu cover the continuum
// (density or pmf); point masses live in `atoms` as plain weights.
struct ChannelFunctions {
    std::function<double(double)> eta;
    std::function<double(double)> mu;
    SupportDescriptor support;
    double series_ratio_hint = 0.5;  // geometric decay of discrete pmfs
    double discrete_upper = numerics::kInf; // finite for tabulated pmfs
    bool ratio_monotone = false;     // mu/eta nondecreasing along the continuum
    double eta_integral = 0.0;       // verified normalization, atoms included
    double mu_integral = 0.0;

    // Atom-aware pointwise access: at an atom location these return the
    // weights, which is the right convention for evaluating functions of the
    // ratio mu/eta (and for 1-homogeneous integrands).
    double eta_at(double y) const;
    double mu_at(double y) const;
    double mu_over_eta(double y) const;
};

class Channel {
  public:
    static Channel poisson(double kappa, Mode mode = Mode::Complex);
    static Channel gaussian_noise(double sigma2, Mode mode = Mode::Complex);
    static Channel noiseless(Mode mode = Mode::Complex);
    // density(y, s_magnitude) -> conditional density value
    static Channel custom(std::function<double(double, double)> density,
                          SupportDescriptor support, Mode mode = Mode::Complex,
                          const Quadrature& q = {});
    static Channel custom_tabulated(std::vector<double> y, std::vector<double> eta,
                                    std::vector<double> mu, SupportDescriptor support,
                                    Mode mode = Mode::Complex, const Quadrature& q = {});
    // Structured text file; see docs/channel file schema in the README.
    static Channel from_file(const std::string& path, const Quadrature& q = {});

    ChannelKind kind() const { return kind_; }
    Mode mode() const { return mode_; }
    double kappa() const { return kappa_; }
    double sigma2() const { return sigma2_; }
    const ChannelFunctions& functions() const { return *functions_; }
    std::shared_ptr<const ChannelFunctions> functions_ptr() const { return functions_; }
    const SupportDescriptor& support() const { return functions_->support; }
    std::string describe() const;

    // One measurement draw y ~ p(y | s_magnitude).
    double sample_measurement(double s_magnitude, Rng& rng) const;

  private:
    Channel() = default;
    ChannelKind kind_ = ChannelKind::Noiseless;
    Mode mode_ = Mode::Complex;
    double kappa_ = 0.0, sigma2_ = 0.0;
    std::shared_ptr<const ChannelFunctions> functions_;
};

const ChannelFunctions& channel_functions(const Channel& ch);

// Integral (or series) of g(y, eta(y), mu(y)) over the whole support. Atoms
// contribute g(location, eta_weight, mu_weight); this is exact for integrands
// that are jointly 1-homogeneous in (eta, mu), which covers every functional
// in this library.
double channel_integral(const ChannelFunctions& chf,
                        const std::function<double(double, double, double)>& g,
                        const Quadrature& q = {});

struct InfimumResult {
    double value = 0.0;        // overall infimum of mu/eta over the support
    double continuum = 0.0;    // continuum branch
    std::optional<double> atom_branch; // min over atoms, when any
    bool numerical = false;    // true when obtained by grid scan
};

InfimumResult mu_over_eta_infimum(const Channel& ch);

// Weak reconstruction threshold: [ integral of (mu-eta)^2/eta ]^{-1},
// computed through the expansion integral(mu^2/eta) - 1. Returns +inf for a
// degenerate channel (eta == mu); throws on a negative certificate.
double alpha_weak(const Channel& ch, const Quadrature& q = {});

// The certificate integral of mu^2/eta itself (<= 2 in complex mode,
// <= 3 in real mode).
double mu_sq_over_eta_integral(const Channel& ch, const Quadrature& q = {});

} // namespace specinit::channels
