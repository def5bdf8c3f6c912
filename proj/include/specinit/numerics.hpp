#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "specinit/errors.hpp"

namespace specinit::numerics {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class SupportKind {
    ContinuousHalfLine,        // densities on [0, inf)
    DiscreteNonnegativeIntegers, // pmf on {0, 1, 2, ...}
    Mixed,                     // continuum on (0, inf) plus point masses
};

// A point mass of the measure pair (eta, mu).
struct Atom {
    double location = 0.0;
    double eta_weight = 0.0;
    double mu_weight = 0.0;
};

// Describes where a channel's measure pair lives. Atom weights carry the
// eta/mu masses directly; the continuum part is a density (or pmf) elsewhere.
struct SupportDescriptor {
    SupportKind kind = SupportKind::ContinuousHalfLine;
    std::vector<Atom> atoms;     // only for Mixed
    double continuum_lower = 0.0;
    double continuum_upper = kInf; // finite for tabulated channels

    void validate() const;
};

struct Quadrature {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    double tail_mass_bound = 1e-12;
    int max_panels = 4000;
    long max_terms = 200000;

    void validate() const;
};

// Integral of f over the continuum part of the support. Atoms are the
// caller's job. Semi-infinite supports are truncated at a Y_max grown until
// the measured tail falls below tail_mass_bound.
double integrate(const std::function<double(double)>& f, const SupportDescriptor& support,
                 const Quadrature& q = {});

// Adaptive Gauss-Kronrod on a fixed finite interval [a, b].
double integrate_interval(const std::function<double(double)>& f, double a, double b,
                          const Quadrature& q = {});

// Sum_{y=0,1,2,...} f(y) for series eventually dominated by C*r^y,
// r = geometric_ratio_hint in (0,1). Truncates when the geometric tail bound
// |f(y)| * r / (1 - r) stays below abs_tol.
double sum_series(const std::function<double(double)>& f, double geometric_ratio_hint,
                  const Quadrature& q = {});

// Root of a strictly increasing g on [lo, hi] with g(lo) <= 0 <= g(hi).
// Bisection with secant acceleration; stops when |g(x)| <= tol or the
// bracket width drops below tol * max(1, |x|).
double find_root_increasing(const std::function<double(double)>& g, double lo, double hi,
                            double tol);

// Standard normal CDF/pdf via erfc.
double normal_cdf(double x);
double normal_pdf(double x);

// h(x) = x + pdf(x)/cdf(x); positive and strictly increasing. Evaluated via
// the asymptotic expansion of pdf/cdf below x = -8 to dodge cancellation.
double inverse_mills_h(double x);

// Monotone (Fritsch-Carlson) cubic interpolant on a strictly increasing grid.
class PchipInterpolant {
  public:
    PchipInterpolant() = default;
    PchipInterpolant(std::vector<double> x, std::vector<double> y);

    // Nearest-knot extension outside the grid.
    double operator()(double x) const;

    double x_min() const { return x_.empty() ? 0.0 : x_.front(); }
    double x_max() const { return x_.empty() ? 0.0 : x_.back(); }
    bool empty() const { return x_.empty(); }

  private:
    std::vector<double> x_, y_, slope_;
};

// Counter-seeded xoshiro256++ stream. Identical (seed, stream) gives an
// identical sample sequence; distinct streams are independent for practical
// purposes, so each Monte Carlo trial can own one.
class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();
    double uniform();          // [0, 1)
    double gaussian();         // N(0, 1), Marsaglia polar
    std::complex<double> complex_gaussian(); // CN(0, 1): E|S|^2 = 1
    std::uint64_t poisson(double rate);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

  private:
    std::array<std::uint64_t, 4> s_{};
    std::uint64_t seed_ = 0, stream_ = 0;
    double cached_gaussian_ = 0.0;
    bool has_cached_gaussian_ = false;

    std::uint64_t poisson_inversion(double rate);
    std::uint64_t poisson_ptrs(double rate);
};

} // namespace specinit::numerics
