#include "specinit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace specinit::numerics {

void SupportDescriptor::validate() const {
    for (const auto& a : atoms) {
        if (!(a.location >= 0.0) || !std::isfinite(a.location))
            throw Error("atom location must be finite and nonnegative");
        if (!(a.eta_weight >= 0.0 && a.eta_weight <= 1.0) ||
            !(a.mu_weight >= 0.0 && a.mu_weight <= 1.0))
            throw Error("atom weights must lie in [0, 1]");
        for (const auto& b : atoms)
            if (&a != &b && a.location == b.location)
                throw Error("atom locations must be distinct");
    }
    if (!(continuum_lower >= 0.0) || !(continuum_upper > continuum_lower))
        throw Error("bad continuum bounds");
}

void Quadrature::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(tail_mass_bound > 0.0))
        throw Error("quadrature tolerances must be strictly positive");
}

namespace {

// 15-point Kronrod / 7-point Gauss pair (QUADPACK dqk15 constants).
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, integral, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double resk = 0.0, resg = 0.0;
    for (int j = 0; j < 8; ++j) {
        double v;
        if (j == 7) {
            v = f(c);
            if (!std::isfinite(v)) throw NonFinite("integrand not finite at x=" + std::to_string(c));
            resk += kWgk[j] * v;
            resg += kWg[3] * v;
        } else {
            const double x1 = c - h * kXgk[j];
            const double x2 = c + h * kXgk[j];
            const double v1 = f(x1);
            const double v2 = f(x2);
            if (!std::isfinite(v1)) throw NonFinite("integrand not finite at x=" + std::to_string(x1));
            if (!std::isfinite(v2)) throw NonFinite("integrand not finite at x=" + std::to_string(x2));
            v = v1 + v2;
            resk += kWgk[j] * v;
            if (j % 2 == 1) resg += kWg[j / 2] * v;
        }
    }
    resk *= h;
    resg *= h;
    return Panel{a, b, resk, std::abs(resk - resg)};
}

} // namespace

double integrate_interval(const std::function<double(double)>& f, double a, double b,
                          const Quadrature& q) {
    q.validate();
    if (!(b > a)) return 0.0;
    std::priority_queue<Panel> panels;
    Panel p0 = gk15(f, a, b);
    double total = p0.integral, err = p0.error;
    panels.push(p0);
    int used = 1;
    while (err > std::max(q.abs_tol, q.rel_tol * std::abs(total))) {
        if (used >= q.max_panels)
            throw NonConvergent("adaptive quadrature exceeded the panel budget");
        Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // interval at rounding resolution; accept its estimate as-is
            err -= worst.error;
            continue;
        }
        Panel left = gk15(f, worst.a, mid);
        Panel right = gk15(f, mid, worst.b);
        total += left.integral + right.integral - worst.integral;
        err += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
        ++used;
    }
    return total;
}

double integrate(const std::function<double(double)>& f, const SupportDescriptor& support,
                 const Quadrature& q) {
    q.validate();
    support.validate();
    const double lo = support.continuum_lower;
    if (std::isfinite(support.continuum_upper))
        return integrate_interval(f, lo, support.continuum_upper, q);

    double y_max = std::max(50.0, lo + 50.0);
    Quadrature tail_q = q;
    tail_q.abs_tol = q.tail_mass_bound * 1e-2;
    for (;;) {
        const double tail = integrate_interval(f, y_max, 2.0 * y_max, tail_q);
        if (std::abs(tail) < q.tail_mass_bound)
            return integrate_interval(f, lo, y_max, q) + tail;
        y_max *= 2.0;
        if (y_max > 1e7)
            throw NonConvergent("integrand tail did not fall below the tail-mass bound");
    }
}

double sum_series(const std::function<double(double)>& f, double geometric_ratio_hint,
                  const Quadrature& q) {
    q.validate();
    const double r = geometric_ratio_hint;
    if (!(r > 0.0 && r < 1.0)) throw Error("geometric ratio hint must lie in (0, 1)");
    const double tail_factor = r / (1.0 - r);
    double sum = 0.0;
    int consecutive_small = 0;
    for (long y = 0; y < q.max_terms; ++y) {
        const double t = f(static_cast<double>(y));
        if (!std::isfinite(t)) throw NonFinite("series term not finite at y=" + std::to_string(y));
        sum += t;
        // demand several consecutive small terms so polynomial prefactors
        // (e.g. (y-kappa)^2 vanishing at y=kappa) cannot truncate early
        if (y >= 8 && std::abs(t) * tail_factor < q.abs_tol) {
            if (++consecutive_small >= 4) return sum;
        } else {
            consecutive_small = 0;
        }
    }
    throw NonConvergent("series did not decay within the term budget");
}

double find_root_increasing(const std::function<double(double)>& g, double lo, double hi,
                            double tol) {
    if (!(hi >= lo)) throw Error("find_root_increasing: empty bracket");
    if (!(tol > 0.0)) throw Error("find_root_increasing: tol must be positive");
    double glo = g(lo), ghi = g(hi);
    if (!std::isfinite(glo) || !std::isfinite(ghi))
        throw NonFinite("find_root_increasing: g not finite at a bracket endpoint");
    if (glo > 0.0 || ghi < 0.0)
        throw NotBracketed("find_root_increasing: need g(lo) <= 0 <= g(hi)");
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;

    double x = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        // secant proposal, clamped strictly inside the bracket
        double cand = lo - glo * (hi - lo) / (ghi - glo);
        const double margin = 0.01 * (hi - lo);
        if (!std::isfinite(cand) || cand <= lo + margin || cand >= hi - margin || (iter % 3 == 2))
            cand = 0.5 * (lo + hi);
        const double gc = g(cand);
        if (!std::isfinite(gc)) throw NonFinite("find_root_increasing: g not finite");
        x = cand;
        if (std::abs(gc) <= tol) return x;
        if (gc < 0.0) {
            lo = cand;
            glo = gc;
        } else {
            hi = cand;
            ghi = gc;
        }
        if (hi - lo <= tol * std::max(1.0, std::abs(x))) return 0.5 * (lo + hi);
    }
    return 0.5 * (lo + hi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double normal_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014326779399461;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double inverse_mills_h(double x) {
    if (x > -8.0) return x + normal_pdf(x) / normal_cdf(x);
    // pdf/cdf = -x / S with S = 1 - u + 3u^2 - 15u^3 + ..., u = 1/x^2, so the
    // leading terms cancel symbolically: h = x + (-x/S)*(-1) ... = x*(S-1)/S
    const double u = 1.0 / (x * x);
    double series = 1.0, tail = 0.0;
    double contrib = -u; // k = 1 term of S - 1
    double k = 1.0;
    while (std::abs(contrib) >= 1e-18 * std::abs(series)) {
        series += contrib;
        tail += contrib;
        k += 1.0;
        const double next = contrib * -(2.0 * k - 1.0) * u;
        if (std::abs(next) >= std::abs(contrib)) break; // asymptotic floor reached
        contrib = next;
    }
    return x * tail / series;
}

PchipInterpolant::PchipInterpolant(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n != y_.size() || n < 2) throw Error("pchip needs >= 2 matched knots");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1])) throw Error("pchip grid must be strictly increasing");
    slope_.assign(n, 0.0);
    std::vector<double> h(n - 1), d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        d[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    if (n == 2) {
        slope_[0] = slope_[1] = d[0];
        return;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (d[i - 1] * d[i] <= 0.0) {
            slope_[i] = 0.0;
        } else {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            slope_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    auto endpoint = [](double h0, double h1, double d0, double d1) {
        double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (m * d0 <= 0.0)
            m = 0.0;
        else if (d0 * d1 < 0.0 && std::abs(m) > 3.0 * std::abs(d0))
            m = 3.0 * d0;
        return m;
    };
    slope_[0] = endpoint(h[0], h[1], d[0], d[1]);
    slope_[n - 1] = endpoint(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
}

double PchipInterpolant::operator()(double x) const {
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return h00 * y_[i] + h10 * h * slope_[i] + h01 * y_[i + 1] + h11 * h * slope_[i + 1];
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

} // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
    std::uint64_t s1 = seed;
    std::uint64_t s2 = stream ^ 0xD1B54A32D192ED03ULL;
    for (auto& w : s_) w = splitmix64(s1) ^ splitmix64(s2);
    if (s_[0] == 0 && s_[1] == 0 && s_[2] == 0 && s_[3] == 0) s_[0] = 1;
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::gaussian() {
    if (has_cached_gaussian_) {
        has_cached_gaussian_ = false;
        return cached_gaussian_;
    }
    for (;;) {
        const double u = 2.0 * uniform() - 1.0;
        const double v = 2.0 * uniform() - 1.0;
        const double s = u * u + v * v;
        if (s >= 1.0 || s == 0.0) continue;
        const double factor = std::sqrt(-2.0 * std::log(s) / s);
        cached_gaussian_ = v * factor;
        has_cached_gaussian_ = true;
        return u * factor;
    }
}

std::complex<double> Rng::complex_gaussian() {
    const double re = gaussian();
    const double im = gaussian();
    return {re * M_SQRT1_2, im * M_SQRT1_2};
}

std::uint64_t Rng::poisson(double rate) {
    if (!(rate >= 0.0) || !std::isfinite(rate)) throw Error("poisson rate must be finite and >= 0");
    if (rate == 0.0) return 0;
    return rate < 30.0 ? poisson_inversion(rate) : poisson_ptrs(rate);
}

std::uint64_t Rng::poisson_inversion(double rate) {
    const double limit = std::exp(-rate);
    double product = 1.0;
    std::uint64_t k = 0;
    do {
        ++k;
        product *= uniform();
    } while (product > limit);
    return k - 1;
}

// Hormann's PTRS transformed-rejection sampler.
std::uint64_t Rng::poisson_ptrs(double rate) {
    const double log_rate = std::log(rate);
    const double b = 0.931 + 2.53 * std::sqrt(rate);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = uniform() - 0.5;
        const double v = uniform();
        const double us = 0.5 - std::abs(u);
        const double k = std::floor((2.0 * a / us + b) * u + rate + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(k);
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            k * log_rate - rate - std::lgamma(k + 1.0))
            return static_cast<std::uint64_t>(k);
    }
}

} // namespace specinit::numerics
