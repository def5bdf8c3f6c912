#include "specinit/channels.hpp"

#include <algorithm>
#include <cmath>

namespace specinit::channels {

using numerics::inverse_mills_h;
using numerics::kInf;
using numerics::normal_cdf;
using numerics::normal_pdf;

double ChannelFunctions::eta_at(double y) const {
    for (const auto& a : support.atoms)
        if (y == a.location) return a.eta_weight;
    return eta(y);
}

double ChannelFunctions::mu_at(double y) const {
    for (const auto& a : support.atoms)
        if (y == a.location) return a.mu_weight;
    return mu(y);
}

double ChannelFunctions::mu_over_eta(double y) const {
    const double e = eta_at(y);
    const double m = mu_at(y);
    if (e == 0.0) return m == 0.0 ? 0.0 : kInf;
    return m / e;
}

double channel_integral(const ChannelFunctions& chf,
                        const std::function<double(double, double, double)>& g,
                        const Quadrature& q) {
    double total = 0.0;
    for (const auto& a : chf.support.atoms) total += g(a.location, a.eta_weight, a.mu_weight);

    if (chf.support.kind == SupportKind::DiscreteNonnegativeIntegers) {
        auto term = [&](double y) { return g(y, chf.eta(y), chf.mu(y)); };
        if (std::isfinite(chf.discrete_upper)) {
            const long upper = static_cast<long>(chf.discrete_upper);
            for (long y = 0; y <= upper; ++y) total += term(static_cast<double>(y));
        } else {
            total += numerics::sum_series(term, chf.series_ratio_hint, q);
        }
        return total;
    }
    auto integrand = [&](double y) { return g(y, chf.eta(y), chf.mu(y)); };
    total += numerics::integrate(integrand, chf.support, q);
    return total;
}

namespace {

// Shared tail of every factory: verify the unit normalization of eta and mu
// (atoms included) and freeze the functions.
std::shared_ptr<const ChannelFunctions> finalize(ChannelFunctions chf, const Quadrature& q) {
    chf.support.validate();
    chf.eta_integral =
        channel_integral(chf, [](double, double e, double) { return e; }, q);
    chf.mu_integral = channel_integral(chf, [](double, double, double m) { return m; }, q);
    if (std::abs(chf.eta_integral - 1.0) > 1e-6 || std::abs(chf.mu_integral - 1.0) > 1e-6)
        throw NormalizationFailure("eta/mu do not integrate to 1: got " +
                                   std::to_string(chf.eta_integral) + ", " +
                                   std::to_string(chf.mu_integral));
    return std::make_shared<const ChannelFunctions>(std::move(chf));
}

ChannelFunctions make_poisson_complex(double kappa) {
    ChannelFunctions chf;
    chf.support.kind = SupportKind::DiscreteNonnegativeIntegers;
    const double log_k = std::log(kappa);
    const double log_k1 = std::log(kappa + 1.0);
    chf.eta = [log_k, log_k1](double y) { return std::exp(y * log_k - (y + 1.0) * log_k1); };
    chf.mu = [log_k, log_k1, kappa](double y) {
        return std::exp(y * log_k - (y + 1.0) * log_k1) * (y + 1.0) / (kappa + 1.0);
    };
    chf.series_ratio_hint = kappa / (kappa + 1.0);
    chf.ratio_monotone = true; // mu/eta = (y+1)/(kappa+1)
    return chf;
}

ChannelFunctions make_poisson_real(double kappa) {
    // S ~ N(0,1): Z = S^2 is chi^2_1, giving
    //   eta(y) = kappa^y Gamma(y+1/2) / (y! sqrt(2 pi) (kappa+1/2)^{y+1/2})
    //   mu(y)  = eta(y) (y+1/2)/(kappa+1/2)
    ChannelFunctions chf;
    chf.support.kind = SupportKind::DiscreteNonnegativeIntegers;
    const double log_k = std::log(kappa);
    const double log_kh = std::log(kappa + 0.5);
    const double half_log_2pi = 0.5 * std::log(2.0 * M_PI);
    chf.eta = [=](double y) {
        return std::exp(y * log_k + std::lgamma(y + 0.5) - std::lgamma(y + 1.0) -
                        half_log_2pi - (y + 0.5) * log_kh);
    };
    chf.mu = [chf_eta = chf.eta, kappa](double y) {
        return chf_eta(y) * (y + 0.5) / (kappa + 0.5);
    };
    chf.series_ratio_hint = kappa / (kappa + 0.5);
    chf.ratio_monotone = true;
    return chf;
}

ChannelFunctions make_noiseless_complex() {
    ChannelFunctions chf;
    chf.support.kind = SupportKind::ContinuousHalfLine;
    chf.eta = [](double y) { return std::exp(-y); };
    chf.mu = [](double y) { return y * std::exp(-y); };
    chf.ratio_monotone = true; // mu/eta = y
    return chf;
}

ChannelFunctions make_noiseless_real() {
    // y = Z with Z ~ chi^2_1
    ChannelFunctions chf;
    chf.support.kind = SupportKind::ContinuousHalfLine;
    chf.eta = [](double y) { return std::exp(-0.5 * y) / std::sqrt(2.0 * M_PI * y); };
    chf.mu = [chf_eta = chf.eta](double y) { return y * chf_eta(y); };
    chf.ratio_monotone = true;
    return chf;
}

ChannelFunctions make_gaussian_complex(double sigma2) {
    const double sigma = std::sqrt(sigma2);
    ChannelFunctions chf;
    chf.support.kind = SupportKind::Mixed;
    chf.eta = [sigma, sigma2](double y) {
        return std::exp(0.5 * sigma2 - y) * normal_cdf(y / sigma - sigma);
    };
    chf.mu = [sigma, sigma2, eta = chf.eta](double y) {
        return (y - sigma2) * eta(y) + sigma * normal_pdf(y / sigma);
    };
    const double eta0 = 0.5 - std::exp(0.5 * sigma2) * normal_cdf(-sigma);
    const double mu0 = 0.5 + (sigma2 - 1.0) * std::exp(0.5 * sigma2) * normal_cdf(-sigma) -
                       sigma / std::sqrt(2.0 * M_PI);
    chf.support.atoms.push_back({0.0, eta0, mu0});
    chf.ratio_monotone = true; // mu/eta = sigma * h(y/sigma - sigma) on the continuum
    return chf;
}

ChannelFunctions make_gaussian_real(double sigma2, const Quadrature& q) {
    // No closed forms; both functions are expectations over |S| with the
    // half-normal density 2*phi(t), evaluated by quadrature per call. The
    // integrand is a needle of t-width ~ sigma/(2 sqrt(y)) at t = sqrt(y), so
    // the integration range is segmented around the peak first.
    const double sigma = std::sqrt(sigma2);
    Quadrature inner = q;
    auto expect = [=](double y, bool tilt) {
        auto f = [=](double t) {
            const double w = normal_pdf((y - t * t) / sigma) / sigma * 2.0 * normal_pdf(t);
            return tilt ? t * t * w : w;
        };
        const double hi = 42.0; // phi(t) below double underflow past here
        const double a = std::sqrt(std::max(y - 8.0 * sigma, 0.0));
        const double b = std::min(std::sqrt(y + 8.0 * sigma) + 1.0, hi);
        double total = numerics::integrate_interval(f, a, b, inner);
        if (a > 0.0) total += numerics::integrate_interval(f, 0.0, a, inner);
        if (b < hi) total += numerics::integrate_interval(f, b, hi, inner);
        return total;
    };
    ChannelFunctions chf;
    chf.support.kind = SupportKind::Mixed;
    chf.eta = [=](double y) { return expect(y, false); };
    chf.mu = [=](double y) { return expect(y, true); };
    auto atom_of = [&](bool tilt) {
        SupportDescriptor half_line;
        auto f = [=](double t) {
            const double w = normal_cdf(-t * t / sigma) * 2.0 * normal_pdf(t);
            return tilt ? t * t * w : w;
        };
        return numerics::integrate(f, half_line, inner);
    };
    chf.support.atoms.push_back({0.0, atom_of(false), atom_of(true)});
    return chf;
}

} // namespace

Channel Channel::poisson(double kappa, Mode mode) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw Error("poisson kappa must be positive");
    Channel ch;
    ch.kind_ = ChannelKind::Poisson;
    ch.mode_ = mode;
    ch.kappa_ = kappa;
    ch.functions_ = finalize(
        mode == Mode::Complex ? make_poisson_complex(kappa) : make_poisson_real(kappa), {});
    return ch;
}

Channel Channel::gaussian_noise(double sigma2, Mode mode) {
    if (!(sigma2 >= 0.0) || !std::isfinite(sigma2))
        throw Error("gaussian-noise sigma^2 must be finite and >= 0");
    if (sigma2 == 0.0) return noiseless(mode); // single code path for the limit
    Channel ch;
    ch.kind_ = ChannelKind::GaussianNoise;
    ch.mode_ = mode;
    ch.sigma2_ = sigma2;
    ch.functions_ = finalize(
        mode == Mode::Complex ? make_gaussian_complex(sigma2) : make_gaussian_real(sigma2, {}),
        {});
    return ch;
}

Channel Channel::noiseless(Mode mode) {
    Channel ch;
    ch.kind_ = ChannelKind::Noiseless;
    ch.mode_ = mode;
    ch.functions_ =
        finalize(mode == Mode::Complex ? make_noiseless_complex() : make_noiseless_real(), {});
    return ch;
}

double Channel::sample_measurement(double s_magnitude, Rng& rng) const {
    if (!std::isfinite(s_magnitude) || s_magnitude < 0.0)
        throw Error("s_magnitude must be finite and >= 0");
    const double z = s_magnitude * s_magnitude;
    switch (kind_) {
        case ChannelKind::Poisson:
            return static_cast<double>(rng.poisson(kappa_ * z));
        case ChannelKind::GaussianNoise:
            return std::max(z + std::sqrt(sigma2_) * rng.gaussian(), 0.0);
        case ChannelKind::Noiseless:
            return z;
        case ChannelKind::Custom:
            throw Error("custom channels provide densities only; sampling is not supported");
    }
    throw Error("unreachable");
}

std::string Channel::describe() const {
    std::string s;
    switch (kind_) {
        case ChannelKind::Poisson: s = "poisson(kappa=" + std::to_string(kappa_) + ")"; break;
        case ChannelKind::GaussianNoise:
            s = "gaussian-noise(sigma2=" + std::to_string(sigma2_) + ")";
            break;
        case ChannelKind::Noiseless: s = "noiseless"; break;
        case ChannelKind::Custom: s = "custom"; break;
    }
    return s + (mode_ == Mode::Complex ? " [complex]" : " [real]");
}

const ChannelFunctions& channel_functions(const Channel& ch) { return ch.functions(); }

InfimumResult mu_over_eta_infimum(const Channel& ch) {
    const auto& chf = ch.functions();
    InfimumResult r;
    switch (ch.kind()) {
        case ChannelKind::Poisson:
            r.continuum = ch.mode() == Mode::Complex ? 1.0 / (ch.kappa() + 1.0)
                                                     : 0.5 / (ch.kappa() + 0.5);
            r.value = r.continuum;
            return r;
        case ChannelKind::Noiseless:
            r.continuum = 0.0; // mu/eta = y -> 0 at the origin
            r.value = 0.0;
            return r;
        case ChannelKind::GaussianNoise:
            if (ch.mode() == Mode::Complex) {
                const double sigma = std::sqrt(ch.sigma2());
                r.continuum = sigma * inverse_mills_h(-sigma); // limit y -> 0+
                const auto& a = chf.support.atoms.front();
                r.atom_branch = a.mu_weight / a.eta_weight;
                r.value = std::min(r.continuum, *r.atom_branch);
                return r;
            }
            break; // real mode: fall through to the scan
        case ChannelKind::Custom:
            break;
    }
    // Numerical infimum: grid scan (10^4 points) plus declared atoms. The
    // grid is uniform with a geometric cluster toward the lower endpoint to
    // catch boundary limits.
    double best = kInf;
    if (chf.support.kind == SupportKind::DiscreteNonnegativeIntegers) {
        const double upper = std::isfinite(chf.discrete_upper) ? chf.discrete_upper : 2000.0;
        for (double y = 0.0; y <= upper; y += 1.0) {
            const double e = chf.eta(y), m = chf.mu(y);
            if (e > 0.0) best = std::min(best, m / e);
        }
    } else {
        const double lo = chf.support.continuum_lower;
        double hi = chf.support.continuum_upper;
        if (!std::isfinite(hi)) hi = 200.0;
        const int kUniform = 9000, kCluster = 1000;
        for (int i = 0; i < kUniform; ++i) {
            const double y = lo + (hi - lo) * (i + 0.5) / kUniform;
            const double e = chf.eta(y), m = chf.mu(y);
            if (e > 0.0) best = std::min(best, m / e);
        }
        for (int i = 0; i < kCluster; ++i) {
            const double y = lo + (hi - lo) * std::pow(10.0, -10.0 * (i + 1.0) / kCluster);
            const double e = chf.eta(y), m = chf.mu(y);
            if (e > 0.0) best = std::min(best, m / e);
        }
    }
    r.continuum = best;
    r.value = best;
    for (const auto& a : chf.support.atoms) {
        if (a.eta_weight > 0.0) {
            const double ratio = a.mu_weight / a.eta_weight;
            r.atom_branch = r.atom_branch ? std::min(*r.atom_branch, ratio) : ratio;
        }
    }
    if (r.atom_branch) r.value = std::min(r.value, *r.atom_branch);
    r.numerical = true;
    return r;
}

double mu_sq_over_eta_integral(const Channel& ch, const Quadrature& q) {
    return channel_integral(
        ch.functions(),
        [](double, double e, double m) {
            if (e <= 0.0) return 0.0; // only legal when m == 0 as well
            return m * m / e;
        },
        q);
}

double alpha_weak(const Channel& ch, const Quadrature& q) {
    const double certificate = mu_sq_over_eta_integral(ch, q) - 1.0;
    if (certificate < -1e-6)
        throw Error("alpha_weak certificate integral fell below 1; numerical failure");
    // the cutoff absorbs quadrature/interpolation noise on degenerate tables
    if (certificate <= 1e-8) return kInf; // eta == mu, threshold infinite
    return 1.0 / certificate;
}

} // namespace specinit::channels
