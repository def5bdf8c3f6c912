#include "specinit/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace specinit::preprocess {

using channels::ChannelKind;
using channels::Mode;
using channels::mu_over_eta_infimum;
using numerics::kInf;
using numerics::SupportKind;

namespace {

// sup of mu/eta over the support; inf for builtins, finite scan for custom.
double ratio_sup(const Channel& ch) {
    const auto& chf = ch.functions();
    switch (ch.kind()) {
        case ChannelKind::Poisson:
        case ChannelKind::GaussianNoise:
        case ChannelKind::Noiseless:
            return kInf; // mu/eta grows without bound along y
        case ChannelKind::Custom: break;
    }
    double best = 0.0;
    if (chf.support.kind == SupportKind::DiscreteNonnegativeIntegers) {
        const double upper = std::isfinite(chf.discrete_upper) ? chf.discrete_upper : 2000.0;
        for (double y = 0.0; y <= upper; y += 1.0) {
            const double e = chf.eta(y), m = chf.mu(y);
            if (e > 0.0) best = std::max(best, m / e);
        }
    } else {
        const double lo = chf.support.continuum_lower;
        const double hi = std::isfinite(chf.support.continuum_upper)
                              ? chf.support.continuum_upper
                              : 200.0;
        for (int i = 0; i < 10000; ++i) {
            const double y = lo + (hi - lo) * (i + 0.5) / 10000.0;
            const double e = chf.eta(y), m = chf.mu(y);
            if (e > 0.0) best = std::max(best, m / e);
        }
    }
    for (const auto& a : chf.support.atoms)
        if (a.eta_weight > 0.0) best = std::max(best, a.mu_weight / a.eta_weight);
    return best;
}

double star_from_ratio(double r) {
    if (r <= 0.0) return -kInf;
    return 1.0 - 1.0 / r;
}

// map taking T* values to the mm preprocessor; increasing on the range of T*.
double mm_map(double x, double sqrt_alpha, double sqrt_aw) {
    if (x == -kInf) return -sqrt_aw / (sqrt_alpha - sqrt_aw); // limit value
    return sqrt_aw * x / (sqrt_alpha - (sqrt_alpha - sqrt_aw) * x);
}

} // namespace

Preprocessor Preprocessor::trim(double a) {
    if (!(a > 0.0)) throw Error("trim parameter a must be positive");
    Preprocessor p;
    p.kind_ = PreprocKind::Trim;
    p.a_ = a;
    return p;
}

Preprocessor Preprocessor::subset(double b) {
    if (!(b >= 0.0)) throw Error("subset parameter b must be nonnegative");
    Preprocessor p;
    p.kind_ = PreprocKind::Subset;
    p.b_ = b;
    return p;
}

Preprocessor Preprocessor::optimal_star(const Channel& ch) {
    Preprocessor p;
    p.kind_ = PreprocKind::OptimalStar;
    p.chf_ = ch.functions_ptr();
    p.ratio_inf_ = mu_over_eta_infimum(ch).value;
    p.ratio_sup_ = ratio_sup(ch);
    return p;
}

Preprocessor Preprocessor::mm(const Channel& ch, double alpha) {
    const double aw = channels::alpha_weak(ch);
    if (!(alpha > aw)) throw BelowThreshold("mm preprocessor requires alpha > alpha_weak");
    Preprocessor p = optimal_star(ch);
    p.kind_ = PreprocKind::MM;
    p.alpha_ = alpha;
    p.alpha_weak_ = aw;
    return p;
}

Preprocessor Preprocessor::epsilon_family(const Channel& ch, double alpha, double eps, double v,
                                          double beta_alpha) {
    if (!(eps > 0.0 && eps < 1.0)) throw Error("epsilon must lie in (0, 1)");
    Preprocessor p = optimal_star(ch);
    p.kind_ = PreprocKind::Epsilon;
    p.alpha_ = alpha;
    p.eps_ = eps;
    p.v_ = v;
    p.beta_ = beta_alpha;
    return p;
}

Preprocessor Preprocessor::tabulated(std::vector<double> y, std::vector<double> t) {
    if (y.size() != t.size() || y.size() < 2)
        throw Error("tabulated preprocessor needs matched columns with >= 2 knots");
    for (std::size_t i = 1; i < y.size(); ++i)
        if (!(y[i] > y[i - 1])) throw Error("tabulated preprocessor grid must be increasing");
    Preprocessor p;
    p.kind_ = PreprocKind::Tabulated;
    p.tab_y_ = std::move(y);
    p.tab_t_ = std::move(t);
    return p;
}

Preprocessor Preprocessor::tabulated_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open preprocessor file: " + path);
    std::vector<double> y, t;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        double yv, tv;
        if (ss >> yv >> tv) {
            y.push_back(yv);
            t.push_back(tv);
        }
    }
    return tabulated(std::move(y), std::move(t));
}

Preprocessor Preprocessor::scaled(Preprocessor base, double factor) {
    if (!(factor > 0.0)) throw Error("scale factor must be positive");
    Preprocessor p;
    p.kind_ = PreprocKind::Scaled;
    p.factor_ = factor;
    p.base_ = std::make_shared<const Preprocessor>(std::move(base));
    return p;
}

double Preprocessor::evaluate_with(double y, double eta, double mu) const {
    switch (kind_) {
        case PreprocKind::Trim:
            return std::abs(y) <= a_ ? y : 0.0;
        case PreprocKind::Subset:
            return std::abs(y) >= b_ ? 1.0 : 0.0;
        case PreprocKind::OptimalStar:
            if (mu == 0.0) return -kInf;
            return 1.0 - eta / mu;
        case PreprocKind::MM: {
            const double star = mu == 0.0 ? -kInf : 1.0 - eta / mu;
            return mm_map(star, std::sqrt(alpha_), std::sqrt(alpha_weak_));
        }
        case PreprocKind::Epsilon: {
            const double den = eta + mu / beta_;
            const double cstar = den > 0.0 ? (mu - eta) / den : 0.0;
            const double c = std::max(v_ * cstar, -1.0 + eps_);
            return c / (1.0 + c);
        }
        case PreprocKind::Tabulated: {
            if (y <= tab_y_.front()) return tab_t_.front(); // nearest-knot extension
            if (y >= tab_y_.back()) return tab_t_.back();
            const auto it = std::upper_bound(tab_y_.begin(), tab_y_.end(), y);
            const std::size_t i = static_cast<std::size_t>(it - tab_y_.begin()) - 1;
            const double w = (y - tab_y_[i]) / (tab_y_[i + 1] - tab_y_[i]);
            return (1.0 - w) * tab_t_[i] + w * tab_t_[i + 1];
        }
        case PreprocKind::Scaled:
            return factor_ * base_->evaluate_with(y, eta, mu);
    }
    throw Error("unreachable");
}

double Preprocessor::evaluate(double y) const {
    switch (kind_) {
        case PreprocKind::OptimalStar:
        case PreprocKind::MM:
        case PreprocKind::Epsilon:
            return evaluate_with(y, chf_->eta_at(y), chf_->mu_at(y));
        case PreprocKind::Scaled:
            return factor_ * base_->evaluate(y);
        default:
            return evaluate_with(y, 0.0, 0.0);
    }
}

Bounds Preprocessor::bounds(const Channel& ch) const {
    const auto& chf = ch.functions();
    const bool discrete = chf.support.kind == SupportKind::DiscreteNonnegativeIntegers;
    const double sup_support = discrete
                                   ? chf.discrete_upper
                                   : chf.support.continuum_upper;
    switch (kind_) {
        case PreprocKind::Trim: {
            double tau = std::min(a_, sup_support);
            if (discrete) tau = std::floor(tau);
            return {tau, 0.0};
        }
        case PreprocKind::Subset: {
            // indicator {|y| >= b}: identically 1 when b is at or below the
            // lowest support point
            double inf_support = discrete ? 0.0 : chf.support.continuum_lower;
            for (const auto& at : chf.support.atoms)
                inf_support = std::min(inf_support, at.location);
            return {1.0, b_ <= inf_support ? 1.0 : 0.0};
        }
        case PreprocKind::OptimalStar:
            return {star_from_ratio(ratio_sup_), star_from_ratio(ratio_inf_)};
        case PreprocKind::MM: {
            const double sa = std::sqrt(alpha_), sw = std::sqrt(alpha_weak_);
            return {mm_map(star_from_ratio(ratio_sup_), sa, sw),
                    mm_map(star_from_ratio(ratio_inf_), sa, sw)};
        }
        case PreprocKind::Epsilon: {
            double c_sup =
                v_ * (std::isfinite(ratio_sup_) ? (ratio_sup_ - 1.0) / (1.0 + ratio_sup_ / beta_)
                                                : beta_);
            c_sup = std::max(c_sup, -1.0 + eps_);
            return {c_sup / (1.0 + c_sup), (-1.0 + eps_) / eps_};
        }
        case PreprocKind::Tabulated:
            return {*std::max_element(tab_t_.begin(), tab_t_.end()),
                    *std::min_element(tab_t_.begin(), tab_t_.end())};
        case PreprocKind::Scaled: {
            Bounds b = base_->bounds(ch);
            return {factor_ * b.tau, factor_ * b.t_min};
        }
    }
    throw Error("unreachable");
}

bool Preprocessor::is_feasible(const Channel& ch) const {
    const Bounds b = bounds(ch);
    return std::isfinite(b.t_min) && b.tau > 0.0 && std::isfinite(b.tau);
}

std::string Preprocessor::name() const {
    std::ostringstream os;
    switch (kind_) {
        case PreprocKind::Trim: os << "trim(a=" << a_ << ")"; break;
        case PreprocKind::Subset: os << "subset(b=" << b_ << ")"; break;
        case PreprocKind::MM: os << "mm(alpha=" << alpha_ << ")"; break;
        case PreprocKind::OptimalStar: os << "optimal"; break;
        case PreprocKind::Epsilon: os << "epsilon(eps=" << eps_ << ",alpha=" << alpha_ << ")"; break;
        case PreprocKind::Tabulated: os << "tabulated(" << tab_y_.size() << " knots)"; break;
        case PreprocKind::Scaled: os << "scaled(" << factor_ << "x " << base_->name() << ")"; break;
    }
    return os.str();
}

} // namespace specinit::preprocess
