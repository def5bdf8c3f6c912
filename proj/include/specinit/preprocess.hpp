#pragma once

#include <memory>
#include <string>
#include <vector>

#include "specinit/channels.hpp"

namespace specinit::preprocess {

using channels::Channel;
using channels::ChannelFunctions;

enum class PreprocKind { Trim, Subset, MM, OptimalStar, Epsilon, Tabulated, Scaled };

struct Bounds {
    double tau = 0.0;   // sup over the support
    double t_min = 0.0; // inf over the support
};

// A preprocessing function T(y). Channel-derived kinds (mm, optimal-star,
// epsilon) carry their channel's eta/mu; trim/subset/tabulated are plain
// functions of y. Immutable after construction.
class Preprocessor {
  public:
    static Preprocessor trim(double a);
    static Preprocessor subset(double b);
    static Preprocessor mm(const Channel& ch, double alpha);
    static Preprocessor optimal_star(const Channel& ch);
    // Built by design::epsilon_preprocessor, which solves for v.
    static Preprocessor epsilon_family(const Channel& ch, double alpha, double eps, double v,
                                       double beta_alpha);
    static Preprocessor tabulated(std::vector<double> y, std::vector<double> t);
    // Two-column text: y T(y)
    static Preprocessor tabulated_from_file(const std::string& path);
    static Preprocessor scaled(Preprocessor base, double factor);

    // Pointwise value; atom-aware for channel-derived kinds. May legally
    // return -inf (optimal-star where mu -> 0): feasibility gates that.
    double evaluate(double y) const;
    // Same function expressed against caller-supplied (eta, mu) values, for
    // use inside channel integrals.
    double evaluate_with(double y, double eta, double mu) const;

    Bounds bounds(const Channel& ch) const;
    bool is_feasible(const Channel& ch) const;

    PreprocKind kind() const { return kind_; }
    std::string name() const;

    double trim_a() const { return a_; }
    double subset_b() const { return b_; }
    double alpha() const { return alpha_; }
    double eps() const { return eps_; }
    double v() const { return v_; }
    double beta_alpha() const { return beta_; }
    double factor() const { return factor_; }

  private:
    Preprocessor() = default;

    PreprocKind kind_ = PreprocKind::Trim;
    double a_ = 0.0, b_ = 0.0;
    double alpha_ = 0.0, alpha_weak_ = 0.0; // mm
    double eps_ = 0.0, v_ = 1.0, beta_ = 0.0; // epsilon
    double factor_ = 1.0;
    std::shared_ptr<const ChannelFunctions> chf_; // channel-derived kinds
    double ratio_sup_ = 0.0;                      // sup mu/eta at construction
    double ratio_inf_ = 0.0;                      // inf mu/eta at construction
    std::shared_ptr<const Preprocessor> base_;    // scaled
    std::vector<double> tab_y_, tab_t_;           // tabulated
};

} // namespace specinit::preprocess
