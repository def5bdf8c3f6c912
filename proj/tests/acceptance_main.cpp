// Acceptance suite: runs every gate criterion at its pinned tolerance and
// prints one PASS/FAIL line each. Exit code 0 only if all pass.
//
// The n = 4096 variant of the Monte Carlo criterion is gated behind
// SPECINIT_LONG_TESTS=1 (hours-scale on small machines).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "specinit/asymptotics.hpp"
#include "specinit/channels.hpp"
#include "specinit/design.hpp"
#include "specinit/montecarlo.hpp"
#include "specinit/numerics.hpp"
#include "specinit/preprocess.hpp"

using namespace specinit;
using channels::Channel;
using channels::Mode;
using design::CFunction;
using numerics::Rng;
using preprocess::Preprocessor;
namespace asy = specinit::asymptotics;
namespace mc = specinit::montecarlo;

namespace {

int g_failures = 0;

void report(int idx, bool ok, const std::string& what, const std::string& detail) {
    std::printf("[%2d] %s %s (%s)\n", idx, ok ? "PASS" : "FAIL", what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::string fmt(double v) {
    char b[32];
    std::snprintf(b, sizeof(b), "%.3g", v);
    return b;
}

double elapsed(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- 1. thresholds -------------------------------------------------------
void criterion_thresholds() {
    const double e1 = std::abs(channels::alpha_weak(Channel::poisson(5.0)) - 1.2);
    const double e2 = std::abs(channels::alpha_weak(Channel::noiseless()) - 1.0);
    const double e3 = std::abs(channels::alpha_weak(Channel::noiseless(Mode::Real)) - 0.5);
    report(1, e1 <= 1e-9 && e2 <= 1e-8 && e3 <= 1e-8, "closed-form thresholds",
           "poisson err=" + fmt(e1) + " noiseless err=" + fmt(e2) + " real err=" + fmt(e3));
}

// ---- 2. f(beta) limit and closed-form agreement --------------------------
void criterion_fbeta() {
    auto poisson = Channel::poisson(5.0);
    const double lim_err = std::abs(design::f_beta(poisson, 1e6) - 5.0 / 6.0);
    double max_route_diff = 0.0;
    for (double beta : {0.1, 1.0, 10.0}) {
        // route A: direct series over the pmf pair; route B: closed form
        const double a = channels::channel_integral(
            poisson.functions(),
            [beta](double, double e, double m) {
                const double d = m - e;
                return d * d / (e + m / beta);
            });
        const double b = design::f_beta_poisson_closed(5.0, beta);
        max_route_diff = std::max(max_route_diff, std::abs(a - b));
    }
    report(2, lim_err <= 1e-4 && max_route_diff <= 1e-8, "f(beta) limit and dual routes",
           "f(1e6)-5/6=" + fmt(lim_err) + " series-vs-closed=" + fmt(max_route_diff));
}

// ---- 3. theory self-consistency ------------------------------------------
void criterion_consistency() {
    double worst = 0.0;
    for (const auto& ch : {Channel::poisson(5.0), Channel::gaussian_noise(1.0)}) {
        auto od = design::optimal_preprocessor(ch);
        for (double alpha : {2.0, 3.0, 5.0, 10.0}) {
            const double via_design = design::rho_optimal(ch, alpha);
            const double via_fixed_point =
                asy::solve_lambda_star(ch, *od.preprocessor, alpha).rho;
            worst = std::max(worst, std::abs(via_design - via_fixed_point));
        }
    }
    report(3, worst <= 1e-6, "two routes through the theory coincide",
           "max |rho_design - rho_prediction| = " + fmt(worst));
}

// ---- 4. dominance of the optimal design ----------------------------------
void criterion_dominance() {
    auto ch = Channel::poisson(5.0);
    auto opt = *design::optimal_preprocessor(ch).preprocessor;
    bool ok = true;
    std::string detail;
    double min_mm = 1.0;
    for (double alpha : {1.5, 2.0, 3.0, 5.0, 10.0}) {
        const double rho_opt = asy::solve_lambda_star(ch, opt, alpha).rho;
        double best_trim = 0.0, best_subset = 0.0;
        for (int a = 1; a <= 50; ++a)
            best_trim =
                std::max(best_trim, asy::solve_lambda_star(ch, Preprocessor::trim(a), alpha).rho);
        for (int i = 0; i < 50; ++i) {
            const double b = 0.1 * std::pow(200.0, i / 49.0);
            best_subset = std::max(best_subset,
                                   asy::solve_lambda_star(ch, Preprocessor::subset(b), alpha).rho);
        }
        const double rho_mm = asy::solve_lambda_star(ch, Preprocessor::mm(ch, alpha), alpha).rho;
        min_mm = std::min(min_mm, rho_mm);
        if (!(rho_opt >= rho_mm - 1e-9 && rho_opt >= best_trim - 1e-9 &&
              rho_opt >= best_subset - 1e-9))
            ok = false;
        if (alpha == 3.0)
            detail = "at alpha=3: opt=" + fmt(rho_opt) + " mm=" + fmt(rho_mm) +
                     " trim=" + fmt(best_trim) + " subset=" + fmt(best_subset);
    }
    ok = ok && min_mm > 0.0;
    report(4, ok, "optimal design dominates mm/trim/subset; mm stays positive",
           detail + " min_mm=" + fmt(min_mm));
}

// ---- 5. phase transition --------------------------------------------------
void criterion_phase_transition() {
    auto ch = Channel::poisson(5.0);
    std::vector<Preprocessor> catalog = {*design::optimal_preprocessor(ch).preprocessor,
                                         Preprocessor::trim(5.0),
                                         Preprocessor::trim(7.0),
                                         Preprocessor::trim(20.0),
                                         Preprocessor::subset(1.0),
                                         Preprocessor::subset(3.0)};
    double worst = 0.0;
    for (double alpha : {0.5, 1.0, 1.15})
        for (const auto& T : catalog)
            worst = std::max(worst, asy::solve_lambda_star(ch, T, alpha).rho);
    report(5, worst == 0.0, "rho = 0 below the threshold for the whole catalog",
           "max rho over {0.5, 1.0, 1.15} = " + fmt(worst));
}

// ---- 6. epsilon-family convergence ----------------------------------------
void criterion_epsilon_family() {
    auto ch = Channel::noiseless();
    bool ok = true;
    double worst_gap005 = 0.0;
    for (double alpha : {2.0, 3.0, 5.0}) {
        const double target = design::rho_optimal(ch, alpha);
        const double beta = design::beta_alpha(ch, alpha);
        const double gamma_plus = numerics::integrate_interval(
            [&](double y) {
                const double e = std::exp(-y), m = y * std::exp(-y);
                return (m - e) * (m - e) / (e + m / beta);
            },
            1.0, 200.0);
        for (double eps : {0.5, 0.3, 0.1, 0.05}) {
            auto T = design::epsilon_preprocessor(ch, alpha, eps);
            const double rho = asy::solve_lambda_star(ch, T, alpha).rho;
            if (!(rho <= target + 1e-9)) ok = false;
            if (!(T.v() >= 1.0 && T.v() - 1.0 <= 2.0 * eps / gamma_plus + 1e-12)) ok = false;
            if (eps == 0.05) worst_gap005 = std::max(worst_gap005, target - rho);
        }
    }
    ok = ok && worst_gap005 <= 0.02;
    report(6, ok, "epsilon family approaches rho_opt with certified v",
           "max gap at eps=0.05: " + fmt(worst_gap005));
}

// ---- 7. minimum-norm oracle ------------------------------------------------
void criterion_min_norm_oracle() {
    auto ch = Channel::poisson(5.0);
    const double alpha = 3.0;
    const double beta = design::beta_alpha(ch, alpha);
    auto cs = design::c_star(ch, alpha);
    const double q_star = design::Q(cs, ch, beta);

    bool ok = true;
    double worst_drop = 0.0;
    Rng rng(987654321, 0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> y(61), d(61);
        for (int i = 0; i < 61; ++i) {
            y[i] = i;
            d[i] = 2.0 * rng.uniform() - 1.0;
        }
        auto dir = CFunction::tabulated(ch, y, d);
        const double lam = design::L(dir, ch) / design::L(cs, ch);
        for (double t : {-0.1, -0.01, 0.01, 0.1}) {
            auto cand = CFunction(
                [&](double yy, double e, double m) {
                    return cs.eval(yy, e, m) + t * (dir.eval(yy, e, m) - lam * cs.eval(yy, e, m));
                },
                nullptr);
            const double drop = q_star - design::Q(cand, ch, beta);
            worst_drop = std::max(worst_drop, drop);
            if (drop > 1e-10) ok = false;
        }
    }
    double max_value_err = 0.0;
    for (double b : {0.5, 1.0, 2.0}) {
        auto c = design::c_min_norm(ch, alpha, b);
        max_value_err =
            std::max(max_value_err, std::abs(design::Q(c, ch, b) -
                                             1.0 / (alpha * alpha * design::f_beta(ch, b))));
    }
    ok = ok && max_value_err <= 1e-8;
    report(7, ok, "minimum-norm solution survives 400 perturbations; value identity",
           "worst Q drop=" + fmt(worst_drop) + " value err=" + fmt(max_value_err));
}

// ---- 8 & 9. Monte Carlo vs theory ------------------------------------------
void criterion_mc(int idx, const Channel& ch, const mc::PreprocSpec& tspec,
                  const std::vector<double>& alphas,
                  const std::vector<double>& targets, int n, const std::string& label) {
    const auto t0 = std::chrono::steady_clock::now();
    mc::SweepOptions opts;
    opts.eig_tol = 1e-6;
    opts.max_iters = 40000;
    auto rows = mc::run_sweep(ch, tspec, n, alphas, 16, 20240808, opts);
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double err = std::abs(rows[i].cos2_mean - targets[i]);
        if (err > 0.05 || rows[i].failures > 0) ok = false;
        detail += "a=" + fmt(alphas[i]) + ":err=" + fmt(err) + " ";
    }
    detail += "(" + fmt(elapsed(t0)) + "s)";
    report(idx, ok, label, detail);
}

} // namespace

int main(int argc, char** argv) {
    bool long_tests = std::getenv("SPECINIT_LONG_TESTS") != nullptr;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--long") == 0) long_tests = true;

    criterion_thresholds();
    criterion_fbeta();
    criterion_consistency();
    criterion_dominance();
    criterion_phase_transition();
    criterion_epsilon_family();
    criterion_min_norm_oracle();

    {
        auto poisson = Channel::poisson(5.0);
        auto opt = *design::optimal_preprocessor(poisson).preprocessor;
        const std::vector<double> alphas = {3.0, 5.0, 10.0};
        std::vector<double> targets;
        for (double a : alphas) targets.push_back(design::rho_optimal(poisson, a));
        const int n = long_tests ? 4096 : 1024;
        criterion_mc(8, poisson, [&](double) { return opt; }, alphas, targets, n,
                     "Monte Carlo vs rho_opt, poisson optimal design, n=" + std::to_string(n));

        auto noiseless = Channel::noiseless();
        const std::vector<double> alphas9 = {3.0, 5.0};
        std::vector<double> targets9;
        for (double a : alphas9) {
            auto T = design::epsilon_preprocessor(noiseless, a, 0.3);
            targets9.push_back(asy::solve_lambda_star(noiseless, T, a).rho);
        }
        criterion_mc(9, noiseless,
                     [&](double a) { return design::epsilon_preprocessor(noiseless, a, 0.3); },
                     alphas9, targets9, 1024,
                     "Monte Carlo vs rho(alpha; T_eps), noiseless eps=0.3, n=1024");
    }

    // ---- 10. invariance suite ----------------------------------------------
    {
        bool ok = true;
        std::string detail;
        auto poisson = Channel::poisson(5.0);
        // prediction scale invariance
        double worst_scale = 0.0;
        for (const auto& T : {*design::optimal_preprocessor(poisson).preprocessor,
                              Preprocessor::trim(7.0), Preprocessor::subset(2.0)}) {
            const double base = asy::solve_lambda_star(poisson, T, 3.0).rho;
            for (double a : {0.5, 2.0, 10.0}) {
                const double s =
                    asy::solve_lambda_star(poisson, Preprocessor::scaled(T, a), 3.0).rho;
                worst_scale = std::max(worst_scale, std::abs(s - base));
            }
        }
        if (worst_scale > 1e-9) ok = false;
        // MC eigenvector invariance at n = 128
        {
            auto T = *design::optimal_preprocessor(poisson).preprocessor;
            Rng rng(5150, 0);
            auto inst = mc::generate_instance(poisson, 128, 384, rng);
            auto e1 = mc::leading_eigenvector(inst, T, 1e-8, 20000);
            auto e2 = mc::leading_eigenvector(inst, Preprocessor::scaled(T, 2.0), 1e-8, 20000);
            if (mc::squared_cosine(e1.x1, e2.x1) < 1.0 - 1e-10) ok = false;
        }
        // normalization and the certificate bound
        double worst_norm = 0.0, worst_cert = 0.0;
        for (const auto& ch : {Channel::poisson(5.0), Channel::gaussian_noise(1.0),
                               Channel::noiseless(), Channel::poisson(0.35),
                               Channel::gaussian_noise(4.0)}) {
            worst_norm = std::max({worst_norm, std::abs(ch.functions().eta_integral - 1.0),
                                   std::abs(ch.functions().mu_integral - 1.0)});
            worst_cert = std::max(worst_cert, channels::mu_sq_over_eta_integral(ch) - 2.0);
        }
        if (worst_norm > 1e-8 || worst_cert > 1e-8) ok = false;
        // derivative formulas vs central differences
        auto T7 = Preprocessor::trim(7.0);
        const double lam = 2.0 * T7.bounds(poisson).tau;
        const double h = 1e-4 * lam;
        const double psi_cd =
            (asy::psi(poisson, T7, lam + h) - asy::psi(poisson, T7, lam - h)) / (2.0 * h);
        const double phi_cd = (asy::phi(poisson, T7, 3.0, lam + h) -
                               asy::phi(poisson, T7, 3.0, lam - h)) /
                              (2.0 * h);
        const double d1 = std::abs(asy::psi_prime(poisson, T7, lam) - psi_cd);
        const double d2 = std::abs(asy::phi_prime(poisson, T7, 3.0, lam) - phi_cd);
        if (d1 > 1e-6 || d2 > 1e-6) ok = false;
        detail = "scale=" + fmt(worst_scale) + " norm=" + fmt(worst_norm) +
                 " cert_excess=" + fmt(worst_cert) + " deriv=" + fmt(std::max(d1, d2));
        report(10, ok, "invariance suite", detail);
    }

    std::printf("RESULT: %d/10 criteria passed\n", 10 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
