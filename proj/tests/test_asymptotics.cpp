#include <doctest.h>

#include <cmath>

#include "specinit/asymptotics.hpp"
#include "specinit/design.hpp"

using namespace specinit;
using channels::Channel;
using preprocess::Preprocessor;
namespace asy = specinit::asymptotics;

namespace {

// constant preprocessor T == t0 over a wide grid
Preprocessor constant_preproc(double t0) {
    return Preprocessor::tabulated({0.0, 1000.0}, {t0, t0});
}

} // namespace

TEST_SUITE("asymptotics") {

TEST_CASE("constant preprocessor collapses the expectations") {
    const double t0 = 0.5, alpha = 3.0;
    auto T = constant_preproc(t0);
    for (const auto& ch : {Channel::poisson(5.0), Channel::noiseless()}) {
        CAPTURE(ch.describe());
        for (double lam : {0.8, 2.0, 10.0}) {
            CHECK(asy::psi(ch, T, lam) ==
                  doctest::Approx(lam * t0 / (lam - t0)).epsilon(1e-9));
            CHECK(asy::phi(ch, T, alpha, lam) ==
                  doctest::Approx(lam / alpha + lam * t0 / (lam - t0)).epsilon(1e-9));
            CHECK(asy::psi_prime(ch, T, lam) ==
                  doctest::Approx(-t0 * t0 / ((lam - t0) * (lam - t0))).epsilon(1e-9));
        }
    }
}

TEST_CASE("subset on noiseless has an incomplete-gamma psi") {
    auto ch = Channel::noiseless();
    for (double b : {0.5, 2.0}) {
        auto T = Preprocessor::subset(b);
        for (double lam : {1.5, 4.0}) {
            // integral_b^inf y e^-y dy = (1+b) e^-b
            const double want = lam / (lam - 1.0) * (1.0 + b) * std::exp(-b);
            CHECK(asy::psi(ch, T, lam) == doctest::Approx(want).epsilon(1e-9));
        }
    }
}

TEST_CASE("psi is strictly decreasing") {
    auto ch = Channel::poisson(5.0);
    auto T = Preprocessor::trim(7.0);
    const double tau = T.bounds(ch).tau;
    CHECK(asy::psi(ch, T, 100.0 * tau) < asy::psi(ch, T, 10.0 * tau));
}

TEST_CASE("analytic derivatives match central differences") {
    auto ch = Channel::poisson(5.0);
    auto T = Preprocessor::trim(7.0);
    const double alpha = 3.0;
    const double lam = 2.0 * T.bounds(ch).tau;
    const double h = 1e-4 * lam;
    const double psi_cd = (asy::psi(ch, T, lam + h) - asy::psi(ch, T, lam - h)) / (2.0 * h);
    const double phi_cd =
        (asy::phi(ch, T, alpha, lam + h) - asy::phi(ch, T, alpha, lam - h)) / (2.0 * h);
    CHECK(std::abs(asy::psi_prime(ch, T, lam) - psi_cd) <= 1e-6);
    CHECK(std::abs(asy::phi_prime(ch, T, alpha, lam) - phi_cd) <= 1e-6);
}

TEST_CASE("phi_prime tends to 1/alpha at large lambda") {
    auto ch = Channel::poisson(5.0);
    auto T = Preprocessor::trim(7.0);
    CHECK(asy::phi_prime(ch, T, 4.0, 1e8 * T.bounds(ch).tau) ==
          doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("domain errors below tau") {
    auto ch = Channel::poisson(5.0);
    auto T = Preprocessor::trim(7.0);
    CHECK_THROWS_AS(asy::psi(ch, T, 6.9), DomainError);
    CHECK_THROWS_AS(asy::phi(ch, T, 3.0, 7.0), DomainError);
    CHECK_THROWS_AS(asy::solve_lambda_star(ch, Preprocessor::optimal_star(Channel::noiseless()),
                                           3.0),
                    InfeasiblePreprocessor);
}

TEST_CASE("phase transition and agreement with the design curve") {
    auto ch = Channel::poisson(5.0);
    auto T = Preprocessor::optimal_star(ch);
    CHECK(asy::solve_lambda_star(ch, T, 1.1).rho == 0.0);
    CHECK(asy::solve_lambda_star(ch, T, 1.1).phase == asy::Phase::Uncorrelated);

    auto pred = asy::solve_lambda_star(ch, T, 3.0);
    CHECK(pred.phase == asy::Phase::Correlated);
    REQUIRE(pred.lambda_star.has_value());
    CHECK(*pred.lambda_star > T.bounds(ch).tau);
    CHECK(pred.rho == doctest::Approx(design::rho_optimal(ch, 3.0)).epsilon(1e-6));
    CHECK(pred.diag.residual <= 1e-8);
    // slope condition is exactly the quadratic constraint
    const double integral_form = 1.0 / 3.0 - asy::phi_prime(ch, T, 3.0, *pred.lambda_star);
    CHECK(integral_form < 1.0 / 3.0); // integral of [T/(lam-T)]^2 eta < 1/alpha
    CHECK(pred.diag.phi_prime == doctest::Approx(1.0 / 3.0 - integral_form).epsilon(1e-10));
}

TEST_CASE("scale invariance of predictions") {
    auto ch = Channel::poisson(5.0);
    auto base = Preprocessor::optimal_star(ch);
    const double rho0 = asy::solve_lambda_star(ch, base, 3.0).rho;
    for (double a : {0.5, 2.0, 10.0}) {
        auto pred = asy::solve_lambda_star(ch, Preprocessor::scaled(base, a), 3.0);
        CHECK(pred.rho == doctest::Approx(rho0).epsilon(1e-9));
    }
    // also across the catalog at a fixed scale
    for (const auto& T :
         {Preprocessor::trim(7.0), Preprocessor::subset(2.0), Preprocessor::mm(ch, 3.0)}) {
        CAPTURE(T.name());
        const double r  = asy::solve_lambda_star(ch, T, 3.0).rho;
        const double rs = asy::solve_lambda_star(ch, Preprocessor::scaled(T, 2.0), 3.0).rho;
        CHECK(rs == doctest::Approx(r).epsilon(1e-9));
    }
}

TEST_CASE("epsilon family approaches the optimal curve on noiseless") {
    auto ch = Channel::noiseless();
    for (double alpha : {2.0, 3.0, 5.0}) {
        const double target = design::rho_optimal(ch, alpha);
        double prev_gap = 1.0;
        for (double eps : {0.3, 0.1, 0.05}) {
            auto T = design::epsilon_preprocessor(ch, alpha, eps);
            const double rho = asy::solve_lambda_star(ch, T, alpha).rho;
            CHECK(rho <= target + 1e-9);
            const double gap = target - rho;
            CHECK(gap <= prev_gap + 1e-12);
            prev_gap = gap;
        }
        CHECK(prev_gap <= 0.02); // eps = 0.05
    }
}

} // TEST_SUITE
