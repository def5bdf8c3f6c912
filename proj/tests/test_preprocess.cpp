#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "specinit/design.hpp"
#include "specinit/preprocess.hpp"

using namespace specinit;
using channels::Channel;
using channels::Mode;
using preprocess::Preprocessor;

TEST_SUITE("preprocess") {

TEST_CASE("trim") {
    auto T = Preprocessor::trim(7.0);
    CHECK(T.evaluate(5.0) == 5.0);
    CHECK(T.evaluate(9.0) == 0.0);
    auto poisson = Channel::poisson(5.0);
    auto b = T.bounds(poisson);
    CHECK(b.tau == 7.0);
    CHECK(b.t_min == 0.0);
    CHECK(T.is_feasible(poisson));
    CHECK(T.is_feasible(Channel::noiseless()));
    // fractional a floors on integer support
    CHECK(Preprocessor::trim(7.5).bounds(poisson).tau == 7.0);
    CHECK(Preprocessor::trim(7.5).bounds(Channel::noiseless()).tau == 7.5);
}

TEST_CASE("subset") {
    auto T = Preprocessor::subset(2.0);
    CHECK(T.evaluate(1.0) == 0.0);
    CHECK(T.evaluate(3.0) == 1.0);
    auto poisson = Channel::poisson(5.0);
    auto b = T.bounds(poisson);
    CHECK(b.tau == 1.0);
    CHECK(b.t_min == 0.0);
    // b = 0 makes the indicator identically one
    auto ones = Preprocessor::subset(0.0);
    CHECK(ones.bounds(poisson).t_min == 1.0);
}

TEST_CASE("optimal-star values") {
    auto poisson = Channel::poisson(5.0);
    auto T = Preprocessor::optimal_star(poisson);
    CHECK(T.evaluate(5.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(T.evaluate(0.0) == doctest::Approx(-5.0).epsilon(1e-12));
    CHECK(T.evaluate(11.0) == doctest::Approx(0.5).epsilon(1e-12));

    auto noiseless = Channel::noiseless();
    auto Tn = Preprocessor::optimal_star(noiseless);
    CHECK(Tn.evaluate(1.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(Tn.evaluate(2.0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("optimal-star bounds and feasibility") {
    auto poisson = Channel::poisson(5.0);
    auto T = Preprocessor::optimal_star(poisson);
    auto b = T.bounds(poisson);
    CHECK(b.tau == doctest::Approx(1.0));          // limit as y -> inf
    CHECK(b.t_min == doctest::Approx(-5.0));       // at y = 0
    CHECK(T.is_feasible(poisson));

    auto noiseless = Channel::noiseless();
    auto Tn = Preprocessor::optimal_star(noiseless);
    auto bn = Tn.bounds(noiseless);
    CHECK(bn.tau == doctest::Approx(1.0));
    CHECK(bn.t_min == -numerics::kInf);
    CHECK_FALSE(Tn.is_feasible(noiseless));

    // scaling preserves feasibility
    CHECK(Preprocessor::scaled(T, 2.0).is_feasible(poisson));
    CHECK(Preprocessor::scaled(T, 2.0).evaluate(11.0) == doctest::Approx(1.0));
}

TEST_CASE("gaussian optimal-star uses the atom ratio at y = 0") {
    auto gauss = Channel::gaussian_noise(1.0);
    auto T = Preprocessor::optimal_star(gauss);
    const double eta0 = 0.5 - std::exp(0.5) * numerics::normal_cdf(-1.0);
    const double mu0 = 0.5 - 1.0 / std::sqrt(2.0 * M_PI);
    CHECK(T.evaluate(0.0) == doctest::Approx(1.0 - eta0 / mu0).epsilon(1e-12));
    CHECK(T.evaluate(0.0) == doctest::Approx(-1.35927).epsilon(1e-4));
    CHECK(T.is_feasible(gauss));
}

TEST_CASE("mm is the stated pointwise image of the star function") {
    auto poisson = Channel::poisson(5.0);
    const double alpha = 3.0, aw = 1.2;
    auto mm = Preprocessor::mm(poisson, alpha);
    auto star = Preprocessor::optimal_star(poisson);
    const double sa = std::sqrt(alpha), sw = std::sqrt(aw);
    for (int y = 0; y <= 30; ++y) {
        const double x = star.evaluate(y);
        const double want = sw * x / (sa - (sa - sw) * x);
        CHECK(mm.evaluate(y) == doctest::Approx(want).epsilon(1e-12));
    }
    CHECK(mm.is_feasible(poisson));
    CHECK_THROWS_AS(Preprocessor::mm(poisson, 1.1), BelowThreshold);
    // mm stays bounded even where the star function is not
    auto noiseless = Channel::noiseless();
    auto mmn = Preprocessor::mm(noiseless, 3.0);
    CHECK(mmn.is_feasible(noiseless));
    CHECK(std::isfinite(mmn.bounds(noiseless).t_min));
}

TEST_CASE("sup of the star function is positive whenever alpha_weak is finite") {
    for (const auto& ch : {Channel::poisson(5.0), Channel::gaussian_noise(1.0),
                           Channel::noiseless(), Channel::poisson(0.35)}) {
        CAPTURE(ch.describe());
        REQUIRE(std::isfinite(channels::alpha_weak(ch)));
        CHECK(Preprocessor::optimal_star(ch).bounds(ch).tau > 0.0);
    }
}

TEST_CASE("epsilon kind: bounds and c-range") {
    auto noiseless = Channel::noiseless();
    const double alpha = 3.0, eps = 0.3;
    auto T = design::epsilon_preprocessor(noiseless, alpha, eps);
    auto b = T.bounds(noiseless);
    CHECK(b.t_min == doctest::Approx((-1.0 + eps) / eps).epsilon(1e-12));
    CHECK(b.tau > 0.0);
    CHECK(T.is_feasible(noiseless));

    const double v = T.v();
    const double beta = T.beta_alpha();
    for (double y = 0.0; y <= 40.0; y += 0.05) {
        const double t = T.evaluate(y);
        const double c = t / (1.0 - t);
        CHECK(c >= -1.0 + eps - 1e-10);
        CHECK(c <= v * beta + 1e-10);
    }
}

TEST_CASE("tabulated: interpolation and nearest-knot extension") {
    auto T = Preprocessor::tabulated({0.0, 1.0, 2.0}, {0.5, 1.5, -0.5});
    CHECK(T.evaluate(0.5) == doctest::Approx(1.0));
    CHECK(T.evaluate(-3.0) == 0.5);
    CHECK(T.evaluate(9.0) == -0.5);
    auto b = T.bounds(Channel::noiseless());
    CHECK(b.tau == 1.5);
    CHECK(b.t_min == -0.5);

    const char* path = "test_preproc_tab.txt";
    {
        std::ofstream out(path);
        out << "# y T\n0 0.5\n1 1.5\n2 -0.5\n";
    }
    auto T2 = Preprocessor::tabulated_from_file(path);
    std::remove(path);
    CHECK(T2.evaluate(0.5) == doctest::Approx(1.0));
}

} // TEST_SUITE
