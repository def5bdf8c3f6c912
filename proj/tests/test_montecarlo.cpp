#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>

#include "specinit/design.hpp"
#include "specinit/montecarlo.hpp"

using namespace specinit;
using namespace specinit::montecarlo;
using channels::Channel;
using numerics::Rng;
using preprocess::Preprocessor;

TEST_SUITE("montecarlo") {

TEST_CASE("generate_instance: basis-vector signal and determinism") {
    auto ch = Channel::noiseless();
    Rng rng(11, 22);
    auto inst = generate_instance(ch, 4, 8, rng);
    CHECK(inst.signal[0] == std::complex<double>(1.0, 0.0));
    for (int i = 0; i < inst.m; ++i) {
        const std::complex<double> a0{inst.rows_re[static_cast<size_t>(i) * 4],
                                      inst.rows_im[static_cast<size_t>(i) * 4]};
        CHECK(inst.measurements[i] == doctest::Approx(std::norm(a0)).epsilon(1e-14));
    }
    Rng rng2(11, 22);
    auto inst2 = generate_instance(ch, 4, 8, rng2);
    CHECK(inst.measurements == inst2.measurements);
    CHECK(inst.rows_re == inst2.rows_re);

    Rng rng3(11, 23);
    auto inst3 = generate_instance(ch, 4, 8, rng3);
    CHECK(inst.measurements != inst3.measurements);
}

TEST_CASE("generate_instance: rotational invariance of |<a, xi>|^2") {
    auto ch = Channel::noiseless();
    Rng rng(5, 0);
    auto inst = generate_instance(ch, 4, 100000, rng, SignalChoice::RandomUnit);
    double norm2 = 0.0;
    for (const auto& v : inst.signal) norm2 += std::norm(v);
    CHECK(std::abs(std::sqrt(norm2) - 1.0) <= 1e-12);
    double acc = 0.0;
    for (double y : inst.measurements) acc += y; // y = |<a, xi>|^2 exactly
    CHECK(acc / inst.m == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("matvec_D: rank-one case") {
    Instance inst;
    inst.n = 2;
    inst.m = 1;
    inst.mode = channels::Mode::Complex;
    inst.signal = {{1.0, 0.0}, {0.0, 0.0}};
    inst.rows_re = {1.0, 0.0};
    inst.rows_im = {0.0, 0.0};
    inst.measurements = {3.0};
    auto T = Preprocessor::tabulated({0.0, 10.0}, {2.5, 2.5}); // T(y) = 2.5
    cvector x = {{0.7, 0.2}, {-0.3, 0.4}};
    auto out = matvec_D(inst, T, x);
    CHECK(out[0].real() == doctest::Approx(2.5 * 0.7));
    CHECK(out[0].imag() == doctest::Approx(2.5 * 0.2));
    CHECK(std::abs(out[1]) == 0.0);
}

TEST_CASE("matvec_D: hermitian to rounding") {
    auto ch = Channel::poisson(5.0);
    Rng rng(77, 0);
    auto inst = generate_instance(ch, 64, 128, rng);
    auto T = Preprocessor::optimal_star(ch);
    cvector u(64), v(64);
    for (auto& z : u) z = rng.complex_gaussian();
    for (auto& z : v) z = rng.complex_gaussian();
    auto Du = matvec_D(inst, T, u);
    auto Dv = matvec_D(inst, T, v);
    std::complex<double> lhs{0, 0}, rhs{0, 0};
    double nu = 0.0, nv = 0.0;
    for (int j = 0; j < 64; ++j) {
        lhs += std::conj(u[j]) * Dv[j];
        rhs += std::conj(Du[j]) * v[j];
        nu += std::norm(u[j]);
        nv += std::norm(v[j]);
    }
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::sqrt(nu) * std::sqrt(nv));
}

TEST_CASE("matvec_D: T == 1 approximates the identity at large alpha") {
    auto ch = Channel::noiseless();
    Rng rng(123, 0);
    const int n = 64, m = 6400; // alpha = 100
    auto inst = generate_instance(ch, n, m, rng);
    auto ones = Preprocessor::subset(0.0);
    cvector x(n);
    for (auto& z : x) z = rng.complex_gaussian();
    auto Dx = matvec_D(inst, ones, x);
    double num = 0.0, den = 0.0;
    for (int j = 0; j < n; ++j) {
        num += std::norm(Dx[j] - x[j]);
        den += std::norm(x[j]);
    }
    CHECK(std::sqrt(num / den) <= 3.0 / std::sqrt(100.0));
}

TEST_CASE("power_iteration core on diag(3, 1)") {
    auto apply = [](const std::complex<double>* x, std::complex<double>* out) {
        out[0] = 3.0 * x[0];
        out[1] = 1.0 * x[1];
    };
    Rng rng(3, 0);
    auto res = power_iteration(apply, 2, 0.0, rng, 1e-10, 10000);
    REQUIRE(res.iterations > 0);
    CHECK(res.lambda1 == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(std::abs(res.x1[0]) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(res.x1[1]) <= 1e-4);
}

TEST_CASE("T == 1 leading eigenvalue sits at the bulk edge") {
    auto ch = Channel::noiseless();
    auto ones = Preprocessor::subset(0.0);
    const int n = 256, m = 1024; // alpha = 4, edge (1 + 1/2)^2 = 2.25
    double acc = 0.0;
    const int seeds = 8;
    for (int s = 0; s < seeds; ++s) {
        Rng rng(500 + s, 0);
        auto inst = generate_instance(ch, n, m, rng);
        auto eig = leading_eigenvector(inst, ones, 1e-4, 30000);
        acc += eig.lambda1;
    }
    CHECK(acc / seeds == doctest::Approx(2.25).epsilon(0.1 / 2.25));
}

TEST_CASE("eigenvector equivariance under scaling of T") {
    auto ch = Channel::poisson(5.0);
    auto T = Preprocessor::optimal_star(ch);
    auto T2 = Preprocessor::scaled(T, 2.0);
    Rng rng(9, 1);
    auto inst = generate_instance(ch, 128, 384, rng);
    auto e1 = leading_eigenvector(inst, T, 1e-8, 20000);
    auto e2 = leading_eigenvector(inst, T2, 1e-8, 20000);
    CHECK(squared_cosine(e1.x1, e2.x1) >= 1.0 - 1e-10);
    CHECK(e2.lambda1 == doctest::Approx(2.0 * e1.lambda1).epsilon(1e-9));
}

TEST_CASE("squared_cosine") {
    cvector xi = {{1.0, 0.0}, {0.0, 0.0}};
    cvector same = xi;
    cvector orth = {{0.0, 0.0}, {1.0, 0.0}};
    CHECK(squared_cosine(same, xi) == doctest::Approx(1.0));
    CHECK(squared_cosine(orth, xi) == doctest::Approx(0.0));
    for (double theta : {0.3, 1.2, 2.9}) {
        cvector rot = {std::polar(1.0, theta) * xi[0], std::polar(1.0, theta) * xi[1]};
        CHECK(std::abs(squared_cosine(rot, xi) - 1.0) <= 1e-14);
    }
    cvector zero = {{0.0, 0.0}, {0.0, 0.0}};
    CHECK_THROWS_AS(squared_cosine(zero, xi), ZeroVector);
}

TEST_CASE("run_sweep matches the asymptotic prediction (reduced scale)") {
    auto ch = Channel::noiseless();
    auto T = Preprocessor::trim(10.0);
    SweepOptions opts;
    opts.eig_tol = 1e-6;
    auto rows = run_sweep(
        ch, [&](double) { return T; }, 256, {8.0}, 16, 424242, opts);
    REQUIRE(rows.size() == 1);
    const auto& row = rows[0];
    CHECK(row.m == 2048);
    CHECK(row.failures == 0);
    CHECK(std::abs(row.cos2_mean - row.prediction.rho) <= 0.05);
    CHECK(row.cos2_std > 0.0);
    CHECK(row.trial_results.size() == 16);
    // stream ids are reconstructible per trial
    CHECK(row.trial_results[3].stream == 3);
}

TEST_CASE("below-threshold sweeps show only finite-n leakage") {
    auto ch = Channel::poisson(5.0);
    auto T = Preprocessor::optimal_star(ch);
    SweepOptions opts;
    opts.eig_tol = 1e-5;
    auto rows = run_sweep(
        ch, [&](double) { return T; }, 512, {1.0}, 4, 7, opts);
    CHECK(rows[0].prediction.rho == 0.0);
    CHECK(rows[0].cos2_mean <= 0.1);
}

TEST_CASE("instance dump round-trips") {
    auto ch = Channel::poisson(5.0);
    Rng rng(2718, 5);
    auto inst = generate_instance(ch, 8, 16, rng);
    const char* path = "test_instance.bin";
    save_instance(inst, path);
    auto back = load_instance(path);
    std::remove(path);
    CHECK(back.n == inst.n);
    CHECK(back.m == inst.m);
    CHECK(back.mode == inst.mode);
    CHECK(back.seed == inst.seed);
    CHECK(back.rows_re == inst.rows_re);
    CHECK(back.rows_im == inst.rows_im);
    CHECK(back.measurements == inst.measurements);
}

TEST_CASE("real mode instances") {
    auto ch = Channel::noiseless(channels::Mode::Real);
    Rng rng(31, 0);
    auto inst = generate_instance(ch, 16, 64, rng);
    CHECK(inst.rows_im.empty());
    auto ones = Preprocessor::subset(0.0);
    auto eig = leading_eigenvector(inst, ones, 1e-5, 20000);
    CHECK(eig.lambda1 > 0.0);
}

} // TEST_SUITE
