#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "specinit/asymptotics.hpp"
#include "specinit/channels.hpp"
#include "specinit/preprocess.hpp"

namespace specinit::montecarlo {

using channels::Channel;
using channels::Mode;
using numerics::Rng;
using preprocess::Preprocessor;

using cvector = std::vector<std::complex<double>>;

// One finite-n realization of the sensing model. Row k of the sensing matrix
// lives at rows_re/rows_im[k*n .. k*n+n); rows_im stays empty in real mode.
struct Instance {
    int n = 0, m = 0;
    Mode mode = Mode::Complex;
    cvector signal;               // unit-norm xi
    std::vector<double> rows_re;  // m*n, row-major
    std::vector<double> rows_im;  // m*n or empty
    std::vector<double> measurements; // m
    std::uint64_t seed = 0, stream = 0;
};

enum class SignalChoice { FirstBasisVector, RandomUnit };

Instance generate_instance(const Channel& ch, int n, int m, Rng& rng,
                           SignalChoice signal_choice = SignalChoice::FirstBasisVector);

// D x with D = (1/m) sum_i T(y_i) a_i a_i^*, never materialized.
cvector matvec_D(const Instance& inst, const Preprocessor& T, std::span<const std::complex<double>> x);

struct EigResult {
    cvector x1;
    double lambda1 = 0.0; // of D (shift removed)
    int iterations = 0;
    double shift_used = 0.0;
};

// Shifted power iteration on B = D + sI with s = 2 sup|T(y_i)| (1+1/sqrt(alpha))^2,
// verified a posteriori by a lambda_min probe; the shift doubles on failure
// (at most 3 escalations).
EigResult leading_eigenvector(const Instance& inst, const Preprocessor& T, double tol = 1e-8,
                              int max_iters = 10000);

// Iteration core on an arbitrary Hermitian operator, exposed for testing.
EigResult power_iteration(const std::function<void(const std::complex<double>*, std::complex<double>*)>& apply,
                          int n, double shift, Rng& rng, double tol, int max_iters);

// Phase-invariant overlap |<x, xi>|^2 / (|x|^2 |xi|^2).
double squared_cosine(std::span<const std::complex<double>> x,
                      std::span<const std::complex<double>> xi);

struct TrialResult {
    double alpha = 0.0;
    double cos2 = 0.0;
    double eigenvalue = 0.0;
    int iterations = 0;
    double shift_used = 0.0;
    std::uint64_t seed = 0, stream = 0;
    double wall_time = 0.0; // seconds
    bool converged = true;
};

struct SweepRow {
    double alpha = 0.0;
    int n = 0, m = 0, trials = 0;
    double cos2_mean = 0.0;
    double cos2_std = 0.0; // sample standard deviation over converged trials
    int failures = 0;
    asymptotics::Prediction prediction;
    std::vector<TrialResult> trial_results;
};

// Preprocessor choice may depend on alpha (mm, epsilon, tuned trim/subset).
using PreprocSpec = std::function<Preprocessor(double alpha)>;

struct SweepOptions {
    double eig_tol = 1e-8;
    int max_iters = 10000;
    int threads = 0; // 0: hardware concurrency
    SignalChoice signal_choice = SignalChoice::FirstBasisVector;
};

// For each alpha: m = round(alpha*n), `trials` independent streams
// (stream id = alpha_index << 32 | trial), mean/std of cos^2, and the
// matching asymptotic prediction. Trial failures are flagged, not fatal.
std::vector<SweepRow> run_sweep(const Channel& ch, const PreprocSpec& tspec, int n,
                                const std::vector<double>& alphas, int trials,
                                std::uint64_t base_seed, const SweepOptions& opts = {});

// Binary instance dump: header (magic "SPECINST", u32 version, u32 mode,
// u64 n, u64 m, u64 seed), then row-major rows as interleaved re/im doubles,
// then the m measurements. Little-endian doubles.
void save_instance(const Instance& inst, const std::string& path);
Instance load_instance(const std::string& path);

} // namespace specinit::montecarlo
