#include "specinit/montecarlo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <future>
#include <thread>

namespace specinit::montecarlo {

using numerics::kInf;

namespace {

double norm2(const cvector& x) {
    double s = 0.0;
    for (const auto& v : x) s += std::norm(v);
    return std::sqrt(s);
}

// out = (1/m) sum_i w_i a_i (a_i^* x), split real/imag storage. One pass over
// the row matrix per call: the dot and the rank-one update for row i run
// back-to-back while the row is still in cache.
void apply_weighted(const Instance& inst, const std::vector<double>& w,
                    const std::complex<double>* x, std::complex<double>* out) {
    const int n = inst.n, m = inst.m;
    std::vector<double> xr(n), xi(n), or_(n, 0.0), oi(n, 0.0);
    for (int j = 0; j < n; ++j) {
        xr[j] = x[j].real();
        xi[j] = x[j].imag();
    }
    const bool cplx = !inst.rows_im.empty();
    const double inv_m = 1.0 / static_cast<double>(m);
    for (int i = 0; i < m; ++i) {
        if (w[i] == 0.0) continue;
        const double* ar = inst.rows_re.data() + static_cast<std::size_t>(i) * n;
        double tre = 0.0, tim = 0.0;
        if (cplx) {
            const double* ai = inst.rows_im.data() + static_cast<std::size_t>(i) * n;
            for (int j = 0; j < n; ++j) { // t = conj(a_i) . x
                tre += ar[j] * xr[j] + ai[j] * xi[j];
                tim += ar[j] * xi[j] - ai[j] * xr[j];
            }
            const double c = w[i] * inv_m;
            const double cre = c * tre, cim = c * tim;
            for (int j = 0; j < n; ++j) { // out += c * t * a_i
                or_[j] += cre * ar[j] - cim * ai[j];
                oi[j] += cre * ai[j] + cim * ar[j];
            }
        } else {
            for (int j = 0; j < n; ++j) {
                tre += ar[j] * xr[j];
                tim += ar[j] * xi[j];
            }
            const double c = w[i] * inv_m;
            const double cre = c * tre, cim = c * tim;
            for (int j = 0; j < n; ++j) {
                or_[j] += cre * ar[j];
                oi[j] += cim * ar[j];
            }
        }
    }
    for (int j = 0; j < n; ++j) out[j] = {or_[j], oi[j]};
}

std::vector<double> weights_for(const Instance& inst, const Preprocessor& T) {
    std::vector<double> w(inst.m);
    for (int i = 0; i < inst.m; ++i) {
        w[i] = T.evaluate(inst.measurements[i]);
        if (!std::isfinite(w[i]))
            throw Error("preprocessor produced a non-finite weight at y=" +
                        std::to_string(inst.measurements[i]));
    }
    return w;
}

} // namespace

Instance generate_instance(const Channel& ch, int n, int m, Rng& rng,
                           SignalChoice signal_choice) {
    if (n < 1 || m < 1) throw Error("instance needs n, m >= 1");
    Instance inst;
    inst.n = n;
    inst.m = m;
    inst.mode = ch.mode();
    inst.seed = rng.seed();
    inst.stream = rng.stream();
    const bool cplx = ch.mode() == Mode::Complex;

    inst.signal.assign(n, {0.0, 0.0});
    if (signal_choice == SignalChoice::FirstBasisVector) {
        inst.signal[0] = 1.0;
    } else {
        for (auto& v : inst.signal)
            v = cplx ? rng.complex_gaussian() : std::complex<double>(rng.gaussian(), 0.0);
        const double nrm = norm2(inst.signal);
        for (auto& v : inst.signal) v /= nrm;
    }

    inst.rows_re.resize(static_cast<std::size_t>(m) * n);
    if (cplx) inst.rows_im.resize(static_cast<std::size_t>(m) * n);
    for (std::size_t k = 0; k < inst.rows_re.size(); ++k) {
        if (cplx) {
            const auto g = rng.complex_gaussian();
            inst.rows_re[k] = g.real();
            inst.rows_im[k] = g.imag();
        } else {
            inst.rows_re[k] = rng.gaussian();
        }
    }

    inst.measurements.resize(m);
    for (int i = 0; i < m; ++i) {
        const double* ar = inst.rows_re.data() + static_cast<std::size_t>(i) * n;
        const double* ai = cplx ? inst.rows_im.data() + static_cast<std::size_t>(i) * n : nullptr;
        std::complex<double> s{0.0, 0.0};
        for (int j = 0; j < n; ++j) {
            const std::complex<double> a{ar[j], ai ? ai[j] : 0.0};
            s += std::conj(a) * inst.signal[static_cast<std::size_t>(j)];
        }
        inst.measurements[i] = ch.sample_measurement(std::abs(s), rng);
    }
    return inst;
}

cvector matvec_D(const Instance& inst, const Preprocessor& T,
                 std::span<const std::complex<double>> x) {
    if (static_cast<int>(x.size()) != inst.n) throw Error("matvec_D: size mismatch");
    const auto w = weights_for(inst, T);
    cvector out(inst.n);
    apply_weighted(inst, w, x.data(), out.data());
    return out;
}

EigResult power_iteration(
    const std::function<void(const std::complex<double>*, std::complex<double>*)>& apply, int n,
    double shift, Rng& rng, double tol, int max_iters) {
    cvector x(n), y(n);
    for (auto& v : x) v = rng.complex_gaussian();
    double nrm = norm2(x);
    for (auto& v : x) v /= nrm;

    EigResult res;
    res.shift_used = shift;
    double theta_prev = kInf;
    for (int it = 0; it < max_iters; ++it) {
        apply(x.data(), y.data());
        if (shift != 0.0)
            for (int j = 0; j < n; ++j) y[j] += shift * x[j];
        // theta = Re(x^* y) with unit x; residual = |y - theta x|
        double theta = 0.0;
        for (int j = 0; j < n; ++j)
            theta += x[j].real() * y[j].real() + x[j].imag() * y[j].imag();
        double res2 = 0.0;
        for (int j = 0; j < n; ++j) res2 += std::norm(y[j] - theta * x[j]);
        const double residual = std::sqrt(res2);
        ++res.iterations;
        nrm = norm2(y);
        if (nrm == 0.0) { // x in the kernel; restart direction
            for (auto& v : x) v = rng.complex_gaussian();
            nrm = norm2(x);
            for (auto& v : x) v /= nrm;
            continue;
        }
        for (int j = 0; j < n; ++j) x[j] = y[j] / nrm;
        const double scale = std::max(1.0, std::abs(theta));
        if (std::abs(theta - theta_prev) <= tol * scale && residual <= tol * std::abs(theta)) {
            res.lambda1 = theta;
            res.x1 = x;
            return res;
        }
        theta_prev = theta;
    }
    res.lambda1 = theta_prev;
    res.x1 = x;
    res.iterations = -res.iterations; // negative marks non-convergence
    return res;
}

EigResult leading_eigenvector(const Instance& inst, const Preprocessor& T, double tol,
                              int max_iters) {
    const auto w = weights_for(inst, T);
    double sup_w = 0.0;
    for (double wi : w) sup_w = std::max(sup_w, std::abs(wi));
    if (sup_w == 0.0) { // D = 0
        EigResult res;
        res.x1.assign(inst.n, {0.0, 0.0});
        res.x1[0] = 1.0;
        return res;
    }
    const double alpha = static_cast<double>(inst.m) / inst.n;
    const double edge = (1.0 + 1.0 / std::sqrt(alpha)) * (1.0 + 1.0 / std::sqrt(alpha));
    auto apply = [&](const std::complex<double>* xin, std::complex<double>* out) {
        apply_weighted(inst, w, xin, out);
    };

    int total_iters = 0;
    for (int escalation = 0; escalation <= 3; ++escalation) {
        const double shift = 2.0 * sup_w * edge * static_cast<double>(1 << escalation);
        Rng rng(inst.seed, inst.stream ^ (1ULL << 63));
        EigResult res = power_iteration(apply, inst.n, shift, rng, tol, max_iters);
        const bool converged = res.iterations > 0;
        total_iters += std::abs(res.iterations);
        if (converged) {
            // probe lambda_min(B) with 50 iterations on (theta + s + 1) I - B
            const double c = res.lambda1 + shift + 1.0;
            auto apply_neg = [&](const std::complex<double>* xin, std::complex<double>* out) {
                apply_weighted(inst, w, xin, out);
                for (int j = 0; j < inst.n; ++j) out[j] = c * xin[j] - out[j] - shift * xin[j];
            };
            EigResult probe = power_iteration(apply_neg, inst.n, 0.0, rng, 0.0, 50);
            const double lambda_min_B = c - probe.lambda1;
            if (lambda_min_B >= 0.0) {
                res.lambda1 -= shift; // back to the spectrum of D
                res.iterations = total_iters;
                res.shift_used = shift;
                return res;
            }
        }
        if (escalation == 3)
            throw NoConvergence("power iteration failed at maximal shift escalation");
    }
    throw NoConvergence("unreachable");
}

double squared_cosine(std::span<const std::complex<double>> x,
                      std::span<const std::complex<double>> xi) {
    if (x.size() != xi.size()) throw Error("squared_cosine: size mismatch");
    double nx = 0.0, nxi = 0.0;
    std::complex<double> dot{0.0, 0.0};
    for (std::size_t j = 0; j < x.size(); ++j) {
        nx += std::norm(x[j]);
        nxi += std::norm(xi[j]);
        dot += std::conj(x[j]) * xi[j];
    }
    if (nx <= 1e-300 || nxi <= 1e-300) throw ZeroVector("squared_cosine of a zero vector");
    return std::norm(dot) / (nx * nxi);
}

std::vector<SweepRow> run_sweep(const Channel& ch, const PreprocSpec& tspec, int n,
                                const std::vector<double>& alphas, int trials,
                                std::uint64_t base_seed, const SweepOptions& opts) {
    if (trials < 1) throw Error("run_sweep needs trials >= 1");
    int threads = opts.threads > 0 ? opts.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, trials));

    std::vector<SweepRow> rows;
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
        const double alpha = alphas[ai];
        SweepRow row;
        row.alpha = alpha;
        row.n = n;
        row.m = static_cast<int>(std::llround(alpha * n));
        row.trials = trials;
        const Preprocessor T = tspec(alpha);
        row.prediction = asymptotics::solve_lambda_star(ch, T, alpha, {});

        auto run_trial = [&, alpha](int t) {
            TrialResult tr;
            tr.alpha = alpha;
            tr.seed = base_seed;
            tr.stream = (static_cast<std::uint64_t>(ai) << 32) | static_cast<std::uint64_t>(t);
            const auto t0 = std::chrono::steady_clock::now();
            Rng rng(base_seed, tr.stream);
            const Instance inst = generate_instance(ch, n, row.m, rng, opts.signal_choice);
            try {
                const EigResult eig = leading_eigenvector(inst, T, opts.eig_tol, opts.max_iters);
                tr.cos2 = squared_cosine(eig.x1, inst.signal);
                tr.eigenvalue = eig.lambda1;
                tr.iterations = eig.iterations;
                tr.shift_used = eig.shift_used;
            } catch (const NoConvergence&) {
                tr.converged = false;
            }
            tr.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                               .count();
            return tr;
        };

        row.trial_results.resize(trials);
        for (int t0 = 0; t0 < trials; t0 += threads) {
            const int batch = std::min(threads, trials - t0);
            std::vector<std::future<TrialResult>> futs;
            futs.reserve(batch);
            for (int k = 0; k < batch; ++k)
                futs.push_back(std::async(std::launch::async, run_trial, t0 + k));
            for (int k = 0; k < batch; ++k) row.trial_results[t0 + k] = futs[k].get();
        }

        double sum = 0.0;
        int good = 0;
        for (const auto& tr : row.trial_results) {
            if (!tr.converged) {
                ++row.failures;
                continue;
            }
            sum += tr.cos2;
            ++good;
        }
        row.cos2_mean = good > 0 ? sum / good : 0.0;
        double ss = 0.0;
        for (const auto& tr : row.trial_results)
            if (tr.converged) ss += (tr.cos2 - row.cos2_mean) * (tr.cos2 - row.cos2_mean);
        row.cos2_std = good > 1 ? std::sqrt(ss / (good - 1)) : 0.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

void save_instance(const Instance& inst, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    const char magic[8] = {'S', 'P', 'E', 'C', 'I', 'N', 'S', 'T'};
    out.write(magic, 8);
    const std::uint32_t version = 1;
    const std::uint32_t mode = inst.mode == Mode::Complex ? 0 : 1;
    const std::uint64_t n = static_cast<std::uint64_t>(inst.n);
    const std::uint64_t m = static_cast<std::uint64_t>(inst.m);
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&mode), 4);
    out.write(reinterpret_cast<const char*>(&n), 8);
    out.write(reinterpret_cast<const char*>(&m), 8);
    out.write(reinterpret_cast<const char*>(&inst.seed), 8);
    for (std::size_t k = 0; k < inst.rows_re.size(); ++k) {
        const double re = inst.rows_re[k];
        const double im = inst.rows_im.empty() ? 0.0 : inst.rows_im[k];
        out.write(reinterpret_cast<const char*>(&re), 8);
        out.write(reinterpret_cast<const char*>(&im), 8);
    }
    out.write(reinterpret_cast<const char*>(inst.measurements.data()),
              static_cast<std::streamsize>(inst.measurements.size() * 8));
    if (!out) throw Error("short write to " + path);
}

Instance load_instance(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (std::memcmp(magic, "SPECINST", 8) != 0) throw Error(path + ": bad magic");
    std::uint32_t version = 0, mode = 0;
    std::uint64_t n = 0, m = 0, seed = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&mode), 4);
    in.read(reinterpret_cast<char*>(&n), 8);
    in.read(reinterpret_cast<char*>(&m), 8);
    in.read(reinterpret_cast<char*>(&seed), 8);
    if (version != 1) throw Error(path + ": unsupported version");
    Instance inst;
    inst.n = static_cast<int>(n);
    inst.m = static_cast<int>(m);
    inst.mode = mode == 0 ? Mode::Complex : Mode::Real;
    inst.seed = seed;
    // the dump stores measurement-model inputs only; the conventional default
    // signal e_1 is restored here (see README)
    inst.signal.assign(inst.n, {0.0, 0.0});
    inst.signal[0] = 1.0;
    inst.rows_re.resize(n * m);
    if (inst.mode == Mode::Complex) inst.rows_im.resize(n * m);
    for (std::size_t k = 0; k < n * m; ++k) {
        double re = 0.0, im = 0.0;
        in.read(reinterpret_cast<char*>(&re), 8);
        in.read(reinterpret_cast<char*>(&im), 8);
        inst.rows_re[k] = re;
        if (!inst.rows_im.empty()) inst.rows_im[k] = im;
    }
    inst.measurements.resize(m);
    in.read(reinterpret_cast<char*>(inst.measurements.data()),
            static_cast<std::streamsize>(m * 8));
    if (!in) throw Error(path + ": truncated file");
    return inst;
}

} // namespace specinit::montecarlo
