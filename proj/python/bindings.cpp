#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "specinit/asymptotics.hpp"
#include "specinit/channels.hpp"
#include "specinit/design.hpp"
#include "specinit/montecarlo.hpp"
#include "specinit/preprocess.hpp"
#include "specinit/version.hpp"

namespace py = pybind11;
using namespace specinit;
using channels::Channel;
using channels::Mode;
using design::CFunction;
using preprocess::Preprocessor;

namespace {

Mode mode_of(const std::string& s) {
    if (s == "complex") return Mode::Complex;
    if (s == "real") return Mode::Real;
    throw Error("mode must be 'complex' or 'real'");
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "optimal spectral-initialization design for generalized phase retrieval";
    m.attr("__version__") = SPECINIT_VERSION;

    py::register_exception<Error>(m, "SpecinitError");

    py::class_<Channel>(m, "Channel")
        .def_static(
            "poisson", [](double kappa, const std::string& mode) {
                return Channel::poisson(kappa, mode_of(mode));
            },
            py::arg("kappa"), py::arg("mode") = "complex")
        .def_static(
            "gaussian_noise", [](double sigma2, const std::string& mode) {
                return Channel::gaussian_noise(sigma2, mode_of(mode));
            },
            py::arg("sigma2"), py::arg("mode") = "complex")
        .def_static(
            "noiseless", [](const std::string& mode) { return Channel::noiseless(mode_of(mode)); },
            py::arg("mode") = "complex")
        .def_static("from_file", [](const std::string& path) { return Channel::from_file(path); },
                    py::arg("path"))
        .def("describe", &Channel::describe)
        .def("eta", [](const Channel& ch, double y) { return ch.functions().eta_at(y); })
        .def("mu", [](const Channel& ch, double y) { return ch.functions().mu_at(y); })
        .def("alpha_weak", [](const Channel& ch) { return channels::alpha_weak(ch); })
        .def("certificate_integral",
             [](const Channel& ch) { return channels::mu_sq_over_eta_integral(ch); })
        .def("mu_over_eta_infimum",
             [](const Channel& ch) { return channels::mu_over_eta_infimum(ch).value; })
        .def("__repr__", [](const Channel& ch) { return "<Channel " + ch.describe() + ">"; });

    py::class_<preprocess::Bounds>(m, "Bounds")
        .def_readonly("tau", &preprocess::Bounds::tau)
        .def_readonly("t_min", &preprocess::Bounds::t_min);

    py::class_<Preprocessor>(m, "Preprocessor")
        .def_static("trim", &Preprocessor::trim, py::arg("a"))
        .def_static("subset", &Preprocessor::subset, py::arg("b"))
        .def_static("mm", &Preprocessor::mm, py::arg("channel"), py::arg("alpha"))
        .def_static("optimal_star", &Preprocessor::optimal_star, py::arg("channel"))
        .def_static("tabulated", &Preprocessor::tabulated, py::arg("y"), py::arg("t"))
        .def_static("scaled", &Preprocessor::scaled, py::arg("base"), py::arg("factor"))
        .def("__call__", &Preprocessor::evaluate, py::arg("y"))
        .def("bounds", &Preprocessor::bounds, py::arg("channel"))
        .def("is_feasible", &Preprocessor::is_feasible, py::arg("channel"))
        .def("name", &Preprocessor::name)
        .def("__repr__", [](const Preprocessor& p) { return "<Preprocessor " + p.name() + ">"; });

    py::class_<design::DesignResult>(m, "DesignResult")
        .def_readonly("alpha", &design::DesignResult::alpha)
        .def_readonly("alpha_weak", &design::DesignResult::alpha_weak)
        .def_readonly("beta_alpha", &design::DesignResult::beta_alpha)
        .def_readonly("rho_opt", &design::DesignResult::rho_opt)
        .def_property_readonly("above_threshold", [](const design::DesignResult& r) {
            return r.regime == design::Regime::AboveThreshold;
        });

    py::class_<design::OptimalDesign>(m, "OptimalDesign")
        .def_readonly("feasible", &design::OptimalDesign::feasible)
        .def_readonly("inf_mu_over_eta", &design::OptimalDesign::inf_mu_over_eta)
        .def_readonly("tau", &design::OptimalDesign::tau)
        .def_readonly("t_min", &design::OptimalDesign::t_min)
        .def_readonly("note", &design::OptimalDesign::note)
        .def_property_readonly("preprocessor", [](const design::OptimalDesign& od) {
            return od.preprocessor ? py::cast(*od.preprocessor) : py::none();
        });

    py::class_<CFunction>(m, "CFunction")
        .def("__call__", [](const CFunction& c, double y) { return c(y); });

    m.def("f_beta", [](const Channel& ch, double beta) { return design::f_beta(ch, beta); },
          py::arg("channel"), py::arg("beta"));
    m.def("beta_alpha",
          [](const Channel& ch, double alpha) { return design::beta_alpha(ch, alpha); },
          py::arg("channel"), py::arg("alpha"));
    m.def("rho_optimal",
          [](const Channel& ch, double alpha) { return design::rho_optimal(ch, alpha); },
          py::arg("channel"), py::arg("alpha"));
    m.def("design_at", [](const Channel& ch, double alpha) { return design::design_at(ch, alpha); },
          py::arg("channel"), py::arg("alpha"));
    m.def("optimal_preprocessor", &design::optimal_preprocessor, py::arg("channel"));
    m.def("epsilon_preprocessor",
          [](const Channel& ch, double alpha, double eps) {
              return design::epsilon_preprocessor(ch, alpha, eps);
          },
          py::arg("channel"), py::arg("alpha"), py::arg("eps"));
    m.def("c_star", [](const Channel& ch, double alpha) { return design::c_star(ch, alpha); },
          py::arg("channel"), py::arg("alpha"));

    py::class_<asymptotics::Prediction>(m, "Prediction")
        .def_readonly("alpha", &asymptotics::Prediction::alpha)
        .def_readonly("rho", &asymptotics::Prediction::rho)
        .def_property_readonly("lambda_star",
                               [](const asymptotics::Prediction& p) {
                                   return p.lambda_star ? py::cast(*p.lambda_star) : py::none();
                               })
        .def_property_readonly("correlated",
                               [](const asymptotics::Prediction& p) {
                                   return p.phase == asymptotics::Phase::Correlated;
                               })
        .def("__repr__", [](const asymptotics::Prediction& p) {
            return "<Prediction alpha=" + std::to_string(p.alpha) +
                   " rho=" + std::to_string(p.rho) + ">";
        });

    m.def("predict",
          [](const Channel& ch, const Preprocessor& T, double alpha) {
              py::gil_scoped_release release;
              return asymptotics::solve_lambda_star(ch, T, alpha);
          },
          py::arg("channel"), py::arg("preprocessor"), py::arg("alpha"));
    m.def("psi",
          [](const Channel& ch, const Preprocessor& T, double lam) {
              return asymptotics::psi(ch, T, lam);
          },
          py::arg("channel"), py::arg("preprocessor"), py::arg("lambda_"));
    m.def("phi",
          [](const Channel& ch, const Preprocessor& T, double alpha, double lam) {
              return asymptotics::phi(ch, T, alpha, lam);
          },
          py::arg("channel"), py::arg("preprocessor"), py::arg("alpha"), py::arg("lambda_"));

    py::class_<montecarlo::TrialResult>(m, "TrialResult")
        .def_readonly("alpha", &montecarlo::TrialResult::alpha)
        .def_readonly("cos2", &montecarlo::TrialResult::cos2)
        .def_readonly("eigenvalue", &montecarlo::TrialResult::eigenvalue)
        .def_readonly("iterations", &montecarlo::TrialResult::iterations)
        .def_readonly("converged", &montecarlo::TrialResult::converged)
        .def_readonly("wall_time", &montecarlo::TrialResult::wall_time);

    py::class_<montecarlo::SweepRow>(m, "SweepRow")
        .def_readonly("alpha", &montecarlo::SweepRow::alpha)
        .def_readonly("n", &montecarlo::SweepRow::n)
        .def_readonly("m", &montecarlo::SweepRow::m)
        .def_readonly("trials", &montecarlo::SweepRow::trials)
        .def_readonly("cos2_mean", &montecarlo::SweepRow::cos2_mean)
        .def_readonly("cos2_std", &montecarlo::SweepRow::cos2_std)
        .def_readonly("failures", &montecarlo::SweepRow::failures)
        .def_readonly("prediction", &montecarlo::SweepRow::prediction)
        .def_readonly("trial_results", &montecarlo::SweepRow::trial_results);

    m.def("run_trial",
          [](const Channel& ch, const Preprocessor& T, int n, double alpha, std::uint64_t seed,
             std::uint64_t stream, double tol, int max_iters) {
              py::gil_scoped_release release;
              numerics::Rng rng(seed, stream);
              const int mm = static_cast<int>(std::llround(alpha * n));
              const auto inst = montecarlo::generate_instance(ch, n, mm, rng);
              const auto eig = montecarlo::leading_eigenvector(inst, T, tol, max_iters);
              montecarlo::TrialResult tr;
              tr.alpha = alpha;
              tr.cos2 = montecarlo::squared_cosine(eig.x1, inst.signal);
              tr.eigenvalue = eig.lambda1;
              tr.iterations = eig.iterations;
              tr.shift_used = eig.shift_used;
              tr.seed = seed;
              tr.stream = stream;
              return tr;
          },
          py::arg("channel"), py::arg("preprocessor"), py::arg("n"), py::arg("alpha"),
          py::arg("seed") = 1, py::arg("stream") = 0, py::arg("tol") = 1e-8,
          py::arg("max_iters") = 10000);

    m.def("run_sweep",
          [](const Channel& ch, const Preprocessor& T, int n, const std::vector<double>& alphas,
             int trials, std::uint64_t seed, double tol, int threads) {
              py::gil_scoped_release release;
              montecarlo::SweepOptions opts;
              opts.eig_tol = tol;
              opts.threads = threads;
              return montecarlo::run_sweep(
                  ch, [&T](double) { return T; }, n, alphas, trials, seed, opts);
          },
          py::arg("channel"), py::arg("preprocessor"), py::arg("n"), py::arg("alphas"),
          py::arg("trials") = 16, py::arg("seed") = 1, py::arg("tol") = 1e-8,
          py::arg("threads") = 0);

    m.def("squared_cosine",
          [](const std::vector<std::complex<double>>& x,
             const std::vector<std::complex<double>>& xi) {
              return montecarlo::squared_cosine(x, xi);
          },
          py::arg("x"), py::arg("xi"));
}
