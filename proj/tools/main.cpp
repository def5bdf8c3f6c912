#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "specinit/asymptotics.hpp"
#include "specinit/channels.hpp"
#include "specinit/design.hpp"
#include "specinit/gridspec.hpp"
#include "specinit/montecarlo.hpp"
#include "specinit/preprocess.hpp"
#include "specinit/svg_plot.hpp"
#include "specinit/version.hpp"

namespace {

using namespace specinit;
using channels::Channel;
using channels::Mode;
using gridspec::format_number;
using preprocess::Preprocessor;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNoConvergence = 2;

struct ChannelOpts {
    std::string name = "poisson";
    double kappa = 5.0;
    double sigma2 = 1.0;
    std::string mode = "complex";
    std::string file;
};

void add_channel_opts(CLI::App* cmd, ChannelOpts& c) {
    cmd->add_option("--channel", c.name, "poisson | gaussian | noiseless | file");
    cmd->add_option("--kappa", c.kappa, "Poisson SNR parameter");
    cmd->add_option("--sigma2", c.sigma2, "Gaussian noise variance");
    cmd->add_option("--mode", c.mode, "complex | real");
    cmd->add_option("--channel-file", c.file, "custom channel spec file");
}

Channel make_channel(const ChannelOpts& c) {
    Mode mode;
    if (c.mode == "complex") mode = Mode::Complex;
    else if (c.mode == "real") mode = Mode::Real;
    else throw ConfigError("unknown mode '" + c.mode + "'");
    if (c.name == "poisson") return Channel::poisson(c.kappa, mode);
    if (c.name == "gaussian") return Channel::gaussian_noise(c.sigma2, mode);
    if (c.name == "noiseless") return Channel::noiseless(mode);
    if (c.name == "file") {
        if (c.file.empty()) throw ConfigError("--channel file needs --channel-file");
        return Channel::from_file(c.file);
    }
    throw ConfigError("unknown channel '" + c.name + "'");
}

// "optimal" | "mm" | "trim" | "trim:7" | "subset" | "subset:2.5" |
// "epsilon:0.3" | "file:path"; parameterless trim/subset auto-tune per alpha.
struct PreprocChoice {
    std::string spec;
    std::string family;
    std::optional<double> param;
    std::string path;
};

PreprocChoice parse_preproc(const std::string& s) {
    PreprocChoice p;
    p.spec = s;
    const auto colon = s.find(':');
    p.family = s.substr(0, colon);
    if (colon != std::string::npos) {
        const std::string rest = s.substr(colon + 1);
        if (p.family == "file") {
            p.path = rest;
        } else {
            try {
                p.param = std::stod(rest);
            } catch (const std::exception&) {
                throw ConfigError("bad preprocessor parameter in '" + s + "'");
            }
        }
    }
    const std::vector<std::string> known = {"optimal", "mm", "trim", "subset", "epsilon", "file"};
    if (std::find(known.begin(), known.end(), p.family) == known.end())
        throw ConfigError("unknown preprocessor '" + s + "'");
    if (p.family == "epsilon" && !p.param) throw ConfigError("epsilon needs a value: epsilon:0.3");
    return p;
}

// Theory-side tuning per the protocol: trim over integer a in {1..50},
// subset over 50 log-spaced b in [0.1, 20]; best by predicted rho.
Preprocessor tuned_preprocessor(const PreprocChoice& p, const Channel& ch, double alpha) {
    if (p.family == "optimal") {
        auto od = design::optimal_preprocessor(ch);
        if (!od.feasible) throw ConfigError("optimal preprocessor infeasible here: " + od.note);
        return *od.preprocessor;
    }
    if (p.family == "mm") return Preprocessor::mm(ch, alpha);
    if (p.family == "epsilon") return design::epsilon_preprocessor(ch, alpha, *p.param);
    if (p.family == "file") return Preprocessor::tabulated_from_file(p.path);
    if (p.family == "trim") {
        if (p.param) return Preprocessor::trim(*p.param);
        double best_rho = -1.0;
        Preprocessor best = Preprocessor::trim(1.0);
        for (int a = 1; a <= 50; ++a) {
            Preprocessor cand = Preprocessor::trim(static_cast<double>(a));
            const double rho = asymptotics::solve_lambda_star(ch, cand, alpha).rho;
            if (rho > best_rho) {
                best_rho = rho;
                best = cand;
            }
        }
        return best;
    }
    // subset
    if (p.param) return Preprocessor::subset(*p.param);
    double best_rho = -1.0;
    Preprocessor best = Preprocessor::subset(0.1);
    for (int i = 0; i < 50; ++i) {
        const double b = 0.1 * std::pow(200.0, i / 49.0);
        Preprocessor cand = Preprocessor::subset(b);
        const double rho = asymptotics::solve_lambda_star(ch, cand, alpha).rho;
        if (rho > best_rho) {
            best_rho = rho;
            best = cand;
        }
    }
    return best;
}

std::string resolved_config_block(const CLI::App& app) {
    std::string cfg = app.config_to_str(true, false);
    std::ostringstream out;
    out << "# specinit " << SPECINIT_VERSION << "\n# config:\n";
    std::istringstream ss(cfg);
    std::string line;
    while (std::getline(ss, line)) out << "# " << line << "\n";
    return out.str();
}

std::filesystem::path out_path(const std::string& out_dir, const std::string& name) {
    std::filesystem::path dir = out_dir;
    if (dir.empty()) {
        const char* env = std::getenv("SPECINIT_OUT");
        dir = env ? env : ".";
    }
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream f(p);
    if (!f) throw ConfigError("cannot open output file " + p.string());
    return f;
}

int cmd_threshold(const CLI::App& app, const ChannelOpts& copts, const std::string& json_path) {
    const Channel ch = make_channel(copts);
    const double integral = channels::mu_sq_over_eta_integral(ch);
    const double aw = channels::alpha_weak(ch);
    std::cout << "channel=" << ch.describe() << "\n";
    std::cout << "alpha_weak=" << format_number(aw) << "\n";
    std::cout << "integral=" << format_number(integral) << "\n";
    if (!json_path.empty()) {
        nlohmann::json j{{"channel", ch.describe()},
                         {"alpha_weak", aw},
                         {"certificate_integral", integral},
                         {"version", SPECINIT_VERSION}};
        std::istringstream cfg(app.config_to_str(true, false));
        std::string line;
        nlohmann::json jcfg = nlohmann::json::array();
        while (std::getline(cfg, line)) jcfg.push_back(line);
        j["config"] = jcfg;
        open_out(json_path) << j.dump(2) << "\n";
    }
    return kExitOk;
}

int cmd_design_curve(const CLI::App& app, const ChannelOpts& copts, const std::string& alphas,
                     double epsilon, const std::string& out_dir, const std::string& prefix) {
    const Channel ch = make_channel(copts);
    const auto grid = gridspec::parse_alpha_grid(alphas);
    auto csv = open_out(out_path(out_dir, prefix + "design_curve.csv"));
    csv << resolved_config_block(app);
    csv << "alpha,beta_alpha,rho_opt,regime\n";
    for (double a : grid) {
        const auto r = design::design_at(ch, a);
        csv << format_number(a) << "," << format_number(r.beta_alpha) << ","
            << format_number(r.rho_opt) << ","
            << (r.regime == design::Regime::AboveThreshold ? "above" : "below") << "\n";
    }

    // companion tabulation: T_opt when attainable (alpha-independent), else
    // the epsilon family per grid alpha
    auto tab = open_out(out_path(out_dir, prefix + "preproc.csv"));
    tab << resolved_config_block(app);
    tab << "alpha,y,T\n";
    const auto& chf = ch.functions();
    const bool discrete = chf.support.kind == numerics::SupportKind::DiscreteNonnegativeIntegers;
    std::vector<double> ys;
    if (discrete)
        for (int y = 0; y <= 40; ++y) ys.push_back(y);
    else
        for (int i = 0; i <= 200; ++i) ys.push_back(20.0 * i / 200.0);

    const auto od = design::optimal_preprocessor(ch);
    if (od.feasible && epsilon <= 0.0) {
        for (double y : ys)
            tab << "," << format_number(y) << "," << format_number(od.preprocessor->evaluate(y))
                << "\n";
    } else {
        const double eps = epsilon > 0.0 ? epsilon : 0.3;
        for (double a : grid) {
            if (!(a > channels::alpha_weak(ch))) continue;
            const auto T = design::epsilon_preprocessor(ch, a, eps);
            for (double y : ys)
                tab << format_number(a) << "," << format_number(y) << ","
                    << format_number(T.evaluate(y)) << "\n";
        }
    }
    return kExitOk;
}

int cmd_predict(const CLI::App& app, const ChannelOpts& copts, const std::string& alphas,
                const std::string& preproc_list, double scale, const std::string& out_dir,
                const std::string& prefix) {
    std::vector<std::string> preprocs;
    std::istringstream pss(preproc_list);
    std::string tok;
    while (std::getline(pss, tok, ','))
        if (!tok.empty()) preprocs.push_back(tok);
    if (preprocs.empty()) throw ConfigError("empty --preproc list");
    const Channel ch = make_channel(copts);
    const auto grid = gridspec::parse_alpha_grid(alphas);
    auto csv = open_out(out_path(out_dir, prefix + "predict.csv"));
    csv << resolved_config_block(app);
    csv << "alpha,preproc,rho_theory,lambda_star,cos2_mean,cos2_std,trials,n,flags\n";
    for (const auto& spec : preprocs) {
        const auto choice = parse_preproc(spec);
        for (double a : grid) {
            std::string flags = "ok";
            double rho = 0.0, lam = std::nan("");
            std::string pname = choice.spec;
            try {
                Preprocessor T = tuned_preprocessor(choice, ch, a);
                if (scale != 1.0) T = Preprocessor::scaled(T, scale);
                pname = T.name();
                const auto pred = asymptotics::solve_lambda_star(ch, T, a);
                rho = pred.rho;
                if (pred.lambda_star) lam = *pred.lambda_star;
            } catch (const BelowThreshold&) {
                flags = "below-threshold";
            }
            csv << format_number(a) << "," << pname << "," << format_number(rho) << ","
                << (std::isnan(lam) ? "" : format_number(lam)) << ",,,0,0," << flags << "\n";
        }
    }
    return kExitOk;
}

int cmd_simulate(const CLI::App& app, const ChannelOpts& copts, const std::string& alphas,
                 const std::string& preproc, int n, int trials, std::uint64_t seed,
                 double eig_tol, int threads, bool svg, const std::string& out_dir,
                 const std::string& prefix) {
    const Channel ch = make_channel(copts);
    const auto grid = gridspec::parse_alpha_grid(alphas);
    const auto choice = parse_preproc(preproc);

    // alpha-dependent preprocessors (mm, epsilon) do not exist below the
    // threshold; those grid points become flagged rows with no trials
    std::vector<double> live;
    std::vector<bool> below(grid.size(), false);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        try {
            tuned_preprocessor(choice, ch, grid[i]);
            live.push_back(grid[i]);
        } catch (const BelowThreshold&) {
            below[i] = true;
        }
    }

    montecarlo::SweepOptions opts;
    opts.eig_tol = eig_tol;
    opts.threads = threads;
    const auto rows = montecarlo::run_sweep(
        ch, [&](double a) { return tuned_preprocessor(choice, ch, a); }, n, live, trials, seed,
        opts);

    auto csv = open_out(out_path(out_dir, prefix + "simulate.csv"));
    csv << resolved_config_block(app);
    csv << "alpha,preproc,rho_theory,lambda_star,cos2_mean,cos2_std,trials,n,flags\n";
    bool any_failure = false;
    std::size_t next_live = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (below[i]) {
            csv << format_number(grid[i]) << "," << choice.spec << ",0,,,,0," << n
                << ",below-threshold\n";
            continue;
        }
        const auto& row = rows[next_live++];
        std::string flags = "ok";
        if (row.failures > 0) {
            flags = "noconv:" + std::to_string(row.failures);
            any_failure = true;
        }
        csv << format_number(row.alpha) << "," << choice.spec << ","
            << format_number(row.prediction.rho) << ","
            << (row.prediction.lambda_star ? format_number(*row.prediction.lambda_star) : "")
            << "," << format_number(row.cos2_mean) << "," << format_number(row.cos2_std) << ","
            << row.trials << "," << row.n << "," << flags << "\n";
    }

    if (svg) {
        svgplot::Figure fig;
        fig.title = "simulation vs prediction: " + ch.describe() + ", " + choice.spec;
        fig.xlabel = "alpha = m/n";
        fig.ylabel = "squared cosine";
        svgplot::Series theory;
        theory.label = "prediction";
        theory.color = "#d62728";
        svgplot::Series mc;
        mc.label = "mean over " + std::to_string(trials) + " trials (+/- 1 std)";
        mc.color = "#1f77b4";
        mc.line = false;
        for (const auto& row : rows) {
            theory.x.push_back(row.alpha);
            theory.y.push_back(row.prediction.rho);
            mc.x.push_back(row.alpha);
            mc.y.push_back(row.cos2_mean);
            mc.yerr.push_back(row.cos2_std);
        }
        fig.series = {theory, mc};
        svgplot::write(fig, out_path(out_dir, prefix + "simulate.svg").string());
    }
    return any_failure ? kExitNoConvergence : kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"optimal spectral-initialization design for generalized phase retrieval"};
    app.option_defaults()->always_capture_default(true);
    app.set_config("--config", "", "read options from a config file");
    app.require_subcommand(1);

    // threshold
    auto* th = app.add_subcommand("threshold", "weak reconstruction threshold and certificate");
    ChannelOpts th_ch;
    add_channel_opts(th, th_ch);
    std::string th_json;
    th->add_option("--json", th_json, "also write a JSON report to this path");

    // design-curve
    auto* dc = app.add_subcommand("design-curve", "beta_alpha and rho_opt over an alpha grid");
    ChannelOpts dc_ch;
    add_channel_opts(dc, dc_ch);
    std::string dc_alphas = "1.2:12:0.1", dc_out, dc_prefix;
    double dc_eps = 0.0;
    dc->add_option("--alphas", dc_alphas, "grid: start:stop:step or comma list");
    dc->add_option("--epsilon", dc_eps, "tabulate the epsilon family at this epsilon");
    dc->add_option("--out", dc_out, "output directory (default $SPECINIT_OUT or .)");
    dc->add_option("--prefix", dc_prefix, "output filename prefix");

    // predict
    auto* pr = app.add_subcommand("predict", "asymptotic rho(alpha; T) for chosen preprocessors");
    ChannelOpts pr_ch;
    add_channel_opts(pr, pr_ch);
    std::string pr_alphas = "1.5:12:0.5", pr_out, pr_prefix;
    std::string pr_preprocs = "optimal";
    double pr_scale = 1.0;
    pr->add_option("--alphas", pr_alphas, "grid: start:stop:step or comma list");
    pr->add_option("--preproc", pr_preprocs,
                   "comma list of: optimal | mm | trim[:a] | subset[:b] | epsilon:e | file:path");
    pr->add_option("--scale", pr_scale, "scale every preprocessor by this factor");
    pr->add_option("--out", pr_out, "output directory");
    pr->add_option("--prefix", pr_prefix, "output filename prefix");

    // simulate
    auto* si = app.add_subcommand("simulate", "finite-n Monte Carlo joined against predictions");
    ChannelOpts si_ch;
    add_channel_opts(si, si_ch);
    std::string si_alphas = "2:12:1", si_preproc = "optimal", si_out, si_prefix;
    int si_n = 1024, si_trials = 16, si_threads = 0;
    std::uint64_t si_seed = 1;
    double si_tol = 1e-8;
    bool si_svg = false;
    si->add_option("--alphas", si_alphas, "grid: start:stop:step or comma list");
    si->add_option("--preproc", si_preproc, "preprocessor spec");
    si->add_option("--n", si_n, "signal dimension");
    si->add_option("--trials", si_trials, "independent trials per alpha");
    si->add_option("--seed", si_seed, "base seed (trial t of row r uses stream r<<32|t)");
    si->add_option("--eig-tol", si_tol, "power-iteration tolerance");
    si->add_option("--threads", si_threads, "concurrent trials (0: hardware)");
    si->add_flag("--svg", si_svg, "write an overlay plot");
    si->add_option("--out", si_out, "output directory");
    si->add_option("--prefix", si_prefix, "output filename prefix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (th->parsed()) return cmd_threshold(app, th_ch, th_json);
        if (dc->parsed()) return cmd_design_curve(app, dc_ch, dc_alphas, dc_eps, dc_out, dc_prefix);
        if (pr->parsed())
            return cmd_predict(app, pr_ch, pr_alphas, pr_preprocs, pr_scale, pr_out, pr_prefix);
        if (si->parsed())
            return cmd_simulate(app, si_ch, si_alphas, si_preproc, si_n, si_trials, si_seed,
                                si_tol, si_threads, si_svg, si_out, si_prefix);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NoConvergence& e) {
        std::cerr << "no convergence: " << e.what() << "\n";
        return kExitNoConvergence;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
