// Command-line front end for the density and graph-model library.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "npef/ergm.hpp"
#include "npef/errors.hpp"
#include "npef/expfam.hpp"
#include "npef/experiments.hpp"
#include "npef/graph.hpp"
#include "npef/kde.hpp"
#include "npef/kernel.hpp"
#include "npef/npexp.hpp"
#include "npef/samples.hpp"

namespace {

using namespace npef;

struct GlobalFlags {
    std::uint64_t seed = 0;
    int threads = 1;
    bool quiet = false;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write file: " + path);
    out << text;
    if (text.empty() || text.back() != '\n') out << '\n';
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::istringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw InputError("bad number in list: " + tok);
        }
    }
    if (out.empty()) throw InputError("empty number list");
    return out;
}

BetaSchedule parse_schedule(const std::string& name, double scale) {
    if (name == "inv-sqrt") return BetaSchedule::inv_sqrt(scale);
    if (name == "inv-log") return BetaSchedule::inv_log(scale);
    if (name == "const") return BetaSchedule::constant(scale);
    throw InputError("unknown beta schedule: " + name);
}

// h is either a number or the literal "cv".
double resolve_bandwidth(const std::string& h_arg, const SampleSet& sample, KernelFamily family,
                         int folds, bool quiet) {
    if (h_arg != "cv") {
        try {
            return std::stod(h_arg);
        } catch (const std::exception&) {
            throw InputError("--h must be a number or 'cv': " + h_arg);
        }
    }
    std::vector<double> grid;
    for (double h = 0.25; h <= 3.0 + 1e-9; h += 0.25) grid.push_back(h);
    const auto cv = cv_bandwidth(sample, family, grid, folds);
    if (!quiet) std::cerr << "cross-validated bandwidth: " << cv.h << '\n';
    return cv.h;
}

ChainConfig make_chain(const GlobalFlags& g, int burn_in, int thinning, int samples) {
    ChainConfig chain;
    chain.burn_in = burn_in;
    chain.thinning = thinning;
    chain.num_samples = samples;
    chain.seed = g.seed;
    return chain;
}

int run(int argc, char** argv) {
    CLI::App app{"density estimation with kernel-augmented exponential families, "
                 "plus exact and sampled random-graph models"};
    app.require_subcommand(1);
    // Subcommands use "--h" for bandwidths, so help must not claim "-h".

    GlobalFlags global;
    app.add_option("--seed", global.seed, "random seed")->capture_default_str();
    app.add_option("--threads", global.threads, "worker threads (reserved)")
        ->capture_default_str();
    app.add_flag("--quiet", global.quiet, "suppress progress output");

    // fit-density
    auto* fit_cmd = app.add_subcommand("fit-density", "fit a kernel-augmented density model");
    fit_cmd->set_help_flag("--help", "print help");
    std::string fd_input, fd_stats = "gaussian", fd_kernel = "gaussian", fd_h = "cv";
    std::string fd_schedule = "inv-sqrt", fd_target, fd_out = "model.json";
    double fd_beta_scale = 1.0, fd_tol = 1e-6, fd_margin = 1.0;
    int fd_folds = 5, fd_points = 2001;
    fit_cmd->add_option("--input", fd_input, "training sample CSV")->required();
    fit_cmd->add_option("--stats", fd_stats, "gaussian (x, x^2)")->capture_default_str();
    fit_cmd->add_option("--kernel", fd_kernel, "gaussian|uniform|smoothed|quadratic")
        ->capture_default_str();
    fit_cmd->add_option("--h", fd_h, "bandwidth, or 'cv'")->capture_default_str();
    fit_cmd->add_option("--beta-schedule", fd_schedule, "inv-sqrt|inv-log|const")
        ->capture_default_str();
    fit_cmd->add_option("--beta-scale", fd_beta_scale, "schedule scale c")->capture_default_str();
    fit_cmd->add_option("--target-moments", fd_target, "\"m1,m2\" to constrain to known moments");
    fit_cmd->add_option("--tol", fd_tol, "convergence tolerance")->capture_default_str();
    fit_cmd->add_option("--cv-folds", fd_folds, "folds for --h cv")->capture_default_str();
    fit_cmd->add_option("--support-margin", fd_margin, "box margin beyond the data range")
        ->capture_default_str();
    fit_cmd->add_option("--grid-points", fd_points, "quadrature points per dimension")
        ->capture_default_str();
    fit_cmd->add_option("--out", fd_out, "output model JSON")->capture_default_str();

    // eval-density
    auto* eval_cmd = app.add_subcommand("eval-density", "evaluate a fitted model on points");
    eval_cmd->set_help_flag("--help", "print help");
    std::string ed_model, ed_input, ed_out = "density.csv";
    eval_cmd->add_option("--model", ed_model, "model JSON from fit-density")->required();
    eval_cmd->add_option("--input", ed_input, "points CSV")->required();
    eval_cmd->add_option("--out", ed_out, "per-point log-density CSV")->capture_default_str();

    // kde
    auto* kde_cmd = app.add_subcommand("kde", "kernel density estimate at given points");
    kde_cmd->set_help_flag("--help", "print help");
    std::string kd_input, kd_eval, kd_kernel = "gaussian", kd_h = "cv", kd_out = "kde.csv";
    int kd_folds = 5;
    kde_cmd->add_option("--input", kd_input, "sample CSV (the centers)")->required();
    kde_cmd->add_option("--eval", kd_eval, "points CSV; defaults to the sample itself");
    kde_cmd->add_option("--kernel", kd_kernel, "gaussian|uniform")->capture_default_str();
    kde_cmd->add_option("--h", kd_h, "bandwidth, or 'cv'")->capture_default_str();
    kde_cmd->add_option("--cv-folds", kd_folds, "folds for --h cv")->capture_default_str();
    kde_cmd->add_option("--out", kd_out, "output CSV")->capture_default_str();

    // fit-ergm / fit-nergm
    std::string fe_graph, fe_mode = "exact", fe_out = "model.json", fe_hist;
    double fe_h = 8.0, fe_beta = 0.2, fe_step = 10.0;
    int fe_burn = 1000, fe_thin = 100, fe_samples = 100, fe_steps = 200;
    auto add_graph_fit_opts = [&](CLI::App* cmd, bool nergm) {
        cmd->set_help_flag("--help", "print help");
        cmd->add_option("--graph", fe_graph, "observed graph edge list")->required();
        cmd->add_option("--mode", fe_mode, "exact (n<=8) or mcmc")->capture_default_str();
        cmd->add_option("--histogram", fe_hist,
                        "precomputed feature histogram CSV (exact mode; else enumerated)");
        if (nergm) {
            cmd->add_option("--h", fe_h, "kernel bandwidth")->capture_default_str();
            cmd->add_option("--beta", fe_beta, "augmented-parameter box half-width")
                ->capture_default_str();
        }
        cmd->add_option("--step-size", fe_step, "gradient step (mcmc mode)")
            ->capture_default_str();
        cmd->add_option("--burn-in", fe_burn, "sampler burn-in")->capture_default_str();
        cmd->add_option("--thinning", fe_thin, "sampler thinning")->capture_default_str();
        cmd->add_option("--samples", fe_samples, "sampler pool size")->capture_default_str();
        cmd->add_option("--steps", fe_steps, "gradient steps (mcmc mode)")->capture_default_str();
        cmd->add_option("--out", fe_out, "output model JSON")->capture_default_str();
    };
    auto* ergm_cmd = app.add_subcommand("fit-ergm", "edge/triangle model, moment matching");
    ergm_cmd->set_help_flag("--help", "print help");
    add_graph_fit_opts(ergm_cmd, false);
    auto* nergm_cmd =
        app.add_subcommand("fit-nergm", "mass-preserving model with one kernel feature");
    add_graph_fit_opts(nergm_cmd, true);

    // sample-graphs
    auto* sample_cmd = app.add_subcommand("sample-graphs", "Gibbs-sample graphs from a model");
    sample_cmd->set_help_flag("--help", "print help");
    std::string sg_model, sg_out_dir = "samples", sg_init = "empty", sg_observed;
    int sg_count = 100, sg_burn = 1000, sg_thin = 100;
    sample_cmd->add_option("--model", sg_model, "model JSON")->required();
    sample_cmd->add_option("--count", sg_count, "number of samples")->capture_default_str();
    sample_cmd->add_option("--burn-in", sg_burn, "")->capture_default_str();
    sample_cmd->add_option("--thinning", sg_thin, "")->capture_default_str();
    sample_cmd->add_option("--init", sg_init, "empty|random|observed")->capture_default_str();
    sample_cmd->add_option("--observed", sg_observed, "edge list for --init observed");
    sample_cmd->add_option("--out-dir", sg_out_dir, "directory for edge lists + diagnostics")
        ->capture_default_str();

    // gof
    auto* gof_cmd = app.add_subcommand("gof", "goodness-of-fit bands against sampled graphs");
    gof_cmd->set_help_flag("--help", "print help");
    std::string gf_observed, gf_dir, gf_out = "gof";
    gof_cmd->add_option("--observed", gf_observed, "observed graph edge list")->required();
    gof_cmd->add_option("--samples-dir", gf_dir, "directory of sampled edge lists")->required();
    gof_cmd->add_option("--out", gf_out, "output stem (writes .json and .csv)")
        ->capture_default_str();

    // enumerate
    auto* enum_cmd = app.add_subcommand("enumerate", "exact (edges, triangles) histogram");
    enum_cmd->set_help_flag("--help", "print help");
    int en_n = 5;
    std::string en_out = "histogram.csv";
    enum_cmd->add_option("--n", en_n, "node count, 2..8")->required();
    enum_cmd->add_option("--out", en_out, "output CSV")->capture_default_str();

    // experiment-density
    auto* expd_cmd = app.add_subcommand("experiment-density", "held-out comparison grid");
    expd_cmd->set_help_flag("--help", "print help");
    std::string xd_generator = "normal(0;1)", xd_out = "results.csv", xd_n = "10,100,1000";
    std::string xd_methods = "NPG,NPG-lgN,CNPG,KDE,MLE", xd_schedule = "inv-sqrt";
    std::string xd_fixed_h;
    int xd_seeds = 20;
    std::size_t xd_eval = 100000;
    double xd_beta_scale = 1.0;
    expd_cmd->add_option("--generator", xd_generator,
                         "normal(mu;sigma) | mixture2(...) | student-t(df)")
        ->capture_default_str();
    expd_cmd->add_option("--n-grid", xd_n, "comma-separated sample sizes")->capture_default_str();
    expd_cmd->add_option("--num-seeds", xd_seeds, "replicates per cell")->capture_default_str();
    expd_cmd->add_option("--eval-n", xd_eval, "held-out evaluation size")->capture_default_str();
    expd_cmd->add_option("--methods", xd_methods, "subset of NPG,NPG-lgN,CNPG,KDE,MLE")
        ->capture_default_str();
    expd_cmd->add_option("--beta-schedule", xd_schedule, "inv-sqrt|inv-log|const")
        ->capture_default_str();
    expd_cmd->add_option("--beta-scale", xd_beta_scale, "")->capture_default_str();
    expd_cmd->add_option("--fixed-h", xd_fixed_h, "skip CV and use this bandwidth");
    expd_cmd->add_option("--out", xd_out, "results CSV")->capture_default_str();

    // experiment-g8
    auto* expg_cmd = app.add_subcommand("experiment-g8",
                                        "exact 8-node comparison of the two graph models");
    expg_cmd->set_help_flag("--help", "print help");
    std::string xg_out = "g8";
    double xg_h = 8.0, xg_beta = 0.2;
    expg_cmd->add_option("--h", xg_h, "")->capture_default_str();
    expg_cmd->add_option("--beta", xg_beta, "")->capture_default_str();
    expg_cmd->add_option("--out-dir", xg_out, "output directory")->capture_default_str();

    // emit-plots
    auto* plot_cmd = app.add_subcommand("emit-plots", "long-form CSVs for external plotting");
    plot_cmd->set_help_flag("--help", "print help");
    std::string pl_kind, pl_results, pl_out = "plot.csv";
    std::vector<std::string> pl_models;
    double pl_lo = -6.0, pl_hi = 6.0;
    int pl_points = 401;
    plot_cmd->add_option("--kind", pl_kind, "density|ll-vs-n|nonzero-vs-n")->required();
    plot_cmd->add_option("--results", pl_results, "results CSV (ll-vs-n, nonzero-vs-n)");
    plot_cmd->add_option("--model", pl_models, "label=model.json, repeatable (density kind)");
    plot_cmd->add_option("--lo", pl_lo, "grid start (density kind)")->capture_default_str();
    plot_cmd->add_option("--hi", pl_hi, "grid end (density kind)")->capture_default_str();
    plot_cmd->add_option("--points", pl_points, "grid size (density kind)")
        ->capture_default_str();
    plot_cmd->add_option("--out", pl_out, "output CSV")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    if (fit_cmd->parsed()) {
        const SampleSet sample = SampleSet::read_csv(fd_input);
        if (fd_stats != "gaussian") throw InputError("only --stats gaussian is available");
        if (sample.dim() != 1) throw InputError("fit-density expects 1-D samples");
        const KernelFamily family = family_from_name(fd_kernel);
        const double h = resolve_bandwidth(fd_h, sample, family, fd_folds, global.quiet);
        const KernelSpec kernel{family, h, sample.dim(), 0.0};
        const Support support = Support::around_samples(sample, fd_margin, fd_points);
        const BetaSchedule schedule = parse_schedule(fd_schedule, fd_beta_scale);
        FitOptions options;
        options.tol = fd_tol;
        FitDiagnostics diag;
        NpExpModel model;
        if (!fd_target.empty()) {
            const auto target = parse_double_list(fd_target);
            model = fit_with_target_moments(sample, StatisticSet::gaussian_1d(), support, kernel,
                                            schedule, target, options, &diag);
        } else {
            model = fit(sample, StatisticSet::gaussian_1d(), support, kernel, schedule, options,
                        &diag);
        }
        spit(fd_out, model.to_json());
        if (!global.quiet)
            std::cerr << "converged in " << diag.outer_iterations << " passes, "
                      << model.nonzero_count() << " active kernel terms\n";
        return 0;
    }

    if (eval_cmd->parsed()) {
        const NpExpModel model = NpExpModel::from_json(slurp(ed_model));
        const SampleSet points = SampleSet::read_csv(ed_input);
        std::ostringstream out;
        out.precision(17);
        out << "log_density\n";
        double total = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const double ld = model.log_density(points.row(i));
            total += ld;
            out << ld << '\n';
        }
        spit(ed_out, out.str());
        std::cout.precision(17);
        std::cout << "total_log_density " << total << '\n';
        return 0;
    }

    if (kde_cmd->parsed()) {
        const SampleSet sample = SampleSet::read_csv(kd_input);
        const KernelFamily family = family_from_name(kd_kernel);
        const double h = resolve_bandwidth(kd_h, sample, family, kd_folds, global.quiet);
        const KdeModel model(sample, KernelSpec{family, h, sample.dim(), 0.0});
        const SampleSet points = kd_eval.empty() ? sample : SampleSet::read_csv(kd_eval);
        std::ostringstream out;
        out.precision(17);
        out << "density\n";
        for (std::size_t i = 0; i < points.size(); ++i)
            out << kde_density(model, points.row(i)) << '\n';
        spit(kd_out, out.str());
        return 0;
    }

    if (ergm_cmd->parsed() || nergm_cmd->parsed()) {
        const bool nergm = nergm_cmd->parsed();
        const Graph observed = read_edge_list(fe_graph);
        ErgmModel model;
        if (fe_mode == "exact") {
            const FeatureHistogram hist = fe_hist.empty()
                                              ? enumerate_feature_histogram(observed.n())
                                              : FeatureHistogram::read_csv(fe_hist);
            model = nergm ? exact_fit_nergm(observed, hist, fe_h, fe_beta)
                          : exact_fit_ergm(stats(observed), hist);
        } else if (fe_mode == "mcmc") {
            ErgmModel tmpl;
            tmpl.n = observed.n();
            if (nergm) {
                ErgmModel::Augmented aug;
                aug.kernel = KernelSpec::gaussian(fe_h, 1);
                aug.center = stats(observed);
                aug.beta = fe_beta;
                tmpl.augmented = aug;
            }
            const ChainConfig chain = make_chain(global, fe_burn, fe_thin, fe_samples);
            McmcDiagnostics diag;
            model = mcmcmle_fit(observed, tmpl, chain, fe_steps, fe_step, &diag);
            if (!global.quiet)
                std::cerr << "resamples " << diag.resample_count << ", final ESS "
                          << diag.final_ess << '\n';
        } else {
            throw InputError("--mode must be exact or mcmc");
        }
        spit(fe_out, model.to_json());
        return 0;
    }

    if (sample_cmd->parsed()) {
        const ErgmModel model = ErgmModel::from_json(slurp(sg_model));
        ChainConfig chain = make_chain(global, sg_burn, sg_thin, sg_count);
        std::optional<Graph> observed;
        if (sg_init == "empty") {
            chain.init = ChainConfig::Init::Empty;
        } else if (sg_init == "random") {
            chain.init = ChainConfig::Init::Random;
        } else if (sg_init == "observed") {
            chain.init = ChainConfig::Init::ObservedGraph;
            if (sg_observed.empty())
                throw InputError("--init observed needs --observed EDGELIST");
            observed = read_edge_list(sg_observed, model.n);
        } else {
            throw InputError("--init must be empty, random, or observed");
        }
        const GibbsResult result =
            gibbs_sample(model, chain, observed ? &*observed : nullptr);
        std::filesystem::create_directories(sg_out_dir);
        const auto dir = std::filesystem::path(sg_out_dir);
        char name[32];
        for (std::size_t i = 0; i < result.samples.size(); ++i) {
            std::snprintf(name, sizeof name, "sample_%05zu.txt", i);
            write_edge_list(result.samples[i], (dir / name).string());
        }
        spit((dir / "diagnostics.json").string(), result.diagnostics.to_json());
        return 0;
    }

    if (gof_cmd->parsed()) {
        const Graph observed = read_edge_list(gf_observed);
        std::vector<std::string> paths;
        for (const auto& entry : std::filesystem::directory_iterator(gf_dir))
            if (entry.is_regular_file() && entry.path().extension() == ".txt")
                paths.push_back(entry.path().string());
        std::sort(paths.begin(), paths.end());
        if (paths.empty()) throw InputError("no .txt edge lists in " + gf_dir);
        std::vector<Graph> samples;
        samples.reserve(paths.size());
        for (const auto& p : paths) samples.push_back(read_edge_list(p, observed.n()));
        const auto table = gof_compare(observed, samples);
        write_gof_compare_csv(table, gf_out + ".csv");
        nlohmann::json j = nlohmann::json::array();
        for (const auto& b : table)
            j.push_back({{"stat", b.stat},
                         {"bin", b.bin},
                         {"observed", b.observed},
                         {"p5", b.p5},
                         {"p50", b.p50},
                         {"p95", b.p95},
                         {"covered", b.covered}});
        spit(gf_out + ".json", j.dump(2));
        return 0;
    }

    if (enum_cmd->parsed()) {
        enumerate_feature_histogram(en_n).write_csv(en_out);
        return 0;
    }

    if (expd_cmd->parsed()) {
        ExperimentSpec spec;
        spec.generator = Generator::parse(xd_generator);
        spec.n_grid.clear();
        for (double n : parse_double_list(xd_n)) spec.n_grid.push_back(static_cast<std::size_t>(n));
        spec.eval_n = xd_eval;
        for (int s = 0; s < xd_seeds; ++s) spec.seeds.push_back(global.seed + s);
        spec.schedule = parse_schedule(xd_schedule, xd_beta_scale);
        if (!xd_fixed_h.empty()) spec.fixed_h = std::stod(xd_fixed_h);
        spec.methods.clear();
        std::istringstream ms(xd_methods);
        std::string m;
        while (std::getline(ms, m, ',')) spec.methods.push_back(m);
        const DensityResults results = run_density_experiment(spec);
        results.write_csv(xd_out);
        return 0;
    }

    if (expg_cmd->parsed()) {
        const G8Report report = run_g8_experiment(xg_h, xg_beta);
        write_g8_report(report, xg_out);
        if (!global.quiet)
            std::cerr << "box mass near the observed statistics: mass-preserving "
                      << report.nergm_box_mass << " vs plain " << report.ergm_box_mass << '\n';
        return 0;
    }

    if (plot_cmd->parsed()) {
        if (pl_kind == "density") {
            if (pl_models.empty()) throw InputError("density kind needs --model label=file");
            std::vector<std::pair<std::string, NpExpModel>> models;
            for (const auto& spec : pl_models) {
                const auto eq = spec.find('=');
                if (eq == std::string::npos)
                    throw InputError("--model must look like label=model.json");
                models.emplace_back(spec.substr(0, eq),
                                    NpExpModel::from_json(slurp(spec.substr(eq + 1))));
            }
            emit_density_curve(models, pl_lo, pl_hi, pl_points, pl_out);
        } else {
            if (pl_results.empty()) throw InputError(pl_kind + " kind needs --results CSV");
            emit_plot_data(DensityResults::read_csv(pl_results), pl_kind, pl_out);
        }
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const npef::ConvergenceError& e) {
        std::cerr << "E_CONVERGENCE " << e.what() << '\n';
        return 4;
    } catch (const npef::NumericalError& e) {
        std::cerr << "E_NUMERICAL " << e.what() << '\n';
        return 3;
    } catch (const npef::InputError& e) {
        std::cerr << "E_INPUT " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "E_INPUT " << e.what() << '\n';
        return 2;
    }
}
