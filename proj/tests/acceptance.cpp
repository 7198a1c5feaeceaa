// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failures. Runs the full experiment configurations, so allow ~30 minutes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "npef/ergm.hpp"
#include "npef/expfam.hpp"
#include "npef/experiments.hpp"
#include "npef/graph.hpp"
#include "npef/kde.hpp"
#include "npef/kernel.hpp"
#include "npef/npexp.hpp"
#include "npef/samples.hpp"

using namespace npef;

namespace {

int failures = 0;

void criterion(int number, const std::string& title, const std::function<bool(std::string&)>& fn) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
        ok = fn(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %2d (%s) [%.1fs]%s%s\n", ok ? "PASS" : "FAIL", number, title.c_str(),
                secs, detail.empty() ? "" : " — ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

SampleSet draw_mixture(std::size_t n, std::uint64_t seed) {
    return Generator::mixture2(-3.0, 1.0, 3.0, 1.0, 0.5).draw(n, seed);
}

std::vector<std::uint64_t> seed_range(std::size_t count) {
    std::vector<std::uint64_t> seeds(count);
    for (std::size_t i = 0; i < count; ++i) seeds[i] = i + 1;
    return seeds;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

bool criterion1(std::string& detail) {
    std::mt19937_64 rng(1001);
    std::normal_distribution<double> normal(0.0, 2.0);
    std::uniform_int_distribution<int> n_dist(1, 50);
    std::uniform_real_distribution<double> h_dist(0.3, 3.0);
    for (int rep = 0; rep < 100; ++rep) {
        const int n = n_dist(rng);
        std::vector<double> xs(n);
        for (double& x : xs) x = normal(rng);
        const auto sample = SampleSet::from_vector(xs);
        const KernelSpec kernel = (rep % 2 == 0) ? KernelSpec::gaussian(h_dist(rng))
                                                 : KernelSpec::uniform(h_dist(rng));
        const KdeModel model(sample, kernel);
        for (std::size_t i = 0; i < sample.size(); ++i) {
            const double lhs = empirical_augmented_mean(sample, kernel, i);
            const double rhs = kde_density(model, sample.row(i));
            if (std::abs(lhs - rhs) > 1e-15) {
                std::ostringstream os;
                os << "mismatch at rep " << rep << " i " << i << ": " << lhs - rhs;
                detail = os.str();
                return false;
            }
        }
    }
    detail = "100 sample/kernel pairs, all centers, exact agreement";
    return true;
}

bool criterion2(std::string& detail) {
    const auto sample = draw_mixture(10, 7);
    const auto support = Support::around_samples(sample, 3.0, 401);
    const auto model = fit(sample, StatisticSet::gaussian_1d(), support, KernelSpec::gaussian(1.0),
                           BetaSchedule::constant(0.2));
    const std::size_t p = 2 + sample.size();
    std::mt19937_64 rng(2002);
    std::uniform_real_distribution<double> coef(-0.5, 0.5);
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> theta(p);
        for (double& v : theta) v = coef(rng);
        const auto grad = smooth_gradient(model, sample, theta);
        const double eps = 1e-5;
        for (std::size_t j = 0; j < p; ++j) {
            auto tp = theta, tm = theta;
            tp[j] += eps;
            tm[j] -= eps;
            const double fd =
                (smooth_loglik(model, sample, tp) - smooth_loglik(model, sample, tm)) / (2 * eps);
            const double rel = std::abs(grad[j] - fd) / std::max(1.0, std::abs(fd));
            worst = std::max(worst, rel);
        }
    }
    std::ostringstream os;
    os << "worst relative deviation " << worst << " over 50 random parameter vectors";
    detail = os.str();
    return worst <= 1e-5;
}

bool criterion3(std::string& detail) {
    double worst_moment = 0.0, worst_kkt = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto sample = draw_mixture(40, seed);
        const auto support = Support::around_samples(sample, 3.0, 1201);
        FitDiagnostics diag;
        fit(sample, StatisticSet::gaussian_1d(), support, KernelSpec::gaussian(1.0),
            BetaSchedule::inv_sqrt(0.5), {}, &diag);
        worst_moment = std::max(worst_moment, diag.moment_residual);
        worst_kkt = std::max(worst_kkt, diag.kkt_residual);
        for (std::size_t k = 1; k < diag.objective_trace.size(); ++k)
            if (diag.objective_trace[k] < diag.objective_trace[k - 1] - 1e-10) {
                detail = "objective decreased during a fit";
                return false;
            }
    }
    std::ostringstream os;
    os << "20 fits; worst moment residual " << worst_moment << ", worst kkt residual "
       << worst_kkt;
    detail = os.str();
    return worst_moment <= 1e-6 && worst_kkt <= 1e-6;
}

bool criterion4(std::string& detail) {
    ExperimentSpec spec;
    spec.generator = Generator::normal(0.0, 1.0);
    spec.n_grid = {10, 100, 1000};
    spec.eval_n = 2000;
    spec.seeds = seed_range(20);
    spec.schedule = BetaSchedule::inv_sqrt(1.0);
    spec.fixed_h = 1.0;
    spec.methods = {"NPG"};
    const auto results = run_density_experiment(spec);
    for (const auto& cell : results.cells)
        if (!cell.error.empty()) {
            detail = "cell failed: " + cell.error;
            return false;
        }
    const double c10 = results.median_nonzero(10, "NPG");
    const double c100 = results.median_nonzero(100, "NPG");
    const double c1000 = results.median_nonzero(1000, "NPG");
    std::ostringstream os;
    os << "median active kernel count " << c10 << " / " << c100 << " / " << c1000
       << " at n=10/100/1000";
    detail = os.str();
    return c10 >= c100 && c100 >= c1000 && c1000 <= 0.05 * 1000.0;
}

bool criterion5(std::string& detail) {
    ExperimentSpec cv_spec;
    cv_spec.generator = Generator::mixture2(-3.0, 1.0, 3.0, 1.0, 0.5);
    cv_spec.n_grid = {100};
    cv_spec.eval_n = 10000;
    cv_spec.seeds = seed_range(20);
    cv_spec.methods = {"KDE", "MLE"};
    const auto baseline = run_density_experiment(cv_spec);

    ExperimentSpec npg_spec = cv_spec;
    npg_spec.methods = {"NPG"};
    npg_spec.fixed_h = 1.5;
    npg_spec.schedule = BetaSchedule::inv_sqrt(0.03);
    const auto npg = run_density_experiment(npg_spec);
    for (const auto& cell : npg.cells)
        if (!cell.error.empty()) {
            detail = "fit failed: " + cell.error;
            return false;
        }

    const double ll_npg = npg.median_ll(100, "NPG");
    const double ll_kde = baseline.median_ll(100, "KDE");
    const double ll_mle = baseline.median_ll(100, "MLE");
    const double mad_kde = baseline.mad_ll(100, "KDE");
    std::ostringstream os;
    os << "median held-out ll: kernel-augmented " << ll_npg << ", kde " << ll_kde << " (mad "
       << mad_kde << "), gaussian mle " << ll_mle;
    detail = os.str();
    return ll_npg > ll_mle && ll_npg >= ll_kde - mad_kde;
}

bool criterion6(std::string& detail) {
    ExperimentSpec spec;
    spec.generator = Generator::mixture2(-3.0, 1.0, 3.0, 1.0, 0.5);
    spec.n_grid = {10};
    spec.eval_n = 4000;
    spec.seeds = seed_range(20);
    spec.methods = {"NPG", "CNPG"};
    spec.fixed_h = 1.5;
    spec.schedule = BetaSchedule::inv_sqrt(1.0);
    const auto results = run_density_experiment(spec);
    for (const auto& cell : results.cells)
        if (!cell.error.empty()) {
            detail = "fit failed: " + cell.error;
            return false;
        }
    const double plain = results.median_ll(10, "NPG");
    const double constrained = results.median_ll(10, "CNPG");
    std::ostringstream os;
    os << "median held-out ll at n=10: moment-constrained " << constrained << " vs plain "
       << plain;
    detail = os.str();
    return constrained >= plain;
}

bool criterion7(std::string& detail) {
    for (int n : {3, 4, 5}) {
        const auto fast = enumerate_feature_histogram(n);
        // Reference: direct edge-bitmask enumeration.
        std::vector<std::pair<int, int>> dyads;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) dyads.emplace_back(i, j);
        std::map<std::pair<long long, long long>, std::uint64_t> slow;
        for (std::uint64_t mask = 0; mask < (1ull << dyads.size()); ++mask) {
            Graph g(n);
            for (std::size_t b = 0; b < dyads.size(); ++b)
                if (mask >> b & 1) g.set_edge(dyads[b].first, dyads[b].second, true);
            const auto s = stats(g);
            ++slow[{s.edges, s.triangles}];
        }
        if (fast.counts != slow) {
            detail = "histogram mismatch at n=" + std::to_string(n);
            return false;
        }
    }
    const auto h8 = enumerate_feature_histogram(8);
    std::ostringstream os;
    os << "n=3..5 match naive recount; n=8 total " << h8.total();
    detail = os.str();
    return h8.total() == (1ull << 28);
}

bool criterion8(std::string& detail) {
    const auto report = run_g8_experiment(8.0, 0.2);
    const auto cheb = [](std::pair<long long, long long> mode) {
        return std::max(std::llabs(mode.first - 22), std::llabs(mode.second - 29));
    };
    std::ostringstream os;
    os << "neighborhood mass " << report.nergm_box_mass << " (mass-preserving) vs "
       << report.ergm_box_mass << " (plain); modes (" << report.nergm_mode.first << ","
       << report.nergm_mode.second << ") vs (" << report.ergm_mode.first << ","
       << report.ergm_mode.second << ")";
    detail = os.str();
    return report.nergm_box_mass > report.ergm_box_mass && cheb(report.nergm_mode) <= 3 &&
           cheb(report.ergm_mode) > 3 && std::abs(report.ergm_total_mass - 1.0) <= 1e-12 &&
           std::abs(report.nergm_total_mass - 1.0) <= 1e-12;
}

bool criterion9(std::string& detail) {
    const auto hist = enumerate_feature_histogram(4);
    std::mt19937_64 rng(909);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    ErgmModel model;
    model.n = 4;
    model.lambda_e = coef(rng);
    model.lambda_t = coef(rng);
    const double log_z = exact_log_partition(model, hist);

    ChainConfig config;
    config.burn_in = 1000;
    config.thinning = 1;
    config.num_samples = 1000000;
    config.init = ChainConfig::Init::Empty;
    config.seed = 99;
    const auto result = gibbs_sample(model, config);

    std::map<std::vector<std::uint64_t>, std::size_t> counts;
    for (const auto& g : result.samples) ++counts[g.bits()];
    // Exact per-graph probability: exp(potential - log Z), uniform within a
    // feature cell; enumerate all 64 graphs directly.
    double tv = 0.0;
    std::size_t seen = 0;
    for (std::uint64_t mask = 0; mask < 64; ++mask) {
        Graph g(4);
        std::size_t b = 0;
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j, ++b)
                if (mask >> b & 1) g.set_edge(i, j, true);
        const double exact = std::exp(model.log_potential(stats(g)) - log_z);
        const auto it = counts.find(g.bits());
        const double emp = it == counts.end()
                               ? 0.0
                               : static_cast<double>(it->second) / result.samples.size();
        if (it != counts.end()) ++seen;
        tv += 0.5 * std::abs(emp - exact);
    }
    std::ostringstream os;
    os << "total variation " << tv << " over all 64 graphs (" << seen << " visited)";
    detail = os.str();
    return tv <= 0.02;
}

bool criterion10(std::string& detail) {
    const auto g8 = g8_example_graph();
    const auto hist = enumerate_feature_histogram(8);
    const auto exact = exact_fit_nergm(g8, hist, 8.0, 0.2, 1e-9);

    std::vector<double> err_e, err_t, err_a;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ErgmModel tmpl;
        tmpl.n = 8;
        tmpl.rescale_e = exact.rescale_e;
        tmpl.rescale_t = exact.rescale_t;
        tmpl.augmented = ErgmModel::Augmented{0.0, KernelSpec::gaussian(8.0, 1), stats(g8), 0.2};
        ChainConfig chain;
        chain.burn_in = 1000;
        chain.thinning = 100;
        chain.num_samples = 500;
        chain.seed = seed;
        const auto fitted = mcmcmle_fit(g8, tmpl, chain, 2000, 10.0);
        err_e.push_back(std::abs(fitted.lambda_e - exact.lambda_e));
        err_t.push_back(std::abs(fitted.lambda_t - exact.lambda_t));
        err_a.push_back(std::abs(fitted.augmented->lambda_a - exact.augmented->lambda_a));
    }
    const double me = median(err_e), mt = median(err_t), ma = median(err_a);
    std::ostringstream os;
    os << "median |error| vs exact fit (" << exact.lambda_e << ", " << exact.lambda_t << ", "
       << exact.augmented->lambda_a << "): " << me << " / " << mt << " / " << ma;
    detail = os.str();
    return me <= 0.3 && mt <= 0.3 && ma <= 0.3;
}

bool criterion11(std::string& detail) {
    std::mt19937_64 rng(1111);
    for (int rep = 0; rep < 100; ++rep) {
        const int n = 2 + static_cast<int>(rng() % 11);  // 2..12
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const double p = unif(rng);
        Graph g(n);
        long long edges = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (unif(rng) < p) {
                    g.set_edge(i, j, true);
                    ++edges;
                }
        const auto report = gof(g);
        double dsum = 0.0;
        for (double v : report.degree_dist) dsum += v;
        if (std::abs(dsum - 1.0) > 1e-12) {
            detail = "degree distribution does not normalize";
            return false;
        }
        double esum = 0.0;
        for (double v : report.esp_dist) esum += v;
        if (std::abs(esum - (edges > 0 ? 1.0 : 0.0)) > 1e-12) {
            detail = "shared-partner distribution does not normalize";
            return false;
        }
        double gsum = 0.0;
        for (double v : report.geodesic_dist) gsum += v;
        const bool any_connected = report.unreachable_fraction < 1.0 && n > 1 && edges > 0;
        if (std::abs(gsum - (any_connected ? 1.0 : 0.0)) > 1e-12) {
            detail = "geodesic distribution does not normalize";
            return false;
        }
        if (report.unreachable_fraction < 0.0 || report.unreachable_fraction > 1.0) {
            detail = "unreachable fraction out of range";
            return false;
        }
    }

    std::ostringstream os;
    os << "100 random graphs normalize";

    // Optional dataset ingestion: checked only when the files are supplied.
    const auto check_file = [&](const char* env, const char* label, int n, long long e,
                                long long t) {
        const char* path = std::getenv(env);
        if (path == nullptr) {
            os << "; " << label << " not supplied (set " << env << "), skipped";
            return true;
        }
        const auto g = read_edge_list(path);
        const auto s = stats(g);
        os << "; " << label << " n=" << g.n() << " stats (" << s.edges << "," << s.triangles
           << ")";
        return g.n() == n && s.edges == e && s.triangles == t;
    };
    const bool dolphins = check_file("NPEF_DOLPHINS_EDGES", "dolphins", 62, 159, 95);
    const bool florentine = check_file("NPEF_FLORENTINE_EDGES", "florentine", 16, 15, 5);
    detail = os.str();
    return dolphins && florentine;
}

}  // namespace

int main() {
    criterion(1, "augmented means equal the kernel density at the data", criterion1);
    criterion(2, "smooth gradient matches finite differences", criterion2);
    criterion(3, "converged fits satisfy the stationarity conditions", criterion3);
    criterion(4, "active kernel count shrinks with sample size", criterion4);
    criterion(5, "mixture held-out likelihood beats the gaussian mle", criterion5);
    criterion(6, "moment constraints help at small sample size", criterion6);
    criterion(7, "graph enumeration matches naive recounts", criterion7);
    criterion(8, "mass-preserving fit concentrates near the observed graph", criterion8);
    criterion(9, "gibbs sampler matches the exact distribution", criterion9);
    criterion(10, "sampler-based fit matches the exact fit", criterion10);
    criterion(11, "goodness-of-fit distributions normalize", criterion11);
    if (failures == 0)
        std::printf("all criteria passed\n");
    else
        std::printf("%d criteria failed\n", failures);
    return failures;
}
