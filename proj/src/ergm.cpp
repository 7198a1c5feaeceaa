#include "npef/ergm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "npef/errors.hpp"
#include "npef/grid_model.hpp"

namespace npef {

double ErgmModel::augmented_feature(const GraphStats& s) const {
    if (!augmented) return 0.0;
    const double de = static_cast<double>(s.edges - augmented->center.edges);
    const double dt = static_cast<double>(s.triangles - augmented->center.triangles);
    double r = std::hypot(de, dt) / augmented->kernel.h;
    // The graph feature uses the squared-distance convention exp(-(d/h)^2),
    // like the quadratic and smoothed profiles; the 1-D base Gaussian is
    // exp(-u^2/2), so feed it u = sqrt(2) d/h.
    if (augmented->kernel.family == KernelFamily::Gaussian) r *= std::numbers::sqrt2;
    return eval_base(augmented->kernel, {&r, 1});
}

double ErgmModel::log_potential(const GraphStats& s) const {
    double v = lambda_e * s.edges * rescale_e + lambda_t * s.triangles * rescale_t;
    if (augmented) v += augmented->lambda_a * augmented_feature(s);
    return v;
}

namespace {

// Histogram cells as a weighted discrete support: logw = log count, columns
// are rescaled edges, rescaled triangles and (optionally) the kernel feature.
detail::GridModel histogram_grid(const ErgmModel& model, const FeatureHistogram& hist,
                                 std::vector<std::pair<long long, long long>>* keys = nullptr) {
    std::vector<double> logw;
    std::vector<double> col_e, col_t, col_a;
    logw.reserve(hist.counts.size());
    for (const auto& [key, count] : hist.counts) {
        logw.push_back(std::log(static_cast<double>(count)));
        col_e.push_back(static_cast<double>(key.first) * model.rescale_e);
        col_t.push_back(static_cast<double>(key.second) * model.rescale_t);
        if (model.augmented) col_a.push_back(model.augmented_feature({key.first, key.second}));
        if (keys) keys->push_back(key);
    }
    detail::GridModel grid(std::move(logw));
    grid.add_column(std::move(col_e));
    grid.add_column(std::move(col_t));
    if (model.augmented) grid.add_column(std::move(col_a));
    grid.set_coefficient(0, model.lambda_e);
    grid.set_coefficient(1, model.lambda_t);
    if (model.augmented) grid.set_coefficient(2, model.augmented->lambda_a);
    return grid;
}

void check_histogram(const ErgmModel& model, const FeatureHistogram& hist) {
    if (hist.counts.empty()) throw InputError("empty feature histogram");
    if (model.n != 0 && hist.n != model.n)
        throw InputError("histogram node count does not match the model");
}

void check_target_interior(double target_e, double target_t, const FeatureHistogram& hist) {
    long long e_min = hist.counts.begin()->first.first, e_max = e_min;
    long long t_min = hist.counts.begin()->first.second, t_max = t_min;
    for (const auto& [key, count] : hist.counts) {
        e_min = std::min(e_min, key.first);
        e_max = std::max(e_max, key.first);
        t_min = std::min(t_min, key.second);
        t_max = std::max(t_max, key.second);
    }
    if (!(target_e > e_min && target_e < e_max))
        throw BoundaryStatisticsError(
            "observed edge count is on the boundary of the attainable statistics "
            "(t(G*) must lie in rint(conv(H)))");
    if (!(target_t > t_min && target_t < t_max))
        throw BoundaryStatisticsError(
            "observed triangle count is on the boundary of the attainable statistics");
}

}  // namespace

double exact_log_partition(const ErgmModel& model, const FeatureHistogram& hist) {
    check_histogram(model, hist);
    return histogram_grid(model, hist).log_partition();
}

std::map<std::pair<long long, long long>, double> exact_mass(const ErgmModel& model,
                                                             const FeatureHistogram& hist) {
    check_histogram(model, hist);
    std::vector<std::pair<long long, long long>> keys;
    auto grid = histogram_grid(model, hist, &keys);
    const auto probs = grid.probabilities();
    std::map<std::pair<long long, long long>, double> mass;
    for (std::size_t i = 0; i < keys.size(); ++i) mass[keys[i]] = probs[i];
    return mass;
}

std::pair<double, double> exact_mean_stats(const ErgmModel& model, const FeatureHistogram& hist) {
    check_histogram(model, hist);
    auto grid = histogram_grid(model, hist);
    return {grid.expectation(0) / model.rescale_e, grid.expectation(1) / model.rescale_t};
}

ErgmModel exact_fit_ergm(double target_edges, double target_triangles,
                         const FeatureHistogram& hist, double tol) {
    check_target_interior(target_edges, target_triangles, hist);
    ErgmModel model;
    model.n = hist.n;
    model.rescale_e = target_edges > 0 ? 1.0 / target_edges : 1.0;
    model.rescale_t = target_triangles > 0 ? 1.0 / target_triangles : 1.0;

    auto grid = histogram_grid(model, hist);
    const double te = target_edges * model.rescale_e;
    const double tt = target_triangles * model.rescale_t;
    const double solve_tol = tol * std::min(model.rescale_e, model.rescale_t) / 10.0;
    for (int iter = 0; iter < 500; ++iter) {
        grid.solve_coordinate(0, te, solve_tol);
        grid.solve_coordinate(1, tt, solve_tol);
        const double re = std::abs(grid.expectation(0) - te) / model.rescale_e;
        const double rt = std::abs(grid.expectation(1) - tt) / model.rescale_t;
        if (std::max(re, rt) <= tol) {
            model.lambda_e = grid.coefficient(0);
            model.lambda_t = grid.coefficient(1);
            return model;
        }
    }
    throw ConvergenceError("exact_fit_ergm: moment matching did not converge");
}

ErgmModel exact_fit_nergm(const Graph& observed, const FeatureHistogram& hist, double h,
                          double beta, double tol, KernelFamily family) {
    if (!(h > 0.0)) throw InputError("exact_fit_nergm: h must be positive");
    if (beta < 0.0) throw InputError("exact_fit_nergm: beta must be nonnegative");
    const GraphStats obs = stats(observed);
    check_target_interior(static_cast<double>(obs.edges), static_cast<double>(obs.triangles),
                          hist);

    ErgmModel model;
    model.n = hist.n;
    model.rescale_e = obs.edges > 0 ? 1.0 / static_cast<double>(obs.edges) : 1.0;
    model.rescale_t = obs.triangles > 0 ? 1.0 / static_cast<double>(obs.triangles) : 1.0;
    model.augmented = ErgmModel::Augmented{0.0, KernelSpec{family, h, 1, 0.0}, obs, beta};

    auto grid = histogram_grid(model, hist);
    const double te = obs.edges * model.rescale_e;
    const double tt = obs.triangles * model.rescale_t;
    // Empirical mean of the augmented feature: a single observation at G*.
    const double emp_a = model.augmented_feature(obs);
    const double solve_tol = tol * std::min(model.rescale_e, model.rescale_t) / 10.0;
    const double bound = 1e6;

    for (int iter = 0; iter < 1000; ++iter) {
        grid.solve_coordinate(0, te, solve_tol);
        grid.solve_coordinate(1, tt, solve_tol);
        const double at_zero = grid.expectation_at(2, 0.0);
        if (at_zero < emp_a - beta)
            grid.solve_coordinate(2, emp_a - beta, tol / 10.0, 0.0, bound);
        else if (at_zero > emp_a + beta)
            grid.solve_coordinate(2, emp_a + beta, tol / 10.0, -bound, 0.0);
        else
            grid.set_coefficient(2, 0.0);

        const double re = std::abs(grid.expectation(0) - te) / model.rescale_e;
        const double rt = std::abs(grid.expectation(1) - tt) / model.rescale_t;
        const double la = grid.coefficient(2);
        const double gap = emp_a - grid.expectation(2);
        double ra;
        if (la > 1e-10)
            ra = std::abs(gap - beta);
        else if (la < -1e-10)
            ra = std::abs(gap + beta);
        else
            ra = std::max(0.0, std::abs(gap) - beta);
        if (std::max({re, rt, ra}) <= tol) {
            model.lambda_e = grid.coefficient(0);
            model.lambda_t = grid.coefficient(1);
            model.augmented->lambda_a = la;
            return model;
        }
    }
    throw ConvergenceError("exact_fit_nergm: KKT conditions did not converge");
}

GibbsResult gibbs_sample(const ErgmModel& model, const ChainConfig& config,
                         const Graph* observed) {
    if (model.n < 2) throw InputError("gibbs_sample: model has no node count");
    if (config.burn_in < 1 || config.thinning < 1)
        throw InputError("gibbs_sample: burn_in and thinning must be >= 1");

    std::mt19937_64 rng(config.seed);
    Graph g(model.n);
    switch (config.init) {
        case ChainConfig::Init::ObservedGraph:
            if (!observed)
                throw InputError("gibbs_sample: ObservedGraph init requires an observed graph");
            g = *observed;
            break;
        case ChainConfig::Init::Empty:
            break;
        case ChainConfig::Init::Random: {
            std::bernoulli_distribution coin(config.random_p);
            for (int i = 0; i < model.n; ++i)
                for (int j = i + 1; j < model.n; ++j) g.set_edge(i, j, coin(rng));
            break;
        }
    }
    const Graph init_graph = g;
    GraphStats current = stats(g);

    std::vector<std::pair<int, int>> dyads;
    for (int i = 0; i < model.n; ++i)
        for (int j = i + 1; j < model.n; ++j) dyads.emplace_back(i, j);
    std::uniform_int_distribution<std::size_t> pick(0, dyads.size() - 1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    GibbsResult result;
    std::set<std::vector<std::uint64_t>> unique_graphs;
    std::set<std::pair<long long, long long>> unique_features;

    const long long total_iters =
        config.burn_in + static_cast<long long>(config.thinning) * config.num_samples;
    for (long long iter = 1; iter <= total_iters; ++iter) {
        const auto [i, j] = dyads[pick(rng)];
        const bool present = g.has_edge(i, j);
        const int common = g.common_neighbors(i, j);
        GraphStats without = current, with = current;
        if (present) {
            without.edges -= 1;
            without.triangles -= common;
        } else {
            with.edges += 1;
            with.triangles += common;
        }
        const double delta = model.log_potential(with) - model.log_potential(without);
        const bool new_state = unif(rng) < 1.0 / (1.0 + std::exp(-delta));
        if (new_state != present) {
            g.set_edge(i, j, new_state);
            current = new_state ? with : without;
        }
        if (iter > config.burn_in && (iter - config.burn_in) % config.thinning == 0) {
            result.samples.push_back(g);
            unique_graphs.insert(g.bits());
            unique_features.insert({current.edges, current.triangles});
            result.diagnostics.max_hops =
                std::max(result.diagnostics.max_hops, g.hamming_distance(init_graph));
        }
    }
    result.diagnostics.unique_graphs = unique_graphs.size();
    result.diagnostics.unique_feature_tuples = unique_features.size();
    return result;
}

ErgmModel mcmcmle_fit(const Graph& observed, ErgmModel model, const ChainConfig& chain, int steps,
                      double step_size, McmcDiagnostics* diagnostics) {
    const GraphStats obs = stats(observed);
    const long long max_edges = static_cast<long long>(observed.n()) * (observed.n() - 1) / 2;
    if (obs.edges == 0 || obs.edges == max_edges)
        throw BoundaryStatisticsError(
            "mcmcmle_fit: observed graph is empty or complete; t(G*) is not in "
            "rint(conv(H))");

    model.n = observed.n();
    model.rescale_e = obs.edges > 0 ? 1.0 / static_cast<double>(obs.edges) : 1.0;
    model.rescale_t = obs.triangles > 0 ? 1.0 / static_cast<double>(obs.triangles) : 1.0;
    if (model.augmented) model.augmented->center = obs;

    const double te = obs.edges * model.rescale_e;
    const double tt = obs.triangles * model.rescale_t;
    const double emp_a = model.augmented ? model.augmented_feature(obs) : 0.0;

    struct SampleStats {
        double e, t, a;
    };
    std::vector<SampleStats> pool;
    ErgmModel ref = model;  // parameters the pool was drawn from
    McmcDiagnostics local;
    McmcDiagnostics& diag = diagnostics ? *diagnostics : local;

    ChainConfig cfg = chain;
    auto resample = [&](std::uint64_t salt) {
        cfg.seed = chain.seed + salt;
        auto draw = gibbs_sample(model, cfg, &observed);
        pool.clear();
        for (const auto& g : draw.samples) {
            const GraphStats s = stats(g);
            pool.push_back({s.edges * model.rescale_e, s.triangles * model.rescale_t,
                            model.augmented ? model.augmented_feature(s) : 0.0});
        }
        ref = model;
        ++diag.resample_count;
    };
    resample(0);

    // Importance weights of the pool under the current parameters, as a
    // discrete model whose free coordinate is lambda_a.
    auto make_pool_grid = [&]() {
        std::vector<double> logw(pool.size());
        std::vector<double> col_e(pool.size()), col_t(pool.size()), col_a(pool.size());
        const double ref_a = ref.augmented ? ref.augmented->lambda_a : 0.0;
        for (std::size_t s = 0; s < pool.size(); ++s) {
            logw[s] = (model.lambda_e - ref.lambda_e) * pool[s].e +
                      (model.lambda_t - ref.lambda_t) * pool[s].t - ref_a * pool[s].a;
            col_e[s] = pool[s].e;
            col_t[s] = pool[s].t;
            col_a[s] = pool[s].a;
        }
        detail::GridModel grid(std::move(logw));
        grid.add_column(std::move(col_e));
        grid.add_column(std::move(col_t));
        grid.add_column(std::move(col_a));
        grid.set_coefficient(2, model.augmented ? model.augmented->lambda_a : 0.0);
        return grid;
    };

    auto ess_of = [&](const detail::GridModel& grid) {
        const auto p = grid.probabilities();
        double sq = 0.0;
        for (double v : p) sq += v * v;
        return 1.0 / sq;
    };

    double avg_e = 0.0, avg_t = 0.0, avg_a = 0.0;
    int avg_count = 0;
    const int avg_start = steps / 2;
    // Reweighting cannot see outside the pool: a degenerate pool (all graphs
    // with the same statistics) keeps a full ESS forever, so refresh on a
    // fixed cadence as well as on ESS collapse.
    const int resample_cadence = 10;
    int since_resample = 0;

    for (int step = 0; step < steps; ++step) {
        auto grid = make_pool_grid();
        double ess = ess_of(grid);
        if (++since_resample >= resample_cadence) {
            resample(static_cast<std::uint64_t>(step) + 1);
            since_resample = 0;
            grid = make_pool_grid();
            ess = ess_of(grid);
        } else if (ess < 0.5 * static_cast<double>(pool.size())) {
            resample(static_cast<std::uint64_t>(step) + 1);
            since_resample = 0;
            grid = make_pool_grid();
            ess = ess_of(grid);
            if (ess < 0.1 * static_cast<double>(pool.size()))
                throw ConvergenceError(
                    "mcmcmle_fit: effective sample size collapsed despite re-sampling; "
                    "reduce the step size");
        }

        const double ge = te - grid.expectation(0);
        const double gt = tt - grid.expectation(1);
        model.lambda_e += step_size * ge;
        model.lambda_t += step_size * gt;

        if (model.augmented) {
            grid = make_pool_grid();
            const double beta = model.augmented->beta;
            const double at_zero = grid.expectation_at(2, 0.0);
            // A finite pool may not reach the target expectation for any
            // lambda_a; cap at a moderate bound and let the next refresh,
            // drawn under the capped value, repopulate the region.
            const double bound = 20.0;
            double la;
            try {
                if (at_zero < emp_a - beta)
                    la = grid.solve_coordinate(2, emp_a - beta, 1e-10, 0.0, bound);
                else if (at_zero > emp_a + beta)
                    la = grid.solve_coordinate(2, emp_a + beta, 1e-10, -bound, 0.0);
                else
                    la = 0.0;
            } catch (const NumericalError&) {
                la = at_zero < emp_a - beta ? bound : -bound;
            }
            model.augmented->lambda_a = la;
        }

        diag.final_gradient_norm = std::hypot(ge, gt);
        diag.final_ess = ess;
        if (step >= avg_start) {
            avg_e += model.lambda_e;
            avg_t += model.lambda_t;
            if (model.augmented) avg_a += model.augmented->lambda_a;
            ++avg_count;
        }
    }

    // Average the tail iterates: the fixed-step chain oscillates around the
    // root and the average is a far better point estimate.
    if (avg_count > 0) {
        model.lambda_e = avg_e / avg_count;
        model.lambda_t = avg_t / avg_count;
        if (model.augmented) model.augmented->lambda_a = avg_a / avg_count;
    }
    return model;
}

namespace {

GofBand make_band(const std::string& stat, const std::string& bin, double observed,
                  std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const auto pct = [&](double q) {
        const std::size_t idx = std::min(
            values.size() - 1,
            static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())) - 1));
        return values[std::max<std::size_t>(idx, 0)];
    };
    GofBand band{stat, bin, observed, pct(0.05), pct(0.50), pct(0.95), false};
    band.covered = observed >= band.p5 && observed <= band.p95;
    return band;
}

}  // namespace

std::vector<GofBand> gof_compare(const Graph& observed, const std::vector<Graph>& samples) {
    if (samples.empty()) throw InputError("gof_compare: no samples");
    for (const auto& s : samples)
        if (s.n() != observed.n()) throw InputError("gof_compare: node count mismatch");

    const GofReport obs = gof(observed);
    std::vector<GofReport> reports;
    reports.reserve(samples.size());
    for (const auto& s : samples) reports.push_back(gof(s));

    std::vector<GofBand> table;
    for (std::size_t b = 0; b < obs.degree_dist.size(); ++b) {
        std::vector<double> vals;
        for (const auto& r : reports) vals.push_back(r.degree_dist[b]);
        table.push_back(make_band("degree", std::to_string(b), obs.degree_dist[b], vals));
    }
    for (std::size_t b = 0; b < obs.esp_dist.size(); ++b) {
        std::vector<double> vals;
        for (const auto& r : reports) vals.push_back(r.esp_dist[b]);
        table.push_back(make_band("esp", std::to_string(b), obs.esp_dist[b], vals));
    }
    for (std::size_t b = 0; b < obs.geodesic_dist.size(); ++b) {
        std::vector<double> vals;
        for (const auto& r : reports) vals.push_back(r.geodesic_dist[b]);
        table.push_back(make_band("geodesic", std::to_string(b + 1), obs.geodesic_dist[b], vals));
    }
    {
        std::vector<double> vals;
        for (const auto& r : reports) vals.push_back(r.unreachable_fraction);
        table.push_back(make_band("geodesic", "unreachable", obs.unreachable_fraction, vals));
    }
    return table;
}

void write_gof_compare_csv(const std::vector<GofBand>& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write gof comparison: " + path);
    out << "stat,bin,observed,p5,p50,p95,covered\n";
    for (const auto& band : table)
        out << band.stat << ',' << band.bin << ',' << band.observed << ',' << band.p5 << ','
            << band.p50 << ',' << band.p95 << ',' << (band.covered ? 1 : 0) << '\n';
}

std::string SamplerDiagnostics::to_json() const {
    nlohmann::json j;
    j["unique_graphs"] = unique_graphs;
    j["unique_feature_tuples"] = unique_feature_tuples;
    j["max_hops"] = max_hops;
    return j.dump();
}

std::string ErgmModel::to_json() const {
    nlohmann::json j;
    j["n"] = n;
    j["lambda_e"] = lambda_e;
    j["lambda_t"] = lambda_t;
    j["rescale_e"] = rescale_e;
    j["rescale_t"] = rescale_t;
    if (augmented) {
        j["augmented"] = {{"lambda_a", augmented->lambda_a},
                          {"kernel", nlohmann::json::parse(augmented->kernel.to_json())},
                          {"center_edges", augmented->center.edges},
                          {"center_triangles", augmented->center.triangles},
                          {"beta", augmented->beta}};
    } else {
        j["augmented"] = nullptr;
    }
    return j.dump();
}

ErgmModel ErgmModel::from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    ErgmModel m;
    m.n = j.at("n").get<int>();
    m.lambda_e = j.at("lambda_e").get<double>();
    m.lambda_t = j.at("lambda_t").get<double>();
    m.rescale_e = j.at("rescale_e").get<double>();
    m.rescale_t = j.at("rescale_t").get<double>();
    if (j.contains("augmented") && !j["augmented"].is_null()) {
        const auto& a = j["augmented"];
        Augmented aug;
        aug.lambda_a = a.at("lambda_a").get<double>();
        aug.kernel = KernelSpec::from_json(a.at("kernel").dump());
        aug.center = {a.at("center_edges").get<long long>(),
                      a.at("center_triangles").get<long long>()};
        aug.beta = a.at("beta").get<double>();
        m.augmented = aug;
    }
    return m;
}

}  // namespace npef
