#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "npef/graph.hpp"
#include "npef/kernel.hpp"

namespace npef {

// Exponential family over G_n with edge/triangle statistics, optionally
// augmented with one kernel feature centered at the observed graph's
// statistics (mass-preserving variant).
struct ErgmModel {
    int n = 0;
    // Canonical parameters in rescaled units: the linear term is
    // lambda_e * e * rescale_e + lambda_t * t * rescale_t.
    double lambda_e = 0.0;
    double lambda_t = 0.0;
    double rescale_e = 1.0;  // 1 / t_e(G*) when fitted to an observed graph
    double rescale_t = 1.0;  // 1 / t_tri(G*)

    struct Augmented {
        double lambda_a = 0.0;
        // Kernel over the feature plane, evaluated on the unrescaled radial
        // distance ||t(G) - t(G*)||; dim is fixed to 1 (radial profile).
        KernelSpec kernel = KernelSpec::gaussian(8.0, 1);
        GraphStats center;
        double beta = 0.0;
    };
    std::optional<Augmented> augmented;

    double lambda_e_raw() const { return lambda_e * rescale_e; }
    double lambda_t_raw() const { return lambda_t * rescale_t; }

    // K(||t(G) - center|| / h); zero-feature when the model is not augmented.
    double augmented_feature(const GraphStats& s) const;
    // <lambda, t'(G)> + lambda_a * t_a(G), before normalization.
    double log_potential(const GraphStats& s) const;

    std::string to_json() const;
    static ErgmModel from_json(const std::string& text);
};

// log sum_{(e,t)} count * exp(potential), exact for n <= 8 histograms.
double exact_log_partition(const ErgmModel& model, const FeatureHistogram& hist);

// Exact probability mass per (edge, triangle) cell.
std::map<std::pair<long long, long long>, double> exact_mass(const ErgmModel& model,
                                                             const FeatureHistogram& hist);

// Model expectations of the raw (edges, triangles) statistics.
std::pair<double, double> exact_mean_stats(const ErgmModel& model, const FeatureHistogram& hist);

// Moment-matching fit; fractional targets are allowed (target-matching form).
ErgmModel exact_fit_ergm(double target_edges, double target_triangles,
                         const FeatureHistogram& hist, double tol = 1e-8);
inline ErgmModel exact_fit_ergm(const GraphStats& observed, const FeatureHistogram& hist,
                                double tol = 1e-8) {
    return exact_fit_ergm(static_cast<double>(observed.edges),
                          static_cast<double>(observed.triangles), hist, tol);
}

// Mass-preserving fit: moment constraints plus the three-way KKT condition on
// the single augmented parameter.
ErgmModel exact_fit_nergm(const Graph& observed, const FeatureHistogram& hist, double h,
                          double beta, double tol = 1e-8,
                          KernelFamily family = KernelFamily::Gaussian);

struct ChainConfig {
    int burn_in = 1000;
    int thinning = 100;
    int num_samples = 100;
    enum class Init { ObservedGraph, Empty, Random };
    Init init = Init::ObservedGraph;
    double random_p = 0.5;
    std::uint64_t seed = 0;
};

struct SamplerDiagnostics {
    std::size_t unique_graphs = 0;
    std::size_t unique_feature_tuples = 0;
    long long max_hops = 0;  // max Hamming distance from the initial graph

    std::string to_json() const;
};

struct GibbsResult {
    std::vector<Graph> samples;
    SamplerDiagnostics diagnostics;
};

// Single-site edge-toggle Gibbs sampler: one uniformly random dyad per
// iteration. `observed` is required when config.init == ObservedGraph.
GibbsResult gibbs_sample(const ErgmModel& model, const ChainConfig& config,
                         const Graph* observed = nullptr);

struct McmcDiagnostics {
    int resample_count = 0;
    double final_gradient_norm = 0.0;
    double final_ess = 0.0;
};

// Importance-reweighted MCMC-MLE: fixed-step gradient ascent on the lambda
// block, three-way KKT updates on lambda_a, with ESS-triggered re-sampling.
ErgmModel mcmcmle_fit(const Graph& observed, ErgmModel model_template, const ChainConfig& chain,
                      int steps = 200, double step_size = 10.0,
                      McmcDiagnostics* diagnostics = nullptr);

struct GofBand {
    std::string stat;
    std::string bin;
    double observed = 0.0;
    double p5 = 0.0, p50 = 0.0, p95 = 0.0;
    bool covered = false;
};

std::vector<GofBand> gof_compare(const Graph& observed, const std::vector<Graph>& samples);

void write_gof_compare_csv(const std::vector<GofBand>& table, const std::string& path);

}  // namespace npef
