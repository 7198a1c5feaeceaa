#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "npef/expfam.hpp"
#include "npef/kde.hpp"
#include "npef/kernel.hpp"
#include "npef/samples.hpp"

namespace npef {

enum class BetaKind { InvSqrtN, InvLogN, Constant };

// Maps sample size to the box half-width beta.
struct BetaSchedule {
    BetaKind kind = BetaKind::InvSqrtN;
    double scale = 1.0;

    double beta(std::size_t n) const;

    static BetaSchedule inv_sqrt(double scale = 1.0) { return {BetaKind::InvSqrtN, scale}; }
    static BetaSchedule inv_log(double scale = 1.0) { return {BetaKind::InvLogN, scale}; }
    static BetaSchedule constant(double value) { return {BetaKind::Constant, value}; }
};

// Exponential family whose statistics are augmented with one kernel feature
// per training point.
struct NpExpModel {
    ExpFamModel base;   // lambda block; base.log_z holds the combined log Z
    SampleSet centers;  // the n kernel centers (training points)
    KernelSpec kernel;
    std::vector<double> lambda_a;
    std::vector<double> beta;
    std::optional<std::vector<double>> target_moments;

    // <lambda,t(x)> + <lambda_a,t_a(x)> - log Z; -inf outside the support.
    double log_density(std::span<const double> x) const;
    double mean_log_density(const SampleSet& eval) const;

    int nonzero_count() const;

    std::string to_json() const;
    static NpExpModel from_json(const std::string& text);
};

// Eq-style penalized objective: <theta, mean s> - ln Z - sum_i beta_i |lambda_a^i|.
// The penalty always uses the model's training-set beta and lambda_a, also
// when `sample` is held-out data.
double penalized_loglik(const NpExpModel& model, const SampleSet& sample);

struct FitOptions {
    double tol = 1e-6;
    int max_outer = 3000;
    // Coordinate bound for augmented parameters; roots outside are an error.
    double lambda_a_bound = 50.0;
};

struct FitDiagnostics {
    int outer_iterations = 0;
    double moment_residual = 0.0;
    double kkt_residual = 0.0;
    std::vector<double> objective_trace;  // penalized log-likelihood per outer pass
};

NpExpModel fit(const SampleSet& sample, const StatisticSet& stats, const Support& support,
               const KernelSpec& kernel, const BetaSchedule& schedule,
               const FitOptions& options = {}, FitDiagnostics* diagnostics = nullptr);

NpExpModel fit_with_target_moments(const SampleSet& sample, const StatisticSet& stats,
                                   const Support& support, const KernelSpec& kernel,
                                   const BetaSchedule& schedule, std::span<const double> target,
                                   const FitOptions& options = {},
                                   FitDiagnostics* diagnostics = nullptr);

// One KKT update of augmented coordinate j with everything else held fixed;
// returns the new lambda_a^j (three-way soft-threshold rule) without
// mutating the model.
double solve_augmented_coordinate(const NpExpModel& model, const SampleSet& sample, std::size_t j,
                                  double tol);

// Smooth part of the objective and its gradient at an explicit parameter
// vector theta = (lambda, lambda_a), for derivative checks.
double smooth_loglik(const NpExpModel& model, const SampleSet& sample,
                     std::span<const double> theta);
std::vector<double> smooth_gradient(const NpExpModel& model, const SampleSet& sample,
                                    std::span<const double> theta);

}  // namespace npef
