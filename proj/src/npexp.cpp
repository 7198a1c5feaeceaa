#include "npef/npexp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "npef/errors.hpp"
#include "npef/grid_model.hpp"

namespace npef {

double BetaSchedule::beta(std::size_t n) const {
    switch (kind) {
        case BetaKind::InvSqrtN: return scale / std::sqrt(static_cast<double>(n));
        case BetaKind::InvLogN: return scale / std::log(static_cast<double>(std::max<std::size_t>(n, 2)));
        case BetaKind::Constant: return scale;
    }
    return scale;
}

namespace {

constexpr double kNonzeroEps = 1e-10;

// Quadrature grid with k global statistic columns followed by n augmented
// kernel columns.
detail::GridModel build_combined_grid(const StatisticSet& stats, const Quadrature& quad,
                                      const KernelSpec& kernel, const SampleSet& centers) {
    detail::GridModel grid(
        std::vector<double>(quad.log_weights().begin(), quad.log_weights().end()));
    const int k = stats.size();
    const std::size_t n = centers.size();
    std::vector<double> buf(k);
    std::vector<std::vector<double>> cols(k + n, std::vector<double>(quad.size()));
    for (std::size_t i = 0; i < quad.size(); ++i) {
        const auto x = quad.node(i);
        stats.eval(x, buf);
        for (int j = 0; j < k; ++j) cols[j][i] = buf[j];
        for (std::size_t c = 0; c < n; ++c)
            cols[k + c][i] = eval_scaled(kernel, x, centers.row(c));
    }
    for (auto& c : cols) grid.add_column(std::move(c));
    return grid;
}

void check_lambda_block_interior(const detail::GridModel& grid, std::span<const double> target) {
    for (std::size_t j = 0; j < target.size(); ++j) {
        const auto col = grid.column(j);
        const auto [mn, mx] = std::minmax_element(col.begin(), col.end());
        if (!(target[j] > *mn && target[j] < *mx))
            throw BoundaryStatisticsError("boundary statistics: global moment " +
                                          std::to_string(j) +
                                          " is not strictly inside the attainable range");
    }
}

void check_not_degenerate(const SampleSet& sample, int k) {
    if (k < 2 || sample.size() < 2) return;
    const auto first = sample.row(0);
    for (std::size_t i = 1; i < sample.size(); ++i) {
        const auto r = sample.row(i);
        for (int j = 0; j < sample.dim(); ++j)
            if (r[j] != first[j]) return;
    }
    throw BoundaryStatisticsError(
        "boundary statistics: degenerate sample (all observations identical)");
}

struct EmpiricalMeans {
    std::vector<double> global;     // mean t over the sample
    std::vector<double> augmented;  // KDE values at the sample points (Lemma-1 identity)
};

EmpiricalMeans empirical_means(const SampleSet& sample, const StatisticSet& stats,
                               const KernelSpec& kernel) {
    EmpiricalMeans em;
    em.global = empirical_mean_stats(stats, sample);
    em.augmented.resize(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i)
        em.augmented[i] = empirical_augmented_mean(sample, kernel, i);
    return em;
}

// Objective value for the current grid coefficients. `targets` is the vector
// the lambda block is constrained to (empirical means or t*).
double objective(const detail::GridModel& grid, std::span<const double> targets,
                 std::span<const double> emp_a, std::span<const double> beta, int k,
                 std::size_t n) {
    double obj = -grid.log_partition();
    const auto coef = grid.coefficients();
    for (int j = 0; j < k; ++j) obj += coef[j] * targets[j];
    for (std::size_t i = 0; i < n; ++i)
        obj += coef[k + i] * emp_a[i] - beta[i] * std::abs(coef[k + i]);
    return obj;
}

// Three-way KKT update of one augmented coordinate; returns the new value and
// updates the grid when it changes.
double update_augmented(detail::GridModel& grid, std::size_t col, double emp, double beta,
                        double resid_tol, double bound) {
    const double at_zero = grid.expectation_at(col, 0.0);
    if (at_zero < emp - beta) {
        // The root of E = emp - beta is positive.
        return grid.solve_coordinate(col, emp - beta, resid_tol, 0.0, bound);
    }
    if (at_zero > emp + beta) {
        return grid.solve_coordinate(col, emp + beta, resid_tol, -bound, 0.0);
    }
    grid.set_coefficient(col, 0.0);
    return 0.0;
}

double kkt_residual(const detail::GridModel& grid, int k, std::span<const double> emp_a,
                    std::span<const double> beta) {
    double resid = 0.0;
    for (std::size_t i = 0; i < emp_a.size(); ++i) {
        const double la = grid.coefficient(k + i);
        const double gap = emp_a[i] - grid.expectation(k + i);
        double r;
        if (la > kNonzeroEps)
            r = std::abs(gap - beta[i]);
        else if (la < -kNonzeroEps)
            r = std::abs(gap + beta[i]);
        else
            r = std::max(0.0, std::abs(gap) - beta[i]);
        resid = std::max(resid, r);
    }
    return resid;
}

NpExpModel fit_impl(const SampleSet& sample, const StatisticSet& stats, const Support& support,
                    const KernelSpec& kernel, const BetaSchedule& schedule,
                    const std::optional<std::vector<double>>& target_moments,
                    const FitOptions& options, FitDiagnostics* diagnostics) {
    if (sample.dim() != stats.dim_in) throw InputError("fit: sample dimension mismatch");
    if (kernel.dim != sample.dim()) throw InputError("fit: kernel dimension mismatch");
    check_not_degenerate(sample, stats.size());

    const int k = stats.size();
    const std::size_t n = sample.size();
    const double beta_value = schedule.beta(n);
    std::vector<double> beta(n, beta_value);

    const auto em = empirical_means(sample, stats, kernel);
    const std::vector<double> targets = target_moments ? *target_moments : em.global;

    Quadrature quad(support);
    auto grid = build_combined_grid(stats, quad, kernel, sample);
    check_lambda_block_interior(grid, targets);

    FitDiagnostics local;
    FitDiagnostics& diag = diagnostics ? *diagnostics : local;
    diag.objective_trace.clear();

    double moment_resid = 0.0, kkt_resid = 0.0;
    bool converged = false;
    for (int iter = 0; iter < options.max_outer; ++iter) {
        for (int j = 0; j < k; ++j) grid.solve_coordinate(j, targets[j], options.tol / 10.0);
        for (std::size_t i = 0; i < n; ++i)
            update_augmented(grid, k + i, em.augmented[i], beta[i], options.tol / 10.0,
                             options.lambda_a_bound);

        // Refine over the active set only: full sweeps creep when many
        // overlapping kernels are active, while the active subproblem is
        // smooth and converges quickly. Inactive coordinates are re-checked
        // by the next full sweep.
        std::vector<std::size_t> active;
        for (std::size_t i = 0; i < n; ++i)
            if (std::abs(grid.coefficient(k + i)) > kNonzeroEps) active.push_back(i);
        for (int inner = 0; inner < 100; ++inner) {
            for (int j = 0; j < k; ++j) grid.solve_coordinate(j, targets[j], options.tol / 10.0);
            for (std::size_t i : active)
                update_augmented(grid, k + i, em.augmented[i], beta[i], options.tol / 10.0,
                                 options.lambda_a_bound);
            double sub = 0.0;
            for (int j = 0; j < k; ++j)
                sub = std::max(sub, std::abs(grid.expectation(j) - targets[j]));
            for (std::size_t i : active) {
                const double la = grid.coefficient(k + i);
                const double gap = em.augmented[i] - grid.expectation(k + i);
                if (la > kNonzeroEps)
                    sub = std::max(sub, std::abs(gap - beta[i]));
                else if (la < -kNonzeroEps)
                    sub = std::max(sub, std::abs(gap + beta[i]));
                else
                    sub = std::max(sub, std::max(0.0, std::abs(gap) - beta[i]));
            }
            if (sub <= options.tol / 2.0) break;
        }

        diag.objective_trace.push_back(objective(grid, targets, em.augmented, beta, k, n));
        diag.outer_iterations = iter + 1;

        moment_resid = 0.0;
        for (int j = 0; j < k; ++j)
            moment_resid = std::max(moment_resid, std::abs(grid.expectation(j) - targets[j]));
        kkt_resid = kkt_residual(grid, k, em.augmented, beta);
        diag.moment_residual = moment_resid;
        diag.kkt_residual = kkt_resid;
        if (std::max(moment_resid, kkt_resid) <= options.tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "fit: no convergence after " << options.max_outer
            << " outer iterations; moment residual " << moment_resid << ", KKT residual "
            << kkt_resid;
        throw ConvergenceError(msg.str());
    }

    NpExpModel model;
    model.base.stats = stats;
    model.base.support = support;
    model.base.lambda.assign(grid.coefficients().begin(), grid.coefficients().begin() + k);
    model.base.log_z = grid.log_partition();
    model.centers = sample;
    model.kernel = kernel;
    model.lambda_a.assign(grid.coefficients().begin() + k, grid.coefficients().end());
    model.beta = std::move(beta);
    model.target_moments = target_moments;
    return model;
}

}  // namespace

NpExpModel fit(const SampleSet& sample, const StatisticSet& stats, const Support& support,
               const KernelSpec& kernel, const BetaSchedule& schedule, const FitOptions& options,
               FitDiagnostics* diagnostics) {
    return fit_impl(sample, stats, support, kernel, schedule, std::nullopt, options, diagnostics);
}

NpExpModel fit_with_target_moments(const SampleSet& sample, const StatisticSet& stats,
                                   const Support& support, const KernelSpec& kernel,
                                   const BetaSchedule& schedule, std::span<const double> target,
                                   const FitOptions& options, FitDiagnostics* diagnostics) {
    if (static_cast<int>(target.size()) != stats.size())
        throw InputError("fit_with_target_moments: target length mismatch");
    return fit_impl(sample, stats, support, kernel, schedule,
                    std::vector<double>(target.begin(), target.end()), options, diagnostics);
}

double NpExpModel::log_density(std::span<const double> x) const {
    const auto& support = base.support;
    for (int j = 0; j < support.dim; ++j)
        if (x[j] < support.lower[j] || x[j] > support.upper[j])
            return -std::numeric_limits<double>::infinity();
    std::vector<double> t(base.stats.size());
    base.stats.eval(x, t);
    double dot = 0.0;
    for (int j = 0; j < base.stats.size(); ++j) dot += base.lambda[j] * t[j];
    for (std::size_t i = 0; i < centers.size(); ++i) {
        if (lambda_a[i] == 0.0) continue;
        dot += lambda_a[i] * eval_scaled(kernel, x, centers.row(i));
    }
    return dot - base.log_z;
}

double NpExpModel::mean_log_density(const SampleSet& eval) const {
    double total = 0.0;
    for (std::size_t i = 0; i < eval.size(); ++i) total += log_density(eval.row(i));
    return total / static_cast<double>(eval.size());
}

int NpExpModel::nonzero_count() const {
    int count = 0;
    for (double la : lambda_a)
        if (std::abs(la) > kNonzeroEps) ++count;
    return count;
}

double penalized_loglik(const NpExpModel& model, const SampleSet& sample) {
    const int k = model.base.stats.size();
    const auto mean_t = empirical_mean_stats(model.base.stats, sample);
    double obj = -model.base.log_z;
    for (int j = 0; j < k; ++j) obj += model.base.lambda[j] * mean_t[j];
    for (std::size_t i = 0; i < model.centers.size(); ++i) {
        if (model.lambda_a[i] != 0.0) {
            double mean_a = 0.0;
            for (std::size_t s = 0; s < sample.size(); ++s)
                mean_a += eval_scaled(model.kernel, sample.row(s), model.centers.row(i));
            mean_a /= static_cast<double>(sample.size());
            obj += model.lambda_a[i] * mean_a;
        }
        obj -= model.beta[i] * std::abs(model.lambda_a[i]);
    }
    return obj;
}

namespace {

detail::GridModel grid_from_model(const NpExpModel& model) {
    Quadrature quad(model.base.support);
    auto grid = build_combined_grid(model.base.stats, quad, model.kernel, model.centers);
    const int k = model.base.stats.size();
    for (int j = 0; j < k; ++j) grid.set_coefficient(j, model.base.lambda[j]);
    for (std::size_t i = 0; i < model.lambda_a.size(); ++i)
        grid.set_coefficient(k + i, model.lambda_a[i]);
    return grid;
}

}  // namespace

double solve_augmented_coordinate(const NpExpModel& model, const SampleSet& sample, std::size_t j,
                                  double tol) {
    if (j >= model.centers.size()) throw InputError("solve_augmented_coordinate: index out of range");
    auto grid = grid_from_model(model);
    const int k = model.base.stats.size();
    const double emp = empirical_augmented_mean(sample, model.kernel, j);
    return update_augmented(grid, k + j, emp, model.beta[j], tol / 10.0, 50.0);
}

double smooth_loglik(const NpExpModel& model, const SampleSet& sample,
                     std::span<const double> theta) {
    auto grid = grid_from_model(model);
    if (theta.size() != grid.num_columns()) throw InputError("smooth_loglik: theta length mismatch");
    for (std::size_t j = 0; j < theta.size(); ++j) grid.set_coefficient(j, theta[j]);
    const int k = model.base.stats.size();
    const auto mean_t = empirical_mean_stats(model.base.stats, sample);
    double obj = -grid.log_partition();
    for (int j = 0; j < k; ++j) obj += theta[j] * mean_t[j];
    for (std::size_t i = 0; i < model.centers.size(); ++i)
        obj += theta[k + i] * empirical_augmented_mean(sample, model.kernel, i);
    return obj;
}

std::vector<double> smooth_gradient(const NpExpModel& model, const SampleSet& sample,
                                    std::span<const double> theta) {
    auto grid = grid_from_model(model);
    if (theta.size() != grid.num_columns())
        throw InputError("smooth_gradient: theta length mismatch");
    for (std::size_t j = 0; j < theta.size(); ++j) grid.set_coefficient(j, theta[j]);
    const int k = model.base.stats.size();
    const auto mean_t = empirical_mean_stats(model.base.stats, sample);
    std::vector<double> grad(theta.size());
    for (int j = 0; j < k; ++j) grad[j] = mean_t[j] - grid.expectation(j);
    for (std::size_t i = 0; i < model.centers.size(); ++i)
        grad[k + i] = empirical_augmented_mean(sample, model.kernel, i) - grid.expectation(k + i);
    return grad;
}

std::string NpExpModel::to_json() const {
    nlohmann::json j;
    j["base"] = nlohmann::json::parse(base.to_json());
    j["kernel"] = nlohmann::json::parse(kernel.to_json());
    j["centers"] = {{"dim", centers.dim()}, {"data", centers.data()}};
    j["lambda_a"] = lambda_a;
    j["beta"] = beta;
    if (target_moments)
        j["target_moments"] = *target_moments;
    else
        j["target_moments"] = nullptr;
    return j.dump();
}

NpExpModel NpExpModel::from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    NpExpModel m;
    const auto& b = j.at("base");
    const auto names = b.at("stats").get<std::vector<std::string>>();
    if (names == std::vector<std::string>{"x", "x2"})
        m.base.stats = StatisticSet::gaussian_1d();
    else
        throw InputError("model file uses statistics this build cannot reconstruct");
    m.base.support = Support::from_json(b.at("support").dump());
    m.base.lambda = b.at("lambda").get<std::vector<double>>();
    m.base.log_z = b.at("log_z").get<double>();
    m.kernel = KernelSpec::from_json(j.at("kernel").dump());
    m.centers = SampleSet(j.at("centers").at("dim").get<int>(),
                          j.at("centers").at("data").get<std::vector<double>>());
    m.lambda_a = j.at("lambda_a").get<std::vector<double>>();
    m.beta = j.at("beta").get<std::vector<double>>();
    if (j.contains("target_moments") && !j["target_moments"].is_null())
        m.target_moments = j["target_moments"].get<std::vector<double>>();
    return m;
}

}  // namespace npef
