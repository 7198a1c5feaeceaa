#include "npef/expfam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "npef/errors.hpp"
#include "npef/grid_model.hpp"

namespace npef {

void StatisticSet::eval(std::span<const double> x, std::span<double> out) const {
    if (static_cast<int>(x.size()) != dim_in) throw InputError("StatisticSet: dimension mismatch");
    for (int j = 0; j < size(); ++j) {
        const double v = stats[j].fn(x);
        if (!std::isfinite(v)) throw NumericalError("statistic " + stats[j].name + " not finite");
        out[j] = v;
    }
}

StatisticSet StatisticSet::gaussian_1d() {
    StatisticSet s;
    s.dim_in = 1;
    s.stats.push_back({"x", [](std::span<const double> x) { return x[0]; }});
    s.stats.push_back({"x2", [](std::span<const double> x) { return x[0] * x[0]; }});
    return s;
}

StatisticSet StatisticSet::monomials(int dim, int max_power, bool pairwise_products) {
    StatisticSet s;
    s.dim_in = dim;
    for (int j = 0; j < dim; ++j) {
        for (int p = 1; p <= max_power; ++p) {
            std::string name = "x" + std::to_string(j) + (p > 1 ? "^" + std::to_string(p) : "");
            s.stats.push_back({name, [j, p](std::span<const double> x) {
                                   return std::pow(x[j], static_cast<double>(p));
                               }});
        }
    }
    if (pairwise_products) {
        for (int a = 0; a < dim; ++a)
            for (int b = a + 1; b < dim; ++b) {
                std::string name = "x" + std::to_string(a) + "*x" + std::to_string(b);
                s.stats.push_back(
                    {name, [a, b](std::span<const double> x) { return x[a] * x[b]; }});
            }
    }
    return s;
}

Support Support::interval(double lo, double hi, int points) {
    Support s;
    s.dim = 1;
    s.lower = {lo};
    s.upper = {hi};
    s.points_per_dim = points;
    s.validate();
    return s;
}

Support Support::box2d(double lo0, double hi0, double lo1, double hi1, int points) {
    Support s;
    s.dim = 2;
    s.lower = {lo0, lo1};
    s.upper = {hi0, hi1};
    s.points_per_dim = points;
    s.validate();
    return s;
}

Support Support::around_samples(const SampleSet& sample, double margin, int points) {
    Support s;
    s.dim = sample.dim();
    s.lower = sample.min();
    s.upper = sample.max();
    for (int j = 0; j < s.dim; ++j) {
        s.lower[j] -= margin;
        s.upper[j] += margin;
    }
    s.points_per_dim = points;
    s.validate();
    return s;
}

void Support::validate() const {
    if (dim < 1 || dim > 2) throw InputError("Support: only d in {1,2} is supported");
    if (static_cast<int>(lower.size()) != dim || static_cast<int>(upper.size()) != dim)
        throw InputError("Support: bound dimensions mismatch");
    for (int j = 0; j < dim; ++j) {
        if (!(lower[j] < upper[j])) throw InputError("Support: lower must be < upper");
        if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]))
            throw InputError("Support: bounds must be finite");
    }
    if (points_per_dim < 3) throw InputError("Support: need at least 3 quadrature points per dim");
}

std::string Support::to_json() const {
    nlohmann::json j;
    j["dim"] = dim;
    j["lower"] = lower;
    j["upper"] = upper;
    j["points_per_dim"] = points_per_dim;
    return j.dump();
}

Support Support::from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    Support s;
    s.dim = j.at("dim").get<int>();
    s.lower = j.at("lower").get<std::vector<double>>();
    s.upper = j.at("upper").get<std::vector<double>>();
    s.points_per_dim = j.at("points_per_dim").get<int>();
    s.validate();
    return s;
}

namespace {

// Composite Simpson weights on m (odd) uniform points.
std::vector<double> simpson_log_weights(int m, double step) {
    std::vector<double> w(m);
    for (int i = 0; i < m; ++i) {
        double c;
        if (i == 0 || i == m - 1)
            c = 1.0;
        else if (i % 2 == 1)
            c = 4.0;
        else
            c = 2.0;
        w[i] = std::log(c * step / 3.0);
    }
    return w;
}

}  // namespace

Quadrature::Quadrature(const Support& support) {
    support.validate();
    dim_ = support.dim;
    int m = support.points_per_dim;
    if (m % 2 == 0) ++m;  // Simpson needs an odd count
    if (dim_ == 1) {
        const double step = (support.upper[0] - support.lower[0]) / (m - 1);
        const auto logw = simpson_log_weights(m, step);
        nodes_.resize(m);
        log_weights_.resize(m);
        for (int i = 0; i < m; ++i) {
            nodes_[i] = support.lower[0] + i * step;
            log_weights_[i] = logw[i];
        }
    } else {
        const double step0 = (support.upper[0] - support.lower[0]) / (m - 1);
        const double step1 = (support.upper[1] - support.lower[1]) / (m - 1);
        const auto logw0 = simpson_log_weights(m, step0);
        const auto logw1 = simpson_log_weights(m, step1);
        nodes_.resize(static_cast<std::size_t>(m) * m * 2);
        log_weights_.resize(static_cast<std::size_t>(m) * m);
        std::size_t idx = 0;
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b, ++idx) {
                nodes_[idx * 2] = support.lower[0] + a * step0;
                nodes_[idx * 2 + 1] = support.lower[1] + b * step1;
                log_weights_[idx] = logw0[a] + logw1[b];
            }
    }
}

namespace {

detail::GridModel build_grid(const StatisticSet& stats, const Quadrature& quad) {
    detail::GridModel grid(std::vector<double>(quad.log_weights().begin(),
                                               quad.log_weights().end()));
    std::vector<double> buf(stats.size());
    std::vector<std::vector<double>> cols(stats.size(), std::vector<double>(quad.size()));
    for (std::size_t i = 0; i < quad.size(); ++i) {
        stats.eval(quad.node(i), buf);
        for (int j = 0; j < stats.size(); ++j) cols[j][i] = buf[j];
    }
    for (auto& c : cols) grid.add_column(std::move(c));
    return grid;
}

}  // namespace

double log_partition(const StatisticSet& stats, const Support& support,
                     std::span<const double> lambda) {
    if (static_cast<int>(lambda.size()) != stats.size())
        throw InputError("log_partition: lambda length mismatch");
    Quadrature quad(support);
    auto grid = build_grid(stats, quad);
    for (std::size_t j = 0; j < lambda.size(); ++j) grid.set_coefficient(j, lambda[j]);
    return grid.log_partition();
}

double ExpFamModel::log_density(std::span<const double> x) const {
    for (int j = 0; j < support.dim; ++j)
        if (x[j] < support.lower[j] || x[j] > support.upper[j])
            return -std::numeric_limits<double>::infinity();
    std::vector<double> t(stats.size());
    stats.eval(x, t);
    double dot = 0.0;
    for (int j = 0; j < stats.size(); ++j) dot += lambda[j] * t[j];
    return dot - log_z;
}

std::string ExpFamModel::to_json() const {
    nlohmann::json j;
    std::vector<std::string> names;
    for (const auto& s : stats.stats) names.push_back(s.name);
    j["stats"] = names;
    j["support"] = nlohmann::json::parse(support.to_json());
    j["lambda"] = lambda;
    j["log_z"] = log_z;
    return j.dump();
}

std::vector<double> expected_statistics(const ExpFamModel& model) {
    Quadrature quad(model.support);
    auto grid = build_grid(model.stats, quad);
    for (std::size_t j = 0; j < model.lambda.size(); ++j)
        grid.set_coefficient(j, model.lambda[j]);
    return grid.expectations();
}

std::vector<double> empirical_mean_stats(const StatisticSet& stats, const SampleSet& sample) {
    if (sample.dim() != stats.dim_in) throw InputError("sample dimension mismatch");
    std::vector<double> mean(stats.size(), 0.0);
    std::vector<double> buf(stats.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
        stats.eval(sample.row(i), buf);
        for (int j = 0; j < stats.size(); ++j) mean[j] += buf[j];
    }
    for (auto& m : mean) m /= static_cast<double>(sample.size());
    return mean;
}

namespace {

void check_interior(const detail::GridModel& grid, std::span<const double> target) {
    for (std::size_t j = 0; j < target.size(); ++j) {
        const auto col = grid.column(j);
        const auto [mn, mx] = std::minmax_element(col.begin(), col.end());
        if (!(target[j] > *mn && target[j] < *mx))
            throw BoundaryStatisticsError(
                "boundary statistics: target moment " + std::to_string(j) +
                " is not strictly inside the attainable range");
    }
}

ExpFamModel fit_grid(const StatisticSet& stats, const Support& support,
                     std::span<const double> target, double tol) {
    Quadrature quad(support);
    auto grid = build_grid(stats, quad);
    check_interior(grid, target);

    const int max_outer = 500;
    for (int iter = 0; iter < max_outer; ++iter) {
        for (int j = 0; j < stats.size(); ++j)
            grid.solve_coordinate(j, target[j], tol / 10.0);
        double resid = 0.0;
        for (int j = 0; j < stats.size(); ++j)
            resid = std::max(resid, std::abs(grid.expectation(j) - target[j]));
        if (resid <= tol) {
            ExpFamModel model{stats, support, {}, 0.0};
            model.lambda.assign(grid.coefficients().begin(), grid.coefficients().end());
            model.log_z = grid.log_partition();
            return model;
        }
    }
    double resid = 0.0;
    for (int j = 0; j < stats.size(); ++j)
        resid = std::max(resid, std::abs(grid.expectation(j) - target[j]));
    throw ConvergenceError("fit_mle: no convergence after 500 sweeps, residual " +
                           std::to_string(resid));
}

}  // namespace

ExpFamModel fit_mle(const StatisticSet& stats, const Support& support, const SampleSet& sample,
                    double tol) {
    if (stats.size() >= 2 && sample.size() >= 1) {
        bool all_same = true;
        const auto first = sample.row(0);
        for (std::size_t i = 1; i < sample.size() && all_same; ++i) {
            const auto r = sample.row(i);
            for (int j = 0; j < sample.dim(); ++j)
                if (r[j] != first[j]) {
                    all_same = false;
                    break;
                }
        }
        if (all_same)
            throw BoundaryStatisticsError(
                "boundary statistics: degenerate sample (all observations identical)");
    }
    const auto target = empirical_mean_stats(stats, sample);
    return fit_grid(stats, support, target, tol);
}

ExpFamModel fit_to_moments(const StatisticSet& stats, const Support& support,
                           std::span<const double> target, double tol) {
    if (static_cast<int>(target.size()) != stats.size())
        throw InputError("fit_to_moments: target length mismatch");
    return fit_grid(stats, support, target, tol);
}

}  // namespace npef
