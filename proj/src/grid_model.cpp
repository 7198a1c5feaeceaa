#include "npef/grid_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "npef/errors.hpp"
#include "npef/logsumexp.hpp"

namespace npef::detail {

std::size_t GridModel::add_column(std::vector<double> col) {
    if (col.size() != logw_.size()) throw InputError("GridModel: column size mismatch");
    columns_.push_back(std::move(col));
    coef_.push_back(0.0);
    return columns_.size() - 1;
}

void GridModel::set_coefficient(std::size_t j, double value) {
    const double delta = value - coef_[j];
    if (delta == 0.0) return;
    const auto& col = columns_[j];
    for (std::size_t i = 0; i < eta_.size(); ++i) eta_[i] += delta * col[i];
    coef_[j] = value;
}

double GridModel::log_partition() const {
    double max_arg = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < logw_.size(); ++i) max_arg = std::max(max_arg, logw_[i] + eta_[i]);
    if (!std::isfinite(max_arg)) return max_arg;
    double sum = 0.0;
    for (std::size_t i = 0; i < logw_.size(); ++i) sum += std::exp(logw_[i] + eta_[i] - max_arg);
    return max_arg + std::log(sum);
}

double GridModel::expectation_of(std::span<const double> values) const {
    double max_arg = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < logw_.size(); ++i) max_arg = std::max(max_arg, logw_[i] + eta_[i]);
    double wsum = 0.0, vsum = 0.0;
    for (std::size_t i = 0; i < logw_.size(); ++i) {
        const double w = std::exp(logw_[i] + eta_[i] - max_arg);
        wsum += w;
        vsum += w * values[i];
    }
    return vsum / wsum;
}

double GridModel::expectation(std::size_t j) const { return expectation_of(columns_[j]); }

std::vector<double> GridModel::expectations() const {
    std::vector<double> out(columns_.size());
    for (std::size_t j = 0; j < columns_.size(); ++j) out[j] = expectation(j);
    return out;
}

std::vector<double> GridModel::probabilities() const {
    const double log_z = log_partition();
    std::vector<double> p(logw_.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(logw_[i] + eta_[i] - log_z);
    return p;
}

GridModel::Moments GridModel::moments_at(std::size_t j, double c) const {
    const auto& col = columns_[j];
    const double delta = c - coef_[j];
    double max_arg = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < logw_.size(); ++i)
        max_arg = std::max(max_arg, logw_[i] + eta_[i] + delta * col[i]);
    double wsum = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < logw_.size(); ++i) {
        const double w = std::exp(logw_[i] + eta_[i] + delta * col[i] - max_arg);
        wsum += w;
        m1 += w * col[i];
        m2 += w * col[i] * col[i];
    }
    m1 /= wsum;
    m2 /= wsum;
    return {m1, std::max(0.0, m2 - m1 * m1)};
}

double GridModel::expectation_at(std::size_t j, double c) const { return moments_at(j, c).mean; }

double GridModel::solve_coordinate(std::size_t j, double target, double resid_tol, double c_lo,
                                   double c_hi) {
    double lo = coef_[j], hi = coef_[j];
    double f_lo = moments_at(j, lo).mean - target;
    double f_hi = f_lo;
    // Expand a bracket around the current coefficient.
    double step = 1.0;
    while (f_lo > 0.0) {
        lo -= step;
        step *= 2.0;
        if (lo < c_lo) {
            lo = c_lo;
            f_lo = moments_at(j, lo).mean - target;
            if (f_lo > resid_tol)
                throw NumericalError("solve_coordinate: root below lower bound");
            break;
        }
        f_lo = moments_at(j, lo).mean - target;
    }
    step = 1.0;
    while (f_hi < 0.0) {
        hi += step;
        step *= 2.0;
        if (hi > c_hi) {
            hi = c_hi;
            f_hi = moments_at(j, hi).mean - target;
            if (f_hi < -resid_tol)
                throw NumericalError("solve_coordinate: root above upper bound");
            break;
        }
        f_hi = moments_at(j, hi).mean - target;
    }

    double c = std::clamp(coef_[j], lo, hi);
    for (int iter = 0; iter < 200; ++iter) {
        const Moments m = moments_at(j, c);
        const double f = m.mean - target;
        if (std::abs(f) <= resid_tol) {
            set_coefficient(j, c);
            return c;
        }
        if (f > 0.0)
            hi = c;
        else
            lo = c;
        double next = c;
        if (m.var > 0.0) next = c - f / m.var;  // Newton on the monotone mean map
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == c) next = 0.5 * (lo + hi);
        c = next;
        if (hi - lo < 1e-15 * (1.0 + std::abs(c))) {
            set_coefficient(j, c);
            return c;
        }
    }
    set_coefficient(j, c);
    return c;
}

}  // namespace npef::detail
