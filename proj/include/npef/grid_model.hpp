#pragma once

#include <span>
#include <vector>

#include "npef/expfam.hpp"

namespace npef::detail {

// Discretized exponential family over quadrature nodes (or any weighted
// discrete support): log p_i proportional to logw_i + sum_j coef_j * col_j[i].
// Feature columns are stored explicitly; coordinate updates keep the per-node
// potential eta incrementally.
class GridModel {
public:
    explicit GridModel(std::vector<double> log_weights)
        : logw_(std::move(log_weights)), eta_(logw_.size(), 0.0) {}

    std::size_t nodes() const { return logw_.size(); }
    std::size_t num_columns() const { return columns_.size(); }

    // Takes ownership of a feature column (one value per node); returns its index.
    std::size_t add_column(std::vector<double> col);

    double coefficient(std::size_t j) const { return coef_[j]; }
    std::span<const double> coefficients() const { return coef_; }
    std::span<const double> column(std::size_t j) const { return columns_[j]; }

    void set_coefficient(std::size_t j, double value);

    double log_partition() const;

    // E[col_j] under the current model.
    double expectation(std::size_t j) const;
    // E[f] for an arbitrary per-node function.
    double expectation_of(std::span<const double> values) const;
    std::vector<double> expectations() const;

    // Normalized node probabilities (exp(logw + eta - logZ)).
    std::vector<double> probabilities() const;

    // Solves E[col_j](c) = target for the coefficient c of column j, which is
    // strictly increasing in c. Searches c in [c_lo, c_hi]; throws
    // NumericalError if the root is not bracketed there. On success the
    // coefficient is updated and its value returned. resid_tol bounds
    // |E - target| at the returned coefficient.
    double solve_coordinate(std::size_t j, double target, double resid_tol,
                            double c_lo = -1e4, double c_hi = 1e4);

    // E[col_j] evaluated as if coefficient j were c (others unchanged).
    double expectation_at(std::size_t j, double c) const;

private:
    struct Moments {
        double mean;
        double var;
    };
    Moments moments_at(std::size_t j, double c) const;

    std::vector<double> logw_;
    std::vector<double> eta_;
    std::vector<std::vector<double>> columns_;
    std::vector<double> coef_;
};

}  // namespace npef::detail
