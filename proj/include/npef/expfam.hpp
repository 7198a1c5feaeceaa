#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "npef/samples.hpp"

namespace npef {

struct Statistic {
    std::string name;
    std::function<double(std::span<const double>)> fn;
};

// Named statistic functions R^d -> R.
struct StatisticSet {
    int dim_in = 1;
    std::vector<Statistic> stats;

    int size() const { return static_cast<int>(stats.size()); }
    void eval(std::span<const double> x, std::span<double> out) const;

    // t(x) = (x, x^2), the univariate Gaussian statistics.
    static StatisticSet gaussian_1d();
    // Per-coordinate monomials x_j^p for p = 1..max_power, then pairwise
    // products x_i * x_j for i < j.
    static StatisticSet monomials(int dim, int max_power, bool pairwise_products = false);
};

// Compact box support with a fixed uniform quadrature grid; the base measure
// is the (unnormalized) uniform measure on the box.
struct Support {
    int dim = 1;
    std::vector<double> lower;
    std::vector<double> upper;
    int points_per_dim = 2001;

    static Support interval(double lo, double hi, int points = 2001);
    static Support box2d(double lo0, double hi0, double lo1, double hi1, int points = 201);
    // [min(sample) - margin, max(sample) + margin] per coordinate.
    static Support around_samples(const SampleSet& sample, double margin, int points = 2001);

    void validate() const;
    std::string to_json() const;
    static Support from_json(const std::string& text);
};

// Composite Simpson nodes and log-weights over the support box (d <= 2).
class Quadrature {
public:
    explicit Quadrature(const Support& support);

    std::size_t size() const { return log_weights_.size(); }
    int dim() const { return dim_; }
    std::span<const double> node(std::size_t i) const {
        return {nodes_.data() + i * dim_, static_cast<std::size_t>(dim_)};
    }
    double log_weight(std::size_t i) const { return log_weights_[i]; }
    std::span<const double> log_weights() const { return log_weights_; }

private:
    int dim_;
    std::vector<double> nodes_;        // row-major
    std::vector<double> log_weights_;  // includes the volume element
};

struct ExpFamModel {
    StatisticSet stats;
    Support support;
    std::vector<double> lambda;
    double log_z = 0.0;

    // <lambda, t(x)> - log Z; -inf outside the support.
    double log_density(std::span<const double> x) const;

    std::string to_json() const;
};

double log_partition(const StatisticSet& stats, const Support& support,
                     std::span<const double> lambda);

std::vector<double> expected_statistics(const ExpFamModel& model);

std::vector<double> empirical_mean_stats(const StatisticSet& stats, const SampleSet& sample);

// Coordinate-wise MLE: matches model moments to the empirical means of the
// statistics within tol (sup norm).
ExpFamModel fit_mle(const StatisticSet& stats, const Support& support, const SampleSet& sample,
                    double tol = 1e-8);

// Same, but matching an explicit target vector instead of empirical means.
ExpFamModel fit_to_moments(const StatisticSet& stats, const Support& support,
                           std::span<const double> target, double tol = 1e-8);

}  // namespace npef
