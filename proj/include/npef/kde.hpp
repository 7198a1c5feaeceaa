#pragma once

#include <span>
#include <vector>

#include "npef/kernel.hpp"
#include "npef/samples.hpp"

namespace npef {

// Parzen-window estimator: average of scaled kernels centered at the data.
struct KdeModel {
    SampleSet centers;
    KernelSpec kernel;

    KdeModel(SampleSet centers, KernelSpec kernel);
};

double kde_density(const KdeModel& model, std::span<const double> x);

// (1/n) sum_j K_H(x^i; x^j): the empirical mean of the i-th augmented
// statistic. Uses the same summation order as kde_density, so the two agree
// bit-for-bit at x = x^i. i is 0-based.
double empirical_augmented_mean(const SampleSet& sample, const KernelSpec& kernel, std::size_t i);

struct CvResult {
    double h;
    std::vector<double> mean_loglik;  // per grid entry
};

// K-fold cross-validated bandwidth: the h maximizing mean held-out
// log-likelihood, ties broken toward smaller h. folds = n gives leave-one-out.
CvResult cv_bandwidth(const SampleSet& sample, KernelFamily family,
                      std::span<const double> grid, int folds = 5);

}  // namespace npef
