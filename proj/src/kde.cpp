#include "npef/kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "npef/errors.hpp"

namespace npef {

KdeModel::KdeModel(SampleSet centers_in, KernelSpec kernel_in)
    : centers(std::move(centers_in)), kernel(kernel_in) {
    if (centers.empty()) throw InputError("KdeModel: centers must be nonempty");
    if (!kernel.is_density())
        throw InputError("KdeModel: kernel family is not a density (use gaussian or uniform)");
    if (kernel.dim != centers.dim()) throw InputError("KdeModel: kernel/center dim mismatch");
}

double kde_density(const KdeModel& model, std::span<const double> x) {
    if (static_cast<int>(x.size()) != model.centers.dim())
        throw InputError("kde_density: dimension mismatch");
    double sum = 0.0;
    const std::size_t n = model.centers.size();
    for (std::size_t j = 0; j < n; ++j) sum += eval_scaled(model.kernel, x, model.centers.row(j));
    return sum / static_cast<double>(n);
}

double empirical_augmented_mean(const SampleSet& sample, const KernelSpec& kernel,
                                std::size_t i) {
    if (i >= sample.size()) throw InputError("empirical_augmented_mean: index out of range");
    const auto x = sample.row(i);
    double sum = 0.0;
    const std::size_t n = sample.size();
    for (std::size_t j = 0; j < n; ++j) sum += eval_scaled(kernel, x, sample.row(j));
    return sum / static_cast<double>(n);
}

CvResult cv_bandwidth(const SampleSet& sample, KernelFamily family, std::span<const double> grid,
                      int folds) {
    if (grid.empty()) throw InputError("cv_bandwidth: empty grid");
    if (folds < 2) throw InputError("cv_bandwidth: folds must be >= 2");
    const std::size_t n = sample.size();
    if (static_cast<std::size_t>(folds) > n) throw InputError("cv_bandwidth: folds > n");

    CvResult result;
    result.mean_loglik.assign(grid.size(), -std::numeric_limits<double>::infinity());

    for (std::size_t g = 0; g < grid.size(); ++g) {
        KernelSpec spec{family, grid[g], sample.dim(), 0.0};
        double total = 0.0;
        std::size_t held = 0;
        bool any_zero = false;
        for (int fold = 0; fold < folds && !any_zero; ++fold) {
            SampleSet train, test;
            for (std::size_t i = 0; i < n; ++i) {
                if (static_cast<int>(i % folds) == fold)
                    test.push_row(sample.row(i));
                else
                    train.push_row(sample.row(i));
            }
            KdeModel model(std::move(train), spec);
            for (std::size_t i = 0; i < test.size(); ++i) {
                const double d = kde_density(model, test.row(i));
                if (d <= 0.0) {
                    any_zero = true;
                    break;
                }
                total += std::log(d);
                ++held;
            }
        }
        if (!any_zero && held > 0) result.mean_loglik[g] = total / static_cast<double>(held);
    }

    std::size_t best = grid.size();
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (!std::isfinite(result.mean_loglik[g])) continue;
        if (best == grid.size() || result.mean_loglik[g] > result.mean_loglik[best] ||
            (result.mean_loglik[g] == result.mean_loglik[best] && grid[g] < grid[best]))
            best = g;
    }
    if (best == grid.size())
        throw NumericalError(
            "cv_bandwidth: every candidate gave zero held-out density; "
            "use a gaussian kernel or widen the grid");
    result.h = grid[best];
    return result;
}

}  // namespace npef
