#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "npef/errors.hpp"
#include "npef/kde.hpp"

using namespace npef;

namespace {
double density1(const KdeModel& model, double x) {
    const double xs[1] = {x};
    return kde_density(model, xs);
}
}  // namespace

TEST_CASE("two-center gaussian mixture value") {
    const KdeModel model(SampleSet::from_vector({0.0, 2.0}), KernelSpec::gaussian(1.0));
    const double k0 = 0.3989422804014327;
    CHECK(density1(model, 0.0) ==
          doctest::Approx(0.5 * (k0 + k0 * std::exp(-2.0))).epsilon(1e-14));
    CHECK(density1(model, 1.0) == doctest::Approx(k0 * std::exp(-0.5)).epsilon(1e-14));
}

TEST_CASE("uniform kernel support half-width is h/2") {
    const KdeModel model(SampleSet::from_vector({0.0}), KernelSpec::uniform(1.0));
    CHECK(density1(model, 0.4) == 1.0);
    CHECK(density1(model, 0.6) == 0.0);
}

TEST_CASE("bandwidth rescales height and width") {
    const KdeModel model(SampleSet::from_vector({0.0}), KernelSpec::gaussian(2.0));
    CHECK(density1(model, 0.0) == doctest::Approx(0.5 * 0.3989422804014327).epsilon(1e-14));
}

TEST_CASE("feature-shape kernels are not densities") {
    CHECK_THROWS_AS(KdeModel(SampleSet::from_vector({0.0}), KernelSpec::quadratic(1.0)),
                    InputError);
    CHECK_THROWS_AS(KdeModel(SampleSet::from_vector({0.0}), KernelSpec::smoothed_uniform(1.0)),
                    InputError);
    CHECK_THROWS_AS(KdeModel(SampleSet(), KernelSpec::gaussian(1.0)), InputError);
}

TEST_CASE("empirical augmented mean equals the density at its own center") {
    // Bit-for-bit equality under identical summation order.
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> normal(0.0, 2.0);
    std::uniform_int_distribution<int> n_dist(1, 40);
    std::uniform_real_distribution<double> h_dist(0.3, 3.0);
    for (int rep = 0; rep < 100; ++rep) {
        const int n = n_dist(rng);
        std::vector<double> xs(n);
        for (double& x : xs) x = normal(rng);
        const auto sample = SampleSet::from_vector(xs);
        const KernelSpec kernel = (rep % 2 == 0) ? KernelSpec::gaussian(h_dist(rng))
                                                 : KernelSpec::uniform(h_dist(rng));
        const KdeModel model(sample, kernel);
        const std::size_t i = static_cast<std::size_t>(rep) % sample.size();
        CHECK(empirical_augmented_mean(sample, kernel, i) == density1(model, xs[i]));
    }
}

TEST_CASE("cross validation picks a sensible bandwidth") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> xs(200);
    for (double& x : xs) x = normal(rng);
    const auto sample = SampleSet::from_vector(xs);
    const std::vector<double> grid = {0.05, 0.25, 0.5, 0.75, 1.0, 2.0, 5.0};
    const auto cv = cv_bandwidth(sample, KernelFamily::Gaussian, grid, 5);
    REQUIRE(cv.mean_loglik.size() == grid.size());
    // For n=200 standard normal draws the plug-in optimum is near 0.4; the
    // extremes of the grid must not win.
    CHECK(cv.h >= 0.25);
    CHECK(cv.h <= 1.0);
    // Leave-one-out runs and also avoids the extremes.
    const auto loo = cv_bandwidth(sample, KernelFamily::Gaussian, grid,
                                  static_cast<int>(sample.size()));
    CHECK(loo.h >= 0.25);
    CHECK(loo.h <= 1.0);
}

TEST_CASE("cross validation input checks") {
    const auto sample = SampleSet::from_vector({0.0, 1.0, 2.0});
    const std::vector<double> grid = {1.0};
    CHECK_THROWS_AS(cv_bandwidth(sample, KernelFamily::Gaussian, grid, 4), InputError);
    CHECK_THROWS_AS(cv_bandwidth(sample, KernelFamily::Gaussian, grid, 1), InputError);
    CHECK_THROWS_AS(cv_bandwidth(sample, KernelFamily::Gaussian, {}, 3), InputError);
    const auto one = cv_bandwidth(sample, KernelFamily::Gaussian, grid, 3);
    CHECK(one.h == 1.0);
}
