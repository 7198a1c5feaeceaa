#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "npef/errors.hpp"
#include "npef/expfam.hpp"
#include "npef/logsumexp.hpp"

using namespace npef;

TEST_CASE("gaussian statistics are x and x squared") {
    const auto stats = StatisticSet::gaussian_1d();
    REQUIRE(stats.size() == 2);
    const double x[1] = {2.0};
    double out[2];
    stats.eval(x, out);
    CHECK(out[0] == 2.0);
    CHECK(out[1] == 4.0);
}

TEST_CASE("quadrature weights integrate the box volume") {
    const Quadrature quad(Support::interval(0.0, 2.0, 101));
    double total = -INFINITY;
    for (std::size_t i = 0; i < quad.size(); ++i)
        total = log_add(total, quad.log_weight(i));
    CHECK(total == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("log partition of flat and exponential tilts") {
    const auto stats = StatisticSet::gaussian_1d();
    const std::vector<double> zero = {0.0, 0.0};
    CHECK(log_partition(stats, Support::interval(0.0, 1.0), zero) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(log_partition(stats, Support::interval(-1.0, 3.0), zero) ==
          doctest::Approx(std::log(4.0)).epsilon(1e-12));
    // integral of exp(x) over [0,1] is e - 1
    const std::vector<double> lin = {1.0, 0.0};
    CHECK(log_partition(stats, Support::interval(0.0, 1.0), lin) ==
          doctest::Approx(std::log(std::exp(1.0) - 1.0)).epsilon(1e-12));
    // integral of exp(-x^2/2) over a wide interval is sqrt(2 pi)
    const std::vector<double> gauss = {0.0, -0.5};
    CHECK(log_partition(stats, Support::interval(-8.0, 8.0), gauss) ==
          doctest::Approx(0.9189385332046727).epsilon(1e-10));
}

TEST_CASE("expected statistics of the standard normal restriction") {
    ExpFamModel model;
    model.stats = StatisticSet::gaussian_1d();
    model.support = Support::interval(-8.0, 8.0);
    model.lambda = {0.0, -0.5};
    model.log_z = log_partition(model.stats, model.support, model.lambda);
    const auto mom = expected_statistics(model);
    REQUIRE(mom.size() == 2);
    CHECK(mom[0] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(mom[1] == doctest::Approx(1.0).epsilon(1e-8));
    const double x[1] = {0.0};
    CHECK(model.log_density(x) == doctest::Approx(-0.9189385332046727).epsilon(1e-10));
    const double outside[1] = {9.0};
    CHECK(model.log_density(outside) == -INFINITY);
}

TEST_CASE("empirical means of the statistics") {
    const auto sample = SampleSet::from_vector({1.0, 2.0, 3.0});
    const auto m = empirical_mean_stats(StatisticSet::gaussian_1d(), sample);
    REQUIRE(m.size() == 2);
    CHECK(m[0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(m[1] == doctest::Approx(14.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("moment fit recovers the standard normal parameters") {
    const std::vector<double> target = {0.0, 1.0};
    const auto model =
        fit_to_moments(StatisticSet::gaussian_1d(), Support::interval(-8.0, 8.0), target, 1e-10);
    CHECK(model.lambda[0] == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(model.lambda[1] == doctest::Approx(-0.5).epsilon(1e-6));
    const auto mom = expected_statistics(model);
    CHECK(mom[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(mom[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("maximum likelihood fit matches empirical moments") {
    const auto sample = SampleSet::from_vector({-1.5, -0.2, 0.1, 0.4, 1.1, 2.0});
    const auto emp = empirical_mean_stats(StatisticSet::gaussian_1d(), sample);
    const auto model =
        fit_mle(StatisticSet::gaussian_1d(), Support::interval(-6.0, 6.0), sample, 1e-9);
    const auto mom = expected_statistics(model);
    CHECK(mom[0] == doctest::Approx(emp[0]).epsilon(1e-8));
    CHECK(mom[1] == doctest::Approx(emp[1]).epsilon(1e-8));
}

TEST_CASE("unattainable targets are rejected") {
    // On [-1,1] the second moment cannot exceed 1.
    const std::vector<double> target = {0.0, 100.0};
    CHECK_THROWS_AS(
        fit_to_moments(StatisticSet::gaussian_1d(), Support::interval(-1.0, 1.0), target),
        InputError);
}

TEST_CASE("support validation") {
    CHECK_THROWS_AS(Support::interval(1.0, 0.0), InputError);
    CHECK_THROWS_AS(Support::interval(0.0, 1.0, 1), InputError);
    const auto back = Support::from_json(Support::interval(-2.0, 3.0, 501).to_json());
    CHECK(back.lower[0] == doctest::Approx(-2.0));
    CHECK(back.upper[0] == doctest::Approx(3.0));
    CHECK(back.points_per_dim == 501);
}

TEST_CASE("support around samples adds the margin") {
    const auto sample = SampleSet::from_vector({-1.0, 2.0});
    const auto sup = Support::around_samples(sample, 0.5);
    CHECK(sup.lower[0] == doctest::Approx(-1.5));
    CHECK(sup.upper[0] == doctest::Approx(2.5));
}

TEST_CASE("two dimensional quadrature integrates a product box") {
    const Quadrature quad(Support::box2d(0.0, 1.0, 0.0, 3.0, 51));
    double total = -INFINITY;
    for (std::size_t i = 0; i < quad.size(); ++i)
        total = log_add(total, quad.log_weight(i));
    CHECK(total == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}
