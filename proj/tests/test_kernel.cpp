#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "npef/errors.hpp"
#include "npef/kernel.hpp"

using namespace npef;

namespace {
double base1(const KernelSpec& spec, double u) {
    const double us[1] = {u};
    return eval_base(spec, us);
}
double scaled1(const KernelSpec& spec, double x, double c) {
    const double xs[1] = {x};
    const double cs[1] = {c};
    return eval_scaled(spec, xs, cs);
}
}  // namespace

TEST_CASE("gaussian base values") {
    const auto g = KernelSpec::gaussian(1.0);
    CHECK(base1(g, 0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-14));
    CHECK(base1(g, 1.0) == doctest::Approx(0.24197072451914337).epsilon(1e-14));
    CHECK(base1(g, -1.3) == base1(g, 1.3));
}

TEST_CASE("gaussian base in two dimensions") {
    const auto g = KernelSpec::gaussian(1.0, 2);
    const double zero[2] = {0.0, 0.0};
    CHECK(eval_base(g, zero) == doctest::Approx(1.0 / (2.0 * M_PI)).epsilon(1e-14));
    const double u[2] = {1.0, 1.0};
    CHECK(eval_base(g, u) == doctest::Approx(std::exp(-1.0) / (2.0 * M_PI)).epsilon(1e-14));
}

TEST_CASE("uniform base is the half-width-1/2 indicator") {
    const auto u = KernelSpec::uniform(1.0);
    CHECK(base1(u, 0.3) == 1.0);
    CHECK(base1(u, 0.5) == 1.0);
    CHECK(base1(u, 0.6) == 0.0);
    CHECK(base1(u, -0.7) == 0.0);
}

TEST_CASE("smoothed uniform crosses one-half at the box edge") {
    const auto s = KernelSpec::smoothed_uniform(2.0);
    CHECK(base1(s, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(base1(s, 0.0) > base1(s, 0.4));
    CHECK(base1(s, 0.4) > base1(s, 0.6));
    // Default steepness is 20/h in data units.
    CHECK(s.effective_steepness() == doctest::Approx(10.0));
    // Explicit steepness is honored.
    const auto sharp = KernelSpec::smoothed_uniform(2.0, 1, 100.0);
    CHECK(base1(sharp, 0.6) < base1(s, 0.6));
}

TEST_CASE("quadratic base is minus the squared norm") {
    const auto q = KernelSpec::quadratic(1.0);
    CHECK(base1(q, 0.0) == 0.0);
    CHECK(base1(q, 0.5) == doctest::Approx(-0.25).epsilon(1e-14));
    CHECK(base1(q, 2.0) == doctest::Approx(-4.0).epsilon(1e-14));
}

TEST_CASE("scaled evaluation divides by h^d for density kernels only") {
    const auto g = KernelSpec::gaussian(2.0);
    CHECK(scaled1(g, 1.0, 0.0) ==
          doctest::Approx(0.5 * 0.3989422804014327 * std::exp(-0.125)).epsilon(1e-14));
    const auto u = KernelSpec::uniform(1.0);
    CHECK(scaled1(u, 0.4, 0.0) == 1.0);
    CHECK(scaled1(u, 0.6, 0.0) == 0.0);
    // Feature-shape kernels carry no 1/h^d prefactor.
    const auto q = KernelSpec::quadratic(2.0);
    CHECK(scaled1(q, 1.0, 0.0) == doctest::Approx(-0.25).epsilon(1e-14));
    CHECK(q.is_density() == false);
    CHECK(g.is_density() == true);
}

TEST_CASE("json round trip") {
    const auto s = KernelSpec::smoothed_uniform(1.5, 2, 7.0);
    const auto back = KernelSpec::from_json(s.to_json());
    CHECK(back.family == KernelFamily::SmoothedUniform);
    CHECK(back.h == doctest::Approx(1.5));
    CHECK(back.dim == 2);
    CHECK(back.steepness == doctest::Approx(7.0));
    const auto g = KernelSpec::from_json(KernelSpec::gaussian(0.75).to_json());
    CHECK(g.family == KernelFamily::Gaussian);
    CHECK(g.h == doctest::Approx(0.75));
}

TEST_CASE("invalid specs are rejected") {
    const double u1[1] = {0.0};
    CHECK_THROWS_AS(eval_base(KernelSpec::gaussian(0.0), u1), InputError);
    CHECK_THROWS_AS(eval_base(KernelSpec::gaussian(-1.0), u1), InputError);
    const double u2[2] = {0.0, 0.0};
    CHECK_THROWS_AS(eval_base(KernelSpec::gaussian(1.0, 1), u2), InputError);
    CHECK_THROWS_AS(family_from_name("triweight"), InputError);
}
