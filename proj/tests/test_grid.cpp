#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "roughcalc/grid.hpp"

using namespace roughcalc;

TEST_CASE("grid geometry: spacing, coordinates, index round trip") {
  const GridSpec spec = make_grid(2, 4.0, 32);
  REQUIRE(spec.spacing() == Catch::Approx(0.25));
  REQUIRE(spec.cell_measure() == Catch::Approx(0.0625));
  REQUIRE(spec.point_count() == 1024);
  // Samples sit at cell centers: first at -L + h/2, last at L - h/2.
  REQUIRE(spec.coord(0) == Catch::Approx(-4.0 + 0.125));
  REQUIRE(spec.coord(31) == Catch::Approx(4.0 - 0.125));

  for (const std::size_t flat : {std::size_t{0}, std::size_t{517}, std::size_t{1023}})
    REQUIRE(spec.flatten(spec.unflatten(flat)) == flat);

  const GridSpec spec3 = make_grid(3, 2.0, 16);
  REQUIRE(spec3.point_count() == 4096);
  for (const std::size_t flat : {std::size_t{0}, std::size_t{2049}, std::size_t{4095}})
    REQUIRE(spec3.flatten(spec3.unflatten(flat)) == flat);
}

TEST_CASE("grid construction rejects bad arguments") {
  REQUIRE_THROWS_AS(make_grid(1, 4.0, 32), std::invalid_argument);
  REQUIRE_THROWS_AS(make_grid(2, -1.0, 32), std::invalid_argument);
  REQUIRE_THROWS_AS(make_grid(2, 4.0, 8), std::invalid_argument);
  REQUIRE_THROWS_AS(make_grid(2, 4.0, 33), std::invalid_argument);
}

TEST_CASE("bump fields: center value, support, analytic gradient") {
  const GridSpec spec = make_grid(2, 4.0, 64);
  const SampledField f = make_bump(spec, {0.5, -0.25, 0.0}, 1.5, 2.0);

  REQUIRE(f.has_gradient());
  REQUIRE(f.support_radius.has_value());

  // Value at the bump center is amplitude * exp(-1).
  double best = 0.0;
  for (const double v : f.values) best = std::max(best, v);
  REQUIRE(best == Catch::Approx(2.0 * std::exp(-1.0)).epsilon(1e-3));

  // Support: every sample farther than support_radius from the origin is 0.
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const auto x = spec.position(i);
    const double r = std::hypot(x[0], x[1]);
    if (r > *f.support_radius) REQUIRE(f.values[i] == 0.0);
  }

  // Analytic gradient matches second-order finite differences away from the
  // support edge (where one-sided stencils lose accuracy).
  const SampledField numeric = [&] {
    SampledField copy = f;
    copy.gradient.clear();
    return numeric_gradient(copy);
  }();
  const double h = spec.spacing();
  double worst = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const auto x = spec.position(i);
    const double r = std::hypot(x[0] - 0.5, x[1] + 0.25);
    if (r > 1.2) continue;
    for (int d = 0; d < 2; ++d)
      worst = std::max(worst, std::abs(f.gradient[d][i] - numeric.gradient[d][i]));
  }
  REQUIRE(worst < 10.0 * h * h);
}

TEST_CASE("bumps must honor the guard band") {
  const GridSpec spec = make_grid(2, 4.0, 64);
  // |center| + radius must stay at least two cells inside the box.
  REQUIRE_THROWS_AS(make_bump(spec, {3.0, 0.0, 0.0}, 1.5, 1.0),
                    std::invalid_argument);
  REQUIRE_NOTHROW(make_bump(spec, {2.0, 0.0, 0.0}, 1.5, 1.0));
}

TEST_CASE("bump sums superpose values and gradients") {
  const GridSpec spec = make_grid(2, 4.0, 32);
  const std::vector<BumpSpec> bumps = {{{-1.0, 0.0, 0.0}, 1.0, 1.0},
                                       {{1.0, 0.5, 0.0}, 0.8, -0.5}};
  const SampledField sum = make_bump_sum(spec, bumps);
  const SampledField a = make_bump(spec, bumps[0].center, bumps[0].radius,
                                   bumps[0].amplitude);
  const SampledField b = make_bump(spec, bumps[1].center, bumps[1].radius,
                                   bumps[1].amplitude);
  for (std::size_t i = 0; i < sum.values.size(); ++i) {
    REQUIRE(sum.values[i] == Catch::Approx(a.values[i] + b.values[i]).margin(1e-15));
    for (int d = 0; d < 2; ++d)
      REQUIRE(sum.gradient[d][i] ==
              Catch::Approx(a.gradient[d][i] + b.gradient[d][i]).margin(1e-15));
  }
  REQUIRE(*sum.support_radius >= *a.support_radius);
  REQUIRE(*sum.support_radius >= *b.support_radius);
}

TEST_CASE("exponent admissibility: threshold and derived values") {
  // n = 2, rho = 1.5: threshold n*rho/(n*rho + rho - n) = 3/2.5 = 1.2.
  REQUIRE(alpha_lower_bound(2, 1.5) == Catch::Approx(1.2).epsilon(1e-15));

  const InequalityParams params = make_params(2, 1.5, 1.3, 1.7, 2.0);
  REQUIRE(params.q == Catch::Approx(2.0 / (1.0 - 1.3 / 1.7)).epsilon(1e-15));
  REQUIRE_FALSE(params.sobolev_special_case);

  // p = alpha*n/beta triggers the classical Sobolev exponent relation:
  // q = p/(1 - alpha/beta) = n*alpha/(n - ... ) collapses correctly.
  const InequalityParams special = make_params(2, 1.5, 1.3, 1.7, 1.3 * 2.0 / 1.7);
  REQUIRE(special.sobolev_special_case);

  REQUIRE_THROWS_AS(make_params(2, 1.5, 1.1, 1.7, 2.0), std::invalid_argument);
  REQUIRE_THROWS_AS(make_params(2, 1.5, 1.8, 1.7, 2.0), std::invalid_argument);
  REQUIRE_THROWS_AS(make_params(2, 1.5, 1.3, 2.1, 2.5), std::invalid_argument);
  REQUIRE_THROWS_AS(make_params(2, 1.5, 1.3, 1.7, 1.2), std::invalid_argument);
  REQUIRE_THROWS_AS(make_params(2, 2.5, 1.3, 1.7, 2.0), std::invalid_argument);
}

TEST_CASE("numeric gradient of a linear ramp is exact in the interior") {
  const GridSpec spec = make_grid(2, 2.0, 16);
  SampledField f;
  f.spec = spec;
  f.values.resize(spec.point_count());
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const auto x = spec.position(i);
    f.values[i] = 3.0 * x[0] - 2.0 * x[1];
  }
  const SampledField g = numeric_gradient(f);
  const int n = spec.points_per_axis;
  for (int a = 1; a + 1 < n; ++a)
    for (int b = 1; b + 1 < n; ++b) {
      const std::size_t i = spec.flatten({a, b, 0});
      REQUIRE(g.gradient[0][i] == Catch::Approx(3.0).epsilon(1e-12));
      REQUIRE(g.gradient[1][i] == Catch::Approx(-2.0).epsilon(1e-12));
    }
}
