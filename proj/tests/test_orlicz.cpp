#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "roughcalc/grid.hpp"
#include "roughcalc/norms.hpp"
#include "roughcalc/orlicz.hpp"

using namespace roughcalc;

namespace {

SampledField sample_field() {
  const GridSpec spec = make_grid(2, 3.0, 32);
  return make_bump(spec, {0.4, -0.3, 0.0}, 1.3, 1.0);
}

}  // namespace

TEST_CASE("Luxemburg norm of a pure power recovers the Lebesgue norm") {
  const SampledField f = sample_field();
  const double p = 2.4;
  const double lux = luxemburg_norm(f, make_power_young(p));
  REQUIRE(lux == Catch::Approx(lp_norm(f, p)).epsilon(1e-8));
}

TEST_CASE("argument-power rescaling turns L^A into L^{p*sigma}") {
  const SampledField f = sample_field();
  const YoungFunction A = rescaled_young(make_power_young(2.0), 1.3);
  REQUIRE(A.sigma == Catch::Approx(1.3));
  REQUIRE(luxemburg_norm(f, A) ==
          Catch::Approx(lp_norm(f, 2.6)).epsilon(1e-6));
}

TEST_CASE("rescalings compose and evaluate as A(t^sigma)") {
  const YoungFunction A = make_power_log_young(1.5);
  const YoungFunction B = rescaled_young(rescaled_young(A, 1.2), 1.5);
  REQUIRE(B.sigma == Catch::Approx(1.8).epsilon(1e-14));
  for (const double t : {0.3, 1.0, 4.7}) {
    const double u = std::pow(t, 1.8);
    REQUIRE(B(t) == Catch::Approx(A(u)).epsilon(1e-12));
  }
}

TEST_CASE("rescaling rejects exponents that destroy convexity") {
  REQUIRE_THROWS_AS(rescaled_young(make_power_young(1.2), 0.5),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(rescaled_young(make_power_young(2.0), -1.0),
                    std::invalid_argument);
  REQUIRE_NOTHROW(rescaled_young(make_power_young(2.0), 0.7));
}

TEST_CASE("growth condition for pure powers has the expected threshold") {
  // For A(t) = t^p the condition A(r) <= A(Cr)/(2C) reads C^{p-1} >= 2.
  const YoungFunction a14 = make_power_young(1.4);
  REQUIRE(satisfies_growth_condition(a14, 6.0));       // 6^{0.4} > 2
  REQUIRE_FALSE(satisfies_growth_condition(a14, 4.0)); // 4^{0.4} < 2
  REQUIRE_FALSE(satisfies_growth_condition(a14, 1.0)); // need C > 1

  const double c14 = growth_condition_constant(a14);
  REQUIRE(c14 >= std::pow(2.0, 2.5) * (1.0 - 1e-12));
  REQUIRE(c14 <= std::pow(2.0, 2.5 + 1.0 / 24.0) * (1.0 + 1e-12));

  // Linear growth never satisfies it: C^0 = 1 < 2 for every C.
  REQUIRE(growth_condition_constant(make_power_young(1.0)) == 0.0);
}

TEST_CASE("logarithmic bumps only enlarge the Luxemburg norm") {
  const SampledField f = sample_field();
  const double p = 1.5;
  const double plain = luxemburg_norm(f, make_power_young(p));
  const double bumped = luxemburg_norm(f, make_power_log_young(p));
  REQUIRE(bumped >= plain);
  REQUIRE(bumped <= 10.0 * plain);
}

TEST_CASE("Luxemburg norm is absolutely homogeneous") {
  const SampledField f = sample_field();
  const YoungFunction A = make_power_log_young(1.7);
  const double base = luxemburg_norm(f, A);

  SampledField g = f;
  for (double& v : g.values) v *= -2.7;
  REQUIRE(luxemburg_norm(g, A) == Catch::Approx(2.7 * base).epsilon(1e-10));

  const SampledField zero = make_zero_field(f.spec);
  REQUIRE(luxemburg_norm(zero, A) == 0.0);
}

TEST_CASE("Young functions reject negative arguments and exponents below one") {
  REQUIRE_THROWS_AS(make_power_young(0.8), std::invalid_argument);
  REQUIRE_THROWS_AS(make_power_log_young(0.9), std::invalid_argument);
  const YoungFunction A = make_power_young(2.0);
  REQUIRE_THROWS_AS(A(-1.0), std::invalid_argument);
  REQUIRE(A(0.0) == 0.0);
}
