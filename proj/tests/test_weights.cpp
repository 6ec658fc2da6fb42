#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "roughcalc/balls.hpp"
#include "roughcalc/grid.hpp"
#include "roughcalc/weights.hpp"

using namespace roughcalc;

TEST_CASE("Muckenhoupt constant of the unit weight is exactly one") {
  const GridSpec spec = make_grid(2, 3.0, 32);
  const Weight unit = make_const_weight(spec, 1.0);
  for (const double frak_p : {1.5, 2.0, 3.0})
    REQUIRE(ap_constant(unit, frak_p) == 1.0);
}

TEST_CASE("constant weights have constant-free Muckenhoupt behavior") {
  const GridSpec spec = make_grid(2, 3.0, 32);
  // (avg c) * (avg c^{-1/(p-1)})^{p-1} = c * c^{-1} = 1 for any c > 0.
  const Weight w = make_const_weight(spec, 7.25);
  REQUIRE(ap_constant(w, 2.0) == Catch::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("power weights are admissible below the A_p ceiling") {
  const GridSpec spec = make_grid(2, 3.0, 64);
  const BallFamily family = BallFamily::shared_default(spec);

  // |x|^{1/2} lies in A_2 on the plane (need -2 < 1/2 < 2).
  const Weight w = make_power_weight(spec, 0.5);
  const double base = ap_constant(w, 2.0, family);
  REQUIRE(base >= 1.0);
  REQUIRE(std::isfinite(base));

  // Robust to ball refinement: the constant may move but not explode.
  const double refined = ap_constant(w, 2.0, family.refined());
  REQUIRE(refined <= 1.5 * base);

  // A steeper growth gives a larger constant.
  const Weight steep = make_power_weight(spec, 1.5);
  REQUIRE(ap_constant(steep, 2.0, family) > base);
}

TEST_CASE("plateau weights stay within their level bounds") {
  const GridSpec spec = make_grid(2, 3.0, 32);
  const Weight w = make_plateau_weight(spec, 1.0, 2.0, 1.0, 5.0);
  for (const double v : w.samples) {
    REQUIRE(v >= 1.0);
    REQUIRE(v <= 5.0);
  }
  REQUIRE(ap_constant(w, 2.0) >= 1.0);
}

TEST_CASE("half-line power weights: values and integrals") {
  const Weight w = make_halfline_weight(2.0, 0.5);
  REQUIRE(w.halfline_value(4.0) == Catch::Approx(2.0 * 2.0).epsilon(1e-14));
  // int_a^b 2 t^{1/2} dt = (4/3)(b^{3/2} - a^{3/2})
  REQUIRE(w.halfline_integral(1.0, 4.0) ==
          Catch::Approx(4.0 / 3.0 * (8.0 - 1.0)).epsilon(1e-13));
  REQUIRE_THROWS_AS(make_halfline_weight(1.0, -1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(make_halfline_weight(-2.0, 0.5), std::invalid_argument);
}

TEST_CASE("B_p constants of power weights match the closed form") {
  // For w = c t^gamma with -1 < gamma < p-1:
  //   sup_r r^p int_r^inf w(t)/t^p dt / int_0^r w(t) dt = (1+gamma)/(p-1-gamma),
  // independent of r and c.
  struct Case {
    double gamma, p;
  };
  for (const Case c : {Case{0.0, 2.0}, Case{0.3, 2.0}, Case{-0.5, 1.5},
                       Case{0.9, 2.5}}) {
    const Weight w = make_halfline_weight(3.0, c.gamma);
    const double expected = (1.0 + c.gamma) / (c.p - 1.0 - c.gamma);
    REQUIRE(bp_constant(w, c.p) == Catch::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("B_p rejects weights whose tail integral diverges") {
  const Weight w = make_halfline_weight(1.0, 1.2);
  REQUIRE_THROWS_AS(bp_constant(w, 2.0), std::invalid_argument);   // gamma >= p-1
  REQUIRE_NOTHROW(bp_constant(w, 2.5));
}

TEST_CASE("grid weights refuse half-line queries and vice versa") {
  const GridSpec spec = make_grid(2, 3.0, 16);
  const Weight grid_w = make_const_weight(spec, 1.0);
  REQUIRE_THROWS_AS(bp_constant(grid_w, 2.0), std::invalid_argument);
  const Weight line_w = make_halfline_weight(1.0, 0.0);
  REQUIRE_THROWS_AS(ap_constant(line_w, 2.0), std::invalid_argument);
}
