#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "roughcalc/sphere.hpp"

using namespace roughcalc;

namespace {

KernelSpec harmonic_spec(int degree, bool use_sine, int nodes) {
  KernelSpec k;
  k.kind = "harmonic";
  k.degree = degree;
  k.use_sine = use_sine;
  k.nodes = nodes;
  return k;
}

}  // namespace

TEST_CASE("circle kernels have mean zero and the right L^rho norms") {
  const SphereKernel cosine = make_rough_kernel(2, harmonic_spec(1, false, 2048));
  REQUIRE(std::abs(cosine.quadrature_mean()) < 1e-14);

  // ||cos||_{L^2(S^1)} = sqrt(pi): the integral of cos^2 over the circle is pi.
  REQUIRE(sphere_lp_norm(cosine, 2.0) ==
          Catch::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-10));

  // General rho: int_0^{2pi} |cos t|^rho dt = 2 sqrt(pi) Gamma((rho+1)/2) / Gamma(rho/2+1).
  const double rho = 1.5;
  const double integral = 2.0 * std::sqrt(std::numbers::pi) *
                          std::tgamma((rho + 1.0) / 2.0) /
                          std::tgamma(rho / 2.0 + 1.0);
  REQUIRE(sphere_lp_norm(cosine, rho) ==
          Catch::Approx(std::pow(integral, 1.0 / rho)).epsilon(1e-6));
}

TEST_CASE("two-arc sign kernel: exact values and norms") {
  KernelSpec spec;
  spec.kind = "sign";
  spec.arcs = 2;
  spec.nodes = 2048;
  const SphereKernel sign2 = make_rough_kernel(2, spec);
  REQUIRE(std::abs(sign2.quadrature_mean()) < 1e-14);
  for (const double v : sign2.values) REQUIRE(std::abs(v) == Catch::Approx(1.0));

  // |Omega| = 1 everywhere: strong and weak norms both equal (2 pi)^{1/p}.
  const double two_pi = 2.0 * std::numbers::pi;
  for (const double p : {1.0, 1.5, 2.0}) {
    REQUIRE(sphere_lp_norm(sign2, p) ==
            Catch::Approx(std::pow(two_pi, 1.0 / p)).epsilon(1e-12));
    REQUIRE(sphere_weak_norm(sign2, p) ==
            Catch::Approx(std::pow(two_pi, 1.0 / p)).epsilon(1e-12));
  }
}

TEST_CASE("weak norm never exceeds the strong norm") {
  for (const char* kind : {"harmonic", "sign", "power"}) {
    KernelSpec spec;
    spec.kind = kind;
    spec.nodes = 1024;
    spec.exponent = 0.5;
    spec.rho_max = 1.9;
    const SphereKernel k = make_rough_kernel(2, spec);
    for (const double p : {1.2, 1.5, 1.9})
      REQUIRE(sphere_weak_norm(k, p) <= sphere_lp_norm(k, p) * (1.0 + 1e-12));
  }
}

TEST_CASE("power kernels: cap, rejection, and norm growth in rho") {
  KernelSpec spec;
  spec.kind = "power";
  spec.exponent = 0.51;
  spec.theta0 = 2.0;
  spec.rho_max = 1.9;
  spec.nodes = 4096;
  const SphereKernel k = make_rough_kernel(2, spec);
  REQUIRE(std::abs(k.quadrature_mean()) < 1e-12 * sphere_lp_norm(k, 1.0));

  // L^rho norms grow as rho approaches 1/a but stay finite below it.
  const double n_15 = sphere_lp_norm(k, 1.5);
  const double n_19 = sphere_lp_norm(k, 1.9);
  REQUIRE(n_15 > 0.0);
  REQUIRE(n_19 > n_15);
  REQUIRE(std::isfinite(n_19));

  // a * rho_max >= 1 means the L^{rho_max} integral diverges: reject.
  KernelSpec bad = spec;
  bad.exponent = 0.6;
  bad.rho_max = 1.9;
  REQUIRE_THROWS_AS(make_rough_kernel(2, bad), std::invalid_argument);
}

TEST_CASE("kernel evaluation interpolates the nodal values") {
  const SphereKernel cosine = make_rough_kernel(2, harmonic_spec(1, false, 4096));
  for (const double phi : {0.1, 1.0, 2.5, 4.0, 6.0}) {
    const std::array<double, 3> u = {std::cos(phi), std::sin(phi), 0.0};
    REQUIRE(cosine.evaluate(u) == Catch::Approx(std::cos(phi)).margin(1e-5));
  }
}

TEST_CASE("scaling the kernel scales its norms linearly") {
  const SphereKernel cosine = make_rough_kernel(2, harmonic_spec(3, true, 2048));
  const SphereKernel scaled = scale_kernel(cosine, 2.5);
  for (const double rho : {1.0, 1.5, 2.0})
    REQUIRE(sphere_lp_norm(scaled, rho) ==
            Catch::Approx(2.5 * sphere_lp_norm(cosine, rho)).epsilon(1e-13));
}

TEST_CASE("sphere quadrature in three dimensions integrates polynomials") {
  const SphereKernel nodes = make_rough_kernel(3, harmonic_spec(2, false, 2048));
  // Total measure: sum of weights = 4 pi.
  double total = 0.0;
  for (const double w : nodes.weights) total += w;
  REQUIRE(total == Catch::Approx(4.0 * std::numbers::pi).epsilon(1e-12));

  // Legendre P_2(cos theta) integrates to zero over the sphere, and the
  // generator already projected it, so the quadrature mean is ~0 and the
  // L^2 norm matches ||P_2||^2 = 4 pi / (2*2+1).
  REQUIRE(std::abs(nodes.quadrature_mean()) < 1e-13);
  REQUIRE(sphere_lp_norm(nodes, 2.0) ==
          Catch::Approx(std::sqrt(4.0 * std::numbers::pi / 5.0)).epsilon(1e-10));
}

TEST_CASE("kernel generator rejects malformed requests") {
  REQUIRE_THROWS_AS(make_rough_kernel(2, [] {
                      KernelSpec k;
                      k.kind = "sign";
                      k.arcs = 3;
                      return k;
                    }()),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(make_rough_kernel(2, [] {
                      KernelSpec k;
                      k.kind = "harmonic";
                      k.degree = 0;
                      return k;
                    }()),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(make_rough_kernel(2, [] {
                      KernelSpec k;
                      k.kind = "nope";
                      return k;
                    }()),
                    std::invalid_argument);
}
