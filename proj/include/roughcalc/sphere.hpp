#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace roughcalc {

/// A kernel on the unit sphere S^{n-1} held at quadrature nodes.
///
/// n = 2: M uniform angles theta_j = 2*pi*j/M, weight 2*pi/M each.
/// n = 3: Gauss-Legendre colatitudes x uniform longitudes; weight of node
/// (i, k) is w_i^{GL} * 2*pi/n_lon.  Weights always sum to sigma(S^{n-1}).
///
/// Arbitrary directions are evaluated through piecewise-linear interpolation
/// in angle (n = 2) or bilinear interpolation in (longitude, colatitude)
/// with constant extension beyond the extreme latitude rows (n = 3).
struct SphereKernel {
  int dim = 2;
  int nodes_longitude = 0;           // M for n=2, n_lon for n=3
  int nodes_latitude = 1;            // 1 for n=2, n_lat for n=3
  std::vector<double> values;        // latitude-major layout
  std::vector<double> weights;       // same layout
  std::vector<double> colatitudes;   // n=3 only, ascending in (0, pi)

  std::size_t node_count() const { return values.size(); }

  double longitude_of(int lon) const {
    return 2.0 * std::numbers::pi * lon / nodes_longitude;
  }

  std::array<double, 3> node_direction(int lat, int lon) const {
    const double phi = longitude_of(lon);
    if (dim == 2) return {std::cos(phi), std::sin(phi), 0.0};
    const double theta = colatitudes[static_cast<std::size_t>(lat)];
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
            std::cos(theta)};
  }

  /// Kernel value in an arbitrary unit direction.
  double evaluate(const std::array<double, 3>& unit) const {
    const double two_pi = 2.0 * std::numbers::pi;
    double phi = std::atan2(unit[1], unit[0]);
    if (phi < 0.0) phi += two_pi;
    const int m = nodes_longitude;
    double s = phi / (two_pi / m);
    if (s >= m) s -= m;
    int j0 = static_cast<int>(s);
    if (j0 >= m) j0 = m - 1;
    const double frac = s - j0;
    const int j1 = (j0 + 1) % m;

    if (dim == 2) return values[j0] * (1.0 - frac) + values[j1] * frac;

    const double z = std::clamp(unit[2], -1.0, 1.0);
    const double theta = std::acos(z);
    const auto& col = colatitudes;
    const int n_lat = nodes_latitude;
    auto row_value = [&](int lat) {
      const std::size_t base = static_cast<std::size_t>(lat) * m;
      return values[base + j0] * (1.0 - frac) + values[base + j1] * frac;
    };
    if (theta <= col.front()) return row_value(0);
    if (theta >= col.back()) return row_value(n_lat - 1);
    const auto it = std::upper_bound(col.begin(), col.end(), theta);
    const int hi = static_cast<int>(it - col.begin());
    const int lo = hi - 1;
    const double t = (theta - col[lo]) / (col[hi] - col[lo]);
    return row_value(lo) * (1.0 - t) + row_value(hi) * t;
  }

  double quadrature_mean() const {
    double sum = 0.0, total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      sum += weights[i] * values[i];
      total += weights[i];
    }
    return sum / total;
  }
};

namespace detail {

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_m.
inline void gauss_legendre(int m, std::vector<double>& nodes,
                           std::vector<double>& weights) {
  nodes.assign(m, 0.0);
  weights.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-15) break;
    }
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  std::reverse(nodes.begin(), nodes.end());    // ascending z
  std::reverse(weights.begin(), weights.end());
}

inline SphereKernel make_sphere_nodes(int dim, int node_budget) {
  if (dim != 2 && dim != 3)
    throw std::invalid_argument("sphere: dim must be 2 or 3");
  if (node_budget < 8)
    throw std::invalid_argument("sphere: need at least 8 nodes");
  SphereKernel k;
  k.dim = dim;
  const double two_pi = 2.0 * std::numbers::pi;
  if (dim == 2) {
    k.nodes_longitude = node_budget;
    k.nodes_latitude = 1;
    k.values.assign(node_budget, 0.0);
    k.weights.assign(node_budget, two_pi / node_budget);
    return k;
  }
  const int n_lat = std::max(4, static_cast<int>(std::lround(
                                    std::sqrt(node_budget / 2.0))));
  const int n_lon = 2 * n_lat;
  std::vector<double> z, wz;
  gauss_legendre(n_lat, z, wz);
  k.nodes_longitude = n_lon;
  k.nodes_latitude = n_lat;
  k.colatitudes.resize(n_lat);
  for (int i = 0; i < n_lat; ++i)
    k.colatitudes[i] = std::acos(z[n_lat - 1 - i]);  // ascending colatitude
  std::reverse(wz.begin(), wz.end());                // match colatitude order
  k.values.assign(static_cast<std::size_t>(n_lat) * n_lon, 0.0);
  k.weights.resize(k.values.size());
  for (int i = 0; i < n_lat; ++i)
    for (int j = 0; j < n_lon; ++j)
      k.weights[static_cast<std::size_t>(i) * n_lon + j] = wz[i] * two_pi / n_lon;
  return k;
}

}  // namespace detail

/// Subtracts the quadrature mean so the zero-integral hypothesis holds.
inline SphereKernel project_zero_mean(const SphereKernel& omega) {
  SphereKernel out = omega;
  const double mean = omega.quadrature_mean();
  for (double& v : out.values) v -= mean;
  return out;
}

/// (Integral of |Omega|^rho over the sphere)^(1/rho) by node quadrature.
inline double sphere_lp_norm(const SphereKernel& omega, double rho) {
  if (!(rho >= 1.0))
    throw std::invalid_argument("sphere_lp_norm: rho must be >= 1");
  double acc = 0.0;
  for (std::size_t i = 0; i < omega.values.size(); ++i)
    acc += omega.weights[i] * std::pow(std::abs(omega.values[i]), rho);
  return std::pow(acc, 1.0 / rho);
}

/// Weak (Lorentz L^{p,infty}) norm: the sup over thresholds of
/// lambda * sigma({|Omega| >= lambda})^{1/p}.  On a finite node set the sup
/// is attained at an attained level, so distinct |values| are enumerated.
inline double sphere_weak_norm(const SphereKernel& omega, double p) {
  if (!(p >= 1.0))
    throw std::invalid_argument("sphere_weak_norm: p must be >= 1");
  const std::size_t count = omega.values.size();
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(omega.values[a]) > std::abs(omega.values[b]);
  });
  double best = 0.0;
  double measure = 0.0;
  std::size_t i = 0;
  while (i < count) {
    const double level = std::abs(omega.values[order[i]]);
    // accumulate the whole tied block so measure({|v| >= level}) is complete
    while (i < count && std::abs(omega.values[order[i]]) == level) {
      measure += omega.weights[order[i]];
      ++i;
    }
    if (level > 0.0) best = std::max(best, level * std::pow(measure, 1.0 / p));
  }
  return best;
}

/// Parametric rough-kernel families used by the corpus.
struct KernelSpec {
  std::string kind = "harmonic";  // "harmonic" | "sign" | "power" | "zero"
  int nodes = 4096;
  int degree = 1;        // harmonic: frequency k >= 1
  bool use_sine = false; // harmonic (n=2): sin(k*theta) instead of cos(k*theta)
  int arcs = 2;          // sign: even number of alternating sectors
  double exponent = 0.5; // power: singularity strength a
  double theta0 = std::numbers::pi;  // power (n=2): singular angle
  double rho_max = 1.9;  // power: largest Lebesgue exponent the kernel serves
};

/// Generates a mean-zero kernel.  Power-singular kernels are capped at 1e8
/// and rejected outright when a * rho_max >= 1 (the L^{rho_max} integral
/// would diverge and no quadrature value would be meaningful).
inline SphereKernel make_rough_kernel(int dim, const KernelSpec& spec) {
  SphereKernel k = detail::make_sphere_nodes(dim, spec.nodes);
  constexpr double kValueCap = 1e8;

  if (spec.kind == "zero") {
    return k;
  }
  if (spec.kind == "harmonic") {
    if (spec.degree < 1)
      throw std::invalid_argument("make_rough_kernel: harmonic degree must be >= 1");
    for (int lat = 0; lat < k.nodes_latitude; ++lat) {
      for (int lon = 0; lon < k.nodes_longitude; ++lon) {
        const std::size_t at =
            static_cast<std::size_t>(lat) * k.nodes_longitude + lon;
        if (dim == 2) {
          const double phi = k.longitude_of(lon);
          k.values[at] = spec.use_sine ? std::sin(spec.degree * phi)
                                       : std::cos(spec.degree * phi);
        } else {
          // Legendre polynomial of cos(colatitude): mean-zero for degree >= 1.
          const double z = std::cos(k.colatitudes[lat]);
          double p0 = 1.0, p1 = z;
          for (int d = 2; d <= spec.degree; ++d) {
            const double p2 = ((2.0 * d - 1.0) * z * p1 - (d - 1.0) * p0) / d;
            p0 = p1;
            p1 = p2;
          }
          k.values[at] = spec.degree == 0 ? p0 : p1;
        }
      }
    }
  } else if (spec.kind == "sign") {
    if (spec.arcs < 2 || spec.arcs % 2 != 0)
      throw std::invalid_argument("make_rough_kernel: sign arcs must be even, >= 2");
    for (int lat = 0; lat < k.nodes_latitude; ++lat) {
      for (int lon = 0; lon < k.nodes_longitude; ++lon) {
        const std::size_t at =
            static_cast<std::size_t>(lat) * k.nodes_longitude + lon;
        const double phi = k.longitude_of(lon);
        const int sector = static_cast<int>(phi / (2.0 * std::numbers::pi) * spec.arcs);
        k.values[at] = (sector % 2 == 0) ? 1.0 : -1.0;
      }
    }
  } else if (spec.kind == "power") {
    if (!(spec.exponent > 0.0))
      throw std::invalid_argument("make_rough_kernel: power exponent must be > 0");
    if (spec.exponent * spec.rho_max >= 1.0)
      throw std::invalid_argument(
          "make_rough_kernel: a*rho >= 1 makes the kernel non-integrable in L^rho");
    for (int lat = 0; lat < k.nodes_latitude; ++lat) {
      for (int lon = 0; lon < k.nodes_longitude; ++lon) {
        const std::size_t at =
            static_cast<std::size_t>(lat) * k.nodes_longitude + lon;
        double angle;  // geodesic distance to the singular direction
        if (dim == 2) {
          const double phi = k.longitude_of(lon);
          angle = std::abs(phi - spec.theta0);
          angle = std::min(angle, 2.0 * std::numbers::pi - angle);
        } else {
          angle = k.colatitudes[lat];  // singularity at the north pole
        }
        const double raw =
            angle <= 0.0 ? kValueCap : std::pow(angle, -spec.exponent);
        k.values[at] = std::min(raw, kValueCap);
      }
    }
  } else {
    throw std::invalid_argument("make_rough_kernel: unknown kind '" + spec.kind + "'");
  }

  return project_zero_mean(k);
}

/// Pointwise scaling (norms and operators are 1-homogeneous in Omega).
inline SphereKernel scale_kernel(const SphereKernel& omega, double c) {
  SphereKernel out = omega;
  for (double& v : out.values) v *= c;
  return out;
}

}  // namespace roughcalc
