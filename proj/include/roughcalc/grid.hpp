#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace roughcalc {

/// Uniform cell-centered grid covering the cube [-L, L]^n, n in {2, 3}.
/// Samples sit at cell centers x_i = -L + (i + 1/2) h with h = 2L/N, so no
/// sample ever coincides with a lattice offset of another sample's
/// singularity.
struct GridSpec {
  int dim = 2;
  double halfwidth = 1.0;
  int points_per_axis = 16;

  double spacing() const { return 2.0 * halfwidth / points_per_axis; }

  double cell_measure() const {
    double m = 1.0;
    for (int d = 0; d < dim; ++d) m *= spacing();
    return m;
  }

  std::size_t point_count() const {
    std::size_t n = 1;
    for (int d = 0; d < dim; ++d) n *= static_cast<std::size_t>(points_per_axis);
    return n;
  }

  /// Sample coordinate along one axis.
  double coord(int i) const { return -halfwidth + (i + 0.5) * spacing(); }

  /// Multi-index of a flat (row-major, last axis fastest) sample index.
  std::array<int, 3> unflatten(std::size_t flat) const {
    std::array<int, 3> idx{0, 0, 0};
    const auto n = static_cast<std::size_t>(points_per_axis);
    for (int d = dim - 1; d >= 0; --d) {
      idx[d] = static_cast<int>(flat % n);
      flat /= n;
    }
    return idx;
  }

  std::size_t flatten(const std::array<int, 3>& idx) const {
    const auto n = static_cast<std::size_t>(points_per_axis);
    std::size_t flat = 0;
    for (int d = 0; d < dim; ++d) flat = flat * n + static_cast<std::size_t>(idx[d]);
    return flat;
  }

  /// Coordinates of a flat sample index (z = 0 when dim == 2).
  std::array<double, 3> position(std::size_t flat) const {
    const auto idx = unflatten(flat);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int d = 0; d < dim; ++d) x[d] = coord(idx[d]);
    return x;
  }

  bool operator==(const GridSpec&) const = default;
};

inline GridSpec make_grid(int dim, double halfwidth, int points_per_axis) {
  if (dim != 2 && dim != 3)
    throw std::invalid_argument("make_grid: dim must be 2 or 3");
  if (!(halfwidth > 0.0) || !std::isfinite(halfwidth))
    throw std::invalid_argument("make_grid: halfwidth must be a positive real");
  if (points_per_axis < 16 || points_per_axis % 2 != 0)
    throw std::invalid_argument("make_grid: points_per_axis must be even and >= 16");
  return GridSpec{dim, halfwidth, points_per_axis};
}

/// A scalar field sampled on a grid, optionally carrying analytic gradient
/// components and a support radius r0 (samples vanish exactly for |x| > r0).
struct SampledField {
  GridSpec spec;
  std::vector<double> values;
  std::vector<std::vector<double>> gradient;  // dim arrays when present
  std::optional<double> support_radius;

  bool has_gradient() const { return !gradient.empty(); }
};

inline SampledField make_zero_field(const GridSpec& spec) {
  SampledField f;
  f.spec = spec;
  f.values.assign(spec.point_count(), 0.0);
  f.gradient.assign(spec.dim, std::vector<double>(spec.point_count(), 0.0));
  f.support_radius = 0.0;
  return f;
}

struct BumpSpec {
  std::array<double, 3> center{0.0, 0.0, 0.0};
  double radius = 1.0;
  double amplitude = 1.0;
};

namespace detail {

// Mollifier profile amplitude * exp(-1/(1-u)), u = |x-c|^2/r^2 < 1.
// Below 1-u = 1e-3 the exponential underflows to exactly 0.0, which also
// protects the gradient factor (1-u)^{-2} from overflowing into 0*inf.
inline double bump_value(double u, double amplitude) {
  const double t = 1.0 - u;
  if (t < 1e-3) return 0.0;
  return amplitude * std::exp(-1.0 / t);
}

inline double bump_gradient_scale(double u, double amplitude, double radius_sq) {
  const double t = 1.0 - u;
  if (t < 1e-3) return 0.0;
  return -amplitude * std::exp(-1.0 / t) / (t * t) * (2.0 / radius_sq);
}

inline void check_bump_inside(const GridSpec& spec, const BumpSpec& bump) {
  if (!(bump.radius > 0.0) || !std::isfinite(bump.radius))
    throw std::invalid_argument("make_bump: radius must be a positive real");
  if (!std::isfinite(bump.amplitude))
    throw std::invalid_argument("make_bump: amplitude must be finite");
  const double margin = spec.halfwidth - 2.0 * spec.spacing();
  for (int d = 0; d < spec.dim; ++d) {
    if (std::abs(bump.center[d]) + bump.radius > margin)
      throw std::invalid_argument(
          "make_bump: support must stay 2h clear of the domain boundary");
  }
}

}  // namespace detail

/// Smooth compactly supported test function: the classical mollifier bump
/// with its analytic gradient attached.
inline SampledField make_bump_sum(const GridSpec& spec,
                                  const std::vector<BumpSpec>& bumps) {
  for (const auto& b : bumps) detail::check_bump_inside(spec, b);

  SampledField f = make_zero_field(spec);
  const std::size_t total = spec.point_count();
  for (std::size_t i = 0; i < total; ++i) {
    const auto x = spec.position(i);
    double value = 0.0;
    std::array<double, 3> grad{0.0, 0.0, 0.0};
    for (const auto& b : bumps) {
      double dist_sq = 0.0;
      for (int d = 0; d < spec.dim; ++d) {
        const double dx = x[d] - b.center[d];
        dist_sq += dx * dx;
      }
      const double r_sq = b.radius * b.radius;
      const double u = dist_sq / r_sq;
      if (u >= 1.0) continue;
      value += detail::bump_value(u, b.amplitude);
      const double scale = detail::bump_gradient_scale(u, b.amplitude, r_sq);
      for (int d = 0; d < spec.dim; ++d) grad[d] += scale * (x[d] - b.center[d]);
    }
    f.values[i] = value;
    for (int d = 0; d < spec.dim; ++d) f.gradient[d][i] = grad[d];
  }

  double enclosing = 0.0;
  for (const auto& b : bumps) {
    double center_norm = 0.0;
    for (int d = 0; d < spec.dim; ++d) center_norm += b.center[d] * b.center[d];
    enclosing = std::max(enclosing, std::sqrt(center_norm) + b.radius);
  }
  f.support_radius = enclosing;
  return f;
}

inline SampledField make_bump(const GridSpec& spec, const std::array<double, 3>& center,
                              double radius, double amplitude) {
  return make_bump_sum(spec, {BumpSpec{center, radius, amplitude}});
}

/// Populates gradient arrays by finite differences: second-order central
/// differences in the interior, second-order one-sided stencils at the two
/// boundary layers.  A field that already carries an analytic gradient is
/// returned unchanged.
inline SampledField numeric_gradient(const SampledField& f) {
  if (f.has_gradient()) return f;

  SampledField out = f;
  const GridSpec& spec = f.spec;
  const int n_axis = spec.points_per_axis;
  const double h = spec.spacing();
  out.gradient.assign(spec.dim, std::vector<double>(spec.point_count(), 0.0));

  const auto n = static_cast<std::size_t>(n_axis);
  std::size_t axis_stride = 1;
  std::vector<std::size_t> strides(spec.dim, 1);
  for (int d = spec.dim - 1; d >= 0; --d) {
    strides[d] = axis_stride;
    axis_stride *= n;
  }

  const std::size_t total = spec.point_count();
  for (std::size_t i = 0; i < total; ++i) {
    const auto idx = spec.unflatten(i);
    for (int d = 0; d < spec.dim; ++d) {
      const std::size_t s = strides[d];
      double df;
      if (idx[d] == 0) {
        df = (-3.0 * f.values[i] + 4.0 * f.values[i + s] - f.values[i + 2 * s]) /
             (2.0 * h);
      } else if (idx[d] == n_axis - 1) {
        df = (3.0 * f.values[i] - 4.0 * f.values[i - s] + f.values[i - 2 * s]) /
             (2.0 * h);
      } else {
        df = (f.values[i + s] - f.values[i - s]) / (2.0 * h);
      }
      out.gradient[d][i] = df;
    }
  }
  return out;
}

/// Pointwise Euclidean magnitude of the gradient arrays (analytic if present,
/// otherwise finite differences are attached first).
inline std::vector<double> gradient_magnitude(const SampledField& f) {
  const SampledField& g = f;
  if (!g.has_gradient()) {
    const SampledField with = numeric_gradient(f);
    return gradient_magnitude(with);
  }
  std::vector<double> mag(g.values.size(), 0.0);
  for (std::size_t i = 0; i < mag.size(); ++i) {
    double acc = 0.0;
    for (int d = 0; d < g.spec.dim; ++d) acc += g.gradient[d][i] * g.gradient[d][i];
    mag[i] = std::sqrt(acc);
  }
  return mag;
}

/// Exponent bundle for the inequality checks.
///
/// Admissibility: 1 < rho < n, threshold(n, rho) <= alpha < beta < n and
/// p > alpha.  q is derived as p / (1 - alpha/beta).  When p equals
/// alpha*n/beta the classical Sobolev exponent relation 1/q = 1/p - 1/n
/// holds and the flag sobolev_special_case is set on construction.
struct InequalityParams {
  int dim = 2;
  double rho = 1.5;
  double alpha = 1.3;
  double beta = 1.7;
  double p = 1.8;
  double q = 0.0;  // derived
  bool sobolev_special_case = false;
};

/// Lower admissibility bound for alpha: n*rho / (n*rho + rho - n).
inline double alpha_lower_bound(int dim, double rho) {
  return dim * rho / (dim * rho + rho - dim);
}

inline InequalityParams make_params(int dim, double rho, double alpha, double beta,
                                    double p) {
  if (dim != 2 && dim != 3)
    throw std::invalid_argument("make_params: dim must be 2 or 3");
  const double n = dim;
  if (!(rho > 1.0 && rho < n))
    throw std::invalid_argument("make_params: rho must lie in (1, n)");
  const double threshold = alpha_lower_bound(dim, rho);
  if (!(alpha >= threshold * (1.0 - 1e-12)))
    throw std::invalid_argument(
        "make_params: alpha below the admissibility threshold n*rho/(n*rho+rho-n)");
  if (!(alpha < beta && beta < n))
    throw std::invalid_argument("make_params: need alpha < beta < n");
  if (!(p > alpha))
    throw std::invalid_argument("make_params: need p > alpha");
  InequalityParams params;
  params.dim = dim;
  params.rho = rho;
  params.alpha = alpha;
  params.beta = beta;
  params.p = p;
  params.q = p / (1.0 - alpha / beta);
  params.sobolev_special_case = std::abs(p - alpha * n / beta) <= 1e-12;
  return params;
}

}  // namespace roughcalc
