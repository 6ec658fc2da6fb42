#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <deque>
#include <mutex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

#include "roughcalc/balls.hpp"
#include "roughcalc/grid.hpp"
#include "roughcalc/parallel.hpp"
#include "roughcalc/sphere.hpp"

namespace roughcalc {

/// Dyadic annuli (2^{k-1}, 2^k] covering everything from below one grid cell
/// up to the domain diameter, with log-spaced radial quadrature nodes.
struct AnnularQuadrature {
  int k_min = 0;
  int k_max = 0;
  int radial_nodes_per_annulus = 3;

  static AnnularQuadrature make_default(const GridSpec& spec) {
    AnnularQuadrature quad;
    const double h = spec.spacing();
    // Four octaves below the grid spacing: the cancellation form makes the
    // small-shell contribution O(cutoff) for C^1 fields, so the p.v. residual
    // sits far below interpolation error.
    quad.k_min = static_cast<int>(std::floor(std::log2(h))) - 4;
    const double diameter = 2.0 * std::sqrt(static_cast<double>(spec.dim)) *
                            spec.halfwidth;
    quad.k_max = static_cast<int>(std::ceil(std::log2(diameter)));
    while (std::ldexp(1.0, quad.k_max) < diameter) ++quad.k_max;
    quad.radial_nodes_per_annulus = 3;
    return quad;
  }
};

/// Log-spaced truncation radii for the maximal truncated operator:
/// 40 per decade across [h/4, 4L].
inline std::vector<double> make_truncation_grid(const GridSpec& spec) {
  const double lo = spec.spacing() / 4.0;
  const double hi = 4.0 * spec.halfwidth;
  const int count =
      static_cast<int>(std::ceil(40.0 * std::log10(hi / lo))) + 1;
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i)
    grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  return grid;
}

/// Log-spaced heat times, 40 per decade across [h^2/4, (4L)^2].
inline std::vector<double> make_time_grid(const GridSpec& spec) {
  const double lo = spec.spacing() * spec.spacing() / 4.0;
  const double hi = 16.0 * spec.halfwidth * spec.halfwidth;
  const int count =
      static_cast<int>(std::ceil(40.0 * std::log10(hi / lo))) + 1;
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i)
    grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  return grid;
}

namespace detail {

inline void require_operator_inputs(const SphereKernel& omega,
                                    const SampledField& f) {
  double peak = 0.0;
  for (const double v : omega.values) peak = std::max(peak, std::abs(v));
  if (std::abs(omega.quadrature_mean()) > 1e-10 * (peak + 1.0))
    throw std::invalid_argument(
        "singular integral: kernel must be mean-zero (the cancellation form "
        "of the principal value is otherwise invalid)");
  if (!f.support_radius.has_value())
    throw std::invalid_argument(
        "singular integral: field must declare a support radius");
  const double h = f.spec.spacing();
  const double reach =
      std::sqrt(static_cast<double>(f.spec.dim)) * (f.spec.halfwidth - 2.0 * h);
  if (*f.support_radius > reach)
    throw std::invalid_argument(
        "singular integral: field support violates the 2h guard band");
}

struct ShellNode2D {
  int offset;  // flat offset into the padded array
  double c00, c01, c10, c11;
};

struct ShellNode3D {
  int iu[3];
  double fu[3];
  double weight;
};

struct Shell {
  double radius = 0.0;
  double weight_sum = 0.0;
  std::vector<ShellNode2D> nodes2;
  std::vector<ShellNode3D> nodes3;
};

struct ShellPlan {
  GridSpec spec;
  int pad = 0;
  int padded = 0;  // padded row length (dim 2 fast path)
  std::vector<Shell> shells;  // ascending radius
};

/// Builds the quadrature plan for the kernel Omega(y/|y|)/|y|^{n+1-alpha}
/// (alpha = 1 is the singular-integral kernel).  The radial measure on each
/// annulus is handled in log coordinates, so a node at radius r carries
/// weight ln(2)/R * r^{alpha-1}; pow(r, 0) == 1 keeps the alpha = 1 path
/// bit-identical to the dedicated singular-integral evaluation.
inline ShellPlan build_shell_plan(const SphereKernel& omega, const GridSpec& spec,
                                  double alpha, const AnnularQuadrature& quad) {
  if (std::ldexp(1.0, quad.k_min - 1) > spec.spacing())
    throw std::invalid_argument("annular quadrature: innermost annulus must "
                                "start below one grid cell");
  ShellPlan plan;
  plan.spec = spec;
  const double h = spec.spacing();
  const int n_axis = spec.points_per_axis;

  if (spec.dim == 2) {
    const double reach = std::ldexp(1.0, quad.k_max);
    plan.pad = static_cast<int>(std::ceil(reach / h)) + 2;
    plan.padded = n_axis + 2 * plan.pad;
  }

  const int radial = quad.radial_nodes_per_annulus;
  const double log_weight = std::numbers::ln2 / radial;
  const std::size_t angular = omega.node_count();

  for (int k = quad.k_min; k <= quad.k_max; ++k) {
    for (int i = 0; i < radial; ++i) {
      Shell shell;
      shell.radius = std::ldexp(1.0, k - 1) * std::pow(2.0, (i + 0.5) / radial);
      const double radial_factor = log_weight * std::pow(shell.radius, alpha - 1.0);
      if (spec.dim == 2) shell.nodes2.reserve(angular);
      else shell.nodes3.reserve(angular);

      for (int lat = 0; lat < omega.nodes_latitude; ++lat) {
        for (int lon = 0; lon < omega.nodes_longitude; ++lon) {
          const std::size_t at =
              static_cast<std::size_t>(lat) * omega.nodes_longitude + lon;
          const auto dir = omega.node_direction(lat, lon);
          const double value = omega.evaluate(dir);
          const double weight = value * omega.weights[at] * radial_factor;
          shell.weight_sum += weight;

          // f(x - r*dir) in index space: the sample index coordinate is
          // ix_d - u_d with u_d = r*dir_d/h.  The bracketing lattice points
          // are ix - iu - 1 and ix - iu with weights fu and 1 - fu.
          double iu[3], fu[3];
          for (int d = 0; d < spec.dim; ++d) {
            const double u = shell.radius * dir[d] / h;
            iu[d] = std::floor(u);
            fu[d] = u - iu[d];
          }
          if (spec.dim == 2) {
            ShellNode2D node;
            const int base_a = -static_cast<int>(iu[0]) - 1;
            const int base_b = -static_cast<int>(iu[1]) - 1;
            node.offset = base_a * plan.padded + base_b;
            node.c00 = weight * fu[0] * fu[1];
            node.c01 = weight * fu[0] * (1.0 - fu[1]);
            node.c10 = weight * (1.0 - fu[0]) * fu[1];
            node.c11 = weight * (1.0 - fu[0]) * (1.0 - fu[1]);
            shell.nodes2.push_back(node);
          } else {
            ShellNode3D node;
            for (int d = 0; d < 3; ++d) {
              node.iu[d] = d < spec.dim ? static_cast<int>(iu[d]) : 0;
              node.fu[d] = d < spec.dim ? fu[d] : 0.0;
            }
            node.weight = weight;
            shell.nodes3.push_back(node);
          }
        }
      }
      plan.shells.push_back(std::move(shell));
    }
  }
  return plan;
}

struct ShellRequest {
  bool full = false;
  std::optional<std::size_t> truncation;  // suffix start for one signed T^t
  std::vector<std::size_t> sup_cuts;      // suffix starts for sup_t |T^t|
};

struct ShellResult {
  std::optional<SampledField> full;
  std::optional<SampledField> truncated;
  std::optional<SampledField> sup;
};

/// First shell index whose radius exceeds t (== shells.size() when t clears
/// every shell, making the truncated field identically zero).
inline std::size_t cut_index(const ShellPlan& plan, double t) {
  std::size_t c = 0;
  while (c < plan.shells.size() && plan.shells[c].radius <= t) ++c;
  return c;
}

inline ShellResult apply_shell_plan(const ShellPlan& plan, const SampledField& f,
                                    const ShellRequest& request) {
  const GridSpec& spec = plan.spec;
  const std::size_t total = spec.point_count();
  const std::size_t shell_count = plan.shells.size();

  ShellResult result;
  auto fresh = [&spec]() {
    SampledField out;
    out.spec = spec;
    out.values.assign(spec.point_count(), 0.0);
    return out;
  };
  if (request.full) result.full = fresh();
  if (request.truncation) result.truncated = fresh();
  if (!request.sup_cuts.empty()) result.sup = fresh();

  std::vector<std::size_t> cuts = request.sup_cuts;
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // dim == 2 fast path: zero-padded copy lets the gather run unconditionally.
  std::vector<double> padded;
  const int n_axis = spec.points_per_axis;
  if (spec.dim == 2) {
    padded.assign(static_cast<std::size_t>(plan.padded) * plan.padded, 0.0);
    for (int a = 0; a < n_axis; ++a)
      for (int b = 0; b < n_axis; ++b)
        padded[static_cast<std::size_t>(a + plan.pad) * plan.padded +
               (b + plan.pad)] = f.values[static_cast<std::size_t>(a) * n_axis + b];
  }
  const double* fv = f.values.data();
  const double* pv = padded.data();
  const int P = plan.padded;
  const int pad = plan.pad;

  parallel_for(total, [&](std::size_t idx) {
    thread_local std::vector<double> sums;
    sums.resize(shell_count);

    if (spec.dim == 2) {
      const int ix = static_cast<int>(idx) / n_axis;
      const int iy = static_cast<int>(idx) % n_axis;
      const std::size_t base =
          static_cast<std::size_t>(ix + pad) * P + (iy + pad);
      const double fx = fv[idx];
      for (std::size_t m = 0; m < shell_count; ++m) {
        const Shell& shell = plan.shells[m];
        double acc = 0.0;
        const double* F = pv + base;
        for (const ShellNode2D& node : shell.nodes2) {
          const double* cell = F + node.offset;
          acc += node.c00 * cell[0] + node.c01 * cell[1] +
                 node.c10 * cell[P] + node.c11 * cell[P + 1];
        }
        sums[m] = acc - fx * shell.weight_sum;
      }
    } else {
      const auto ixs = spec.unflatten(idx);
      const double fx = fv[idx];
      const int n = n_axis;
      for (std::size_t m = 0; m < shell_count; ++m) {
        const Shell& shell = plan.shells[m];
        double acc = 0.0;
        for (const ShellNode3D& node : shell.nodes3) {
          const int a0 = ixs[0] - node.iu[0] - 1;
          const int b0 = ixs[1] - node.iu[1] - 1;
          const int c0 = ixs[2] - node.iu[2] - 1;
          // Fields carry a 2h guard band of exact zeros, so a stencil that
          // straddles the boundary can only touch zero samples: skipping any
          // stencil not fully interior is exact, not an approximation.
          if (static_cast<unsigned>(a0) >= static_cast<unsigned>(n - 1) ||
              static_cast<unsigned>(b0) >= static_cast<unsigned>(n - 1) ||
              static_cast<unsigned>(c0) >= static_cast<unsigned>(n - 1))
            continue;
          const std::size_t corner =
              (static_cast<std::size_t>(a0) * n + b0) * n + c0;
          const double fa = node.fu[0], fb = node.fu[1], fc = node.fu[2];
          const double* cell = fv + corner;
          const std::size_t sn = static_cast<std::size_t>(n);
          const double v00 = cell[0] * fc + cell[1] * (1.0 - fc);
          const double v01 = cell[sn] * fc + cell[sn + 1] * (1.0 - fc);
          const double v10 = cell[sn * sn] * fc + cell[sn * sn + 1] * (1.0 - fc);
          const double v11 =
              cell[sn * sn + sn] * fc + cell[sn * sn + sn + 1] * (1.0 - fc);
          acc += node.weight *
                 ((v00 * fb + v01 * (1.0 - fb)) * fa +
                  (v10 * fb + v11 * (1.0 - fb)) * (1.0 - fa));
        }
        sums[m] = acc - fx * shell.weight_sum;
      }
    }

    // Suffix sums from the largest radius downward give every truncation in
    // one deterministic pass.
    double suffix = 0.0;
    double best = 0.0;
    bool any_sup = false;
    std::size_t cut_pos = cuts.size();
    if (cut_pos > 0 && cuts.back() >= shell_count) {
      best = 0.0;  // truncation beyond every shell: empty integral
      any_sup = true;
      while (cut_pos > 0 && cuts[cut_pos - 1] >= shell_count) --cut_pos;
    }
    double truncated_value = 0.0;
    const std::size_t trunc_cut =
        request.truncation ? *request.truncation : shell_count + 1;
    if (trunc_cut >= shell_count) truncated_value = 0.0;
    for (std::size_t m = shell_count; m-- > 0;) {
      suffix += sums[m];
      if (m == trunc_cut) truncated_value = suffix;
      while (cut_pos > 0 && cuts[cut_pos - 1] == m) {
        --cut_pos;
        const double mag = std::abs(suffix);
        best = any_sup ? std::max(best, mag) : mag;
        any_sup = true;
      }
    }
    if (result.full) result.full->values[idx] = suffix;
    if (result.truncated) result.truncated->values[idx] = truncated_value;
    if (result.sup) result.sup->values[idx] = best;
  });

  return result;
}

}  // namespace detail

/// T_Omega f: the principal-value convolution against Omega(y/|y|)/|y|^n,
/// evaluated with the zero-mean cancellation form on every annulus.
inline SampledField singular_integral(
    const SphereKernel& omega, const SampledField& f,
    std::optional<AnnularQuadrature> quad = std::nullopt) {
  detail::require_operator_inputs(omega, f);
  const AnnularQuadrature q = quad ? *quad : AnnularQuadrature::make_default(f.spec);
  const auto plan = detail::build_shell_plan(omega, f.spec, 1.0, q);
  detail::ShellRequest request;
  request.full = true;
  return std::move(*detail::apply_shell_plan(plan, f, request).full);
}

/// T^t_Omega f: the same quadrature restricted to |y| > t.
inline SampledField truncated_integral(
    const SphereKernel& omega, const SampledField& f, double t,
    std::optional<AnnularQuadrature> quad = std::nullopt) {
  if (!(t > 0.0)) throw std::invalid_argument("truncated_integral: t must be > 0");
  detail::require_operator_inputs(omega, f);
  const AnnularQuadrature q = quad ? *quad : AnnularQuadrature::make_default(f.spec);
  const auto plan = detail::build_shell_plan(omega, f.spec, 1.0, q);
  detail::ShellRequest request;
  request.truncation = detail::cut_index(plan, t);
  return std::move(*detail::apply_shell_plan(plan, f, request).truncated);
}

/// T*_Omega f: pointwise sup over the truncation grid of |T^t_Omega f|.
inline SampledField maximal_truncated(
    const SphereKernel& omega, const SampledField& f,
    const std::vector<double>& t_grid,
    std::optional<AnnularQuadrature> quad = std::nullopt) {
  if (t_grid.empty())
    throw std::invalid_argument("maximal_truncated: t_grid must be nonempty");
  detail::require_operator_inputs(omega, f);
  const AnnularQuadrature q = quad ? *quad : AnnularQuadrature::make_default(f.spec);
  const auto plan = detail::build_shell_plan(omega, f.spec, 1.0, q);
  detail::ShellRequest request;
  for (const double t : t_grid)
    request.sup_cuts.push_back(detail::cut_index(plan, t));
  return std::move(*detail::apply_shell_plan(plan, f, request).sup);
}

/// T_Omega f and T*_Omega f from a single pass over the quadrature.
inline std::pair<SampledField, SampledField> singular_with_maximal(
    const SphereKernel& omega, const SampledField& f,
    const std::vector<double>& t_grid,
    std::optional<AnnularQuadrature> quad = std::nullopt) {
  if (t_grid.empty())
    throw std::invalid_argument("singular_with_maximal: t_grid must be nonempty");
  detail::require_operator_inputs(omega, f);
  const AnnularQuadrature q = quad ? *quad : AnnularQuadrature::make_default(f.spec);
  const auto plan = detail::build_shell_plan(omega, f.spec, 1.0, q);
  detail::ShellRequest request;
  request.full = true;
  for (const double t : t_grid)
    request.sup_cuts.push_back(detail::cut_index(plan, t));
  auto result = detail::apply_shell_plan(plan, f, request);
  return {std::move(*result.full), std::move(*result.sup)};
}

/// T_{Omega,alpha} f: kernel Omega(y/|y|)/|y|^{n+1-alpha}; alpha = 1
/// reproduces singular_integral bit-for-bit (same code path, and the radial
/// factor pow(r, alpha-1) is exactly 1).
inline SampledField generalized_singular_integral(
    const SphereKernel& omega, const SampledField& f, double alpha,
    std::optional<AnnularQuadrature> quad = std::nullopt) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument(
        "generalized_singular_integral: alpha must lie in (0, 1]");
  detail::require_operator_inputs(omega, f);
  const AnnularQuadrature q = quad ? *quad : AnnularQuadrature::make_default(f.spec);
  const auto plan = detail::build_shell_plan(omega, f.spec, alpha, q);
  detail::ShellRequest request;
  request.full = true;
  return std::move(*detail::apply_shell_plan(plan, f, request).full);
}

enum class RieszPath { kAuto, kDirect, kFft };

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// Offset kernel table value |delta|^{alpha-n} h^n, with the singular cell
/// replaced by the closed-form polar integral averaged over the inscribed
/// and circumscribed disks.
inline std::vector<double> riesz_kernel_table(const GridSpec& spec, double alpha) {
  const int n_axis = spec.points_per_axis;
  const double h = spec.spacing();
  const int width = 2 * n_axis - 1;
  const double n = spec.dim;
  const double measure = spec.cell_measure();

  double center;
  if (spec.dim == 2) {
    const double r_in = h / 2.0;
    const double r_out = h * std::numbers::sqrt2 / 2.0;
    center = std::numbers::pi * (std::pow(r_in, alpha) + std::pow(r_out, alpha)) /
             alpha;
  } else {
    const double r_in = h / 2.0;
    const double r_out = h * std::sqrt(3.0) / 2.0;
    center = 2.0 * std::numbers::pi *
             (std::pow(r_in, alpha) + std::pow(r_out, alpha)) / alpha;
  }

  if (spec.dim == 2) {
    std::vector<double> table(static_cast<std::size_t>(width) * width);
    for (int da = -(n_axis - 1); da <= n_axis - 1; ++da)
      for (int db = -(n_axis - 1); db <= n_axis - 1; ++db) {
        const std::size_t at =
            static_cast<std::size_t>(da + n_axis - 1) * width + (db + n_axis - 1);
        if (da == 0 && db == 0) {
          table[at] = center;
        } else {
          const double dist = h * std::sqrt(static_cast<double>(da) * da +
                                            static_cast<double>(db) * db);
          table[at] = std::pow(dist, alpha - n) * measure;
        }
      }
    return table;
  }
  std::vector<double> table(static_cast<std::size_t>(width) * width * width);
  for (int da = -(n_axis - 1); da <= n_axis - 1; ++da)
    for (int db = -(n_axis - 1); db <= n_axis - 1; ++db)
      for (int dc = -(n_axis - 1); dc <= n_axis - 1; ++dc) {
        const std::size_t at =
            (static_cast<std::size_t>(da + n_axis - 1) * width +
             (db + n_axis - 1)) *
                width +
            (dc + n_axis - 1);
        if (da == 0 && db == 0 && dc == 0) {
          table[at] = center;
        } else {
          const double dist =
              h * std::sqrt(static_cast<double>(da) * da +
                            static_cast<double>(db) * db +
                            static_cast<double>(dc) * dc);
          table[at] = std::pow(dist, alpha - n) * measure;
        }
      }
  return table;
}

inline SampledField riesz_direct(const SampledField& g, double alpha) {
  const GridSpec& spec = g.spec;
  const int n_axis = spec.points_per_axis;
  const int width = 2 * n_axis - 1;
  const auto table = riesz_kernel_table(spec, alpha);
  SampledField out;
  out.spec = spec;
  out.values.assign(spec.point_count(), 0.0);

  parallel_for(spec.point_count(), [&](std::size_t idx) {
    const auto xi = spec.unflatten(idx);
    double acc = 0.0;
    if (spec.dim == 2) {
      for (int a = 0; a < n_axis; ++a) {
        const double* row = g.values.data() + static_cast<std::size_t>(a) * n_axis;
        const double* krow =
            table.data() +
            static_cast<std::size_t>(xi[0] - a + n_axis - 1) * width +
            (xi[1] + n_axis - 1);
        for (int b = 0; b < n_axis; ++b) acc += row[b] * krow[-b];
      }
    } else {
      for (int a = 0; a < n_axis; ++a)
        for (int b = 0; b < n_axis; ++b) {
          const double* row =
              g.values.data() + (static_cast<std::size_t>(a) * n_axis + b) * n_axis;
          const double* krow =
              table.data() +
              ((static_cast<std::size_t>(xi[0] - a + n_axis - 1) * width) +
               (xi[1] - b + n_axis - 1)) *
                  width +
              (xi[2] + n_axis - 1);
          for (int c = 0; c < n_axis; ++c) acc += row[c] * krow[-c];
        }
    }
    out.values[idx] = acc;
  });
  return out;
}

/// Same discrete sum as riesz_direct, evaluated as a cyclic convolution on
/// the doubled grid (2N per axis holds every offset in (-N, N) without
/// aliasing).  FFTW runs single-threaded with deterministic plans.
inline SampledField riesz_fft(const SampledField& g, double alpha) {
  const GridSpec& spec = g.spec;
  const int n_axis = spec.points_per_axis;
  const int P = 2 * n_axis;
  const auto table = riesz_kernel_table(spec, alpha);
  const int width = 2 * n_axis - 1;

  const std::size_t real_count = spec.dim == 2
                                     ? static_cast<std::size_t>(P) * P
                                     : static_cast<std::size_t>(P) * P * P;
  const std::size_t complex_count =
      spec.dim == 2 ? static_cast<std::size_t>(P) * (P / 2 + 1)
                    : static_cast<std::size_t>(P) * P * (P / 2 + 1);

  std::vector<double> kernel_pad(real_count, 0.0);
  std::vector<double> field_pad(real_count, 0.0);
  auto wrap = [P](int d) { return (d % P + P) % P; };
  if (spec.dim == 2) {
    for (int da = -(n_axis - 1); da <= n_axis - 1; ++da)
      for (int db = -(n_axis - 1); db <= n_axis - 1; ++db)
        kernel_pad[static_cast<std::size_t>(wrap(da)) * P + wrap(db)] =
            table[static_cast<std::size_t>(da + n_axis - 1) * width +
                  (db + n_axis - 1)];
    for (int a = 0; a < n_axis; ++a)
      for (int b = 0; b < n_axis; ++b)
        field_pad[static_cast<std::size_t>(a) * P + b] =
            g.values[static_cast<std::size_t>(a) * n_axis + b];
  } else {
    for (int da = -(n_axis - 1); da <= n_axis - 1; ++da)
      for (int db = -(n_axis - 1); db <= n_axis - 1; ++db)
        for (int dc = -(n_axis - 1); dc <= n_axis - 1; ++dc)
          kernel_pad[(static_cast<std::size_t>(wrap(da)) * P + wrap(db)) * P +
                     wrap(dc)] =
              table[((static_cast<std::size_t>(da + n_axis - 1) * width) +
                     (db + n_axis - 1)) *
                        width +
                    (dc + n_axis - 1)];
    for (int a = 0; a < n_axis; ++a)
      for (int b = 0; b < n_axis; ++b)
        for (int c = 0; c < n_axis; ++c)
          field_pad[(static_cast<std::size_t>(a) * P + b) * P + c] =
              g.values[(static_cast<std::size_t>(a) * n_axis + b) * n_axis + c];
  }

  std::vector<std::complex<double>> kernel_hat(complex_count);
  std::vector<std::complex<double>> field_hat(complex_count);
  std::vector<double> conv(real_count);

  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_plan fwd_kernel, fwd_field, inv;
    if (spec.dim == 2) {
      fwd_kernel = fftw_plan_dft_r2c_2d(
          P, P, kernel_pad.data(),
          reinterpret_cast<fftw_complex*>(kernel_hat.data()), FFTW_ESTIMATE);
      fwd_field = fftw_plan_dft_r2c_2d(
          P, P, field_pad.data(),
          reinterpret_cast<fftw_complex*>(field_hat.data()), FFTW_ESTIMATE);
      inv = fftw_plan_dft_c2r_2d(
          P, P, reinterpret_cast<fftw_complex*>(field_hat.data()), conv.data(),
          FFTW_ESTIMATE);
    } else {
      fwd_kernel = fftw_plan_dft_r2c_3d(
          P, P, P, kernel_pad.data(),
          reinterpret_cast<fftw_complex*>(kernel_hat.data()), FFTW_ESTIMATE);
      fwd_field = fftw_plan_dft_r2c_3d(
          P, P, P, field_pad.data(),
          reinterpret_cast<fftw_complex*>(field_hat.data()), FFTW_ESTIMATE);
      inv = fftw_plan_dft_c2r_3d(
          P, P, P, reinterpret_cast<fftw_complex*>(field_hat.data()),
          conv.data(), FFTW_ESTIMATE);
    }
    fftw_execute(fwd_kernel);
    fftw_execute(fwd_field);
    const double scale = 1.0 / static_cast<double>(real_count);
    for (std::size_t i = 0; i < complex_count; ++i)
      field_hat[i] *= kernel_hat[i] * scale;
    fftw_execute(inv);
    fftw_destroy_plan(fwd_kernel);
    fftw_destroy_plan(fwd_field);
    fftw_destroy_plan(inv);
  }

  SampledField out;
  out.spec = spec;
  out.values.assign(spec.point_count(), 0.0);
  if (spec.dim == 2) {
    for (int a = 0; a < n_axis; ++a)
      for (int b = 0; b < n_axis; ++b)
        out.values[static_cast<std::size_t>(a) * n_axis + b] =
            conv[static_cast<std::size_t>(a) * P + b];
  } else {
    for (int a = 0; a < n_axis; ++a)
      for (int b = 0; b < n_axis; ++b)
        for (int c = 0; c < n_axis; ++c)
          out.values[(static_cast<std::size_t>(a) * n_axis + b) * n_axis + c] =
              conv[(static_cast<std::size_t>(a) * P + b) * P + c];
  }
  return out;
}

}  // namespace detail

/// Riesz potential I_alpha g(x) = sum_y g(y) |x-y|^{alpha-n} h^n with the
/// normalization constant fixed to 1 and a closed-form singular-cell value.
/// Large grids route the identical sum through an FFT; both routes agree to
/// rounding and the choice depends only on the grid, never on thread count.
inline SampledField riesz_potential(const SampledField& g, double alpha,
                                    RieszPath path = RieszPath::kAuto) {
  if (!(alpha > 0.0 && alpha < g.spec.dim))
    throw std::invalid_argument("riesz_potential: alpha must lie in (0, n)");
  if (path == RieszPath::kAuto)
    path = g.spec.point_count() > 4096 ? RieszPath::kFft : RieszPath::kDirect;
  SampledField out = path == RieszPath::kFft ? detail::riesz_fft(g, alpha)
                                             : detail::riesz_direct(g, alpha);
  // The potential of a nonnegative density is nonnegative; scrub the
  // round-off dust the padded convolution can leave at far-field points so
  // that downstream fractional powers stay real.
  const bool nonneg =
      std::all_of(g.values.begin(), g.values.end(),
                  [](double v) { return v >= 0.0; });
  if (nonneg)
    for (double& v : out.values) v = std::max(v, 0.0);
  return out;
}

namespace detail {

/// Truncated, per-axis renormalized 1D heat-kernel weights at scale t.
inline std::vector<double> heat_axis_weights(const GridSpec& spec, double t) {
  const double h = spec.spacing();
  const int cap = spec.points_per_axis - 1;
  const int reach = static_cast<int>(std::ceil(8.0 * std::sqrt(t) / h));
  const int K = std::min(reach, cap);
  std::vector<double> w(static_cast<std::size_t>(K) + 1);
  double total = 0.0;
  for (int d = 0; d <= K; ++d) {
    w[d] = std::exp(-(d * h) * (d * h) / (4.0 * t));
    total += d == 0 ? w[d] : 2.0 * w[d];
  }
  for (double& v : w) v /= total;
  return w;
}

inline void heat_axis_pass(std::vector<double>& values, const GridSpec& spec,
                           int axis, const std::vector<double>& w) {
  const int n = spec.points_per_axis;
  const int K = static_cast<int>(w.size()) - 1;
  std::size_t stride = 1;
  for (int d = spec.dim - 1; d > axis; --d) stride *= static_cast<std::size_t>(n);
  const std::size_t block = stride * static_cast<std::size_t>(n);
  const std::size_t total = spec.point_count();

  std::vector<double> row(n), conv(n);
  for (std::size_t start = 0; start < total; start += block) {
    for (std::size_t inner = 0; inner < stride; ++inner) {
      double* base = values.data() + start + inner;
      for (int i = 0; i < n; ++i) row[i] = base[static_cast<std::size_t>(i) * stride];
      for (int i = 0; i < n; ++i) {
        double acc = w[0] * row[i];
        const int lo = std::max(1, i - (n - 1));
        (void)lo;
        for (int d = 1; d <= K; ++d) {
          double s = 0.0;
          if (i - d >= 0) s += row[i - d];
          if (i + d < n) s += row[i + d];
          acc += w[d] * s;
        }
        conv[i] = acc;
      }
      for (int i = 0; i < n; ++i) base[static_cast<std::size_t>(i) * stride] = conv[i];
    }
  }
}

}  // namespace detail

/// Heat convolution h_t * g with the Gaussian truncated at radius 8*sqrt(t)
/// per axis and renormalized to unit mass, applied separably.
inline SampledField heat_convolve(const SampledField& g, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("heat_convolve: t must be > 0");
  SampledField out = g;
  out.gradient.clear();
  out.support_radius.reset();
  const auto w = detail::heat_axis_weights(g.spec, t);
  for (int axis = 0; axis < g.spec.dim; ++axis)
    detail::heat_axis_pass(out.values, g.spec, axis, w);
  return out;
}

struct HeatSweep {
  std::vector<double> times;
  std::vector<double> max_abs;  // per time: max_x |h_t * g|
  SampledField sup_field;       // pointwise sup over the time grid
};

/// Evaluates h_t * g across a whole time grid through one padded FFT of g
/// and analytic spectra of the same truncated/renormalized axis kernels used
/// by heat_convolve; the two paths agree to rounding.
inline HeatSweep heat_sweep(const SampledField& g, const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw std::invalid_argument("heat_sweep: empty time grid");
  const GridSpec& spec = g.spec;
  const int n_axis = spec.points_per_axis;
  const int P = 2 * n_axis;

  HeatSweep sweep;
  sweep.times = t_grid;
  sweep.max_abs.assign(t_grid.size(), 0.0);
  sweep.sup_field.spec = spec;
  sweep.sup_field.values.assign(spec.point_count(), 0.0);

  const std::size_t real_count = spec.dim == 2
                                     ? static_cast<std::size_t>(P) * P
                                     : static_cast<std::size_t>(P) * P * P;
  const std::size_t complex_cols = static_cast<std::size_t>(P / 2 + 1);
  const std::size_t complex_count = spec.dim == 2
                                        ? static_cast<std::size_t>(P) * complex_cols
                                        : static_cast<std::size_t>(P) * P * complex_cols;

  std::vector<double> field_pad(real_count, 0.0);
  if (spec.dim == 2) {
    for (int a = 0; a < n_axis; ++a)
      for (int b = 0; b < n_axis; ++b)
        field_pad[static_cast<std::size_t>(a) * P + b] =
            g.values[static_cast<std::size_t>(a) * n_axis + b];
  } else {
    for (int a = 0; a < n_axis; ++a)
      for (int b = 0; b < n_axis; ++b)
        for (int c = 0; c < n_axis; ++c)
          field_pad[(static_cast<std::size_t>(a) * P + b) * P + c] =
              g.values[(static_cast<std::size_t>(a) * n_axis + b) * n_axis + c];
  }

  std::vector<std::complex<double>> field_hat(complex_count);
  std::vector<std::complex<double>> scratch(complex_count);
  std::vector<double> conv(real_count);

  fftw_plan fwd, inv;
  {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    if (spec.dim == 2) {
      fwd = fftw_plan_dft_r2c_2d(P, P, field_pad.data(),
                                 reinterpret_cast<fftw_complex*>(field_hat.data()),
                                 FFTW_ESTIMATE);
      inv = fftw_plan_dft_c2r_2d(P, P,
                                 reinterpret_cast<fftw_complex*>(scratch.data()),
                                 conv.data(), FFTW_ESTIMATE);
    } else {
      fwd = fftw_plan_dft_r2c_3d(P, P, P, field_pad.data(),
                                 reinterpret_cast<fftw_complex*>(field_hat.data()),
                                 FFTW_ESTIMATE);
      inv = fftw_plan_dft_c2r_3d(P, P, P,
                                 reinterpret_cast<fftw_complex*>(scratch.data()),
                                 conv.data(), FFTW_ESTIMATE);
    }
  }
  fftw_execute(fwd);

  std::vector<double> spectrum(static_cast<std::size_t>(P / 2) + 1);
  const double scale = 1.0 / static_cast<double>(real_count);

  for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
    const auto w = detail::heat_axis_weights(spec, t_grid[ti]);
    const int K = static_cast<int>(w.size()) - 1;
    for (int k = 0; k <= P / 2; ++k) {
      double s = w[0];
      for (int d = 1; d <= K; ++d)
        s += 2.0 * w[d] * std::cos(2.0 * std::numbers::pi * d * k / P);
      spectrum[static_cast<std::size_t>(k)] = s;
    }
    auto axis_factor = [&](int k) {
      return spectrum[static_cast<std::size_t>(k <= P / 2 ? k : P - k)];
    };

    if (spec.dim == 2) {
      for (int ka = 0; ka < P; ++ka) {
        const double fa = axis_factor(ka);
        for (int kb = 0; kb <= P / 2; ++kb)
          scratch[static_cast<std::size_t>(ka) * complex_cols + kb] =
              field_hat[static_cast<std::size_t>(ka) * complex_cols + kb] * fa *
              axis_factor(kb) * scale;
      }
    } else {
      for (int ka = 0; ka < P; ++ka)
        for (int kb = 0; kb < P; ++kb) {
          const double fab = axis_factor(ka) * axis_factor(kb);
          for (int kc = 0; kc <= P / 2; ++kc)
            scratch[(static_cast<std::size_t>(ka) * P + kb) * complex_cols + kc] =
                field_hat[(static_cast<std::size_t>(ka) * P + kb) * complex_cols +
                          kc] *
                fab * axis_factor(kc) * scale;
        }
    }
    fftw_execute(inv);

    double peak = 0.0;
    if (spec.dim == 2) {
      for (int a = 0; a < n_axis; ++a)
        for (int b = 0; b < n_axis; ++b) {
          const double v =
              std::abs(conv[static_cast<std::size_t>(a) * P + b]);
          peak = std::max(peak, v);
          double& cell = sweep.sup_field.values[static_cast<std::size_t>(a) * n_axis + b];
          cell = std::max(cell, v);
        }
    } else {
      for (int a = 0; a < n_axis; ++a)
        for (int b = 0; b < n_axis; ++b)
          for (int c = 0; c < n_axis; ++c) {
            const double v = std::abs(
                conv[(static_cast<std::size_t>(a) * P + b) * P + c]);
            peak = std::max(peak, v);
            double& cell =
                sweep.sup_field
                    .values[(static_cast<std::size_t>(a) * n_axis + b) * n_axis + c];
            cell = std::max(cell, v);
          }
    }
    sweep.max_abs[ti] = peak;
  }

  {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
  }
  return sweep;
}

/// h_t * g at selected sample points only, by direct summation (used where a
/// handful of point values across many times is needed).
inline std::vector<std::vector<double>> heat_at_points(
    const SampledField& g, const std::vector<double>& t_grid,
    const std::vector<std::size_t>& points) {
  const GridSpec& spec = g.spec;
  const int n_axis = spec.points_per_axis;
  std::vector<std::vector<double>> out(t_grid.size(),
                                       std::vector<double>(points.size(), 0.0));
  for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
    const auto w = detail::heat_axis_weights(spec, t_grid[ti]);
    const int K = static_cast<int>(w.size()) - 1;
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
      const auto xi = spec.unflatten(points[pi]);
      double acc = 0.0;
      if (spec.dim == 2) {
        for (int a = std::max(0, xi[0] - K); a <= std::min(n_axis - 1, xi[0] + K);
             ++a)
          for (int b = std::max(0, xi[1] - K);
               b <= std::min(n_axis - 1, xi[1] + K); ++b)
            acc += g.values[static_cast<std::size_t>(a) * n_axis + b] *
                   w[std::abs(xi[0] - a)] * w[std::abs(xi[1] - b)];
      } else {
        for (int a = std::max(0, xi[0] - K); a <= std::min(n_axis - 1, xi[0] + K);
             ++a)
          for (int b = std::max(0, xi[1] - K);
               b <= std::min(n_axis - 1, xi[1] + K); ++b)
            for (int c = std::max(0, xi[2] - K);
                 c <= std::min(n_axis - 1, xi[2] + K); ++c)
              acc += g.values[(static_cast<std::size_t>(a) * n_axis + b) * n_axis +
                              c] *
                     w[std::abs(xi[0] - a)] * w[std::abs(xi[1] - b)] *
                     w[std::abs(xi[2] - c)];
      }
      out[ti][pi] = acc;
    }
  }
  return out;
}

namespace detail {

/// Self credit plus the stride-1 radius-h pass: every point is credited with
/// its own cell average and with the 2n+1-cell closed-ball averages centered
/// at each of its immediate neighbors.
inline void maximal_small_ball_pass(const std::vector<double>& abs_g,
                                    const GridSpec& spec,
                                    std::vector<double>& out) {
  const int n = spec.points_per_axis;
  const std::size_t total = spec.point_count();
  std::vector<double> small(total, 0.0);

  std::size_t stride_last = 1;
  const std::size_t stride_mid = static_cast<std::size_t>(n);
  const std::size_t stride_first =
      spec.dim == 2 ? stride_mid : stride_mid * static_cast<std::size_t>(n);

  for (std::size_t idx = 0; idx < total; ++idx) {
    const auto xi = spec.unflatten(idx);
    double sum = abs_g[idx];
    int cells = 1;
    auto add = [&](int coord, std::size_t stride, int delta) {
      const int c = coord + delta;
      if (c < 0 || c >= n) return;
      sum += abs_g[idx + static_cast<std::size_t>(delta) * stride];
      ++cells;
    };
    // closed ball of radius h: the center and its 2n axis neighbors
    add(xi[0], stride_first, -1);
    add(xi[0], stride_first, 1);
    add(xi[spec.dim - 1], stride_last, -1);
    add(xi[spec.dim - 1], stride_last, 1);
    if (spec.dim == 3) {
      add(xi[1], stride_mid, -1);
      add(xi[1], stride_mid, 1);
    }
    small[idx] = sum / cells;
  }

  for (std::size_t idx = 0; idx < total; ++idx) {
    const auto xi = spec.unflatten(idx);
    double best = std::max(out[idx], std::max(abs_g[idx], small[idx]));
    auto fold = [&](int coord, std::size_t stride, int delta) {
      const int c = coord + delta;
      if (c < 0 || c >= n) return;
      best = std::max(best, small[idx + static_cast<std::size_t>(delta) * stride]);
    };
    fold(xi[0], stride_first, -1);
    fold(xi[0], stride_first, 1);
    fold(xi[spec.dim - 1], stride_last, -1);
    fold(xi[spec.dim - 1], stride_last, 1);
    if (spec.dim == 3) {
      fold(xi[1], stride_mid, -1);
      fold(xi[1], stride_mid, 1);
    }
    out[idx] = best;
  }
}

/// Sliding max over lattice columns: folds max_{|cb - b| <= w, cb on the
/// stride lattice} source[cb / s] into dest[b] for every column b.
inline void sliding_lattice_max(const double* source, int lattice_count, int stride,
                                int half_width, int n, double* dest) {
  std::deque<int> window;  // lattice indices, values nonincreasing
  int next_lattice = 0;    // next lattice index to admit
  for (int b = 0; b < n; ++b) {
    const int hi = b + half_width;
    while (next_lattice < lattice_count && next_lattice * stride <= hi) {
      while (!window.empty() && source[window.back()] <= source[next_lattice])
        window.pop_back();
      window.push_back(next_lattice);
      ++next_lattice;
    }
    const int lo = b - half_width;
    while (!window.empty() && window.front() * stride < lo) window.pop_front();
    if (!window.empty()) dest[b] = std::max(dest[b], source[window.front()]);
  }
}

}  // namespace detail

/// Hardy-Littlewood maximal function over the shared ball family: averages
/// of |g| over balls B(c, r) with c on the stride lattice and r in the
/// dyadic radius list (clipped cell counts at the boundary), each average
/// credited to every sample the ball covers; plus the stride-1 radius-h pass
/// and the point's own cell, so the output always dominates |g|.
inline SampledField maximal_function(const SampledField& g, const BallFamily& family) {
  if (family.radii.empty())
    throw std::invalid_argument("maximal_function: radius list must be nonempty");
  const GridSpec& spec = g.spec;
  const int n = spec.points_per_axis;
  const int s = family.stride;
  const std::size_t total = spec.point_count();

  std::vector<double> abs_g(total);
  for (std::size_t i = 0; i < total; ++i) abs_g[i] = std::abs(g.values[i]);

  SampledField out;
  out.spec = spec;
  out.values.assign(total, 0.0);

  const detail::LastAxisPrefix prefix(abs_g, spec);
  const int lattice_count = (n + s - 1) / s;

  for (const int radius : family.radii) {
    // Ball averages at stride-lattice centers.
    const std::size_t lattice_rows = spec.dim == 2
                                         ? static_cast<std::size_t>(lattice_count)
                                         : static_cast<std::size_t>(lattice_count) *
                                               lattice_count;
    std::vector<double> averages(lattice_rows * lattice_count, 0.0);
    parallel_for(lattice_rows, [&](std::size_t row) {
      std::array<int, 3> c{0, 0, 0};
      if (spec.dim == 2) {
        c[0] = static_cast<int>(row) * s;
      } else {
        c[0] = static_cast<int>(row) / lattice_count * s;
        c[1] = static_cast<int>(row) % lattice_count * s;
      }
      for (int lb = 0; lb < lattice_count; ++lb) {
        c[spec.dim - 1] = lb * s;
        const auto ball = detail::ball_sum(prefix, spec, c, radius);
        averages[row * lattice_count + lb] =
            ball.cells > 0 ? ball.sum / static_cast<double>(ball.cells) : 0.0;
      }
    });

    // Credit pass: for each output row, fold sliding maxima of every lattice
    // row within vertical reach.  max() is exact, so any execution order
    // gives identical results.
    if (spec.dim == 2) {
      parallel_for(static_cast<std::size_t>(n), [&](std::size_t arow) {
        const int a = static_cast<int>(arow);
        double* dest = out.values.data() + arow * static_cast<std::size_t>(n);
        for (int ca = ((a - radius) + s - 1) / s * s; ca <= a + radius; ca += s) {
          if (ca < 0 || ca >= n) continue;
          const int w = detail::disk_half_width(radius, ca - a);
          if (w < 0) continue;
          detail::sliding_lattice_max(
              averages.data() + static_cast<std::size_t>(ca / s) * lattice_count,
              lattice_count, s, w, n, dest);
        }
      });
    } else {
      parallel_for(static_cast<std::size_t>(n) * n, [&](std::size_t pair) {
        const int a = static_cast<int>(pair) / n;
        const int b = static_cast<int>(pair) % n;
        double* dest = out.values.data() + pair * static_cast<std::size_t>(n);
        for (int ca = ((a - radius) + s - 1) / s * s; ca <= a + radius; ca += s) {
          if (ca < 0 || ca >= n) continue;
          for (int cb = ((b - radius) + s - 1) / s * s; cb <= b + radius; cb += s) {
            if (cb < 0 || cb >= n) continue;
            const long long rem =
                static_cast<long long>(radius) * radius -
                static_cast<long long>(ca - a) * (ca - a) -
                static_cast<long long>(cb - b) * (cb - b);
            if (rem < 0) continue;
            int w = static_cast<int>(std::sqrt(static_cast<double>(rem)));
            while (static_cast<long long>(w + 1) * (w + 1) <= rem) ++w;
            while (static_cast<long long>(w) * w > rem) --w;
            detail::sliding_lattice_max(
                averages.data() +
                    (static_cast<std::size_t>(ca / s) * lattice_count + cb / s) *
                        lattice_count,
                lattice_count, s, w, n, dest);
          }
        }
      });
    }
  }

  detail::maximal_small_ball_pass(abs_g, spec, out.values);
  return out;
}

inline SampledField maximal_function(const SampledField& g) {
  return maximal_function(g, BallFamily::shared_default(g.spec));
}

}  // namespace roughcalc
