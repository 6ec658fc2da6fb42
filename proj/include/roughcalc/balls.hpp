#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "roughcalc/grid.hpp"

namespace roughcalc {

/// The ball family shared by the maximal function, the Morrey norm, and the
/// A_p constant: centers on a stride-coarsened sample lattice, Euclidean
/// balls with radii R*h for R in a dyadic list.  Sharing one enumeration
/// makes cross-module identities exact rather than tolerance-bound.
struct BallFamily {
  int stride = 1;           // center lattice stride, in grid units
  std::vector<int> radii;   // ball radii in grid units, ascending

  static BallFamily shared_default(const GridSpec& spec) {
    BallFamily fam;
    fam.stride = std::max(1, spec.points_per_axis / 128);
    for (int r = 1; r <= spec.points_per_axis; r *= 2) fam.radii.push_back(r);
    return fam;
  }

  /// Denser family for refinement screens: halved stride and dyadic
  /// midpoints 3*2^j interleaved into the radius list.
  BallFamily refined() const {
    BallFamily fam;
    fam.stride = std::max(1, stride / 2);
    fam.radii = radii;
    for (const int r : radii)
      if (r % 2 == 0) fam.radii.push_back(3 * (r / 2));
    std::sort(fam.radii.begin(), fam.radii.end());
    fam.radii.erase(std::unique(fam.radii.begin(), fam.radii.end()),
                    fam.radii.end());
    return fam;
  }
};

namespace detail {

/// Largest integer w with w^2 + da^2 <= R^2 (exact in integers).
inline int disk_half_width(int radius, int da) {
  const long long rem =
      static_cast<long long>(radius) * radius - static_cast<long long>(da) * da;
  if (rem < 0) return -1;
  int w = static_cast<int>(std::sqrt(static_cast<double>(rem)));
  while (static_cast<long long>(w + 1) * (w + 1) <= rem) ++w;
  while (static_cast<long long>(w) * w > rem) --w;
  return w;
}

/// Prefix sums along the last (contiguous) axis; rows are all leading-axis
/// combinations.  range_sum clamps to the grid, so boundary-clipped balls
/// come out right by construction.
struct LastAxisPrefix {
  int n = 0;
  std::size_t rows = 0;
  std::vector<double> prefix;  // rows * (n + 1)

  LastAxisPrefix() = default;

  LastAxisPrefix(const std::vector<double>& values, const GridSpec& spec) {
    n = spec.points_per_axis;
    rows = spec.point_count() / static_cast<std::size_t>(n);
    prefix.assign(rows * static_cast<std::size_t>(n + 1), 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* src = values.data() + r * static_cast<std::size_t>(n);
      double* dst = prefix.data() + r * static_cast<std::size_t>(n + 1);
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += src[i];
        dst[i + 1] = acc;
      }
    }
  }

  /// Inclusive range sum over columns [lo, hi] of one row, clamped.
  double range_sum(std::size_t row, int lo, int hi) const {
    lo = std::max(lo, 0);
    hi = std::min(hi, n - 1);
    if (lo > hi) return 0.0;
    const double* dst = prefix.data() + row * static_cast<std::size_t>(n + 1);
    return dst[hi + 1] - dst[lo];
  }

  /// Number of in-grid columns in [lo, hi].
  int range_count(int lo, int hi) const {
    lo = std::max(lo, 0);
    hi = std::min(hi, n - 1);
    return lo > hi ? 0 : hi - lo + 1;
  }
};

struct BallSum {
  double sum = 0.0;
  long long cells = 0;
};

/// Sum and in-grid cell count of the closed ball of radius R (grid units)
/// centered at the sample with per-axis indices c.
inline BallSum ball_sum(const LastAxisPrefix& prefix, const GridSpec& spec,
                        const std::array<int, 3>& c, int radius) {
  BallSum out;
  const int n = spec.points_per_axis;
  if (spec.dim == 2) {
    for (int da = -radius; da <= radius; ++da) {
      const int a = c[0] + da;
      if (a < 0 || a >= n) continue;
      const int w = disk_half_width(radius, da);
      out.sum += prefix.range_sum(static_cast<std::size_t>(a), c[1] - w, c[1] + w);
      out.cells += prefix.range_count(c[1] - w, c[1] + w);
    }
    return out;
  }
  for (int da = -radius; da <= radius; ++da) {
    const int a = c[0] + da;
    if (a < 0 || a >= n) continue;
    const int wa = disk_half_width(radius, da);
    for (int db = -wa; db <= wa; ++db) {
      const int b = c[1] + db;
      if (b < 0 || b >= n) continue;
      const long long rem = static_cast<long long>(radius) * radius -
                            static_cast<long long>(da) * da -
                            static_cast<long long>(db) * db;
      int wc = static_cast<int>(std::sqrt(static_cast<double>(rem)));
      while (static_cast<long long>(wc + 1) * (wc + 1) <= rem) ++wc;
      while (static_cast<long long>(wc) * wc > rem) --wc;
      const std::size_t row = (static_cast<std::size_t>(a) * n + b);
      out.sum += prefix.range_sum(row, c[2] - wc, c[2] + wc);
      out.cells += prefix.range_count(c[2] - wc, c[2] + wc);
    }
  }
  return out;
}

/// Applies fn(center_multi_index, radius_in_grid_units) over the family,
/// radii ascending, centers in lexicographic order.
template <class Fn>
inline void for_each_ball(const GridSpec& spec, const BallFamily& family, Fn&& fn) {
  const int n = spec.points_per_axis;
  const int s = family.stride;
  for (const int radius : family.radii) {
    std::array<int, 3> c{0, 0, 0};
    for (int a = 0; a < n; a += s) {
      c[0] = a;
      for (int b = 0; b < n; b += s) {
        c[1] = b;
        if (spec.dim == 2) {
          fn(c, radius);
        } else {
          for (int d = 0; d < n; d += s) {
            c[2] = d;
            fn(c, radius);
          }
        }
      }
    }
  }
}

}  // namespace detail
}  // namespace roughcalc
