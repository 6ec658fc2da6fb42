#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "roughcalc/balls.hpp"
#include "roughcalc/grid.hpp"
#include "roughcalc/operators.hpp"
#include "roughcalc/parallel.hpp"
#include "roughcalc/weights.hpp"

namespace roughcalc {

inline double lp_norm(const SampledField& g, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("lp_norm: need p > 0");
  const double measure = g.spec.cell_measure();
  double sum;
  if (p == 2.0) {
    sum = parallel_sum(g.values.size(),
                       [&](std::size_t i) { return g.values[i] * g.values[i]; });
  } else if (p == 1.0) {
    sum = parallel_sum(g.values.size(),
                       [&](std::size_t i) { return std::abs(g.values[i]); });
  } else {
    sum = parallel_sum(g.values.size(), [&](std::size_t i) {
      return std::pow(std::abs(g.values[i]), p);
    });
  }
  return std::pow(sum * measure, 1.0 / p);
}

inline double sup_norm(const SampledField& g) {
  if (g.values.empty()) return 0.0;
  return parallel_max(g.values.size(),
                      [&](std::size_t i) { return std::abs(g.values[i]); });
}

inline double weighted_lp_norm(const SampledField& g, const Weight& w, double p) {
  if (w.domain != "rn")
    throw std::invalid_argument("weighted_lp_norm: weight must live on the grid");
  if (w.spec != g.spec)
    throw std::invalid_argument("weighted_lp_norm: weight and field grids differ");
  if (!(p > 0.0)) throw std::invalid_argument("weighted_lp_norm: need p > 0");
  const double measure = g.spec.cell_measure();
  const double sum = parallel_sum(g.values.size(), [&](std::size_t i) {
    return std::pow(std::abs(g.values[i]), p) * w.samples[i];
  });
  return std::pow(sum * measure, 1.0 / p);
}

/// Homogeneous Morrey norm over the shared ball family:
/// sup_{B(x,r)} ( r^{-n(1-p/q)} int_B |g|^p )^{1/p}.
inline double morrey_norm(const SampledField& g, double p, double q,
                          const BallFamily& family) {
  if (!(1.0 <= p && p <= q))
    throw std::invalid_argument("morrey_norm: need 1 <= p <= q");
  const GridSpec& spec = g.spec;
  const double h = spec.spacing();
  const double measure = spec.cell_measure();
  const double n = spec.dim;

  std::vector<double> powed(g.values.size());
  if (p == 1.0) {
    for (std::size_t i = 0; i < g.values.size(); ++i)
      powed[i] = std::abs(g.values[i]);
  } else if (p == 2.0) {
    for (std::size_t i = 0; i < g.values.size(); ++i)
      powed[i] = g.values[i] * g.values[i];
  } else {
    for (std::size_t i = 0; i < g.values.size(); ++i)
      powed[i] = std::pow(std::abs(g.values[i]), p);
  }
  const detail::LastAxisPrefix prefix(powed, spec);

  double best = 0.0;
  detail::for_each_ball(spec, family, [&](const std::array<int, 3>& center, int radius) {
    const auto ball = detail::ball_sum(prefix, spec, center, radius);
    if (ball.cells == 0) return;
    const double r_phys = radius * h;
    const double scaled =
        std::pow(r_phys, -n * (1.0 - p / q)) * ball.sum * measure;
    if (scaled > best) best = scaled;
  });
  return std::pow(best, 1.0 / p);
}

inline double morrey_norm(const SampledField& g, double p, double q) {
  return morrey_norm(g, p, q, BallFamily::shared_default(g.spec));
}

/// Thermic Besov norm sup_t t^{beta/2} max_x |h_t * g| over the time grid.
inline double besov_thermic_norm(const SampledField& g, double beta,
                                 const std::vector<double>& t_grid) {
  const HeatSweep sweep = heat_sweep(g, t_grid);
  double best = 0.0;
  for (std::size_t i = 0; i < sweep.times.size(); ++i)
    best = std::max(best,
                    std::pow(sweep.times[i], beta / 2.0) * sweep.max_abs[i]);
  return best;
}

inline double besov_from_sweep(const HeatSweep& sweep, double beta) {
  double best = 0.0;
  for (std::size_t i = 0; i < sweep.times.size(); ++i)
    best = std::max(best,
                    std::pow(sweep.times[i], beta / 2.0) * sweep.max_abs[i]);
  return best;
}

/// Weak-L^p quasi-norm: the sup over levels of lambda * mu(|g| >= lambda)^{1/p},
/// evaluated at the attained levels (where the sup over a discrete field
/// lives, approaching each level from below).
inline double weak_lorentz_norm(const SampledField& g, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("weak_lorentz_norm: need p > 0");
  std::vector<double> mags;
  mags.reserve(g.values.size());
  for (const double v : g.values)
    if (v != 0.0) mags.push_back(std::abs(v));
  if (mags.empty()) return 0.0;
  std::sort(mags.begin(), mags.end(), std::greater<double>());
  const double measure = g.spec.cell_measure();
  double best = 0.0;
  for (std::size_t k = 0; k < mags.size(); ++k) {
    if (k + 1 < mags.size() && mags[k + 1] == mags[k]) continue;  // end of tie block
    best = std::max(best, mags[k] * std::pow((k + 1) * measure, 1.0 / p));
  }
  return best;
}

/// Decreasing rearrangement as a step profile: levels strictly decreasing,
/// breakpoints the cumulative measures where each level block ends.
struct RearrangedProfile {
  std::vector<double> levels;
  std::vector<double> breakpoints;

  double total_mass() const {
    double mass = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      mass += levels[i] * (breakpoints[i] - prev);
      prev = breakpoints[i];
    }
    return mass;
  }
};

inline RearrangedProfile rearrangement(const SampledField& g) {
  std::vector<double> mags(g.values.size());
  for (std::size_t i = 0; i < g.values.size(); ++i) mags[i] = std::abs(g.values[i]);
  std::sort(mags.begin(), mags.end(), std::greater<double>());
  const double measure = g.spec.cell_measure();
  RearrangedProfile profile;
  std::size_t i = 0;
  while (i < mags.size()) {
    std::size_t j = i;
    while (j < mags.size() && mags[j] == mags[i]) ++j;
    profile.levels.push_back(mags[i]);
    profile.breakpoints.push_back(static_cast<double>(j) * measure);
    i = j;
  }
  return profile;
}

/// Classical Lorentz norm ( int_0^inf (g*)^p w )^{1/p} with the half-line
/// weight integrated in closed form on each rearrangement step.
inline double classical_lorentz_norm(const SampledField& g, double p,
                                     const Weight& w) {
  if (w.domain != "halfline")
    throw std::invalid_argument(
        "classical_lorentz_norm: weight must live on the half line");
  if (!(p > 0.0)) throw std::invalid_argument("classical_lorentz_norm: need p > 0");
  const RearrangedProfile profile = rearrangement(g);
  double total = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < profile.levels.size(); ++i) {
    if (profile.levels[i] > 0.0)
      total += std::pow(profile.levels[i], p) *
               w.halfline_integral(prev, profile.breakpoints[i]);
    prev = profile.breakpoints[i];
  }
  return std::pow(total, 1.0 / p);
}

/// The half-line weight t^{p/q - 1}, which turns Lambda^p(w) into the
/// Lorentz space L^{q,p}.
inline Weight make_lorentz_weight(double p, double q) {
  if (!(p > 0.0 && q > 0.0))
    throw std::invalid_argument("make_lorentz_weight: need p, q > 0");
  return make_halfline_weight(1.0, p / q - 1.0);
}

}  // namespace roughcalc
