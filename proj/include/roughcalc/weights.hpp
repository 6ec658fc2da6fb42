#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "roughcalc/balls.hpp"
#include "roughcalc/grid.hpp"

namespace roughcalc {

/// A weight is either a sampled positive function on the grid (domain "rn")
/// or a closed-form power c * t^gamma on the half line (domain "halfline").
struct Weight {
  std::string domain;  // "rn" | "halfline"
  std::string form;    // "const" | "power" | "plateau"
  double constant = 1.0;
  double exponent = 0.0;
  double plateau_inner = 1.0;
  double plateau_outer = 2.0;
  double plateau_low = 1.0;
  double plateau_high = 2.0;
  GridSpec spec;                 // rn only
  std::vector<double> samples;   // rn only

  double halfline_value(double t) const {
    return constant * std::pow(t, exponent);
  }

  /// Exact antiderivative of the half-line weight over [a, b].
  double halfline_integral(double a, double b) const {
    const double g = exponent;
    return constant * (std::pow(b, g + 1.0) - std::pow(a, g + 1.0)) / (g + 1.0);
  }
};

inline Weight make_const_weight(const GridSpec& spec, double value) {
  if (!(value > 0.0)) throw std::invalid_argument("weight: value must be positive");
  Weight w;
  w.domain = "rn";
  w.form = "const";
  w.constant = value;
  w.spec = spec;
  w.samples.assign(spec.point_count(), value);
  return w;
}

/// |x|^a sampled at cell centers (which never sit at the origin, so negative
/// exponents stay finite).
inline Weight make_power_weight(const GridSpec& spec, double exponent,
                                double scale = 1.0) {
  if (!(scale > 0.0)) throw std::invalid_argument("weight: scale must be positive");
  Weight w;
  w.domain = "rn";
  w.form = "power";
  w.constant = scale;
  w.exponent = exponent;
  w.spec = spec;
  w.samples.resize(spec.point_count());
  for (std::size_t idx = 0; idx < spec.point_count(); ++idx) {
    const auto x = spec.position(idx);
    double r2 = 0.0;
    for (int d = 0; d < spec.dim; ++d) r2 += x[d] * x[d];
    w.samples[idx] = scale * std::pow(std::sqrt(r2), exponent);
  }
  return w;
}

/// Smooth radial step: low inside |x| <= inner, high outside |x| >= outer,
/// C^1 smoothstep blend between.
inline Weight make_plateau_weight(const GridSpec& spec, double inner, double outer,
                                  double low, double high) {
  if (!(0.0 < inner && inner < outer))
    throw std::invalid_argument("weight: need 0 < inner < outer");
  if (!(low > 0.0 && high > 0.0))
    throw std::invalid_argument("weight: plateau levels must be positive");
  Weight w;
  w.domain = "rn";
  w.form = "plateau";
  w.plateau_inner = inner;
  w.plateau_outer = outer;
  w.plateau_low = low;
  w.plateau_high = high;
  w.spec = spec;
  w.samples.resize(spec.point_count());
  for (std::size_t idx = 0; idx < spec.point_count(); ++idx) {
    const auto x = spec.position(idx);
    double r2 = 0.0;
    for (int d = 0; d < spec.dim; ++d) r2 += x[d] * x[d];
    const double r = std::sqrt(r2);
    double v;
    if (r <= inner) {
      v = low;
    } else if (r >= outer) {
      v = high;
    } else {
      const double u = (r - inner) / (outer - inner);
      v = low + (high - low) * u * u * (3.0 - 2.0 * u);
    }
    w.samples[idx] = v;
  }
  return w;
}

inline Weight make_halfline_weight(double constant, double exponent) {
  if (!(constant > 0.0))
    throw std::invalid_argument("weight: constant must be positive");
  if (!(exponent > -1.0))
    throw std::invalid_argument("weight: half-line exponent must exceed -1 "
                                "(otherwise the head integral diverges)");
  Weight w;
  w.domain = "halfline";
  w.form = exponent == 0.0 ? "const" : "power";
  w.constant = constant;
  w.exponent = exponent;
  return w;
}

/// Muckenhoupt constant over the shared ball family:
/// sup_B (avg_B w) * (avg_B w^{-1/(p-1)})^{p-1}.
inline double ap_constant(const Weight& w, double frak_p, const BallFamily& family) {
  if (w.domain != "rn")
    throw std::invalid_argument("ap_constant: weight must live on the grid");
  if (!(frak_p > 1.0)) throw std::invalid_argument("ap_constant: need p > 1");
  const GridSpec& spec = w.spec;
  const std::size_t total = spec.point_count();

  std::vector<double> dual(total);
  for (std::size_t i = 0; i < total; ++i) {
    if (!(w.samples[i] > 0.0))
      throw std::invalid_argument("ap_constant: weight samples must be positive");
    dual[i] = std::pow(w.samples[i], -1.0 / (frak_p - 1.0));
  }

  const detail::LastAxisPrefix direct(w.samples, spec);
  const detail::LastAxisPrefix reciprocal(dual, spec);

  double best = 0.0;
  detail::for_each_ball(spec, family, [&](const std::array<int, 3>& center, int radius) {
    const auto ball_w = detail::ball_sum(direct, spec, center, radius);
    if (ball_w.cells == 0) return;
    const auto ball_d = detail::ball_sum(reciprocal, spec, center, radius);
    const double cells = static_cast<double>(ball_w.cells);
    const double product = (ball_w.sum / cells) *
                           std::pow(ball_d.sum / cells, frak_p - 1.0);
    if (product > best) best = product;
  });
  return best;
}

inline double ap_constant(const Weight& w, double frak_p) {
  return ap_constant(w, frak_p, BallFamily::shared_default(w.spec));
}

/// B_p constant for a power weight on the half line:
/// sup_r r^p * (int_r^inf w(t)/t^p dt) / (int_0^r w dt), evaluated in closed
/// form (the ratio is constant in r for pure powers).
inline double bp_constant(const Weight& w, double p,
                          const std::vector<double>& r_grid) {
  if (w.domain != "halfline")
    throw std::invalid_argument("bp_constant: weight must live on the half line");
  if (!(p > 0.0)) throw std::invalid_argument("bp_constant: need p > 0");
  if (r_grid.empty()) throw std::invalid_argument("bp_constant: empty radius grid");
  const double g = w.exponent;
  if (!(g < p - 1.0))
    throw std::invalid_argument(
        "bp_constant: tail integral diverges unless the exponent is below p-1");

  double best = 0.0;
  for (const double r : r_grid) {
    if (!(r > 0.0)) throw std::invalid_argument("bp_constant: radii must be > 0");
    // tail: int_r^inf c t^{g-p} dt = c r^{g-p+1} / (p - 1 - g)
    const double tail = w.constant * std::pow(r, g - p + 1.0) / (p - 1.0 - g);
    const double head = w.halfline_integral(0.0, r);
    best = std::max(best, std::pow(r, p) * tail / head);
  }
  return best;
}

inline std::vector<double> make_bp_radius_grid() {
  std::vector<double> grid;
  for (int i = -12; i <= 12; ++i) grid.push_back(std::pow(10.0, i / 4.0));
  return grid;
}

inline double bp_constant(const Weight& w, double p) {
  return bp_constant(w, p, make_bp_radius_grid());
}

}  // namespace roughcalc
