#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "roughcalc/balls.hpp"
#include "roughcalc/corpus.hpp"
#include "roughcalc/grid.hpp"
#include "roughcalc/norms.hpp"
#include "roughcalc/operators.hpp"
#include "roughcalc/orlicz.hpp"
#include "roughcalc/parallel.hpp"
#include "roughcalc/sphere.hpp"
#include "roughcalc/weights.hpp"

namespace roughcalc {

/// One admissible exponent tuple (rho, alpha, beta, p).  Admissibility:
/// n*rho/(n*rho + rho - n) <= alpha < beta < n and p > alpha; q is derived
/// as p/(1 - alpha/beta).
struct ExponentCombo {
  std::string id;
  double rho, alpha, beta, p;
};

/// Six combos spanning the admissible region for n = 2, including one within
/// 5% of the lower alpha threshold (c1: threshold 1.2 at rho = 1.5) and one
/// hitting p = alpha*n/beta, where the Sobolev-type bound collapses to the
/// classical exponent relation (c3).
inline std::vector<ExponentCombo> default_combo_grid() {
  return {
      {"c1", 1.5, 1.21, 1.7, 1.5},
      {"c2", 1.5, 1.3, 1.7, 2.0},
      {"c3", 1.5, 1.3, 1.7, 1.3 * 2.0 / 1.7},
      {"c4", 1.9, 1.3, 1.9, 1.8},
      {"c5", 1.2, 1.6, 1.9, 2.2},
      {"c6", 1.7, 1.21, 1.5, 3.0},
  };
}

struct InequalityReport {
  std::string check_id;
  std::string entry_id;
  std::string combo_id;  // empty for exponent-free checks
  std::string params_text;
  std::string params_hash;
  int dim = 2;
  int points = 0;
  double halfwidth = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool falsified = false;
  bool error = false;
  std::string error_message;
  long long sup_point = -1;
  double runtime_ms = 0.0;
  std::string net_metadata;
  std::vector<std::pair<std::string, double>> details;
};

namespace detail {

inline std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

/// Shortest round-trip decimal form (shared by CSV, JSONL, and hash inputs).
inline std::string format_double(double v) {
  return nlohmann::json(v).dump();
}

struct SupRatio {
  double value = 0.0;
  double lhs_at = 0.0;
  double rhs_at = 0.0;
  long long at = -1;
  bool falsified = false;
};

/// sup_i lhs_i / rhs_i over points with rhs_i > 0.  Points with rhs_i = 0
/// are skipped when lhs_i <= lhs_tol and flagged as falsifications
/// otherwise (a vanishing bound cannot dominate a non-vanishing quantity).
inline SupRatio pointwise_sup_ratio(const std::vector<double>& lhs,
                                    const std::vector<double>& rhs,
                                    double lhs_tol) {
  SupRatio sup;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    const double num = std::abs(lhs[i]);
    if (rhs[i] > 0.0) {
      const double r = num / rhs[i];
      if (r > sup.value) {
        sup.value = r;
        sup.lhs_at = num;
        sup.rhs_at = rhs[i];
        sup.at = static_cast<long long>(i);
      }
    } else if (num > lhs_tol) {
      sup.falsified = true;
    }
  }
  return sup;
}

/// Integral of t^{alpha/2 - 1} u(t) dt over [a, b], by trapezoid rule in
/// log t on the sampled grid (u sampled at ts), with linear interpolation of
/// the log-integrand at partial interval ends.
inline double log_grid_integral(const std::vector<double>& ts,
                                const std::vector<double>& us, double alpha,
                                double a, double b) {
  if (!(b > a) || ts.size() < 2) return 0.0;
  const double lo = std::max(a, ts.front());
  const double hi = std::min(b, ts.back());
  if (!(hi > lo)) return 0.0;
  std::vector<double> phi(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i)
    phi[i] = std::pow(ts[i], alpha / 2.0) * us[i];
  auto phi_at = [&](double t) {
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    std::size_t j = static_cast<std::size_t>(it - ts.begin());
    if (j == 0) return phi.front();
    if (j >= ts.size()) return phi.back();
    const double frac = (std::log(t) - std::log(ts[j - 1])) /
                        (std::log(ts[j]) - std::log(ts[j - 1]));
    return phi[j - 1] * (1.0 - frac) + phi[j] * frac;
  };
  double total = 0.0;
  double prev_t = lo;
  double prev_phi = phi_at(lo);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] <= lo) continue;
    if (ts[i] >= hi) break;
    total += 0.5 * (prev_phi + phi[i]) * (std::log(ts[i]) - std::log(prev_t));
    prev_t = ts[i];
    prev_phi = phi[i];
  }
  total += 0.5 * (prev_phi + phi_at(hi)) * (std::log(hi) - std::log(prev_t));
  return total;
}

}  // namespace detail

/// Per-(field, kernel, grid) cache of every expensive intermediate the
/// checks share: T and T* (one quadrature pass), powers of |grad f|, their
/// maximal functions and Riesz potentials, Morrey norms, sphere norms, and
/// the heat sweep of |f|.
class VerifyContext {
 public:
  VerifyContext(SampledField f, SphereKernel omega)
      : f_(std::move(f)),
        omega_(std::move(omega)),
        balls_(BallFamily::shared_default(f_.spec)),
        truncation_grid_(make_truncation_grid(f_.spec)),
        time_grid_(make_time_grid(f_.spec)) {
    if (!f_.has_gradient()) f_ = numeric_gradient(f_);
  }

  const SampledField& field() const { return f_; }
  const SphereKernel& kernel() const { return omega_; }
  const GridSpec& spec() const { return f_.spec; }
  const BallFamily& balls() const { return balls_; }
  const std::vector<double>& truncation_grid() const { return truncation_grid_; }
  const std::vector<double>& time_grid() const { return time_grid_; }

  std::string net_metadata() const {
    std::ostringstream out;
    out << "times=" << time_grid_.size() << ";trunc=" << truncation_grid_.size()
        << ";ball_stride=" << balls_.stride << ";ball_radii=" << balls_.radii.size();
    return out.str();
  }

  double field_l2() {
    if (!field_l2_) field_l2_ = lp_norm(f_, 2.0);
    return *field_l2_;
  }

  const SampledField& grad_mag() {
    if (!grad_mag_) {
      SampledField mag;
      mag.spec = f_.spec;
      mag.values = gradient_magnitude(f_);
      mag.support_radius = f_.support_radius;
      grad_mag_ = std::move(mag);
    }
    return *grad_mag_;
  }

  const SampledField& grad_pow(double alpha) {
    auto it = grad_pow_.find(alpha);
    if (it != grad_pow_.end()) return it->second;
    const SampledField& mag = grad_mag();
    SampledField powed;
    powed.spec = mag.spec;
    powed.values.resize(mag.values.size());
    if (alpha == 1.0) {
      powed.values = mag.values;
    } else {
      for (std::size_t i = 0; i < mag.values.size(); ++i)
        powed.values[i] = std::pow(mag.values[i], alpha);
    }
    powed.support_radius = mag.support_radius;
    return grad_pow_.emplace(alpha, std::move(powed)).first->second;
  }

  const SampledField& singular() {
    ensure_singular();
    return *singular_;
  }

  const SampledField& singular_sup() {
    ensure_singular();
    return *singular_sup_;
  }

  double sphere_norm(double rho) {
    auto it = sphere_norms_.find(rho);
    if (it != sphere_norms_.end()) return it->second;
    const double value = sphere_lp_norm(omega_, rho);
    sphere_norms_.emplace(rho, value);
    return value;
  }

  const SampledField& maximal_grad_pow(double alpha) {
    auto it = maximal_grad_.find(alpha);
    if (it != maximal_grad_.end()) return it->second;
    SampledField m = maximal_function(grad_pow(alpha), balls_);
    return maximal_grad_.emplace(alpha, std::move(m)).first->second;
  }

  const SampledField& riesz_grad_pow(double alpha) {
    auto it = riesz_grad_.find(alpha);
    if (it != riesz_grad_.end()) return it->second;
    SampledField r = riesz_potential(grad_pow(alpha), alpha);
    return riesz_grad_.emplace(alpha, std::move(r)).first->second;
  }

  /// Morrey norm of |grad f| with exponents (alpha, alpha*n/beta).
  double grad_morrey(double alpha, double beta) {
    const auto key = std::make_pair(alpha, beta);
    auto it = grad_morrey_.find(key);
    if (it != grad_morrey_.end()) return it->second;
    const double n = spec().dim;
    const double value = morrey_norm(grad_mag(), alpha, alpha * n / beta, balls_);
    grad_morrey_.emplace(key, value);
    return value;
  }

  const SampledField& abs_field() {
    if (!abs_field_) {
      SampledField a;
      a.spec = f_.spec;
      a.values.resize(f_.values.size());
      for (std::size_t i = 0; i < f_.values.size(); ++i)
        a.values[i] = std::abs(f_.values[i]);
      a.support_radius = f_.support_radius;
      abs_field_ = std::move(a);
    }
    return *abs_field_;
  }

  const HeatSweep& abs_field_sweep() {
    if (!abs_sweep_) abs_sweep_ = heat_sweep(abs_field(), time_grid_);
    return *abs_sweep_;
  }

  const SampledField& maximal_abs_field() {
    if (!maximal_abs_) maximal_abs_ = maximal_function(abs_field(), balls_);
    return *maximal_abs_;
  }

 private:
  void ensure_singular() {
    if (singular_) return;
    auto pair = singular_with_maximal(omega_, f_, truncation_grid_);
    singular_ = std::move(pair.first);
    singular_sup_ = std::move(pair.second);
  }

  SampledField f_;
  SphereKernel omega_;
  BallFamily balls_;
  std::vector<double> truncation_grid_;
  std::vector<double> time_grid_;

  std::optional<double> field_l2_;
  std::optional<SampledField> grad_mag_;
  std::map<double, SampledField> grad_pow_;
  std::optional<SampledField> singular_;
  std::optional<SampledField> singular_sup_;
  std::map<double, double> sphere_norms_;
  std::map<double, SampledField> maximal_grad_;
  std::map<double, SampledField> riesz_grad_;
  std::map<std::pair<double, double>, double> grad_morrey_;
  std::optional<SampledField> abs_field_;
  std::optional<HeatSweep> abs_sweep_;
  std::optional<SampledField> maximal_abs_;
};

namespace detail {

inline InequalityParams combo_params(const VerifyContext& ctx,
                                     const ExponentCombo& combo) {
  return make_params(ctx.spec().dim, combo.rho, combo.alpha, combo.beta, combo.p);
}

inline InequalityReport base_report(const VerifyContext& ctx,
                                    const std::string& check_id,
                                    const std::string& entry_id,
                                    const std::string& combo_id,
                                    const std::string& extra_params) {
  InequalityReport report;
  report.check_id = check_id;
  report.entry_id = entry_id;
  report.combo_id = combo_id;
  report.dim = ctx.spec().dim;
  report.points = ctx.spec().points_per_axis;
  report.halfwidth = ctx.spec().halfwidth;
  std::ostringstream params;
  params << "check=" << check_id << ";entry=" << entry_id;
  if (!combo_id.empty()) params << ";combo=" << combo_id;
  if (!extra_params.empty()) params << ";" << extra_params;
  report.params_text = params.str();
  report.params_hash = fnv1a_hex(report.params_text);
  report.net_metadata = ctx.net_metadata();
  return report;
}

inline std::string combo_params_text(const ExponentCombo& combo) {
  std::ostringstream out;
  out << "rho=" << format_double(combo.rho) << ";alpha=" << format_double(combo.alpha)
      << ";beta=" << format_double(combo.beta) << ";p=" << format_double(combo.p);
  return out.str();
}

class StopWatch {
 public:
  StopWatch() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

/// Pointwise bound: |T f|(x) <= C * ||Omega||_rho * (M_B(|grad f|^alpha)(x))^{1/alpha - 1/beta}
/// * ||grad f||_{Morrey(alpha, alpha n/beta)}^{alpha/beta}.  Reports the sup
/// over grid points of LHS/RHS.
inline InequalityReport check_pointwise_bound(VerifyContext& ctx,
                                              const std::string& entry_id,
                                              const ExponentCombo& combo) {
  detail::StopWatch watch;
  const InequalityParams params = detail::combo_params(ctx, combo);
  InequalityReport report = detail::base_report(ctx, "pointwise_bound", entry_id,
                                                combo.id,
                                                detail::combo_params_text(combo));

  const double rho_norm = ctx.sphere_norm(combo.rho);
  const double morrey = ctx.grad_morrey(combo.alpha, combo.beta);
  const SampledField& mb = ctx.maximal_grad_pow(combo.alpha);
  const SampledField& t_field = ctx.singular();
  const double e1 = 1.0 / params.alpha - 1.0 / params.beta;
  const double morrey_factor = std::pow(morrey, params.alpha / params.beta);

  std::vector<double> rhs(mb.values.size());
  for (std::size_t i = 0; i < mb.values.size(); ++i)
    rhs[i] = rho_norm * std::pow(mb.values[i], e1) * morrey_factor;

  const auto sup = detail::pointwise_sup_ratio(t_field.values, rhs,
                                               1e-8 * ctx.field_l2());
  report.lhs = sup.lhs_at;
  report.rhs = sup.rhs_at;
  report.ratio = sup.value;
  report.sup_point = sup.at;
  report.falsified = sup.falsified;
  report.details.emplace_back("sphere_norm", rho_norm);
  report.details.emplace_back("grad_morrey", morrey);
  report.runtime_ms = watch.elapsed_ms();
  return report;
}

/// Refined initial estimate: |T f| and T* f against
/// ||Omega||_rho * (I_alpha(|grad f|^alpha))^{1/alpha}, pointwise.
/// Returns one report for each left-hand side.
inline std::pair<InequalityReport, InequalityReport> check_riesz_comparison(
    VerifyContext& ctx, const std::string& entry_id, const ExponentCombo& combo) {
  detail::StopWatch watch;
  const InequalityParams params = detail::combo_params(ctx, combo);

  const double rho_norm = ctx.sphere_norm(combo.rho);
  const SampledField& riesz = ctx.riesz_grad_pow(combo.alpha);
  std::vector<double> rhs(riesz.values.size());
  for (std::size_t i = 0; i < riesz.values.size(); ++i)
    rhs[i] = rho_norm * std::pow(riesz.values[i], 1.0 / params.alpha);

  const double tol = 1e-8 * ctx.field_l2();
  auto fill = [&](InequalityReport& report, const SampledField& lhs_field) {
    const auto sup = detail::pointwise_sup_ratio(lhs_field.values, rhs, tol);
    report.lhs = sup.lhs_at;
    report.rhs = sup.rhs_at;
    report.ratio = sup.value;
    report.sup_point = sup.at;
    report.falsified = sup.falsified;
    report.details.emplace_back("sphere_norm", rho_norm);
  };

  InequalityReport limit = detail::base_report(ctx, "riesz_comparison_t", entry_id,
                                               combo.id,
                                               detail::combo_params_text(combo));
  InequalityReport sup_trunc = detail::base_report(
      ctx, "riesz_comparison_tstar", entry_id, combo.id,
      detail::combo_params_text(combo));
  fill(limit, ctx.singular());
  fill(sup_trunc, ctx.singular_sup());
  limit.runtime_ms = watch.elapsed_ms() / 2.0;
  sup_trunc.runtime_ms = limit.runtime_ms;
  return {std::move(limit), std::move(sup_trunc)};
}

/// Hedberg-type split: I_alpha(|grad f|^alpha)(x) <= C *
/// (M_B(|grad f|^alpha)(x))^{1 - alpha/beta} * ||grad f||_Morrey^{alpha^2/beta},
/// plus the two time-integral branches at five sampled points.
inline InequalityReport check_hedberg_split(VerifyContext& ctx,
                                            const std::string& entry_id,
                                            const ExponentCombo& combo) {
  detail::StopWatch watch;
  const InequalityParams params = detail::combo_params(ctx, combo);
  InequalityReport report = detail::base_report(ctx, "hedberg_split", entry_id,
                                                combo.id,
                                                detail::combo_params_text(combo));

  const double alpha = params.alpha, beta = params.beta;
  const double morrey = ctx.grad_morrey(alpha, beta);
  const SampledField& riesz = ctx.riesz_grad_pow(alpha);
  const SampledField& mb = ctx.maximal_grad_pow(alpha);
  const double morrey_alpha = std::pow(morrey, alpha);
  const double morrey_factor = std::pow(morrey, alpha * alpha / beta);

  std::vector<double> rhs(mb.values.size());
  for (std::size_t i = 0; i < mb.values.size(); ++i)
    rhs[i] = std::pow(mb.values[i], 1.0 - alpha / beta) * morrey_factor;

  const auto sup = detail::pointwise_sup_ratio(riesz.values, rhs,
                                               1e-8 * ctx.field_l2());
  report.lhs = sup.lhs_at;
  report.rhs = sup.rhs_at;
  report.ratio = sup.value;
  report.sup_point = sup.at;
  report.falsified = sup.falsified;

  // Branch checks at five deterministic sample points: split the heat
  // representation of I_alpha at T = (||grad f||_Morrey^alpha / M_B(x))^{2/beta};
  // the head must обey a T^{alpha/2} M_B(x) bound, the tail a
  // T^{(alpha-beta)/2} Morrey bound.  Completions beyond the time net use the
  // continuity of h_t*g at 0 and the |g|_{L^1} (4 pi t)^{-n/2} envelope.
  const SampledField& g = ctx.grad_pow(alpha);
  if (morrey_alpha > 0.0) {
    const auto& times = ctx.time_grid();
    std::vector<std::size_t> pts;
    {
      std::size_t arg_g = 0, arg_m = 0;
      for (std::size_t i = 1; i < g.values.size(); ++i) {
        if (g.values[i] > g.values[arg_g]) arg_g = i;
        if (mb.values[i] > mb.values[arg_m]) arg_m = i;
      }
      const std::size_t total = g.values.size();
      for (const std::size_t cand :
           {arg_g, arg_m, total / 2, total / 3, (2 * total) / 3})
        if (std::find(pts.begin(), pts.end(), cand) == pts.end())
          pts.push_back(cand);
    }
    const auto samples = heat_at_points(g, times, pts);
    const double n = ctx.spec().dim;
    double mass = 0.0;
    for (const double v : g.values) mass += v;
    mass *= ctx.spec().cell_measure();
    const double envelope = mass / std::pow(4.0 * std::numbers::pi, n / 2.0) *
                            2.0 / (n - alpha);
    auto tail_integral = [&](double from) {
      // int_from^inf t^{alpha/2-1} * mass * (4 pi t)^{-n/2} dt
      return envelope * std::pow(from, (alpha - n) / 2.0);
    };

    double branch_head_max = 0.0, branch_tail_max = 0.0;
    for (std::size_t pi = 0; pi < pts.size(); ++pi) {
      const double mb_at = mb.values[pts[pi]];
      if (!(mb_at > 0.0)) continue;
      const double split = std::pow(morrey_alpha / mb_at, 2.0 / beta);
      std::vector<double> us(times.size());
      for (std::size_t ti = 0; ti < times.size(); ++ti) us[ti] = samples[ti][pi];

      double head = detail::log_grid_integral(times, us, alpha, times.front(),
                                              split);
      // below the net: h_t*g(x) is continuous down to t = 0
      head += us.front() * (2.0 / alpha) *
              std::pow(std::min(split, times.front()), alpha / 2.0);
      if (split > times.back()) head += tail_integral(times.back()) -
                                        tail_integral(split);
      double tail = detail::log_grid_integral(times, us, alpha, split,
                                              times.back());
      tail += tail_integral(std::max(split, times.back()));

      const double head_bound = std::pow(split, alpha / 2.0) * mb_at;
      const double tail_bound = std::pow(split, (alpha - beta) / 2.0) * morrey_alpha;
      branch_head_max = std::max(branch_head_max, head / head_bound);
      branch_tail_max = std::max(branch_tail_max, tail / tail_bound);
    }
    report.details.emplace_back("branch_head_ratio", branch_head_max);
    report.details.emplace_back("branch_tail_ratio", branch_tail_max);
  }
  report.details.emplace_back("grad_morrey", morrey);
  report.runtime_ms = watch.elapsed_ms();
  return report;
}

/// Sobolev-type bound: ||T f||_q <= C ||Omega||_rho * ||grad f||_Morrey^{alpha/beta}
/// * ||grad f||_p^{1 - alpha/beta}, q = p/(1 - alpha/beta).
inline InequalityReport check_sobolev_inequality(VerifyContext& ctx,
                                                 const std::string& entry_id,
                                                 const ExponentCombo& combo) {
  detail::StopWatch watch;
  const InequalityParams params = detail::combo_params(ctx, combo);
  InequalityReport report = detail::base_report(ctx, "sobolev_inequality",
                                                entry_id, combo.id,
                                                detail::combo_params_text(combo));

  const double rho_norm = ctx.sphere_norm(combo.rho);
  const double morrey = ctx.grad_morrey(params.alpha, params.beta);
  const double grad_p = lp_norm(ctx.grad_mag(), params.p);
  const double exponent = 1.0 - params.alpha / params.beta;

  report.lhs = lp_norm(ctx.singular(), params.q);
  report.rhs = rho_norm * std::pow(morrey, params.alpha / params.beta) *
               std::pow(grad_p, exponent);
  if (report.rhs > 0.0) {
    report.ratio = report.lhs / report.rhs;
  } else if (report.lhs > 1e-8 * ctx.field_l2()) {
    report.falsified = true;
  }
  if (params.sobolev_special_case && rho_norm > 0.0 && grad_p > 0.0)
    report.details.emplace_back("classical_sobolev_ratio",
                                report.lhs / (rho_norm * grad_p));
  report.details.emplace_back("q", params.q);
  report.details.emplace_back("grad_lp", grad_p);
  report.runtime_ms = watch.elapsed_ms();
  return report;
}

/// Weighted variant of the Sobolev-type bound with w in A_{p/alpha};
/// the weight is screened by requiring its A_{p/alpha} constant to be stable
/// under ball-family refinement.
inline InequalityReport check_weighted_inequality(VerifyContext& ctx,
                                                  const std::string& entry_id,
                                                  const ExponentCombo& combo,
                                                  const Weight& w,
                                                  const std::string& weight_id) {
  detail::StopWatch watch;
  const InequalityParams params = detail::combo_params(ctx, combo);
  InequalityReport report = detail::base_report(
      ctx, "weighted_inequality", entry_id, combo.id,
      detail::combo_params_text(combo) + ";weight=" + weight_id);

  const double frak_p = params.p / params.alpha;
  const double ap = ap_constant(w, frak_p, ctx.balls());
  const double ap_refined = ap_constant(w, frak_p, ctx.balls().refined());
  if (ap_refined > 1.5 * ap)
    throw std::invalid_argument(
        "weighted_inequality: weight fails the A_p refinement-stability "
        "screen (constant grew by more than 50%)");

  const double rho_norm = ctx.sphere_norm(combo.rho);
  const double morrey = ctx.grad_morrey(params.alpha, params.beta);
  const double exponent = 1.0 - params.alpha / params.beta;
  report.lhs = weighted_lp_norm(ctx.singular(), w, params.q);
  report.rhs = rho_norm * std::pow(morrey, params.alpha / params.beta) *
               std::pow(weighted_lp_norm(ctx.grad_mag(), w, params.p), exponent);
  if (report.rhs > 0.0) {
    report.ratio = report.lhs / report.rhs;
  } else if (report.lhs > 1e-8 * ctx.field_l2()) {
    report.falsified = true;
  }
  report.details.emplace_back("ap_constant", ap);
  report.details.emplace_back("ap_refined", ap_refined);
  report.runtime_ms = watch.elapsed_ms();
  return report;
}

/// Orlicz variant: ||T f||_{L^A} <= C ||Omega||_rho * ||grad f||_Morrey^{alpha/beta}
/// * ||grad f||_{L^{A_{1-alpha/beta}}}^{1-alpha/beta}; requires the rescaling
/// A_{1/alpha-1/beta} to satisfy the growth condition A(r) <= A(Cr)/(2C).
inline InequalityReport check_orlicz_inequality(VerifyContext& ctx,
                                                const std::string& entry_id,
                                                const ExponentCombo& combo,
                                                const YoungFunction& A,
                                                const std::string& young_id) {
  detail::StopWatch watch;
  const InequalityParams params = detail::combo_params(ctx, combo);
  InequalityReport report = detail::base_report(
      ctx, "orlicz_inequality", entry_id, combo.id,
      detail::combo_params_text(combo) + ";young=" + young_id);

  const double sigma_screen = 1.0 / params.alpha - 1.0 / params.beta;
  const YoungFunction screened = rescaled_young(A, sigma_screen);
  const double growth_c = growth_condition_constant(screened);
  if (growth_c == 0.0)
    throw std::invalid_argument(
        "orlicz_inequality: rescaled Young function fails the growth "
        "condition screen");

  const double exponent = 1.0 - params.alpha / params.beta;
  const YoungFunction rhs_young = rescaled_young(A, exponent);
  const double rho_norm = ctx.sphere_norm(combo.rho);
  const double morrey = ctx.grad_morrey(params.alpha, params.beta);
  report.lhs = luxemburg_norm(ctx.singular(), A);
  report.rhs = rho_norm * std::pow(morrey, params.alpha / params.beta) *
               std::pow(luxemburg_norm(ctx.grad_mag(), rhs_young), exponent);
  if (report.rhs > 0.0) {
    report.ratio = report.lhs / report.rhs;
  } else if (report.lhs > 1e-8 * ctx.field_l2()) {
    report.falsified = true;
  }
  report.details.emplace_back("growth_constant", growth_c);
  report.runtime_ms = watch.elapsed_ms();
  return report;
}

/// Lorentz variant: ||T f||_{Lambda^q(w)} <= C ||Omega||_rho *
/// ||grad f||_Morrey^{alpha/beta} * ||grad f||_{Lambda^p(w)}^{1-alpha/beta}
/// with w in B_{p/alpha} on the half line.
inline InequalityReport check_lorentz_inequality(VerifyContext& ctx,
                                                 const std::string& entry_id,
                                                 const ExponentCombo& combo,
                                                 const Weight& w,
                                                 const std::string& weight_id) {
  detail::StopWatch watch;
  const InequalityParams params = detail::combo_params(ctx, combo);
  InequalityReport report = detail::base_report(
      ctx, "lorentz_inequality", entry_id, combo.id,
      detail::combo_params_text(combo) + ";weight=" + weight_id);

  const double bp = bp_constant(w, params.p / params.alpha);
  const double rho_norm = ctx.sphere_norm(combo.rho);
  const double morrey = ctx.grad_morrey(params.alpha, params.beta);
  const double exponent = 1.0 - params.alpha / params.beta;
  report.lhs = classical_lorentz_norm(ctx.singular(), params.q, w);
  report.rhs = rho_norm * std::pow(morrey, params.alpha / params.beta) *
               std::pow(classical_lorentz_norm(ctx.grad_mag(), params.p, w),
                        exponent);
  if (report.rhs > 0.0) {
    report.ratio = report.lhs / report.rhs;
  } else if (report.lhs > 1e-8 * ctx.field_l2()) {
    report.falsified = true;
  }
  report.details.emplace_back("bp_constant", bp);
  report.runtime_ms = watch.elapsed_ms();
  return report;
}

/// Poincare-Sobolev: for balls inside the support ball,
/// (avg_B |f - f_B|^q)^{1/q} <= C r (avg_B |grad f|^alpha)^{1/alpha},
/// 1 <= alpha < n, q <= n*alpha/(n - alpha).  Reports the sup ratio over the
/// family; sup_point is the flat index of the attaining ball's center.
inline InequalityReport check_poincare_sobolev(const SampledField& f,
                                               const std::string& entry_id,
                                               const BallFamily& family,
                                               double alpha, double q) {
  detail::StopWatch watch;
  const GridSpec& spec = f.spec;
  const double n = spec.dim;
  if (!(1.0 <= alpha && alpha < n))
    throw std::invalid_argument("poincare_sobolev: need 1 <= alpha < n");
  if (!(1.0 <= q && q <= n * alpha / (n - alpha) + 1e-12))
    throw std::invalid_argument("poincare_sobolev: q beyond n*alpha/(n-alpha)");
  if (!f.support_radius)
    throw std::invalid_argument("poincare_sobolev: field needs a support radius");

  const std::vector<double> mag = gradient_magnitude(f);
  std::vector<double> gpow(mag.size());
  for (std::size_t i = 0; i < mag.size(); ++i)
    gpow[i] = std::pow(mag[i], alpha);

  const detail::LastAxisPrefix f_prefix(f.values, spec);
  const detail::LastAxisPrefix g_prefix(gpow, spec);
  const double h = spec.spacing();
  const int n_axis = spec.points_per_axis;

  // Collect the in-support balls first so the per-ball work can run in
  // parallel with a deterministic final reduction.
  std::vector<std::pair<std::array<int, 3>, int>> in_support;
  detail::for_each_ball(spec, family, [&](const std::array<int, 3>& c, int radius) {
    double norm2 = 0.0;
    for (int d = 0; d < spec.dim; ++d) {
      const double x = spec.coord(c[d]);
      norm2 += x * x;
    }
    if (std::sqrt(norm2) + radius * h <= *f.support_radius)
      in_support.emplace_back(c, radius);
  });

  std::vector<double> lhs_vals(in_support.size(), 0.0);
  std::vector<double> rhs_vals(in_support.size(), 0.0);
  parallel_for(in_support.size(), [&](std::size_t bi) {
    const auto& [c, radius] = in_support[bi];
    const auto fb = detail::ball_sum(f_prefix, spec, c, radius);
    const auto gb = detail::ball_sum(g_prefix, spec, c, radius);
    if (fb.cells == 0) return;
    const double mean = fb.sum / static_cast<double>(fb.cells);
    double dev = 0.0;
    if (spec.dim == 2) {
      for (int da = -radius; da <= radius; ++da) {
        const int a = c[0] + da;
        if (a < 0 || a >= n_axis) continue;
        const int w = detail::disk_half_width(radius, da);
        const int blo = std::max(0, c[1] - w);
        const int bhi = std::min(n_axis - 1, c[1] + w);
        const double* row = f.values.data() + static_cast<std::size_t>(a) * n_axis;
        for (int b = blo; b <= bhi; ++b)
          dev += std::pow(std::abs(row[b] - mean), q);
      }
    } else {
      for (int da = -radius; da <= radius; ++da) {
        const int a = c[0] + da;
        if (a < 0 || a >= n_axis) continue;
        for (int db = -radius; db <= radius; ++db) {
          const int b = c[1] + db;
          if (b < 0 || b >= n_axis) continue;
          const long long rem = static_cast<long long>(radius) * radius -
                                static_cast<long long>(da) * da -
                                static_cast<long long>(db) * db;
          if (rem < 0) continue;
          const int w = static_cast<int>(std::floor(std::sqrt(
              static_cast<double>(rem))));
          const int clo = std::max(0, c[2] - w);
          const int chi = std::min(n_axis - 1, c[2] + w);
          const double* row = f.values.data() +
                              (static_cast<std::size_t>(a) * n_axis + b) * n_axis;
          for (int cc = clo; cc <= chi; ++cc)
            dev += std::pow(std::abs(row[cc] - mean), q);
        }
      }
    }
    lhs_vals[bi] = std::pow(dev / static_cast<double>(fb.cells), 1.0 / q);
    rhs_vals[bi] = radius * h *
                   std::pow(gb.sum / static_cast<double>(gb.cells), 1.0 / alpha);
  });

  InequalityReport report;
  report.check_id = "poincare_sobolev";
  report.entry_id = entry_id;
  std::ostringstream combo;
  combo << "alpha" << detail::format_double(alpha);
  report.combo_id = combo.str();
  report.dim = spec.dim;
  report.points = spec.points_per_axis;
  report.halfwidth = spec.halfwidth;
  std::ostringstream params;
  params << "check=poincare_sobolev;entry=" << entry_id
         << ";alpha=" << detail::format_double(alpha)
         << ";q=" << detail::format_double(q);
  report.params_text = params.str();
  report.params_hash = detail::fnv1a_hex(report.params_text);

  double peak = 0.0;
  for (const double v : f.values) peak = std::max(peak, std::abs(v));
  const double tol = 1e-10 * peak;
  for (std::size_t bi = 0; bi < in_support.size(); ++bi) {
    if (rhs_vals[bi] > 0.0) {
      const double r = lhs_vals[bi] / rhs_vals[bi];
      if (r > report.ratio) {
        report.ratio = r;
        report.lhs = lhs_vals[bi];
        report.rhs = rhs_vals[bi];
        report.sup_point =
            static_cast<long long>(f.spec.flatten(in_support[bi].first));
      }
    } else if (lhs_vals[bi] > tol) {
      report.falsified = true;
    }
  }
  report.details.emplace_back("balls_tested", static_cast<double>(in_support.size()));
  report.details.emplace_back("q", q);
  report.runtime_ms = watch.elapsed_ms();
  return report;
}

/// Besov-Morrey equivalence for positive fields: the thermic Besov norm of
/// order s and the Morrey norm with exponents (1, n/s) must stay within a
/// bounded factor of each other.  Reports besov/morrey with the reciprocal
/// in the details.
inline InequalityReport check_besov_morrey(const SampledField& g,
                                           const std::string& entry_id, double s,
                                           const BallFamily& family,
                                           const HeatSweep* sweep = nullptr) {
  detail::StopWatch watch;
  const GridSpec& spec = g.spec;
  const double n = spec.dim;
  if (!(s > 0.0 && s <= n))
    throw std::invalid_argument("besov_morrey: need 0 < s <= n");
  for (const double v : g.values)
    if (v < 0.0)
      throw std::invalid_argument("besov_morrey: field must be nonnegative");

  InequalityReport report;
  report.check_id = "besov_morrey";
  report.entry_id = entry_id;
  std::ostringstream combo;
  combo << "s" << detail::format_double(s);
  report.combo_id = combo.str();
  report.dim = spec.dim;
  report.points = spec.points_per_axis;
  report.halfwidth = spec.halfwidth;
  std::ostringstream params;
  params << "check=besov_morrey;entry=" << entry_id
         << ";s=" << detail::format_double(s);
  report.params_text = params.str();
  report.params_hash = detail::fnv1a_hex(report.params_text);

  double besov;
  if (sweep != nullptr) {
    besov = besov_from_sweep(*sweep, s);
  } else {
    besov = besov_thermic_norm(g, s, make_time_grid(spec));
  }
  const double morrey = morrey_norm(g, 1.0, n / s, family);
  report.lhs = besov;
  report.rhs = morrey;
  if (besov > 0.0 && morrey > 0.0) {
    report.ratio = besov / morrey;
    report.details.emplace_back("reciprocal", morrey / besov);
  }
  report.runtime_ms = watch.elapsed_ms();
  return report;
}

/// Heat-semigroup domination: sup over the time net of |h_t * g|(x) must be
/// controlled by M_B g(x) pointwise; reports the sup ratio over the grid.
inline InequalityReport check_maximal_domination(VerifyContext& ctx,
                                                 const std::string& entry_id) {
  detail::StopWatch watch;
  InequalityReport report = detail::base_report(ctx, "maximal_domination",
                                                entry_id, "", "");
  const HeatSweep& sweep = ctx.abs_field_sweep();
  const SampledField& mb = ctx.maximal_abs_field();
  const auto sup = detail::pointwise_sup_ratio(sweep.sup_field.values, mb.values,
                                               1e-8 * ctx.field_l2());
  report.lhs = sup.lhs_at;
  report.rhs = sup.rhs_at;
  report.ratio = sup.value;
  report.sup_point = sup.at;
  report.falsified = sup.falsified;
  report.runtime_ms = watch.elapsed_ms();
  return report;
}

inline const std::vector<std::string>& all_check_ids() {
  static const std::vector<std::string> ids = {
      "pointwise_bound",    "riesz_comparison",  "hedberg_split",
      "sobolev_inequality", "weighted_inequality", "orlicz_inequality",
      "lorentz_inequality", "poincare_sobolev",  "besov_morrey",
      "maximal_domination",
  };
  return ids;
}

struct SuiteConfig {
  std::vector<std::string> checks = all_check_ids();
  std::vector<int> levels = {128, 256};
  std::uint64_t seed = 0;
};

struct SuiteResult {
  std::vector<InequalityReport> reports;
  bool any_falsified = false;
  bool any_nonfinite = false;
  bool any_drift_failure = false;
  bool any_error = false;
  std::vector<std::string> failures;

  bool pass() const {
    return !any_falsified && !any_nonfinite && !any_drift_failure && !any_error;
  }
};

namespace detail {

inline void append_error_report(SuiteResult& result, const VerifyContext& ctx,
                                const std::string& check_id,
                                const std::string& entry_id,
                                const std::string& combo_id,
                                const std::string& message) {
  InequalityReport report = base_report(ctx, check_id, entry_id, combo_id, "");
  report.error = true;
  report.error_message = message;
  result.any_error = true;
  result.failures.push_back(check_id + "/" + entry_id +
                            (combo_id.empty() ? "" : "/" + combo_id) + ": " +
                            message);
  result.reports.push_back(std::move(report));
}

/// The per-combo weight exponent for the weighted check: |x|^a stays inside
/// the A_{p/alpha} class when -n < a < n(p/alpha - 1); take the midpoint of
/// [0, n(p/alpha-1)] capped at 1/2.
inline double weighted_check_exponent(const GridSpec& spec, double p, double alpha) {
  return std::min(0.5, spec.dim * (p / alpha - 1.0) / 2.0);
}

}  // namespace detail

/// Runs the requested checks over every corpus entry at every level.
/// Reports are emitted in deterministic (entry, level, check, combo) order;
/// drift between consecutive levels of the same (check, params) group must
/// stay within a factor of 2.
inline SuiteResult run_suite(const Corpus& corpus, const SuiteConfig& config) {
  SuiteResult result;
  const auto combos = default_combo_grid();

  auto enabled = [&](const std::string& id) {
    return std::find(config.checks.begin(), config.checks.end(), id) !=
           config.checks.end();
  };
  for (const std::string& id : config.checks)
    if (std::find(all_check_ids().begin(), all_check_ids().end(), id) ==
        all_check_ids().end())
      throw std::invalid_argument("run_suite: unknown check id: " + id);

  for (const CorpusEntry& entry : corpus.entries) {
    const SphereKernel omega = realize_kernel(entry);
    for (const int level : config.levels) {
      VerifyContext ctx(realize_field(entry, level), omega);

      auto guarded = [&](const std::string& check_id, const std::string& combo_id,
                         auto&& body) {
        try {
          body();
        } catch (const std::exception& e) {
          detail::append_error_report(result, ctx, check_id, entry.id, combo_id,
                                      e.what());
        }
      };

      if (enabled("pointwise_bound"))
        for (const auto& combo : combos)
          guarded("pointwise_bound", combo.id, [&] {
            result.reports.push_back(check_pointwise_bound(ctx, entry.id, combo));
          });
      if (enabled("riesz_comparison"))
        for (const auto& combo : combos)
          guarded("riesz_comparison", combo.id, [&] {
            auto pair = check_riesz_comparison(ctx, entry.id, combo);
            result.reports.push_back(std::move(pair.first));
            result.reports.push_back(std::move(pair.second));
          });
      if (enabled("hedberg_split"))
        for (const auto& combo : combos)
          guarded("hedberg_split", combo.id, [&] {
            result.reports.push_back(check_hedberg_split(ctx, entry.id, combo));
          });
      if (enabled("sobolev_inequality"))
        for (const auto& combo : combos)
          guarded("sobolev_inequality", combo.id, [&] {
            result.reports.push_back(
                check_sobolev_inequality(ctx, entry.id, combo));
          });
      if (enabled("weighted_inequality"))
        for (const auto& combo : combos)
          guarded("weighted_inequality", combo.id, [&] {
            const double a = detail::weighted_check_exponent(
                ctx.spec(), combo.p, combo.alpha);
            const Weight w = make_power_weight(ctx.spec(), a);
            std::ostringstream wid;
            wid << "pow" << detail::format_double(a);
            result.reports.push_back(
                check_weighted_inequality(ctx, entry.id, combo, w, wid.str()));
          });
      if (enabled("orlicz_inequality"))
        for (const auto& combo : combos)
          guarded("orlicz_inequality", combo.id, [&] {
            const InequalityParams params = detail::combo_params(ctx, combo);
            const YoungFunction A = make_power_log_young(params.q);
            result.reports.push_back(check_orlicz_inequality(
                ctx, entry.id, combo, A, "powerlog"));
          });
      if (enabled("lorentz_inequality"))
        for (const auto& combo : combos)
          guarded("lorentz_inequality", combo.id, [&] {
            const double gamma = (combo.p / combo.alpha - 1.0) / 2.0;
            const Weight w = make_halfline_weight(1.0, gamma);
            std::ostringstream wid;
            wid << "t^" << detail::format_double(gamma);
            result.reports.push_back(
                check_lorentz_inequality(ctx, entry.id, combo, w, wid.str()));
          });
      if (enabled("poincare_sobolev"))
        for (const double alpha : {1.0, 1.3, 1.5})
          guarded("poincare_sobolev", "", [&] {
            const double n = ctx.spec().dim;
            const double q = n * alpha / (n - alpha);
            result.reports.push_back(check_poincare_sobolev(
                ctx.field(), entry.id, ctx.balls(), alpha, q));
          });
      if (enabled("besov_morrey"))
        for (const double s : {0.8, 1.5})
          guarded("besov_morrey", "", [&] {
            result.reports.push_back(check_besov_morrey(
                ctx.abs_field(), entry.id, s, ctx.balls(),
                &ctx.abs_field_sweep()));
          });
      if (enabled("maximal_domination"))
        guarded("maximal_domination", "", [&] {
          result.reports.push_back(check_maximal_domination(ctx, entry.id));
        });
    }
  }

  // Finiteness and falsification flags.
  for (const InequalityReport& report : result.reports) {
    if (report.error) continue;
    if (!std::isfinite(report.lhs) || !std::isfinite(report.rhs) ||
        !std::isfinite(report.ratio)) {
      result.any_nonfinite = true;
      result.failures.push_back(report.check_id + "/" + report.entry_id +
                                ": non-finite value");
    }
    if (report.falsified) {
      result.any_falsified = true;
      result.failures.push_back(report.check_id + "/" + report.entry_id +
                                ": falsification point (RHS = 0, LHS > tol)");
    }
  }

  // Refinement drift: for each (check, params) group, the ratio at each
  // successive level must stay within a factor of 2 of the previous level.
  std::map<std::string, std::vector<std::pair<int, double>>> groups;
  for (const InequalityReport& report : result.reports) {
    if (report.error) continue;
    groups[report.check_id + "|" + report.params_hash].emplace_back(
        report.points, report.ratio);
  }
  for (const auto& [key, levels] : groups) {
    for (std::size_t i = 1; i < levels.size(); ++i) {
      const double r0 = levels[i - 1].second;
      const double r1 = levels[i].second;
      if (r0 <= 1e-12 && r1 <= 1e-12) continue;  // zero-kernel rows: skip
      const bool bad =
          r0 <= 1e-12 || r1 <= 1e-12 || r1 / r0 > 2.0 || r1 / r0 < 0.5;
      if (bad) {
        result.any_drift_failure = true;
        std::ostringstream msg;
        msg << key << ": ratio drift " << r0 << " -> " << r1 << " (N "
            << levels[i - 1].first << " -> " << levels[i].first << ")";
        result.failures.push_back(msg.str());
      }
    }
  }
  return result;
}

/// CSV summary.  runtime_ms is written as 0 so that reruns and different
/// thread counts produce byte-identical files; wall-clock timings live in
/// the JSON-lines report.
inline std::string suite_csv(const SuiteResult& result) {
  std::ostringstream out;
  out << "check_id,params-hash,N,lhs,rhs,ratio,runtime_ms\n";
  for (const InequalityReport& r : result.reports) {
    out << r.check_id << "," << r.params_hash << "," << r.points << ","
        << detail::format_double(r.lhs) << "," << detail::format_double(r.rhs)
        << "," << detail::format_double(r.ratio) << ",0\n";
  }
  return out.str();
}

inline std::string report_to_json_line(const InequalityReport& r) {
  nlohmann::ordered_json j;
  j["check_id"] = r.check_id;
  j["entry_id"] = r.entry_id;
  if (!r.combo_id.empty()) j["combo_id"] = r.combo_id;
  j["params"] = r.params_text;
  j["params_hash"] = r.params_hash;
  j["dim"] = r.dim;
  j["N"] = r.points;
  j["halfwidth"] = r.halfwidth;
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["ratio"] = r.ratio;
  j["falsified"] = r.falsified;
  if (r.error) {
    j["error"] = true;
    j["error_message"] = r.error_message;
  }
  if (r.sup_point >= 0) j["sup_point"] = r.sup_point;
  j["runtime_ms"] = r.runtime_ms;
  if (!r.net_metadata.empty()) j["nets"] = r.net_metadata;
  if (!r.details.empty()) {
    nlohmann::ordered_json d;
    for (const auto& [key, value] : r.details) d[key] = value;
    j["details"] = d;
  }
  return j.dump();
}

inline std::string suite_json_lines(const SuiteResult& result) {
  std::ostringstream out;
  for (const InequalityReport& r : result.reports)
    out << report_to_json_line(r) << "\n";
  return out.str();
}

/// Ratio-vs-N table for one check: columns N, ratio, drift (drift blank on
/// each group's first level, "skip" when both ratios vanish).
inline std::string convergence_csv(const SuiteResult& result) {
  std::ostringstream out;
  out << "check_id,params-hash,entry,combo,N,ratio,drift\n";
  std::map<std::string, double> last_ratio;
  for (const InequalityReport& r : result.reports) {
    if (r.error) continue;
    const std::string key = r.check_id + "|" + r.params_hash;
    out << r.check_id << "," << r.params_hash << "," << r.entry_id << ","
        << r.combo_id << "," << r.points << "," << detail::format_double(r.ratio)
        << ",";
    const auto it = last_ratio.find(key);
    if (it == last_ratio.end()) {
      out << "";
    } else if (it->second <= 1e-12 && r.ratio <= 1e-12) {
      out << "skip";
    } else if (it->second <= 1e-12) {
      out << "inf";
    } else {
      out << detail::format_double(r.ratio / it->second);
    }
    out << "\n";
    last_ratio[key] = r.ratio;
  }
  return out.str();
}

}  // namespace roughcalc
