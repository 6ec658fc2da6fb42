#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <sstream>
#include <string>

#include "roughcalc/corpus.hpp"
#include "roughcalc/parallel.hpp"
#include "roughcalc/verify.hpp"

using namespace roughcalc;

namespace {

struct ThreadGuard {
  ~ThreadGuard() { set_threads(0); }
};

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (const char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("the tiny corpus passes every check across a refinement step") {
  SuiteConfig cfg;
  cfg.levels = {32, 64};
  const SuiteResult result = run_suite(make_preset("tiny"), cfg);

  REQUIRE(result.pass());
  REQUIRE(result.failures.empty());
  // Per entry and level: 6 combos x (pointwise + 2 Riesz comparisons +
  // Hedberg + Lebesgue + weighted + Orlicz + Lorentz) + 3 Poincare exponents
  // + 2 Besov smoothness values + 1 maximal domination = 54.
  REQUIRE(result.reports.size() == 3u * 2u * 54u);

  std::set<std::string> seen;
  for (const InequalityReport& r : result.reports) {
    REQUIRE_FALSE(r.error);
    REQUIRE_FALSE(r.falsified);
    REQUIRE(std::isfinite(r.ratio));
    REQUIRE(r.ratio >= 0.0);
    REQUIRE(r.params_hash.size() == 16);
    seen.insert(r.check_id);
  }
  // The refined-estimate check reports its two left-hand sides separately.
  for (const std::string& id : all_check_ids()) {
    if (id == "riesz_comparison") {
      REQUIRE(seen.count("riesz_comparison_t") == 1);
      REQUIRE(seen.count("riesz_comparison_tstar") == 1);
    } else {
      REQUIRE(seen.count(id) == 1);
    }
  }

  // The Poincare sweep runs its full exponent ladder at every level.
  std::set<std::string> poincare_combos;
  for (const InequalityReport& r : result.reports)
    if (r.check_id == "poincare_sobolev") poincare_combos.insert(r.combo_id);
  REQUIRE(poincare_combos ==
          std::set<std::string>{"alpha1.0", "alpha1.3", "alpha1.5"});

  // Tabular outputs cover one row per report (plus headers); the refinement
  // table fills its drift column from the second level on.
  const std::string csv = suite_csv(result);
  REQUIRE(count_lines(csv) == result.reports.size() + 1);
  const std::string conv = convergence_csv(result);
  REQUIRE(count_lines(conv) == result.reports.size() + 1);

  std::istringstream lines(conv);
  std::string line;
  std::getline(lines, line);  // header
  std::size_t with_drift = 0;
  while (std::getline(lines, line)) {
    const std::string tail = line.substr(line.rfind(',') + 1);
    if (!tail.empty()) {
      ++with_drift;
      if (tail != "skip" && tail != "inf") {
        const double drift = std::stod(tail);
        REQUIRE(drift >= 0.5);
        REQUIRE(drift <= 2.0);
      }
    }
  }
  // One drift value per (check, params) group: half of all rows.
  REQUIRE(with_drift == result.reports.size() / 2);
}

TEST_CASE("report ratios are invariant under rescaling field and kernel") {
  const CorpusEntry base = make_preset("tiny").entries.front();
  CorpusEntry scaled = base;
  for (BumpSpec& b : scaled.bumps) b.amplitude *= 2.7;

  const SphereKernel omega = realize_kernel(base);
  VerifyContext ctx(realize_field(base, 32), omega);
  VerifyContext ctx2(realize_field(scaled, 32), scale_kernel(omega, 3.0));

  const ExponentCombo combo = default_combo_grid()[1];
  const auto match = [](const InequalityReport& a, const InequalityReport& b) {
    REQUIRE(std::isfinite(a.ratio));
    REQUIRE(a.ratio > 0.0);
    REQUIRE(b.ratio == Catch::Approx(a.ratio).epsilon(1e-10));
  };

  match(check_pointwise_bound(ctx, "b", combo),
        check_pointwise_bound(ctx2, "s", combo));
  match(check_sobolev_inequality(ctx, "b", combo),
        check_sobolev_inequality(ctx2, "s", combo));
  match(check_maximal_domination(ctx, "b"), check_maximal_domination(ctx2, "s"));

  const auto riesz = check_riesz_comparison(ctx, "b", combo);
  const auto riesz2 = check_riesz_comparison(ctx2, "s", combo);
  match(riesz.first, riesz2.first);
  match(riesz.second, riesz2.second);
}

TEST_CASE("degenerate parameters reduce the refined bounds to the Lebesgue one") {
  const CorpusEntry entry = make_preset("tiny").entries.front();
  VerifyContext ctx(realize_field(entry, 32), realize_kernel(entry));
  const ExponentCombo combo = default_combo_grid()[1];

  const InequalityReport lebesgue = check_sobolev_inequality(ctx, "e", combo);
  REQUIRE(std::isfinite(lebesgue.ratio));
  REQUIRE(lebesgue.ratio > 0.0);

  // Unit weight: the weighted norms coincide with the unweighted ones.
  const Weight unit = make_const_weight(ctx.spec(), 1.0);
  const InequalityReport weighted =
      check_weighted_inequality(ctx, "e", combo, unit, "unit");
  REQUIRE(weighted.ratio == Catch::Approx(lebesgue.ratio).epsilon(1e-10));

  // Pure power Young function: Luxemburg norms coincide with Lebesgue norms.
  double q = 0.0;
  for (const auto& kv : lebesgue.details)
    if (kv.first == "q") q = kv.second;
  REQUIRE(q > 0.0);
  const InequalityReport orlicz =
      check_orlicz_inequality(ctx, "e", combo, make_power_young(q), "power");
  REQUIRE(orlicz.ratio == Catch::Approx(lebesgue.ratio).epsilon(1e-6));

  // Unit half-line weight: the Lorentz functional is the Lebesgue norm.
  const InequalityReport lorentz = check_lorentz_inequality(
      ctx, "e", combo, make_halfline_weight(1.0, 0.0), "unit");
  REQUIRE(lorentz.ratio == Catch::Approx(lebesgue.ratio).epsilon(1e-10));
}

TEST_CASE("suite configuration is validated") {
  SuiteConfig bad;
  bad.checks = {"sobolev_inequality", "not_a_check"};
  bad.levels = {32};
  REQUIRE_THROWS_AS(run_suite(make_preset("tiny"), bad), std::invalid_argument);
}

TEST_CASE("summary tables are byte-identical across thread counts") {
  ThreadGuard guard;

  Corpus one;
  one.name = "sub";
  one.seed = 7;
  one.entries = {make_preset("tiny").entries.front()};

  SuiteConfig cfg;
  cfg.checks = {"pointwise_bound", "sobolev_inequality", "maximal_domination"};
  cfg.levels = {32};

  set_threads(1);
  const SuiteResult serial = run_suite(one, cfg);
  set_threads(3);
  const SuiteResult threaded = run_suite(one, cfg);

  REQUIRE(serial.reports.size() == 13u);  // 6 + 6 + 1
  for (const InequalityReport& r : serial.reports)
    REQUIRE((r.check_id == "pointwise_bound" ||
             r.check_id == "sobolev_inequality" ||
             r.check_id == "maximal_domination"));
  REQUIRE(suite_csv(serial) == suite_csv(threaded));
  REQUIRE(convergence_csv(serial) == convergence_csv(threaded));
}
