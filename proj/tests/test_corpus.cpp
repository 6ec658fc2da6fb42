#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>

#include <json.hpp>

#include "roughcalc/corpus.hpp"

using namespace roughcalc;

TEST_CASE("presets have the advertised shapes") {
  struct Expect {
    const char* name;
    std::size_t entries;
  };
  for (const Expect e : {Expect{"tiny", 3}, Expect{"default20", 20},
                         Expect{"stress", 6}}) {
    const Corpus corpus = make_preset(e.name);
    REQUIRE(corpus.name == e.name);
    REQUIRE(corpus.entries.size() == e.entries);

    std::set<std::string> ids;
    for (const CorpusEntry& entry : corpus.entries) {
      ids.insert(entry.id);
      REQUIRE(entry.dim == 2);
      REQUIRE(entry.halfwidth > 0.0);
      REQUIRE(entry.base_points >= 16);
      REQUIRE_FALSE(entry.bumps.empty());
    }
    REQUIRE(ids.size() == corpus.entries.size());
  }
  REQUIRE_THROWS_AS(make_preset("bogus"), std::invalid_argument);
}

TEST_CASE("serialization round-trips to the identical string") {
  const Corpus corpus = make_preset("default20");
  const std::string text = corpus_to_string(corpus);
  const Corpus parsed = corpus_from_json(nlohmann::json::parse(text));
  REQUIRE(corpus_to_string(parsed) == text);
  REQUIRE(parsed.seed == corpus.seed);
  REQUIRE(parsed.entries.size() == corpus.entries.size());
}

TEST_CASE("corpora survive a disk round trip") {
  const Corpus corpus = make_preset("tiny");
  const std::filesystem::path path =
      std::filesystem::temp_directory_path() / "roughcalc_corpus_test.json";
  save_corpus(corpus, path.string());
  const Corpus loaded = load_corpus(path.string());
  std::filesystem::remove(path);

  REQUIRE(corpus_to_string(loaded) == corpus_to_string(corpus));
  REQUIRE_THROWS_AS(load_corpus("/nonexistent/dir/corpus.json"),
                    std::runtime_error);
}

TEST_CASE("malformed corpus documents fail at load") {
  nlohmann::json j = corpus_to_json(make_preset("tiny"));
  j["entries"][0]["bumps"][0]["center"] = {0.1, 0.2, 0.3};  // dim mismatch
  REQUIRE_THROWS_AS(corpus_from_json(j), std::invalid_argument);

  nlohmann::json odd = corpus_to_json(make_preset("tiny"));
  odd["entries"][0]["points_per_axis"] = 33;  // grid wants even counts
  REQUIRE_THROWS_AS(corpus_from_json(odd), std::invalid_argument);
}

TEST_CASE("realized entries carry compact support and mean-free kernels") {
  const Corpus corpus = make_preset("tiny");
  for (const CorpusEntry& entry : corpus.entries) {
    const SampledField f = realize_field(entry, 32);
    REQUIRE(f.support_radius > 0.0);
    double expected = 0.0;
    for (const BumpSpec& b : entry.bumps) {
      double c2 = 0.0;
      for (const double c : b.center) c2 += c * c;
      expected = std::max(expected, std::sqrt(c2) + b.radius);
    }
    REQUIRE(f.support_radius >= expected - 1e-12);
    REQUIRE(f.has_gradient());

    const SphereKernel omega = realize_kernel(entry);
    REQUIRE(std::abs(omega.quadrature_mean()) < 1e-12);
  }
}

TEST_CASE("entries resample across refinement levels") {
  const CorpusEntry entry = make_preset("tiny").entries.front();
  const SampledField coarse = realize_field(entry, 32);
  const SampledField fine = realize_field(entry, 64);
  REQUIRE(coarse.spec.points_per_axis == 32);
  REQUIRE(fine.spec.points_per_axis == 64);
  REQUIRE(coarse.spec.halfwidth == fine.spec.halfwidth);
  // Same underlying function: center-cell values agree to interpolation error.
  REQUIRE(coarse.values.size() == 32u * 32u);
  REQUIRE(fine.values.size() == 64u * 64u);
}
