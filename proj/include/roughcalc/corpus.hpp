#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "roughcalc/grid.hpp"
#include "roughcalc/sphere.hpp"

namespace roughcalc {

/// One corpus entry: a bump-sum field plus the sphere kernel it is paired
/// with.  The grid resolution here is only the base level; suite runs may
/// resample the same entry at other levels.
struct CorpusEntry {
  std::string id;
  int dim = 2;
  double halfwidth = 4.0;
  int base_points = 128;
  std::vector<BumpSpec> bumps;
  KernelSpec kernel;
};

struct Corpus {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<CorpusEntry> entries;
};

inline SampledField realize_field(const CorpusEntry& entry, int points_per_axis) {
  const GridSpec spec = make_grid(entry.dim, entry.halfwidth, points_per_axis);
  return make_bump_sum(spec, entry.bumps);
}

inline SphereKernel realize_kernel(const CorpusEntry& entry) {
  return make_rough_kernel(entry.dim, entry.kernel);
}

inline nlohmann::ordered_json kernel_to_json(const KernelSpec& k) {
  nlohmann::ordered_json j;
  j["kind"] = k.kind;
  j["nodes"] = k.nodes;
  if (k.kind == "harmonic") {
    j["degree"] = k.degree;
    j["use_sine"] = k.use_sine;
  } else if (k.kind == "sign") {
    j["arcs"] = k.arcs;
  } else if (k.kind == "power") {
    j["exponent"] = k.exponent;
    j["theta0"] = k.theta0;
    j["rho_max"] = k.rho_max;
  }
  return j;
}

inline KernelSpec kernel_from_json(const nlohmann::json& j) {
  KernelSpec k;
  k.kind = j.at("kind").get<std::string>();
  k.nodes = j.value("nodes", k.nodes);
  k.degree = j.value("degree", k.degree);
  k.use_sine = j.value("use_sine", k.use_sine);
  k.arcs = j.value("arcs", k.arcs);
  k.exponent = j.value("exponent", k.exponent);
  k.theta0 = j.value("theta0", k.theta0);
  k.rho_max = j.value("rho_max", k.rho_max);
  return k;
}

inline nlohmann::ordered_json corpus_to_json(const Corpus& corpus) {
  nlohmann::ordered_json j;
  j["name"] = corpus.name;
  j["seed"] = corpus.seed;
  j["entries"] = nlohmann::ordered_json::array();
  for (const CorpusEntry& entry : corpus.entries) {
    nlohmann::ordered_json e;
    e["id"] = entry.id;
    e["dim"] = entry.dim;
    e["halfwidth"] = entry.halfwidth;
    e["points_per_axis"] = entry.base_points;
    e["bumps"] = nlohmann::ordered_json::array();
    for (const BumpSpec& b : entry.bumps) {
      nlohmann::ordered_json jb;
      jb["center"] = std::vector<double>(b.center.begin(),
                                         b.center.begin() + entry.dim);
      jb["radius"] = b.radius;
      jb["amplitude"] = b.amplitude;
      e["bumps"].push_back(jb);
    }
    e["kernel"] = kernel_to_json(entry.kernel);
    j["entries"].push_back(e);
  }
  return j;
}

inline Corpus corpus_from_json(const nlohmann::json& j) {
  Corpus corpus;
  corpus.name = j.value("name", std::string("unnamed"));
  corpus.seed = j.value("seed", std::uint64_t{0});
  for (const auto& e : j.at("entries")) {
    CorpusEntry entry;
    entry.id = e.at("id").get<std::string>();
    entry.dim = e.at("dim").get<int>();
    entry.halfwidth = e.at("halfwidth").get<double>();
    entry.base_points = e.at("points_per_axis").get<int>();
    for (const auto& jb : e.at("bumps")) {
      BumpSpec b;
      const auto center = jb.at("center").get<std::vector<double>>();
      if (static_cast<int>(center.size()) != entry.dim)
        throw std::invalid_argument("corpus: bump center dimension mismatch");
      b.center = {0.0, 0.0, 0.0};
      for (int d = 0; d < entry.dim; ++d) b.center[d] = center[d];
      b.radius = jb.at("radius").get<double>();
      b.amplitude = jb.at("amplitude").get<double>();
      entry.bumps.push_back(b);
    }
    entry.kernel = kernel_from_json(e.at("kernel"));
    // Validate eagerly so a malformed corpus fails at load, not mid-suite.
    make_grid(entry.dim, entry.halfwidth, entry.base_points);
    corpus.entries.push_back(entry);
  }
  return corpus;
}

inline std::string corpus_to_string(const Corpus& corpus) {
  return corpus_to_json(corpus).dump(2) + "\n";
}

inline void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("corpus: cannot write " + path);
  out << corpus_to_string(corpus);
  if (!out) throw std::runtime_error("corpus: write failed for " + path);
}

inline Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("corpus: cannot read " + path);
  nlohmann::json j;
  in >> j;
  return corpus_from_json(j);
}

namespace detail {

inline std::vector<std::vector<BumpSpec>> corpus_bump_layouts() {
  return {
      {{{0.0, 0.0, 0.0}, 1.3, 1.0}},
      {{{0.9, -0.6, 0.0}, 1.1, 1.0}},
      {{{-1.2, 0.8, 0.0}, 0.9, 1.0}, {{1.0, -0.5, 0.0}, 0.7, -0.8}},
      {{{0.0, 0.0, 0.0}, 1.2, 1.0},
       {{-1.6, -1.0, 0.0}, 0.6, 0.5},
       {{1.5, 1.2, 0.0}, 0.5, -0.6}},
  };
}

inline std::vector<KernelSpec> corpus_kernels() {
  std::vector<KernelSpec> kernels(5);
  kernels[0].kind = "harmonic";
  kernels[0].degree = 1;
  kernels[0].use_sine = false;
  kernels[0].nodes = 2048;
  kernels[1].kind = "harmonic";
  kernels[1].degree = 3;
  kernels[1].use_sine = true;
  kernels[1].nodes = 2048;
  kernels[2].kind = "sign";
  kernels[2].arcs = 2;
  kernels[2].nodes = 2048;
  kernels[3].kind = "sign";
  kernels[3].arcs = 6;
  kernels[3].nodes = 2048;
  kernels[4].kind = "power";
  kernels[4].exponent = 0.51;
  kernels[4].theta0 = 2.0;
  kernels[4].rho_max = 1.9;
  kernels[4].nodes = 4096;
  return kernels;
}

}  // namespace detail

/// Fixed presets.  Every preset is fully deterministic; the stored seed only
/// drives the randomized spot-check pairs of suite runs.
inline Corpus make_preset(const std::string& name) {
  Corpus corpus;
  corpus.name = name;
  corpus.seed = 20250822;

  const auto layouts = detail::corpus_bump_layouts();
  const auto kernels = detail::corpus_kernels();

  auto add_entry = [&](int layout, int kernel, int base_points) {
    CorpusEntry entry;
    std::ostringstream id;
    id << "e" << (corpus.entries.size() < 10 ? "0" : "") << corpus.entries.size();
    entry.id = id.str();
    entry.dim = 2;
    entry.halfwidth = 4.0;
    entry.base_points = base_points;
    entry.bumps = layouts[layout];
    entry.kernel = kernels[kernel];
    corpus.entries.push_back(entry);
  };

  if (name == "tiny") {
    add_entry(0, 0, 64);
    add_entry(2, 2, 64);
    add_entry(1, 1, 64);
  } else if (name == "default20") {
    for (int layout = 0; layout < 4; ++layout)
      for (int kernel = 0; kernel < 5; ++kernel)
        add_entry(layout, kernel, 128);
  } else if (name == "stress") {
    // Power-singular kernels over every layout, plus dense sign patterns.
    for (int layout = 0; layout < 4; ++layout) add_entry(layout, 4, 128);
    KernelSpec sharp;
    sharp.kind = "power";
    sharp.exponent = 0.62;
    sharp.theta0 = 0.7;
    sharp.rho_max = 1.55;
    sharp.nodes = 4096;
    KernelSpec striped;
    striped.kind = "sign";
    striped.arcs = 12;
    striped.nodes = 2048;
    CorpusEntry e;
    e.dim = 2;
    e.halfwidth = 4.0;
    e.base_points = 128;
    e.id = "e04";
    e.bumps = layouts[1];
    e.kernel = sharp;
    corpus.entries.push_back(e);
    e.id = "e05";
    e.bumps = layouts[3];
    e.kernel = striped;
    corpus.entries.push_back(e);
  } else {
    throw std::invalid_argument("unknown corpus preset: " + name);
  }
  return corpus;
}

}  // namespace roughcalc
