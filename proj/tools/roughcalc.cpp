// Command-line front end: generate sample corpora, run the inequality
// checks over a corpus at one or more resolutions, and tabulate how the
// observed ratios move under grid refinement.
//
// Exit codes: 0 = all requested checks passed, 1 = at least one check
// failed (falsification, non-finite value, drift out of bounds, or a
// rejected configuration), 2 = usage error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "roughcalc/corpus.hpp"
#include "roughcalc/parallel.hpp"
#include "roughcalc/verify.hpp"

namespace {

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    while (!item.empty() && item.front() == ' ') item.erase(item.begin());
    while (!item.empty() && item.back() == ' ') item.pop_back();
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

roughcalc::Corpus resolve_corpus(const std::string& name_or_path) {
  if (std::filesystem::exists(name_or_path))
    return roughcalc::load_corpus(name_or_path);
  return roughcalc::make_preset(name_or_path);
}

int configure_threads(int flag_value) {
  // Without the flag, configured_threads() falls back to ROUGHCALC_THREADS
  // and then to the hardware concurrency.
  if (flag_value > 0) roughcalc::set_threads(flag_value);
  return roughcalc::configured_threads();
}

struct RunOptions {
  std::string corpus = "default20";
  std::string checks = "all";
  std::string levels = "128,256";
  std::string out = "roughcalc-out";
  int threads = 0;
  std::uint64_t seed = 0;
};

void add_run_flags(CLI::App* cmd, RunOptions& opts) {
  cmd->add_option("--corpus", opts.corpus,
                  "corpus preset name (tiny, default20, stress) or JSON path");
  cmd->add_option("--checks", opts.checks,
                  "comma-separated check ids, or 'all'");
  cmd->add_option("--levels", opts.levels,
                  "comma-separated grid resolutions, coarse to fine");
  cmd->add_option("--out", opts.out, "output directory");
  cmd->add_option("--threads", opts.threads,
                  "worker threads (default: ROUGHCALC_THREADS or hardware)");
  cmd->add_option("--seed", opts.seed, "seed recorded with the reports");
}

int usage_error(const std::string& message) {
  std::cerr << "error: " << message << "\n";
  return 2;
}

struct ParsedRun {
  roughcalc::Corpus corpus;
  roughcalc::SuiteConfig config;
};

/// Validates the shared run/convergence flags; on success fills `parsed`.
int prepare_run(const RunOptions& opts, ParsedRun& parsed) {
  if (opts.checks == "all") {
    parsed.config.checks = roughcalc::all_check_ids();
  } else {
    parsed.config.checks = split_csv(opts.checks);
  }
  if (parsed.config.checks.empty())
    return usage_error("no checks requested (use --checks all or a list)");
  const auto& known = roughcalc::all_check_ids();
  for (const std::string& id : parsed.config.checks)
    if (std::find(known.begin(), known.end(), id) == known.end()) {
      std::ostringstream msg;
      msg << "unknown check id '" << id << "'; valid ids:";
      for (const auto& k : known) msg << " " << k;
      return usage_error(msg.str());
    }

  parsed.config.levels.clear();
  for (const std::string& token : split_csv(opts.levels)) {
    try {
      const int level = std::stoi(token);
      if (level < 8) return usage_error("levels must be at least 8");
      parsed.config.levels.push_back(level);
    } catch (const std::exception&) {
      return usage_error("could not parse level '" + token + "'");
    }
  }
  if (parsed.config.levels.empty())
    return usage_error("no grid levels requested");
  parsed.config.seed = opts.seed;

  try {
    parsed.corpus = resolve_corpus(opts.corpus);
  } catch (const std::exception& e) {
    return usage_error(std::string("could not load corpus: ") + e.what());
  }
  return 0;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string run_header(const roughcalc::Corpus& corpus,
                       const roughcalc::SuiteConfig& config, int threads) {
  nlohmann::ordered_json j;
  j["corpus"] = corpus.name;
  j["entries"] = corpus.entries.size();
  j["seed"] = config.seed;
  j["levels"] = config.levels;
  j["checks"] = config.checks;
  j["threads"] = threads;
  return j.dump();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical checks for rough singular integral inequalities"};
  app.require_subcommand(1);

  std::string gen_name = "default20";
  std::string gen_out;
  std::uint64_t gen_seed = 0;
  CLI::App* gen = app.add_subcommand(
      "gen-corpus", "write a corpus preset to a JSON file");
  gen->add_option("--name", gen_name, "preset name (tiny, default20, stress)");
  gen->add_option("--out", gen_out, "output JSON path")->required();
  gen->add_option("--seed", gen_seed, "override the preset seed");

  RunOptions run_opts;
  CLI::App* run = app.add_subcommand(
      "run", "run inequality checks over a corpus and write reports");
  add_run_flags(run, run_opts);

  RunOptions conv_opts;
  CLI::App* conv = app.add_subcommand(
      "convergence", "tabulate ratio drift across grid refinements");
  add_run_flags(conv, conv_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      roughcalc::Corpus corpus;
      try {
        corpus = roughcalc::make_preset(gen_name);
      } catch (const std::exception& e) {
        return usage_error(e.what());
      }
      if (gen->count("--seed") > 0) corpus.seed = gen_seed;
      const std::filesystem::path path(gen_out);
      if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
      roughcalc::save_corpus(corpus, gen_out);
      std::cout << "wrote " << gen_out << " (" << corpus.entries.size()
                << " entries)\n";
      return 0;
    }

    const bool is_conv = conv->parsed();
    const RunOptions& opts = is_conv ? conv_opts : run_opts;
    ParsedRun parsed;
    if (const int code = prepare_run(opts, parsed); code != 0) return code;
    if (is_conv && parsed.config.levels.size() < 2)
      return usage_error("convergence needs at least two --levels");

    const int threads = configure_threads(opts.threads);
    const std::filesystem::path out_dir(opts.out);
    std::filesystem::create_directories(out_dir);

    const roughcalc::SuiteResult result =
        roughcalc::run_suite(parsed.corpus, parsed.config);

    if (is_conv) {
      write_file(out_dir / "convergence.csv", roughcalc::convergence_csv(result));
      std::cout << "wrote " << (out_dir / "convergence.csv").string() << "\n";
    } else {
      write_file(out_dir / "summary.csv", roughcalc::suite_csv(result));
      write_file(out_dir / "reports.jsonl",
                 run_header(parsed.corpus, parsed.config, threads) + "\n" +
                     roughcalc::suite_json_lines(result));
      std::cout << "wrote " << (out_dir / "summary.csv").string() << " and "
                << (out_dir / "reports.jsonl").string() << "\n";
    }

    std::cout << result.reports.size() << " reports over "
              << parsed.corpus.entries.size() << " entries at "
              << parsed.config.levels.size() << " levels (" << threads
              << " threads)\n";
    if (!result.failures.empty()) {
      std::cout << result.failures.size() << " failure(s):\n";
      for (const std::string& f : result.failures) std::cout << "  " << f << "\n";
    }
    std::cout << (result.pass() ? "PASS" : "FAIL") << "\n";
    return result.pass() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
