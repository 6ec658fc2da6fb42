#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "roughcalc/corpus.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string command =
      std::string(ROUGHCALC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& leaf) {
  const fs::path dir = fs::temp_directory_path() / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string first_line(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

TEST_CASE("help runs clean") {
  REQUIRE(run_cli("--help") == 0);
  REQUIRE(run_cli("run --help") == 0);
}

TEST_CASE("gen-corpus writes a loadable corpus") {
  const fs::path dir = fresh_dir("roughcalc_cli_gen");
  const fs::path out = dir / "corpus.json";
  REQUIRE(run_cli("gen-corpus --name tiny --out " + out.string()) == 0);
  const roughcalc::Corpus corpus = roughcalc::load_corpus(out.string());
  REQUIRE(corpus.entries.size() == 3);
  fs::remove_all(dir);
}

TEST_CASE("malformed invocations exit with the usage code") {
  const fs::path dir = fresh_dir("roughcalc_cli_bad");
  const std::string out = " --out " + (dir / "r").string();
  REQUIRE(run_cli("gen-corpus --name nonsense" + out) == 2);
  REQUIRE(run_cli("run --corpus tiny --checks not_a_check --levels 32" + out) == 2);
  REQUIRE(run_cli("run --corpus tiny --checks , --levels 32" + out) == 2);
  REQUIRE(run_cli("run --corpus tiny --checks maximal_domination --levels 7" +
                  out) == 2);
  REQUIRE(run_cli("convergence --corpus tiny --checks maximal_domination "
                  "--levels 32" + out) == 2);
  REQUIRE(run_cli("frobnicate") == 2);
  fs::remove_all(dir);
}

TEST_CASE("run emits the summary table and the report log") {
  const fs::path dir = fresh_dir("roughcalc_cli_run");
  REQUIRE(run_cli("run --corpus tiny --checks maximal_domination --levels 32 "
                  "--out " + dir.string()) == 0);

  const fs::path summary = dir / "summary.csv";
  const fs::path reports = dir / "reports.jsonl";
  REQUIRE(fs::exists(summary));
  REQUIRE(fs::exists(reports));
  REQUIRE(first_line(summary) == "check_id,params-hash,N,lhs,rhs,ratio,runtime_ms");

  std::ifstream log(reports);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(log, line)) ++lines;
  REQUIRE(lines == 1 + 3);  // run header plus one report per entry
  fs::remove_all(dir);
}

TEST_CASE("run accepts a corpus file in place of a preset name") {
  const fs::path dir = fresh_dir("roughcalc_cli_file");
  const fs::path corpus = dir / "corpus.json";
  REQUIRE(run_cli("gen-corpus --name tiny --out " + corpus.string()) == 0);
  REQUIRE(run_cli("run --corpus " + corpus.string() +
                  " --checks maximal_domination --levels 32 --out " +
                  (dir / "results").string()) == 0);
  REQUIRE(fs::exists(dir / "results" / "summary.csv"));
  fs::remove_all(dir);
}

TEST_CASE("convergence writes the refinement table") {
  const fs::path dir = fresh_dir("roughcalc_cli_conv");
  REQUIRE(run_cli("convergence --corpus tiny --checks maximal_domination "
                  "--levels 32,64 --out " + dir.string()) == 0);
  const fs::path table = dir / "convergence.csv";
  REQUIRE(fs::exists(table));
  REQUIRE(first_line(table) == "check_id,params-hash,entry,combo,N,ratio,drift");
  fs::remove_all(dir);
}
