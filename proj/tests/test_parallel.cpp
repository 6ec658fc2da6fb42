#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "roughcalc/parallel.hpp"

using namespace roughcalc;

namespace {

struct ThreadGuard {
  ~ThreadGuard() { set_threads(0); }
};

}  // namespace

TEST_CASE("parallel_for touches every index exactly once") {
  ThreadGuard guard;
  for (const int threads : {1, 2, 5}) {
    set_threads(threads);
    std::vector<int> hits(10007, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    for (const int h : hits) REQUIRE(h == 1);
  }
}

TEST_CASE("parallel_sum is bitwise identical across thread counts") {
  ThreadGuard guard;
  auto term = [](std::size_t i) {
    return std::sin(0.001 * static_cast<double>(i)) / (1.0 + i * 1e-4);
  };
  set_threads(1);
  const double base = parallel_sum(250000, term);
  for (const int threads : {2, 3, 4, 7}) {
    set_threads(threads);
    const double again = parallel_sum(250000, term);
    REQUIRE(again == base);
  }
}

TEST_CASE("parallel_max equals the serial maximum") {
  ThreadGuard guard;
  auto term = [](std::size_t i) {
    return std::cos(0.37 * static_cast<double>(i));
  };
  double serial = term(0);
  for (std::size_t i = 1; i < 9999; ++i) serial = std::max(serial, term(i));
  for (const int threads : {1, 4}) {
    set_threads(threads);
    REQUIRE(parallel_max(9999, term) == serial);
  }
}

TEST_CASE("empty and tiny ranges behave") {
  REQUIRE(parallel_sum(0, [](std::size_t) { return 1.0; }) == 0.0);
  REQUIRE(parallel_sum(3, [](std::size_t i) { return double(i); }) == 3.0);
  parallel_for(0, [](std::size_t) { FAIL("body must not run"); });
}

TEST_CASE("set_threads validates its argument") {
  REQUIRE_THROWS_AS(set_threads(-1), std::invalid_argument);
  REQUIRE_THROWS_AS(set_threads(5000), std::invalid_argument);
}
