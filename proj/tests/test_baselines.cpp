#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gtqa/baselines.hpp"
#include "gtqa/errors.hpp"
#include "gtqa/oracle.hpp"

using namespace gtqa;

TEST_CASE("simulated_annealing: tiny landscapes") {
  ConnectivityGraph g(2, {{0, 1}});
  ProblemInstance inst;
  inst.graph = g;
  inst.coupling = {1.0};
  inst.field = {0.5, 0.0};
  SaConfig config;
  config.sweeps = 200;
  config.restarts = 4;
  config.seed = 1;
  SaResult result = simulated_annealing(inst, config);
  CHECK(result.value == doctest::Approx(1.5));
  CHECK(result.bitstring == std::vector<int>{1, 1});

  ProblemInstance triangle = maxcut_instance(ConnectivityGraph(3, {{0, 1}, {1, 2}, {0, 2}}));
  SaResult cut = simulated_annealing(triangle, config);
  CHECK(cut_value(triangle, cut.bitstring) == 2);
}

TEST_CASE("simulated_annealing: deterministic under seed") {
  ConnectivityGraph g = random_regular(16, 3, 4);
  ProblemInstance inst = random_qubo(g, 9);
  SaConfig config;
  config.sweeps = 300;
  config.restarts = 6;
  config.seed = 12;
  SaResult a = simulated_annealing(inst, config);
  SaResult b = simulated_annealing(inst, config);
  CHECK(a.bitstring == b.bitstring);
  CHECK(a.value == b.value);
}

TEST_CASE("simulated_annealing: matches brute force on most small instances") {
  int matched = 0;
  const int trials = 100;
  for (int trial = 0; trial < trials; ++trial) {
    ConnectivityGraph g = random_regular(14, 3, 300 + trial);
    ProblemInstance inst = random_qubo(g, 600 + trial);
    SaConfig config;
    config.sweeps = 1000;
    config.restarts = 20;
    config.seed = trial;
    SaResult sa = simulated_annealing(inst, config);
    OptimumResult best = brute_force_optimum(inst);
    CHECK(sa.value <= best.value + 1e-9);
    if (sa.value >= best.value - 1e-9) ++matched;
  }
  CHECK(matched >= 95);
}

TEST_CASE("simulated_annealing: best value is monotone in the restart budget") {
  ConnectivityGraph g = random_regular(18, 3, 8);
  ProblemInstance inst = random_qubo(g, 44);
  double previous = -1e300;
  for (int restarts : {1, 2, 4, 8, 16}) {
    SaConfig config;
    config.sweeps = 150;
    config.restarts = restarts;
    config.seed = 5;
    SaResult result = simulated_annealing(inst, config);
    CHECK(result.value >= previous - 1e-12);
    previous = result.value;
  }
}

TEST_CASE("approximation_ratio") {
  CHECK(approximation_ratio(203.0, 205.0) == doctest::Approx(203.0 / 205.0));
  CHECK(approximation_ratio(203.0, 205.0) > 0.99);
  CHECK(approximation_ratio(7.0, 7.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS((void)approximation_ratio(1.0, 0.0), Error);
  CHECK_THROWS_AS((void)approximation_ratio(1.0, -2.0), Error);
}
