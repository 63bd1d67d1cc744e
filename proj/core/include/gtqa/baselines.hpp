// Classical reference solver: best-of-restarts single-flip Metropolis
// simulated annealing on the shared objective, plus approximation ratios.
#pragma once

#include <cstdint>
#include <vector>

#include "gtqa/anneal.hpp"

namespace gtqa {

struct SaConfig {
  int sweeps = 1000;
  double beta_start = 0.1;
  double beta_end = 10.0;  // geometric ramp
  int restarts = 20;
  std::uint64_t seed = 0;
};

struct SaResult {
  std::vector<int> bitstring;
  double value = 0.0;
};

// Maximizes the objective. Restarts are merged by value with ties broken by
// the lexicographically smallest bitstring; deterministic under the seed.
SaResult simulated_annealing(const ProblemInstance& instance, const SaConfig& config);

// candidate / best; Domain error for a non-positive denominator.
double approximation_ratio(double candidate, double best);

}  // namespace gtqa
