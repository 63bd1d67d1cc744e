// Computational-basis measurement simulation on Vidal-gauge states:
// sequential single-qubit sampling with projection and full regauging, plus
// chain-rule probability evaluation of whole bitstrings.
#pragma once

#include <optional>
#include <random>
#include <vector>

#include "gtqa/anneal.hpp"
#include "gtqa/tn.hpp"

namespace gtqa {

struct MeasureResult {
  int outcome = 1;            // +1 -> |0>, -1 -> |1>
  double probability = 1.0;   // pre-projection probability of the outcome
  int bp_iterations = 0;      // of the post-projection regauge
  double post_residual = 0.0; // Vidal residual after the regauge
  bool bp_converged = true;
};

// One measurement step: reduced state from BP, outcome drawn from its
// diagonal (or forced), projection of the vertex tensor, renormalization by
// 1/sqrt(p) and a full regauge. Outcome error when a forced outcome has
// probability below 1e-12.
MeasureResult measure_qubit(VidalState& state, int a, std::mt19937_64* rng,
                            std::optional<int> forced, const BpConfig& bp = {},
                            double rcond = 1e-12);

struct SampleTrace {
  std::vector<int> bitstring;
  std::vector<double> probabilities;   // per measured qubit, in measurement order
  double log_probability = 0.0;
  std::vector<double> residuals;       // post-regauge residual per step
  std::vector<int> bp_iterations;
  std::vector<bool> bp_converged;
};

// How much gauge repair runs after each projection. Full rebuilds the
// canonical form (accurate, the default); MessagesOnly refreshes the BP
// messages between steps but leaves the gauge stale (cheaper, degraded).
enum class RegaugeScope { Full, MessagesOnly };

struct SampleOptions {
  BpConfig bp;
  double rcond = 1e-12;
  RegaugeScope scope = RegaugeScope::Full;
  // Optimize the last k bits over all completions of the objective instead
  // of sampling them; requires `instance`.
  int tail_brute_force = 0;
  const ProblemInstance* instance = nullptr;
};

// Sequential measurement of every qubit in `order` on a working copy of the
// input state. BP non-convergence is recorded in the trace, never thrown.
SampleTrace sample_bitstring(const VidalState& state, const std::vector<int>& order,
                             std::mt19937_64& rng, const SampleOptions& options = {});

// Chain-rule probability of one bitstring along the ascending vertex order;
// exact on trees. Returns 0 for impossible outcomes.
double bitstring_probability(const VidalState& state, const std::vector<int>& x,
                             const BpConfig& bp = {}, double rcond = 1e-12);

}  // namespace gtqa
