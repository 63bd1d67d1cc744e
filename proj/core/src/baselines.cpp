#include "gtqa/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gtqa/errors.hpp"

namespace gtqa {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

SaResult simulated_annealing(const ProblemInstance& instance, const SaConfig& config) {
  if (config.sweeps < 1 || config.restarts < 1)
    throw Error(ErrorKind::Parameter, "sweeps and restarts must be positive");
  if (!(config.beta_end >= config.beta_start) || !(config.beta_start > 0))
    throw Error(ErrorKind::Parameter, "need beta_end >= beta_start > 0");
  const ConnectivityGraph& g = instance.graph;
  const int n = g.vertex_count();
  const double beta_ratio = config.beta_end / config.beta_start;

  SaResult best;
  bool have_best = false;
  for (int restart = 0; restart < config.restarts; ++restart) {
    std::mt19937_64 rng(mix_seed(config.seed, static_cast<std::uint64_t>(restart)));
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    std::vector<int> x(n);
    for (int& v : x) v = uniform(rng) < 0.5 ? -1 : 1;
    double value = objective(instance, x);
    std::vector<int> local_best = x;
    double local_best_value = value;

    for (int sweep = 0; sweep < config.sweeps; ++sweep) {
      const double frac = config.sweeps > 1
                              ? static_cast<double>(sweep) / (config.sweeps - 1)
                              : 1.0;
      const double beta = config.beta_start * std::pow(beta_ratio, frac);
      for (int v = 0; v < n; ++v) {
        double local = instance.field[v];
        for (int u : g.neighbors(v)) local += instance.coupling[g.edge_index(v, u)] * x[u];
        const double delta = -2.0 * x[v] * local;
        if (delta >= 0 || uniform(rng) < std::exp(beta * delta)) {
          x[v] = -x[v];
          value += delta;
          if (value > local_best_value) {
            local_best_value = value;
            local_best = x;
          }
        }
      }
    }

    // Exact value of the tracked best string guards against drift.
    local_best_value = objective(instance, local_best);
    if (!have_best || local_best_value > best.value ||
        (local_best_value == best.value &&
         std::lexicographical_compare(local_best.begin(), local_best.end(),
                                      best.bitstring.begin(), best.bitstring.end()))) {
      best.value = local_best_value;
      best.bitstring = local_best;
      have_best = true;
    }
  }
  return best;
}

double approximation_ratio(double candidate, double best) {
  if (!(best > 0)) throw Error(ErrorKind::Domain, "reference value must be positive");
  return candidate / best;
}

}  // namespace gtqa
