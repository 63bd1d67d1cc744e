// Exact brute-force validation: dense state-vector evolution of the same
// gate stream, exact reductions / Schmidt spectra / entropies, exhaustive
// optimization and the error metrics used to benchmark the network.
#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "gtqa/anneal.hpp"
#include "gtqa/graph.hpp"
#include "gtqa/tn.hpp"

namespace gtqa {

// Dense n-qubit state, n <= 26. Basis index bit a (1 << a) is qubit a.
class DenseState {
 public:
  explicit DenseState(int n);  // |0...0>
  static DenseState plus_state(int n);
  static DenseState from_amplitudes(std::vector<cdouble> amplitudes);

  int qubit_count() const { return n_; }
  const std::vector<cdouble>& amplitudes() const { return amps_; }
  std::vector<cdouble>& amplitudes() { return amps_; }

  void apply_1q(int q, const Eigen::Matrix2cd& w);
  // Row/column index is 2 * bit_a + bit_b; diagonal gates take a fast path.
  void apply_2q(int a, int b, const Eigen::Matrix4cd& w);

  double norm() const;

 private:
  int n_ = 0;
  std::vector<cdouble> amps_;
};

// Runs the identical Trotter gate stream on the dense |+>^n vector, invoking
// the callback after every layer. Capacity error for n > 26.
void exact_evolve(const ProblemInstance& instance, const AnnealConfig& config,
                  const std::function<void(int layer, const DenseState&)>& per_layer);

Eigen::Matrix2cd exact_rdm(const DenseState& psi, int a);
// Schmidt coefficients across the bipartition; min(|A|,|B|) <= 13.
Eigen::VectorXd exact_schmidt(const DenseState& psi, const Bipartition& cut);
double exact_entropy(const DenseState& psi, const Bipartition& cut);

// (dt / 2 T N) * sum over layers and qubits of trace distances between the
// two reduced-state trajectories. Shape error on mismatched trajectories.
double trace_distance_error(const std::vector<std::vector<Eigen::Matrix2cd>>& exact_rdms,
                            const std::vector<std::vector<Eigen::Matrix2cd>>& approx_rdms,
                            double dt, double total_time);

// ||exact - approx||_2 / ||exact||_2 over time-indexed entropy traces.
double entropy_rel_error(const std::vector<double>& exact_trace,
                         const std::vector<double>& approx_trace);

struct OptimumResult {
  std::vector<int> bitstring;
  double value = 0.0;
  long degeneracy = 1;
};

// Exhaustive maximization with Gray-code incremental evaluation; n <= 30.
OptimumResult brute_force_optimum(const ProblemInstance& instance);

// Full amplitude vector of the network by greedy pairwise contraction.
// Capacity error when an intermediate would exceed the dense limit.
std::vector<cdouble> dense_amplitudes(const SymmetricState& state);
std::vector<cdouble> dense_amplitudes(const VidalState& state);

// |<psi | psi_tn>|^2 with both sides normalized.
double fidelity_vs_exact(const DenseState& psi, const VidalState& state);

}  // namespace gtqa
