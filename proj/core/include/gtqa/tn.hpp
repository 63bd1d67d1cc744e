// Graph tensor-network states over a connectivity graph: one tensor per
// qubit, one bond per edge. Provides the symmetric and Vidal (canonical)
// forms, belief-propagation message passing, regauging, truncation and
// one-/two-qubit gate application.
#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gtqa/graph.hpp"
#include "gtqa/tensor.hpp"

namespace gtqa {

// Axis naming shared by all network forms.
std::string physical_label(int vertex);
std::string bond_label(int a, int b);
std::string primed(const std::string& label);
// Canonical axis order of a vertex tensor: physical first, then one bond per
// neighbor in ascending neighbor order.
std::vector<std::string> canonical_axes(const ConnectivityGraph& g, int vertex);

// One tensor T_a per vertex, physical axis of dimension 2 plus one bond axis
// per incident edge. Amplitudes are the full bond contraction.
struct SymmetricState {
  ConnectivityGraph graph;
  std::vector<DenseTensor> tensors;
  std::vector<int> bond_dims;  // per edge index

  int bond_dim(int edge_index) const { return bond_dims[edge_index]; }
};

// Canonical form: per-vertex Gamma tensors plus one non-negative singular
// value vector per edge, descending and normalized to unit 2-norm.
struct VidalState {
  ConnectivityGraph graph;
  std::vector<DenseTensor> gammas;
  std::vector<Eigen::VectorXd> lambdas;  // per edge index

  int bond_dim(int edge_index) const { return static_cast<int>(lambdas[edge_index].size()); }
  int max_bond_dim() const;
};

// Hermitian PSD unit-trace matrices, one per directed edge, plus convergence
// diagnostics of the sweep that produced them.
struct MessageSet {
  // Index 2*edge_index for (low -> high), 2*edge_index + 1 for (high -> low).
  std::vector<Eigen::MatrixXcd> messages;
  int iterations = 0;
  double final_distance = 0.0;  // aggregated trace distance per edge, last sweep
  bool converged = false;

  static int slot(const ConnectivityGraph& g, int from, int to);
  const Eigen::MatrixXcd& at(const ConnectivityGraph& g, int from, int to) const;
  Eigen::MatrixXcd& at(const ConnectivityGraph& g, int from, int to);
};

struct BpConfig {
  double eps = 1e-8;
  int max_iters = 100;
  double damping = 0.0;     // 0 = plain Gauss-Seidel replacement
  bool synchronous = false; // Jacobi-style sweep (updates see old messages only)
};

// Product state with all bond dimensions 1; amplitudes must be unit vectors.
VidalState product_state(const ConnectivityGraph& g,
                         const std::vector<Eigen::Vector2cd>& amplitudes);
VidalState plus_product_state(const ConnectivityGraph& g);

// Fixed-point iteration for the message self-consistency relation. Messages
// start from `init` when given, otherwise from random density matrices.
// Non-convergence is reported in the result, never thrown.
MessageSet run_bp(const SymmetricState& state, const BpConfig& config,
                  const MessageSet* init, std::mt19937_64& rng);

// Single-qubit reduced density matrix from the message environment,
// renormalized to unit trace.
Eigen::Matrix2cd reduced_density_matrix(const SymmetricState& state,
                                        const MessageSet& messages, int a);

// Canonical form from the symmetric form plus a message fixed point. Exact
// on trees with converged messages; a heuristic otherwise. Message
// eigenvalues below rcond reduce the bond dimension.
VidalState to_vidal(const SymmetricState& state, const MessageSet& messages,
                    double rcond = 1e-12);

// Splits each lambda symmetrically into the two endpoint tensors.
SymmetricState to_symmetric(const VidalState& state);

// Diagonal messages reconstructed from the lambda vectors; at zero residual
// they are already the BP fixed point of the symmetric form.
MessageSet warm_start_messages(const VidalState& state);

// Average trace-norm deviation of the local orthogonality contraction from
// identity, over all 2|E| directions. Zero exactly in the Vidal gauge.
double vidal_residual(const VidalState& state);

struct RegaugeReport {
  double residual_before = 0.0;
  double residual_after = 0.0;
  int bp_iterations = 0;
  double bp_distance = 0.0;
  bool bp_converged = true;
};

// Symmetric form -> warm-started BP -> canonical form, in place.
RegaugeReport regauge(VidalState& state, const BpConfig& config, double rcond = 1e-12);

// Keeps the chi largest singular values of one edge; returns the discarded
// weight sqrt(sum of dropped lambda^2) before renormalization.
double truncate_edge(VidalState& state, int edge_index, int chi);

// Applies a single-qubit unitary; the gauge is untouched.
void apply_1q(VidalState& state, int a, const Eigen::Matrix2cd& w);

// Simple update for a two-qubit unitary on an existing edge: contract with
// neighboring lambdas, split by SVD, truncate to chi, divide the neighbor
// lambdas back out. Returns the estimated gate fidelity
// (sum of the retained normalized lambda^2)^2.
double apply_2q(VidalState& state, int a, int b, const Eigen::Matrix4cd& w, int chi,
                double rcond = 1e-12);

// Mean-field entanglement entropy of a bipartition: sum over cut edges of
// the lambda^2 Shannon entropies (natural log).
double approx_entropy(const VidalState& state, const Bipartition& cut);

}  // namespace gtqa
