// Problem encoding (QUBO / MaxCut), Trotterized annealing circuits and the
// graph tensor-network annealing driver with its run diagnostics.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gtqa/graph.hpp"
#include "gtqa/tn.hpp"

namespace gtqa {

enum class ProblemKind { Qubo, MaxCut };

struct ProblemInstance {
  ConnectivityGraph graph;
  std::vector<double> coupling;  // J per edge index
  std::vector<double> field;     // h per vertex
  ProblemKind kind = ProblemKind::Qubo;
};

// J and h i.i.d. standard normal; deterministic under the seed.
ProblemInstance random_qubo(const ConnectivityGraph& g, std::uint64_t seed);
// J = -1 on every edge, h = 0.
ProblemInstance maxcut_instance(const ConnectivityGraph& g);

// sum J_ab x_a x_b + sum h_a x_a over spins in {-1,+1}. Domain error on any
// other entry.
double objective(const ProblemInstance& instance, const std::vector<int>& x);
// Number of cut edges; meaningful for MaxCut instances.
long cut_value(const ProblemInstance& instance, const std::vector<int>& x);

struct AnnealConfig {
  double total_time = 20.0;
  double dt = 0.2;
  int chi = 4;
  double bp_eps = 1e-8;
  int bp_max_iters = 100;
  double bp_damping = 0.0;
  double r_max = 1e-3;
  double rcond = 1e-12;
  std::uint64_t seed = 0;
  int checkpoint_every = 100;          // layers; 0 disables
  std::string checkpoint_path;         // empty disables
  bool record_rdms = false;
  // Optional tabulated schedule s(t), linearly interpolated; empty means the
  // built-in linear ramp s(t) = 1 - t/T.
  std::vector<double> schedule_times;
  std::vector<double> schedule_values;

  BpConfig bp() const { return {bp_eps, bp_max_iters, bp_damping, false}; }
};

// Number of Trotter layers T/dt; Config error when not integral within 1e-9.
int layer_count(const AnnealConfig& config);
// Mixing weight s at time t (linear by default, tabulated when provided).
double schedule_value(const AnnealConfig& config, double t);

// exp(-i theta X)
Eigen::Matrix2cd mixing_gate(double theta);
// exp(-i t (J Z Z + ha Z ⊗ I + hb I ⊗ Z)); diagonal.
Eigen::Matrix4cd interaction_gate(double t, double coupling, double field_a, double field_b);
// exp(-i t h Z); used for isolated vertices whose field cannot ride on an edge.
Eigen::Matrix2cd field_gate(double t, double field);

struct Gate {
  bool two_qubit = false;
  int a = 0;
  int b = 0;  // valid when two_qubit
  Eigen::Matrix4cd m4;
  Eigen::Matrix2cd m2;
};

// Gates of layer k (1-based): the interaction sub-layer in canonical edge
// order followed by the mixing sub-layer in vertex order.
std::vector<Gate> trotter_layer(const ProblemInstance& instance, const AnnealConfig& config, int k);

struct GateCounts {
  long layers = 0;
  long one_qubit = 0;
  long two_qubit = 0;
};
// Stream-counts the circuit without building gate matrices.
GateCounts trotter_gate_counts(const ProblemInstance& instance, const AnnealConfig& config);

struct LayerDiagnostics {
  double residual_before = 0.0;
  bool regauged = false;
  int bp_iterations = 0;
  double bp_distance = 0.0;
  bool bp_converged = true;
  double max_truncation_error = 0.0;
};

struct RunReport {
  std::vector<std::vector<double>> z_trajectory;  // [layer][vertex]
  std::vector<double> entropy_trace;              // per layer
  std::vector<double> infidelity_trace;           // per layer, 1 - F
  std::vector<LayerDiagnostics> layer_diagnostics;
  std::vector<std::vector<Eigen::Matrix2cd>> rdm_trajectory;  // when recorded
  Bipartition bipartition;
  std::vector<int> bitstring;
  double objective_value = 0.0;
  double final_fidelity = 1.0;
  int layers = 0;
};

// Mid-run snapshot for checkpoint / resume.
struct RunCheckpoint {
  int next_layer = 1;  // 1-based layer to execute next
  double fidelity = 1.0;
  VidalState state;
  RunReport partial;
};

using CheckpointSink = std::function<void(const RunCheckpoint&)>;

// Full annealing run from |+>^N: layer-by-layer gate application with
// truncation at chi, residual-triggered regauging, per-layer readout of <Z>,
// mean-field entropy and cumulative infidelity, final rounding readout.
std::pair<VidalState, RunReport> run_gtqa(const ProblemInstance& instance,
                                          const AnnealConfig& config,
                                          const CheckpointSink& checkpoint_sink = {});

// Continues a checkpointed run; produces the identical report the
// uninterrupted run would have produced.
std::pair<VidalState, RunReport> resume_gtqa(const ProblemInstance& instance,
                                             const AnnealConfig& config,
                                             const RunCheckpoint& checkpoint,
                                             const CheckpointSink& checkpoint_sink = {});

// Regauge, rerun BP and round each single-qubit reduced state:
// +1 when rho[0][0] > 1/2, otherwise -1.
std::vector<int> round_readout(const VidalState& state, const BpConfig& bp = {},
                               double rcond = 1e-12);

// Product of the recorded two-qubit gate fidelities.
double estimate_fidelity(const RunReport& report);

}  // namespace gtqa
