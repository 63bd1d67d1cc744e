#include "gtqa/anneal.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gtqa/errors.hpp"

namespace gtqa {

namespace {

constexpr cdouble kImag(0.0, 1.0);

void validate_config(const AnnealConfig& config) {
  if (config.total_time <= 0 || config.dt <= 0)
    throw Error(ErrorKind::Config, "total time and dt must be positive");
  if (config.chi < 1) throw Error(ErrorKind::Config, "chi must be >= 1");
  if (config.schedule_times.size() != config.schedule_values.size())
    throw Error(ErrorKind::Config, "tabulated schedule needs matching time/value lists");
}

}  // namespace

ProblemInstance random_qubo(const ConnectivityGraph& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ProblemInstance instance;
  instance.graph = g;
  instance.kind = ProblemKind::Qubo;
  instance.coupling.resize(g.edge_count());
  for (double& j : instance.coupling) j = gauss(rng);
  instance.field.resize(g.vertex_count());
  for (double& h : instance.field) h = gauss(rng);
  return instance;
}

ProblemInstance maxcut_instance(const ConnectivityGraph& g) {
  ProblemInstance instance;
  instance.graph = g;
  instance.kind = ProblemKind::MaxCut;
  instance.coupling.assign(g.edge_count(), -1.0);
  instance.field.assign(g.vertex_count(), 0.0);
  return instance;
}

double objective(const ProblemInstance& instance, const std::vector<int>& x) {
  const ConnectivityGraph& g = instance.graph;
  if (static_cast<int>(x.size()) != g.vertex_count())
    throw Error(ErrorKind::Shape, "bitstring length does not match the instance");
  for (int v : x)
    if (v != 1 && v != -1) throw Error(ErrorKind::Domain, "spins must be +1 or -1");
  double value = 0.0;
  for (int e = 0; e < g.edge_count(); ++e)
    value += instance.coupling[e] * x[g.edge(e).a] * x[g.edge(e).b];
  for (int a = 0; a < g.vertex_count(); ++a) value += instance.field[a] * x[a];
  return value;
}

long cut_value(const ProblemInstance& instance, const std::vector<int>& x) {
  const ConnectivityGraph& g = instance.graph;
  if (static_cast<int>(x.size()) != g.vertex_count())
    throw Error(ErrorKind::Shape, "bitstring length does not match the instance");
  long cut = 0;
  for (const Edge& e : g.edges())
    if (x[e.a] != x[e.b]) ++cut;
  return cut;
}

int layer_count(const AnnealConfig& config) {
  validate_config(config);
  const double ratio = config.total_time / config.dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9)
    throw Error(ErrorKind::Config, "total time must be an integer multiple of dt");
  return static_cast<int>(rounded);
}

double schedule_value(const AnnealConfig& config, double t) {
  if (config.schedule_times.empty()) return 1.0 - t / config.total_time;
  const auto& ts = config.schedule_times;
  const auto& vs = config.schedule_values;
  if (t <= ts.front()) return vs.front();
  if (t >= ts.back()) return vs.back();
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  size_t i = static_cast<size_t>(it - ts.begin());
  const double w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
  return vs[i - 1] * (1.0 - w) + vs[i] * w;
}

Eigen::Matrix2cd mixing_gate(double theta) {
  Eigen::Matrix2cd w;
  const double c = std::cos(theta), s = std::sin(theta);
  w << c, -kImag * s, -kImag * s, c;
  return w;
}

Eigen::Matrix4cd interaction_gate(double t, double coupling, double field_a, double field_b) {
  Eigen::Matrix4cd w = Eigen::Matrix4cd::Zero();
  for (int ia = 0; ia < 2; ++ia)
    for (int ib = 0; ib < 2; ++ib) {
      const double sa = 1.0 - 2.0 * ia;
      const double sb = 1.0 - 2.0 * ib;
      const double energy = coupling * sa * sb + field_a * sa + field_b * sb;
      w(2 * ia + ib, 2 * ia + ib) = std::exp(-kImag * t * energy);
    }
  return w;
}

Eigen::Matrix2cd field_gate(double t, double field) {
  Eigen::Matrix2cd w = Eigen::Matrix2cd::Zero();
  w(0, 0) = std::exp(-kImag * t * field);
  w(1, 1) = std::exp(kImag * t * field);
  return w;
}

std::vector<Gate> trotter_layer(const ProblemInstance& instance, const AnnealConfig& config,
                                int k) {
  if (k < 1 || k > layer_count(config))
    throw Error(ErrorKind::Config, "layer index out of range");
  const ConnectivityGraph& g = instance.graph;
  const double s = schedule_value(config, k * config.dt);
  const double t_interaction = config.dt * (1.0 - s);
  const double t_mixing = config.dt * s;

  std::vector<Gate> gates;
  gates.reserve(g.edge_count() + g.vertex_count());
  for (int e = 0; e < g.edge_count(); ++e) {
    const Edge edge = g.edge(e);
    Gate gate;
    gate.two_qubit = true;
    gate.a = edge.a;
    gate.b = edge.b;
    gate.m4 = interaction_gate(t_interaction, instance.coupling[e],
                               instance.field[edge.a] / g.degree(edge.a),
                               instance.field[edge.b] / g.degree(edge.b));
    gates.push_back(std::move(gate));
  }
  for (int a = 0; a < g.vertex_count(); ++a) {
    if (g.degree(a) == 0 && instance.field[a] != 0.0) {
      Gate gate;
      gate.a = a;
      gate.m2 = field_gate(t_interaction, instance.field[a]);
      gates.push_back(std::move(gate));
    }
  }
  for (int a = 0; a < g.vertex_count(); ++a) {
    Gate gate;
    gate.a = a;
    gate.m2 = mixing_gate(t_mixing);
    gates.push_back(std::move(gate));
  }
  return gates;
}

GateCounts trotter_gate_counts(const ProblemInstance& instance, const AnnealConfig& config) {
  const long layers = layer_count(config);
  long isolated_fields = 0;
  for (int a = 0; a < instance.graph.vertex_count(); ++a)
    if (instance.graph.degree(a) == 0 && instance.field[a] != 0.0) ++isolated_fields;
  GateCounts counts;
  counts.layers = layers;
  counts.two_qubit = layers * instance.graph.edge_count();
  counts.one_qubit = layers * (instance.graph.vertex_count() + isolated_fields);
  return counts;
}

namespace {

struct LayerOutcome {
  double fidelity_product = 1.0;
  double max_truncation_error = 0.0;
};

// Applies one Trotter layer in place and returns the gate fidelity product.
LayerOutcome apply_layer(VidalState& state, const ProblemInstance& instance,
                         const AnnealConfig& config, int k) {
  LayerOutcome outcome;
  for (const Gate& gate : trotter_layer(instance, config, k)) {
    if (gate.two_qubit) {
      double f = apply_2q(state, gate.a, gate.b, gate.m4, config.chi, config.rcond);
      outcome.fidelity_product *= f;
      outcome.max_truncation_error =
          std::max(outcome.max_truncation_error, std::sqrt(std::max(0.0, 1.0 - std::sqrt(f))));
    } else {
      apply_1q(state, gate.a, gate.m2);
    }
  }
  return outcome;
}

std::pair<VidalState, RunReport> drive(const ProblemInstance& instance, const AnnealConfig& config,
                                       VidalState state, int first_layer, double fidelity,
                                       RunReport report, const CheckpointSink& checkpoint_sink) {
  const ConnectivityGraph& g = instance.graph;
  const int layers = layer_count(config);
  const BpConfig bp = config.bp();
  std::mt19937_64 rng(config.seed);

  for (int k = first_layer; k <= layers; ++k) {
    LayerOutcome outcome = apply_layer(state, instance, config, k);
    fidelity *= outcome.fidelity_product;

    LayerDiagnostics diag;
    diag.residual_before = vidal_residual(state);
    diag.max_truncation_error = outcome.max_truncation_error;

    SymmetricState sym = to_symmetric(state);
    MessageSet warm = warm_start_messages(state);
    MessageSet msgs = run_bp(sym, bp, &warm, rng);
    diag.bp_iterations = msgs.iterations;
    diag.bp_distance = msgs.final_distance;
    diag.bp_converged = msgs.converged;

    if (diag.residual_before > config.r_max) {
      state = to_vidal(sym, msgs, config.rcond);
      diag.regauged = true;
    }

    std::vector<double> z_row(g.vertex_count());
    std::vector<Eigen::Matrix2cd> rdm_row;
    if (config.record_rdms) rdm_row.resize(g.vertex_count());
    for (int a = 0; a < g.vertex_count(); ++a) {
      Eigen::Matrix2cd rho = reduced_density_matrix(sym, msgs, a);
      z_row[a] = rho(0, 0).real() - rho(1, 1).real();
      if (config.record_rdms) rdm_row[a] = rho;
    }
    report.z_trajectory.push_back(std::move(z_row));
    if (config.record_rdms) report.rdm_trajectory.push_back(std::move(rdm_row));
    report.entropy_trace.push_back(approx_entropy(state, report.bipartition));
    report.infidelity_trace.push_back(1.0 - fidelity);
    report.layer_diagnostics.push_back(diag);

    if (checkpoint_sink && config.checkpoint_every > 0 && k % config.checkpoint_every == 0 &&
        k < layers) {
      RunCheckpoint cp;
      cp.next_layer = k + 1;
      cp.fidelity = fidelity;
      cp.state = state;
      cp.partial = report;
      checkpoint_sink(cp);
    }
  }

  report.layers = layers;
  report.final_fidelity = fidelity;
  report.bitstring = round_readout(state, bp, config.rcond);
  report.objective_value = objective(instance, report.bitstring);
  return {std::move(state), std::move(report)};
}

}  // namespace

std::pair<VidalState, RunReport> run_gtqa(const ProblemInstance& instance,
                                          const AnnealConfig& config,
                                          const CheckpointSink& checkpoint_sink) {
  validate_config(config);
  if (!instance.graph.is_connected())
    throw Error(ErrorKind::Parameter, "annealing requires a connected instance graph");
  RunReport report;
  report.bipartition = spectral_bipartition(instance.graph);
  VidalState state = plus_product_state(instance.graph);
  return drive(instance, config, std::move(state), 1, 1.0, std::move(report), checkpoint_sink);
}

std::pair<VidalState, RunReport> resume_gtqa(const ProblemInstance& instance,
                                             const AnnealConfig& config,
                                             const RunCheckpoint& checkpoint,
                                             const CheckpointSink& checkpoint_sink) {
  validate_config(config);
  return drive(instance, config, checkpoint.state, checkpoint.next_layer, checkpoint.fidelity,
               checkpoint.partial, checkpoint_sink);
}

std::vector<int> round_readout(const VidalState& state, const BpConfig& bp, double rcond) {
  VidalState work = state;
  regauge(work, bp, rcond);
  SymmetricState sym = to_symmetric(work);
  MessageSet warm = warm_start_messages(work);
  std::mt19937_64 rng(0);
  MessageSet msgs = run_bp(sym, bp, &warm, rng);
  std::vector<int> bits(state.graph.vertex_count());
  for (int a = 0; a < state.graph.vertex_count(); ++a) {
    Eigen::Matrix2cd rho = reduced_density_matrix(sym, msgs, a);
    bits[a] = rho(0, 0).real() > 0.5 ? 1 : -1;
  }
  return bits;
}

double estimate_fidelity(const RunReport& report) { return report.final_fidelity; }

}  // namespace gtqa
