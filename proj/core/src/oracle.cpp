#include "gtqa/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "gtqa/errors.hpp"
#include "gtqa/linalg.hpp"

namespace gtqa {

namespace {

constexpr int kMaxDenseQubits = 26;
constexpr std::int64_t kMaxDenseEntries = 1LL << kMaxDenseQubits;

}  // namespace

DenseState::DenseState(int n) : n_(n) {
  if (n < 1) throw Error(ErrorKind::Parameter, "need at least one qubit");
  if (n > kMaxDenseQubits)
    throw Error(ErrorKind::Capacity, "dense simulation is limited to 26 qubits");
  amps_.assign(1LL << n, cdouble(0.0, 0.0));
  amps_[0] = 1.0;
}

DenseState DenseState::plus_state(int n) {
  DenseState psi(n);
  const double amp = std::pow(2.0, -0.5 * n);
  std::fill(psi.amps_.begin(), psi.amps_.end(), cdouble(amp, 0.0));
  return psi;
}

DenseState DenseState::from_amplitudes(std::vector<cdouble> amplitudes) {
  int n = 0;
  while ((1LL << n) < static_cast<std::int64_t>(amplitudes.size())) ++n;
  if ((1LL << n) != static_cast<std::int64_t>(amplitudes.size()))
    throw Error(ErrorKind::Shape, "amplitude count must be a power of two");
  DenseState psi(n);
  psi.amps_ = std::move(amplitudes);
  return psi;
}

void DenseState::apply_1q(int q, const Eigen::Matrix2cd& w) {
  const std::int64_t mask = 1LL << q;
  const std::int64_t size = static_cast<std::int64_t>(amps_.size());
  const cdouble w00 = w(0, 0), w01 = w(0, 1), w10 = w(1, 0), w11 = w(1, 1);
  for (std::int64_t x = 0; x < size; ++x) {
    if (x & mask) continue;
    const cdouble a0 = amps_[x];
    const cdouble a1 = amps_[x | mask];
    amps_[x] = w00 * a0 + w01 * a1;
    amps_[x | mask] = w10 * a0 + w11 * a1;
  }
}

void DenseState::apply_2q(int a, int b, const Eigen::Matrix4cd& w) {
  const std::int64_t mask_a = 1LL << a;
  const std::int64_t mask_b = 1LL << b;
  const std::int64_t size = static_cast<std::int64_t>(amps_.size());
  double off_diag = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) off_diag += std::abs(w(i, j));
  if (off_diag == 0.0) {
    const cdouble d00 = w(0, 0), d01 = w(1, 1), d10 = w(2, 2), d11 = w(3, 3);
    for (std::int64_t x = 0; x < size; ++x) {
      const int idx = ((x & mask_a) ? 2 : 0) | ((x & mask_b) ? 1 : 0);
      amps_[x] *= (idx == 0) ? d00 : (idx == 1) ? d01 : (idx == 2) ? d10 : d11;
    }
    return;
  }
  for (std::int64_t x = 0; x < size; ++x) {
    if ((x & mask_a) || (x & mask_b)) continue;
    cdouble v[4] = {amps_[x], amps_[x | mask_b], amps_[x | mask_a], amps_[x | mask_a | mask_b]};
    for (int i = 0; i < 4; ++i) {
      cdouble acc = 0.0;
      for (int j = 0; j < 4; ++j) acc += w(i, j) * v[j];
      const std::int64_t y = x | ((i & 2) ? mask_a : 0) | ((i & 1) ? mask_b : 0);
      amps_[y] = acc;
    }
  }
}

double DenseState::norm() const {
  double acc = 0.0;
  for (const cdouble& v : amps_) acc += std::norm(v);
  return std::sqrt(acc);
}

void exact_evolve(const ProblemInstance& instance, const AnnealConfig& config,
                  const std::function<void(int layer, const DenseState&)>& per_layer) {
  const int n = instance.graph.vertex_count();
  if (n > kMaxDenseQubits)
    throw Error(ErrorKind::Capacity, "exact_evolve is limited to 26 qubits");
  const int layers = layer_count(config);
  DenseState psi = DenseState::plus_state(n);
  for (int k = 1; k <= layers; ++k) {
    for (const Gate& gate : trotter_layer(instance, config, k)) {
      if (gate.two_qubit)
        psi.apply_2q(gate.a, gate.b, gate.m4);
      else
        psi.apply_1q(gate.a, gate.m2);
    }
    if (per_layer) per_layer(k, psi);
  }
}

Eigen::Matrix2cd exact_rdm(const DenseState& psi, int a) {
  const std::int64_t mask = 1LL << a;
  const std::int64_t size = static_cast<std::int64_t>(psi.amplitudes().size());
  cdouble r00 = 0, r01 = 0, r11 = 0;
  const auto& amps = psi.amplitudes();
  for (std::int64_t x = 0; x < size; ++x) {
    if (x & mask) continue;
    const cdouble a0 = amps[x];
    const cdouble a1 = amps[x | mask];
    r00 += a0 * std::conj(a0);
    r11 += a1 * std::conj(a1);
    r01 += a0 * std::conj(a1);
  }
  Eigen::Matrix2cd rho;
  rho << r00, r01, std::conj(r01), r11;
  const double tr = rho.trace().real();
  if (!(tr > 1e-300)) throw Error(ErrorKind::Degenerate, "zero-norm state");
  return rho / tr;
}

Eigen::VectorXd exact_schmidt(const DenseState& psi, const Bipartition& cut) {
  const int n = psi.qubit_count();
  std::vector<int> side_a = cut.part_a, side_b = cut.part_b;
  if (side_a.size() > side_b.size()) std::swap(side_a, side_b);
  if (side_a.size() > 13)
    throw Error(ErrorKind::Capacity, "Schmidt decomposition limited to 13 qubits per side");
  if (static_cast<int>(side_a.size() + side_b.size()) != n)
    throw Error(ErrorKind::Shape, "bipartition does not cover the state");

  const std::int64_t rows = 1LL << side_a.size();
  const std::int64_t cols = 1LL << side_b.size();
  Eigen::MatrixXcd m(rows, cols);
  const auto& amps = psi.amplitudes();
  for (std::int64_t r = 0; r < rows; ++r) {
    std::int64_t base = 0;
    for (size_t i = 0; i < side_a.size(); ++i)
      if (r & (1LL << i)) base |= 1LL << side_a[i];
    for (std::int64_t c = 0; c < cols; ++c) {
      std::int64_t x = base;
      for (size_t i = 0; i < side_b.size(); ++i)
        if (c & (1LL << i)) x |= 1LL << side_b[i];
      m(r, c) = amps[x];
    }
  }
  return singular_values(m);
}

double exact_entropy(const DenseState& psi, const Bipartition& cut) {
  Eigen::VectorXd s = exact_schmidt(psi, cut);
  double entropy = 0.0;
  for (int i = 0; i < s.size(); ++i) {
    const double p = s(i) * s(i);
    if (p > 0) entropy -= p * std::log(p);
  }
  return entropy;
}

double trace_distance_error(const std::vector<std::vector<Eigen::Matrix2cd>>& exact_rdms,
                            const std::vector<std::vector<Eigen::Matrix2cd>>& approx_rdms,
                            double dt, double total_time) {
  if (exact_rdms.size() != approx_rdms.size() || exact_rdms.empty())
    throw Error(ErrorKind::Shape, "trajectories must cover the same layers");
  const size_t n = exact_rdms.front().size();
  double acc = 0.0;
  for (size_t k = 0; k < exact_rdms.size(); ++k) {
    if (exact_rdms[k].size() != n || approx_rdms[k].size() != n)
      throw Error(ErrorKind::Shape, "trajectories must cover the same qubits");
    for (size_t a = 0; a < n; ++a)
      acc += trace_norm(exact_rdms[k][a] - approx_rdms[k][a]);
  }
  return dt / (2.0 * total_time * static_cast<double>(n)) * acc;
}

double entropy_rel_error(const std::vector<double>& exact_trace,
                         const std::vector<double>& approx_trace) {
  if (exact_trace.size() != approx_trace.size())
    throw Error(ErrorKind::Shape, "entropy traces must have equal length");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < exact_trace.size(); ++i) {
    num += (exact_trace[i] - approx_trace[i]) * (exact_trace[i] - approx_trace[i]);
    den += exact_trace[i] * exact_trace[i];
  }
  if (!(den > 0))
    throw Error(ErrorKind::Domain, "exact entropy trace is identically zero");
  return std::sqrt(num / den);
}

OptimumResult brute_force_optimum(const ProblemInstance& instance) {
  const ConnectivityGraph& g = instance.graph;
  const int n = g.vertex_count();
  if (n > 30) throw Error(ErrorKind::Capacity, "exhaustive search limited to 30 spins");

  std::vector<int> x(n, 1);
  double value = objective(instance, x);
  OptimumResult best{x, value, 1};

  const std::uint64_t total = 1ULL << n;
  for (std::uint64_t step = 1; step < total; ++step) {
    // Gray code: flip the lowest set bit position of step.
    const int v = std::countr_zero(step);
    double local = instance.field[v];
    for (int u : g.neighbors(v)) local += instance.coupling[g.edge_index(v, u)] * x[u];
    value -= 2.0 * x[v] * local;
    x[v] = -x[v];
    if (value > best.value + 1e-9) {
      best.bitstring = x;
      best.value = objective(instance, best.bitstring);  // exact re-evaluation
      value = best.value;
      best.degeneracy = 1;
    } else if (std::abs(value - best.value) <= 1e-9) {
      ++best.degeneracy;
    }
  }
  return best;
}

namespace {

std::vector<cdouble> contract_network(std::vector<DenseTensor> tensors, int n) {
  if ((1LL << n) > kMaxDenseEntries)
    throw Error(ErrorKind::Capacity, "network too large to contract densely");
  // Greedy pairwise contraction minimizing the intermediate size.
  while (tensors.size() > 1) {
    std::int64_t best_size = -1;
    size_t best_i = 0, best_j = 1;
    std::vector<std::pair<std::string, std::string>> best_pairs;
    for (size_t i = 0; i < tensors.size(); ++i) {
      for (size_t j = i + 1; j < tensors.size(); ++j) {
        std::vector<std::pair<std::string, std::string>> pairs;
        std::int64_t size = 1;
        for (const Axis& ax : tensors[i].axes()) {
          if (tensors[j].has_axis(ax.label))
            pairs.push_back({ax.label, ax.label});
          else
            size *= ax.dim;
        }
        if (pairs.empty()) continue;
        for (const Axis& ax : tensors[j].axes())
          if (!tensors[i].has_axis(ax.label)) size *= ax.dim;
        if (best_size < 0 || size < best_size) {
          best_size = size;
          best_i = i;
          best_j = j;
          best_pairs = std::move(pairs);
        }
      }
    }
    if (best_size < 0)
      throw Error(ErrorKind::Topology, "network is disconnected");
    if (best_size > kMaxDenseEntries)
      throw Error(ErrorKind::Capacity, "intermediate tensor exceeds the dense limit");
    DenseTensor merged = contract(tensors[best_i], tensors[best_j], best_pairs);
    tensors.erase(tensors.begin() + best_j);
    tensors[best_i] = std::move(merged);
  }

  // Order axes [p_{n-1}, ..., p_0] so that bit a of the flat index is qubit a.
  std::vector<std::string> order;
  for (int a = n - 1; a >= 0; --a) order.push_back(physical_label(a));
  DenseTensor result = tensors.front().permuted(order);
  return result.data();
}

}  // namespace

std::vector<cdouble> dense_amplitudes(const SymmetricState& state) {
  return contract_network(state.tensors, state.graph.vertex_count());
}

std::vector<cdouble> dense_amplitudes(const VidalState& state) {
  return dense_amplitudes(to_symmetric(state));
}

double fidelity_vs_exact(const DenseState& psi, const VidalState& state) {
  if (psi.qubit_count() != state.graph.vertex_count())
    throw Error(ErrorKind::Shape, "qubit counts differ");
  std::vector<cdouble> tn = dense_amplitudes(state);
  cdouble overlap = 0.0;
  double tn_norm2 = 0.0, psi_norm2 = 0.0;
  const auto& exact = psi.amplitudes();
  for (size_t i = 0; i < tn.size(); ++i) {
    overlap += std::conj(exact[i]) * tn[i];
    tn_norm2 += std::norm(tn[i]);
    psi_norm2 += std::norm(exact[i]);
  }
  if (!(tn_norm2 > 0) || !(psi_norm2 > 0))
    throw Error(ErrorKind::Degenerate, "zero-norm state in fidelity");
  return std::norm(overlap) / (tn_norm2 * psi_norm2);
}

}  // namespace gtqa
