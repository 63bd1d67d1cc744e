#include "gtqa/tn.hpp"

#include <algorithm>
#include <cmath>

#include "gtqa/errors.hpp"
#include "gtqa/linalg.hpp"

namespace gtqa {

namespace {

using RowMatrix = Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::MatrixXcd tensor_as_matrix(const DenseTensor& t, std::int64_t rows, std::int64_t cols) {
  return Eigen::Map<const RowMatrix>(t.data().data(), rows, cols);
}

DenseTensor matrix_as_tensor(const Eigen::MatrixXcd& m, std::vector<Axis> axes) {
  DenseTensor t(std::move(axes));
  Eigen::Map<RowMatrix>(t.data().data(), m.rows(), m.cols()) = m;
  return t;
}

Eigen::VectorXd pseudo_inverse(const Eigen::VectorXd& v, double rcond) {
  Eigen::VectorXd out(v.size());
  const double cutoff = v.size() ? rcond * v.maxCoeff() : 0.0;
  for (int i = 0; i < v.size(); ++i) out(i) = v(i) > cutoff ? 1.0 / v(i) : 0.0;
  return out;
}

void hermitize(Eigen::MatrixXcd& m) { m = 0.5 * (m + m.adjoint()).eval(); }

// out[..., i, ...] = sum_j m(i, j) t[..., j, ...] along the axis at `pos`.
// One GEMM per leading block; axis order is preserved.
DenseTensor axis_mode_product(const DenseTensor& t, int pos, const Eigen::MatrixXcd& m) {
  const auto strides = t.strides();
  const std::int64_t post = strides[pos];
  const int d_in = t.axis(pos).dim;
  const int d_out = static_cast<int>(m.rows());
  if (m.cols() != d_in) throw Error(ErrorKind::Shape, "mode product dimension mismatch");
  std::vector<Axis> axes = t.axes();
  axes[pos].dim = d_out;
  DenseTensor out(std::move(axes));
  const std::int64_t pre = t.size() / (static_cast<std::int64_t>(d_in) * post);
  const cdouble* src = t.data().data();
  cdouble* dst = out.data().data();
  for (std::int64_t b = 0; b < pre; ++b) {
    Eigen::Map<const RowMatrix> in(src + b * d_in * post, d_in, post);
    Eigen::Map<RowMatrix> res(dst + b * d_out * post, d_out, post);
    res.noalias() = m * in;
  }
  return out;
}

// M[j, j'] = sum over all other axes of x[pre, j, post] * conj(y[pre, j', post]).
// x and y must share the same shape.
Eigen::MatrixXcd pair_environment(const DenseTensor& x, const DenseTensor& y, int pos) {
  const auto strides = x.strides();
  const std::int64_t post = strides[pos];
  const int d = x.axis(pos).dim;
  if (y.size() != x.size() || y.axis(pos).dim != d)
    throw Error(ErrorKind::Shape, "environment pair shape mismatch");
  const std::int64_t pre = x.size() / (static_cast<std::int64_t>(d) * post);
  Eigen::MatrixXcd result = Eigen::MatrixXcd::Zero(d, d);
  const cdouble* xs = x.data().data();
  const cdouble* ys = y.data().data();
  for (std::int64_t b = 0; b < pre; ++b) {
    Eigen::Map<const RowMatrix> xm(xs + b * d * post, d, post);
    Eigen::Map<const RowMatrix> ym(ys + b * d * post, d, post);
    result.noalias() += xm * ym.adjoint();
  }
  return result;
}

// Local orthogonality contraction for the direction a -> b: the Gamma tensor
// against its conjugate over the physical axis and the lambda^2-weighted
// bonds towards all neighbors except b. Identity exactly in the Vidal gauge.
Eigen::MatrixXcd orthogonality_overlap(const VidalState& state, int a, int b) {
  const ConnectivityGraph& g = state.graph;
  DenseTensor ket = state.gammas[a];
  for (int c : g.neighbors(a)) {
    if (c == b) continue;
    ket.scale_axis(bond_label(a, c), state.lambdas[g.edge_index(a, c)]);
  }
  return pair_environment(ket, ket, ket.axis_index(bond_label(a, b)));
}

// Environment contraction of one vertex tensor against its conjugate with
// the given per-neighbor bond matrices (first index on the ket side),
// leaving open either the bond towards `to`, or the physical axis when
// to < 0. Mode products keep the axis layout, so the closing contraction is
// a single slab pass.
Eigen::MatrixXcd contract_vertex_environment(const ConnectivityGraph& g,
                                             const DenseTensor& tensor, int vertex, int to,
                                             const std::vector<const Eigen::MatrixXcd*>& incoming) {
  DenseTensor weighted;
  bool have = false;
  for (size_t k = 0; k < g.neighbors(vertex).size(); ++k) {
    int c = g.neighbors(vertex)[k];
    if (c == to) continue;
    const int pos = tensor.axis_index(bond_label(vertex, c));
    weighted = axis_mode_product(have ? weighted : tensor, pos, incoming[k]->transpose());
    have = true;
  }
  const DenseTensor& ket = have ? weighted : tensor;
  const int open_pos = to >= 0 ? tensor.axis_index(bond_label(vertex, to))
                               : tensor.axis_index(physical_label(vertex));
  return pair_environment(ket, tensor, open_pos);
}

}  // namespace

std::string physical_label(int vertex) { return "p" + std::to_string(vertex); }

std::string bond_label(int a, int b) {
  auto [lo, hi] = std::minmax(a, b);
  return "b" + std::to_string(lo) + "_" + std::to_string(hi);
}

std::string primed(const std::string& label) { return label + "'"; }

std::vector<std::string> canonical_axes(const ConnectivityGraph& g, int vertex) {
  std::vector<std::string> order{physical_label(vertex)};
  for (int c : g.neighbors(vertex)) order.push_back(bond_label(vertex, c));
  return order;
}

int VidalState::max_bond_dim() const {
  int m = 0;
  for (const auto& l : lambdas) m = std::max(m, static_cast<int>(l.size()));
  return m;
}

int MessageSet::slot(const ConnectivityGraph& g, int from, int to) {
  int e = g.edge_index(from, to);
  return 2 * e + (from < to ? 0 : 1);
}

const Eigen::MatrixXcd& MessageSet::at(const ConnectivityGraph& g, int from, int to) const {
  return messages[slot(g, from, to)];
}

Eigen::MatrixXcd& MessageSet::at(const ConnectivityGraph& g, int from, int to) {
  return messages[slot(g, from, to)];
}

VidalState product_state(const ConnectivityGraph& g,
                         const std::vector<Eigen::Vector2cd>& amplitudes) {
  if (static_cast<int>(amplitudes.size()) != g.vertex_count())
    throw Error(ErrorKind::Shape, "one amplitude pair per vertex required");
  VidalState state;
  state.graph = g;
  state.gammas.reserve(g.vertex_count());
  for (int a = 0; a < g.vertex_count(); ++a) {
    if (std::abs(amplitudes[a].norm() - 1.0) > 1e-10)
      throw Error(ErrorKind::Domain, "product-state amplitudes must have unit norm");
    std::vector<Axis> axes{{physical_label(a), 2}};
    for (int c : g.neighbors(a)) axes.push_back({bond_label(a, c), 1});
    DenseTensor t(axes, {amplitudes[a](0), amplitudes[a](1)});
    state.gammas.push_back(std::move(t));
  }
  state.lambdas.assign(g.edge_count(), Eigen::VectorXd::Ones(1));
  return state;
}

VidalState plus_product_state(const ConnectivityGraph& g) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  std::vector<Eigen::Vector2cd> amps(g.vertex_count(), Eigen::Vector2cd(inv_sqrt2, inv_sqrt2));
  return product_state(g, amps);
}

MessageSet run_bp(const SymmetricState& state, const BpConfig& config,
                  const MessageSet* init, std::mt19937_64& rng) {
  if (config.eps <= 0) throw Error(ErrorKind::Parameter, "BP tolerance must be positive");
  if (config.max_iters < 1) throw Error(ErrorKind::Parameter, "BP needs at least one sweep");
  const ConnectivityGraph& g = state.graph;
  const int num_edges = g.edge_count();

  MessageSet msgs;
  if (num_edges == 0) {
    msgs.iterations = 1;
    msgs.converged = true;
    return msgs;
  }
  if (init) {
    if (static_cast<int>(init->messages.size()) != 2 * num_edges)
      throw Error(ErrorKind::Shape, "warm-start message count does not match the graph");
    msgs.messages = init->messages;
    for (int e = 0; e < num_edges; ++e)
      for (int s = 0; s < 2; ++s)
        if (msgs.messages[2 * e + s].rows() != state.bond_dims[e])
          throw Error(ErrorKind::Shape, "warm-start message dimension mismatch");
  } else {
    msgs.messages.resize(2 * num_edges);
    for (int e = 0; e < num_edges; ++e) {
      msgs.messages[2 * e] = random_density_matrix(state.bond_dims[e], rng);
      msgs.messages[2 * e + 1] = random_density_matrix(state.bond_dims[e], rng);
    }
  }

  // Incoming message pointers per vertex, aligned with the neighbor lists.
  auto incoming_for = [&](const MessageSet& source, int vertex) {
    std::vector<const Eigen::MatrixXcd*> in;
    in.reserve(g.neighbors(vertex).size());
    for (int c : g.neighbors(vertex)) in.push_back(&source.at(g, c, vertex));
    return in;
  };

  auto update_direction = [&](const MessageSet& source, int from, int to) {
    Eigen::MatrixXcd m =
        contract_vertex_environment(g, state.tensors[from], from, to, incoming_for(source, from));
    hermitize(m);
    double tr = m.trace().real();
    if (!(tr > 1e-300))
      throw Error(ErrorKind::Degenerate, "BP message with non-positive trace");
    m /= tr;
    return m;
  };

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    double dist = 0.0;
    MessageSet snapshot;
    const MessageSet& source = config.synchronous ? snapshot : msgs;
    if (config.synchronous) snapshot.messages = msgs.messages;
    for (int e = 0; e < num_edges; ++e) {
      const Edge edge = g.edge(e);
      for (auto [from, to] : {std::pair{edge.a, edge.b}, std::pair{edge.b, edge.a}}) {
        Eigen::MatrixXcd next = update_direction(source, from, to);
        Eigen::MatrixXcd& slot_ref = msgs.at(g, from, to);
        if (config.damping > 0) {
          next = (1.0 - config.damping) * next + config.damping * slot_ref;
          hermitize(next);
          next /= next.trace().real();
        }
        dist += trace_norm(next - slot_ref);
        slot_ref = std::move(next);
      }
    }
    msgs.iterations = iter;
    msgs.final_distance = dist / num_edges;
    if (msgs.final_distance < config.eps) {
      msgs.converged = true;
      break;
    }
  }
  return msgs;
}

Eigen::Matrix2cd reduced_density_matrix(const SymmetricState& state, const MessageSet& messages,
                                        int a) {
  const ConnectivityGraph& g = state.graph;
  std::vector<const Eigen::MatrixXcd*> incoming;
  incoming.reserve(g.neighbors(a).size());
  for (int c : g.neighbors(a)) incoming.push_back(&messages.at(g, c, a));
  Eigen::MatrixXcd rho = contract_vertex_environment(g, state.tensors[a], a, -1, incoming);
  hermitize(rho);
  double tr = rho.trace().real();
  if (!(tr > 1e-300))
    throw Error(ErrorKind::Degenerate, "reduced density matrix has zero trace");
  return (rho / tr).eval();
}

namespace {

struct SqrtFactors {
  Eigen::MatrixXcd sq;   // m^{1/2} restricted to the retained eigenspace
  Eigen::MatrixXcd isq;  // pseudo-inverse square root on the same eigenspace
};

// Both square-root factors from one eigendecomposition with a shared cutoff,
// so that directions below rcond are exactly dead in both (a rank-deficient
// message then cannot leak noise into the singular spectrum).
SqrtFactors message_sqrt_factors(const Eigen::MatrixXcd& m, double rcond) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::Numerical, "message eigensolver failed");
  Eigen::VectorXd ev = solver.eigenvalues();
  const double cutoff = rcond * std::max(0.0, ev(ev.size() - 1));
  Eigen::VectorXd root(ev.size()), inv_root(ev.size());
  int kept = 0;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) > cutoff && ev(i) > 0) {
      root(i) = std::sqrt(ev(i));
      inv_root(i) = 1.0 / root(i);
      ++kept;
    } else {
      root(i) = 0.0;
      inv_root(i) = 0.0;
    }
  }
  if (kept == 0) throw Error(ErrorKind::Degenerate, "message is numerically zero");
  const Eigen::MatrixXcd& v = solver.eigenvectors();
  return {v * root.asDiagonal() * v.adjoint(), v * inv_root.asDiagonal() * v.adjoint()};
}

}  // namespace

VidalState to_vidal(const SymmetricState& state, const MessageSet& messages, double rcond) {
  const ConnectivityGraph& g = state.graph;
  VidalState out;
  out.graph = g;
  out.gammas = state.tensors;
  out.lambdas.resize(g.edge_count());

  for (int e = 0; e < g.edge_count(); ++e) {
    const Edge edge = g.edge(e);
    SqrtFactors f_ab = message_sqrt_factors(messages.at(g, edge.a, edge.b), rcond);
    SqrtFactors f_ba = message_sqrt_factors(messages.at(g, edge.b, edge.a), rcond);
    const Eigen::MatrixXcd& sq_ab = f_ab.sq;
    const Eigen::MatrixXcd& sq_ba = f_ba.sq;
    const Eigen::MatrixXcd& isq_ab = f_ab.isq;
    const Eigen::MatrixXcd& isq_ba = f_ba.isq;

    MatrixSvd dec = svd(sq_ab.transpose() * sq_ba);
    // Drop directions the messages cannot support.
    int keep = 0;
    const double cutoff = dec.s.size() ? rcond * dec.s(0) : 0.0;
    while (keep < dec.s.size() && dec.s(keep) > cutoff) ++keep;
    if (keep == 0) throw Error(ErrorKind::Degenerate, "all singular values vanished on an edge");

    Eigen::VectorXd lambda = dec.s.head(keep);
    lambda /= lambda.norm();
    out.lambdas[e] = lambda;

    Eigen::MatrixXcd gauge_a = isq_ab.transpose() * dec.u.leftCols(keep);
    Eigen::MatrixXcd gauge_b = (isq_ba * dec.vh.topRows(keep).adjoint()).conjugate();

    const std::string label = bond_label(edge.a, edge.b);
    auto absorb = [&](DenseTensor& gamma, const Eigen::MatrixXcd& gauge) {
      // new bond index = sum over the old one: mode product with gauge^T
      gamma = axis_mode_product(gamma, gamma.axis_index(label), gauge.transpose());
    };
    absorb(out.gammas[edge.a], gauge_a);
    absorb(out.gammas[edge.b], gauge_b);
  }

  // Unit-trace messages leave one positive scalar per vertex undetermined;
  // fix it from the local orthogonality contraction.
  for (int a = 0; a < g.vertex_count(); ++a) {
    if (g.degree(a) == 0) {
      double nrm = out.gammas[a].norm();
      if (!(nrm > 1e-300)) throw Error(ErrorKind::Degenerate, "vertex tensor vanished");
      for (cdouble& v : out.gammas[a].data()) v /= nrm;
      continue;
    }
    double kappa_acc = 0.0;
    for (int b : g.neighbors(a)) {
      Eigen::MatrixXcd overlap = orthogonality_overlap(out, a, b);
      kappa_acc += overlap.trace().real() / overlap.rows();
    }
    double kappa = kappa_acc / g.degree(a);
    if (!(kappa > 1e-300)) throw Error(ErrorKind::Degenerate, "vertex weight vanished in regauge");
    const double scale = 1.0 / std::sqrt(kappa);
    for (cdouble& v : out.gammas[a].data()) v *= scale;
  }
  return out;
}

SymmetricState to_symmetric(const VidalState& state) {
  const ConnectivityGraph& g = state.graph;
  SymmetricState out;
  out.graph = g;
  out.tensors = state.gammas;
  out.bond_dims.resize(g.edge_count());
  for (int e = 0; e < g.edge_count(); ++e) out.bond_dims[e] = state.bond_dim(e);
  for (int a = 0; a < g.vertex_count(); ++a) {
    for (int c : g.neighbors(a)) {
      const Eigen::VectorXd& lambda = state.lambdas[g.edge_index(a, c)];
      out.tensors[a].scale_axis(bond_label(a, c), lambda.cwiseSqrt());
    }
  }
  return out;
}

MessageSet warm_start_messages(const VidalState& state) {
  const ConnectivityGraph& g = state.graph;
  MessageSet msgs;
  msgs.messages.resize(2 * g.edge_count());
  for (int e = 0; e < g.edge_count(); ++e) {
    const Eigen::VectorXd& lambda = state.lambdas[e];
    Eigen::VectorXd diag = lambda / lambda.sum();
    Eigen::MatrixXcd m = diag.asDiagonal();
    msgs.messages[2 * e] = m;
    msgs.messages[2 * e + 1] = std::move(m);
  }
  msgs.converged = true;
  return msgs;
}

double vidal_residual(const VidalState& state) {
  const ConnectivityGraph& g = state.graph;
  if (g.edge_count() == 0) return 0.0;
  double acc = 0.0;
  for (int a = 0; a < g.vertex_count(); ++a) {
    for (int b : g.neighbors(a)) {
      Eigen::MatrixXcd overlap = orthogonality_overlap(state, a, b);
      acc += trace_norm(overlap - Eigen::MatrixXcd::Identity(overlap.rows(), overlap.cols()));
    }
  }
  return acc / (2.0 * g.edge_count());
}

RegaugeReport regauge(VidalState& state, const BpConfig& config, double rcond) {
  RegaugeReport report;
  report.residual_before = vidal_residual(state);
  SymmetricState sym = to_symmetric(state);
  MessageSet warm = warm_start_messages(state);
  std::mt19937_64 unused_rng(0);
  MessageSet msgs = run_bp(sym, config, &warm, unused_rng);
  report.bp_iterations = msgs.iterations;
  report.bp_distance = msgs.final_distance;
  report.bp_converged = msgs.converged;
  state = to_vidal(sym, msgs, rcond);
  report.residual_after = vidal_residual(state);
  return report;
}

double truncate_edge(VidalState& state, int edge_index, int chi) {
  if (chi < 1) throw Error(ErrorKind::Parameter, "chi must be >= 1");
  Eigen::VectorXd& lambda = state.lambdas[edge_index];
  const int dim = static_cast<int>(lambda.size());
  if (chi >= dim) return 0.0;
  const double discarded = std::sqrt(std::max(0.0, lambda.tail(dim - chi).squaredNorm()));
  const Edge edge = state.graph.edge(edge_index);
  const std::string label = bond_label(edge.a, edge.b);
  state.gammas[edge.a] = state.gammas[edge.a].sliced_axis(label, chi);
  state.gammas[edge.b] = state.gammas[edge.b].sliced_axis(label, chi);
  Eigen::VectorXd kept = lambda.head(chi);
  double nrm = kept.norm();
  if (!(nrm > 1e-300)) throw Error(ErrorKind::Degenerate, "all retained singular values vanish");
  lambda = kept / nrm;
  return discarded;
}

void apply_1q(VidalState& state, int a, const Eigen::Matrix2cd& w) {
  if ((w.adjoint() * w - Eigen::Matrix2cd::Identity()).norm() > 1e-12)
    throw Error(ErrorKind::Domain, "single-qubit gate is not unitary");
  DenseTensor& gamma = state.gammas[a];
  gamma = axis_mode_product(gamma, gamma.axis_index(physical_label(a)), w);
}

double apply_2q(VidalState& state, int a, int b, const Eigen::Matrix4cd& w, int chi,
                double rcond) {
  if (chi < 1) throw Error(ErrorKind::Parameter, "chi must be >= 1");
  if ((w.adjoint() * w - Eigen::Matrix4cd::Identity()).norm() > 1e-12)
    throw Error(ErrorKind::Domain, "two-qubit gate is not unitary");
  const ConnectivityGraph& g = state.graph;
  if (!g.has_edge(a, b))
    throw Error(ErrorKind::Topology, "two-qubit gate addressed a non-edge");
  const int e_ab = g.edge_index(a, b);
  const std::string shared = bond_label(a, b);

  // Absorb the neighboring lambdas (and remember them for the divide-out).
  struct Side {
    int vertex;
    int other;
    DenseTensor weighted;            // Gamma with neighbor lambdas absorbed
    std::vector<std::string> free;   // bond labels towards the other neighbors
    std::vector<Eigen::VectorXd> free_lambdas;
    std::int64_t free_dim = 1;
    Eigen::MatrixXcd q;              // thin QR factor (may be empty -> identity)
    DenseTensor core;                // axes [q?, p, shared]
  };

  auto make_side = [&](int vertex, int other) {
    Side side{vertex, other, state.gammas[vertex], {}, {}, 1, {}, {}};
    for (int c : g.neighbors(vertex)) {
      if (c == other) continue;
      const std::string lbl = bond_label(vertex, c);
      const Eigen::VectorXd& lam = state.lambdas[g.edge_index(vertex, c)];
      side.weighted.scale_axis(lbl, lam);
      side.free.push_back(lbl);
      side.free_lambdas.push_back(lam);
      side.free_dim *= lam.size();
    }
    const std::string p = physical_label(vertex);
    const int d_shared = state.bond_dim(e_ab);
    // Flatten to (free) x (p, shared) and reduce with a thin QR when the
    // environment side is the larger one.
    std::vector<std::string> order = side.free;
    order.push_back(p);
    order.push_back(shared);
    DenseTensor flat = side.weighted.permuted(order);
    const std::int64_t rows = side.free_dim;
    const std::int64_t cols = 2LL * d_shared;
    if (rows > cols) {
      Eigen::MatrixXcd m = tensor_as_matrix(flat, rows, cols);
      Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
      side.q = qr.householderQ() * Eigen::MatrixXcd::Identity(rows, cols);
      Eigen::MatrixXcd r = side.q.adjoint() * m;
      side.core = matrix_as_tensor(
          r, {{"q", static_cast<int>(cols)}, {"pc", 2}, {"sc", d_shared}});
    } else {
      Eigen::MatrixXcd m = tensor_as_matrix(flat, rows, cols);
      side.core = matrix_as_tensor(
          m, {{"q", static_cast<int>(rows)}, {"pc", 2}, {"sc", d_shared}});
    }
    return side;
  };

  Side side_a = make_side(a, b);
  Side side_b = make_side(b, a);
  side_a.core.relabel("q", "qa");
  side_a.core.relabel("pc", "pa");
  side_a.core.relabel("sc", shared);
  side_b.core.relabel("q", "qb");
  side_b.core.relabel("pc", "pb");
  side_b.core.relabel("sc", shared);
  side_a.core.scale_axis(shared, state.lambdas[e_ab]);

  DenseTensor theta = contract(side_a.core, side_b.core, {{shared, shared}});
  // theta axes: [qa, pa, qb, pb]
  DenseTensor gate({{"pa_out", 2}, {"pb_out", 2}, {"pa", 2}, {"pb", 2}});
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      gate.set({i >> 1, i & 1, j >> 1, j & 1}, w(i, j));
  theta = contract(theta, gate, {{"pa", "pa"}, {"pb", "pb"}});
  // theta axes: [qa, qb, pa_out, pb_out]

  SvdSplit dec = svd_split(theta, {"pa_out", "qa"}, shared);

  // Normalized spectrum, numerical-zero drop, chi cap, fidelity estimate.
  Eigen::VectorXd s = dec.s;
  const double total_norm = s.norm();
  if (!(total_norm > 1e-300)) throw Error(ErrorKind::Degenerate, "gate produced a zero state");
  Eigen::VectorXd s_norm = s / total_norm;
  int significant = 0;
  const double floor = rcond * s(0);
  while (significant < s.size() && s(significant) > floor) ++significant;
  const int keep = std::max(1, std::min(chi, significant));
  const double retained = std::min(1.0, s_norm.head(keep).squaredNorm());
  const double fidelity = retained * retained;

  Eigen::VectorXd lambda_new = s_norm.head(keep);
  lambda_new /= lambda_new.norm();

  auto rebuild = [&](Side& side, DenseTensor factor, const char* q_label, const char* p_out) {
    factor = factor.sliced_axis(shared, keep);
    if (side.q.size() > 0) {
      DenseTensor q_tensor = matrix_as_tensor(
          side.q, {{"free", static_cast<int>(side.q.rows())}, {q_label, static_cast<int>(side.q.cols())}});
      factor = contract(q_tensor, factor, {{q_label, q_label}});
      // axes: [free, p_out, shared]; unflatten "free" into the original bonds
      std::vector<Axis> axes;
      for (size_t i = 0; i < side.free.size(); ++i)
        axes.push_back({side.free[i], static_cast<int>(side.free_lambdas[i].size())});
      axes.push_back({p_out, 2});
      axes.push_back({shared, keep});
      factor = DenseTensor(axes, factor.data());
    } else {
      // axes already [q(=flattened free), p_out, shared] with free_dim small
      factor = factor.permuted({q_label, p_out, shared});
      std::vector<Axis> axes;
      for (size_t i = 0; i < side.free.size(); ++i)
        axes.push_back({side.free[i], static_cast<int>(side.free_lambdas[i].size())});
      axes.push_back({p_out, 2});
      axes.push_back({shared, keep});
      factor = DenseTensor(axes, factor.data());
    }
    for (size_t i = 0; i < side.free.size(); ++i)
      factor.scale_axis(side.free[i], pseudo_inverse(side.free_lambdas[i], rcond));
    factor.relabel(p_out, physical_label(side.vertex));
    state.gammas[side.vertex] = factor.permuted(canonical_axes(g, side.vertex));
  };

  // U axes: [pa_out, qa, shared]; V^dag axes: [shared, pb_out, qb]
  DenseTensor u = dec.u.permuted({"qa", "pa_out", shared});
  DenseTensor vh = dec.vh.permuted({"qb", "pb_out", shared});
  rebuild(side_a, std::move(u), "qa", "pa_out");
  rebuild(side_b, std::move(vh), "qb", "pb_out");

  state.lambdas[e_ab] = lambda_new;
  return fidelity;
}

double approx_entropy(const VidalState& state, const Bipartition& cut) {
  double entropy = 0.0;
  for (const Edge& e : cut.cut_edges) {
    const Eigen::VectorXd& lambda = state.lambdas[state.graph.edge_index(e.a, e.b)];
    for (int j = 0; j < lambda.size(); ++j) {
      const double p = lambda(j) * lambda(j);
      if (p > 0) entropy -= p * std::log(p);
    }
  }
  return entropy;
}

}  // namespace gtqa
