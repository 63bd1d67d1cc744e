#include "gtqa/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "gtqa/errors.hpp"

namespace gtqa {

namespace {

// Projects the labeled physical axis onto one basis component, scaling the
// survivor by `scale` and zeroing the other.
void project_physical(DenseTensor& tensor, const std::string& label, int keep_index,
                      double scale) {
  const int axis = tensor.axis_index(label);
  const std::int64_t stride = tensor.strides()[axis];
  const std::int64_t block = stride * 2;
  for (std::int64_t base = 0; base < tensor.size(); base += block)
    for (int j = 0; j < 2; ++j) {
      cdouble* ptr = tensor.data().data() + base + j * stride;
      if (j == keep_index)
        for (std::int64_t k = 0; k < stride; ++k) ptr[k] *= scale;
      else
        for (std::int64_t k = 0; k < stride; ++k) ptr[k] = 0.0;
    }
}

}  // namespace

MeasureResult measure_qubit(VidalState& state, int a, std::mt19937_64* rng,
                            std::optional<int> forced, const BpConfig& bp, double rcond) {
  const ConnectivityGraph& g = state.graph;
  if (a < 0 || a >= g.vertex_count())
    throw Error(ErrorKind::Topology, "measured vertex out of range");
  if (forced && *forced != 1 && *forced != -1)
    throw Error(ErrorKind::Domain, "forced outcome must be +1 or -1");
  if (!forced && !rng)
    throw Error(ErrorKind::Parameter, "measurement needs a generator or a forced outcome");

  // (i) reduced state from fresh messages
  SymmetricState sym = to_symmetric(state);
  MessageSet warm = warm_start_messages(state);
  std::mt19937_64 unused(0);
  MessageSet msgs = run_bp(sym, bp, &warm, unused);
  Eigen::Matrix2cd rho = reduced_density_matrix(sym, msgs, a);
  double p_plus = std::clamp(rho(0, 0).real(), 0.0, 1.0);

  MeasureResult result;
  if (forced) {
    result.outcome = *forced;
  } else {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    result.outcome = uniform(*rng) < p_plus ? 1 : -1;
  }
  result.probability = result.outcome == 1 ? p_plus : 1.0 - p_plus;
  if (result.probability < 1e-12) {
    if (forced)
      throw Error(ErrorKind::Outcome, "forced outcome has (near-)zero probability");
    // A sampled outcome this unlikely is a numerical accident; flip it.
    result.outcome = -result.outcome;
    result.probability = 1.0 - result.probability;
  }

  // (ii) project the vertex tensor and renormalize by 1/sqrt(p)
  project_physical(state.gammas[a], physical_label(a), result.outcome == 1 ? 0 : 1,
                   1.0 / std::sqrt(result.probability));

  // (iii) full regauge
  RegaugeReport regauge_report = regauge(state, bp, rcond);
  result.bp_iterations = regauge_report.bp_iterations;
  result.bp_converged = regauge_report.bp_converged;
  result.post_residual = regauge_report.residual_after;
  return result;
}

SampleTrace sample_bitstring(const VidalState& state, const std::vector<int>& order,
                             std::mt19937_64& rng, const SampleOptions& options) {
  const int n = state.graph.vertex_count();
  {
    std::vector<int> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < n; ++i)
      if (i >= static_cast<int>(sorted.size()) || sorted[i] != i)
        throw Error(ErrorKind::Parameter, "order must be a permutation of the vertices");
  }
  if (options.tail_brute_force > 0 && !options.instance)
    throw Error(ErrorKind::Parameter, "tail completion needs the problem instance");
  const int sampled_count = n - std::min(options.tail_brute_force, n);

  VidalState work = state;
  SampleTrace trace;
  trace.bitstring.assign(n, 0);
  if (options.scope == RegaugeScope::Full) {
    for (int i = 0; i < sampled_count; ++i) {
      const int vertex = order[i];
      MeasureResult step =
          measure_qubit(work, vertex, &rng, std::nullopt, options.bp, options.rcond);
      trace.bitstring[vertex] = step.outcome;
      trace.probabilities.push_back(step.probability);
      trace.log_probability += std::log(step.probability);
      trace.residuals.push_back(step.post_residual);
      trace.bp_iterations.push_back(step.bp_iterations);
      trace.bp_converged.push_back(step.bp_converged);
    }
  } else {
    // Message-only refresh: BP tracks the projections, the gauge goes stale.
    SymmetricState sym = to_symmetric(work);
    MessageSet msgs = warm_start_messages(work);
    std::mt19937_64 unused(0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (int i = 0; i < sampled_count; ++i) {
      const int vertex = order[i];
      msgs = run_bp(sym, options.bp, &msgs, unused);
      Eigen::Matrix2cd rho = reduced_density_matrix(sym, msgs, vertex);
      const double p_plus = std::clamp(rho(0, 0).real(), 0.0, 1.0);
      int outcome = uniform(rng) < p_plus ? 1 : -1;
      double p = outcome == 1 ? p_plus : 1.0 - p_plus;
      if (p < 1e-12) {
        outcome = -outcome;
        p = 1.0 - p;
      }
      // project both representations in place
      const int keep_index = outcome == 1 ? 0 : 1;
      const double scale = 1.0 / std::sqrt(p);
      project_physical(work.gammas[vertex], physical_label(vertex), keep_index, scale);
      project_physical(sym.tensors[vertex], physical_label(vertex), keep_index, scale);
      trace.bitstring[vertex] = outcome;
      trace.probabilities.push_back(p);
      trace.log_probability += std::log(p);
      trace.residuals.push_back(vidal_residual(work));
      trace.bp_iterations.push_back(msgs.iterations);
      trace.bp_converged.push_back(msgs.converged);
    }
  }

  if (sampled_count < n) {
    // Exhaust the unmeasured tail against the objective.
    std::vector<int> tail(order.begin() + sampled_count, order.end());
    std::vector<int> best;
    double best_value = 0.0;
    const std::uint64_t total = 1ULL << tail.size();
    std::vector<int> candidate = trace.bitstring;
    for (std::uint64_t bits = 0; bits < total; ++bits) {
      for (size_t j = 0; j < tail.size(); ++j)
        candidate[tail[j]] = (bits >> j) & 1 ? -1 : 1;
      const double value = objective(*options.instance, candidate);
      if (best.empty() || value > best_value) {
        best_value = value;
        best = candidate;
      }
    }
    trace.bitstring = best;
  }
  return trace;
}

double bitstring_probability(const VidalState& state, const std::vector<int>& x,
                             const BpConfig& bp, double rcond) {
  const int n = state.graph.vertex_count();
  if (static_cast<int>(x.size()) != n)
    throw Error(ErrorKind::Shape, "bitstring length does not match the state");
  VidalState work = state;
  double log_p = 0.0;
  for (int a = 0; a < n; ++a) {
    try {
      MeasureResult step = measure_qubit(work, a, nullptr, x[a], bp, rcond);
      log_p += std::log(step.probability);
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::Outcome) return 0.0;
      throw;
    }
  }
  return std::exp(log_p);
}

}  // namespace gtqa
