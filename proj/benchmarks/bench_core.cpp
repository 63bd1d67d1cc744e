// Micro-benchmarks for the hot paths: contraction, BP sweeps, gate
// application, regauging and the classical baseline.

#include <benchmark/benchmark.h>

#include <random>

#include "gtqa/anneal.hpp"
#include "gtqa/baselines.hpp"
#include "gtqa/oracle.hpp"
#include "gtqa/tn.hpp"

using namespace gtqa;

namespace {

DenseTensor random_tensor(const std::vector<Axis>& axes, std::mt19937_64& rng) {
  DenseTensor t(axes);
  std::normal_distribution<double> gauss;
  for (cdouble& v : t.data()) v = cdouble(gauss(rng), gauss(rng));
  return t;
}

// Entangled chi-bounded state: a few annealing layers on a random instance.
VidalState prepared_state(int n, int chi, int layers) {
  ConnectivityGraph g = random_regular(n, 3, 1);
  ProblemInstance instance = random_qubo(g, 2);
  AnnealConfig config;
  config.total_time = 20.0;
  config.dt = 0.2;
  config.chi = chi;
  VidalState state = plus_product_state(g);
  for (int k = 1; k <= layers; ++k)
    for (const Gate& gate : trotter_layer(instance, config, k)) {
      if (gate.two_qubit)
        apply_2q(state, gate.a, gate.b, gate.m4, chi);
      else
        apply_1q(state, gate.a, gate.m2);
    }
  return state;
}

void BM_Contract(benchmark::State& state) {
  const int chi = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  DenseTensor a = random_tensor({{"p", 2}, {"x", chi}, {"y", chi}, {"z", chi}}, rng);
  DenseTensor b = random_tensor({{"z", chi}, {"q", 2}, {"u", chi}, {"v", chi}}, rng);
  for (auto _ : state) {
    DenseTensor c = contract(a, b, {{"z", "z"}});
    benchmark::DoNotOptimize(c.data().data());
  }
}
BENCHMARK(BM_Contract)->Arg(4)->Arg(8)->Arg(16);

void BM_BpSweep(benchmark::State& state) {
  const int chi = static_cast<int>(state.range(0));
  VidalState vidal = prepared_state(16, chi, 30);
  SymmetricState sym = to_symmetric(vidal);
  MessageSet warm = warm_start_messages(vidal);
  std::mt19937_64 rng(0);
  for (auto _ : state) {
    MessageSet msgs = run_bp(sym, {1e30, 1, 0.0, false}, &warm, rng);  // exactly one sweep
    benchmark::DoNotOptimize(msgs.messages.data());
  }
}
BENCHMARK(BM_BpSweep)->Arg(4)->Arg(8)->Arg(16);

void BM_Apply2q(benchmark::State& state) {
  const int chi = static_cast<int>(state.range(0));
  VidalState vidal = prepared_state(16, chi, 30);
  const Edge e = vidal.graph.edge(0);
  const Eigen::Matrix4cd gate = interaction_gate(0.13, -1.0, 0.1, -0.2);
  for (auto _ : state) {
    VidalState copy = vidal;
    benchmark::DoNotOptimize(apply_2q(copy, e.a, e.b, gate, chi));
  }
}
BENCHMARK(BM_Apply2q)->Arg(4)->Arg(8)->Arg(16);

void BM_Regauge(benchmark::State& state) {
  const int chi = static_cast<int>(state.range(0));
  VidalState vidal = prepared_state(16, chi, 30);
  for (auto _ : state) {
    VidalState copy = vidal;
    RegaugeReport report = regauge(copy, {1e-8, 100, 0.0, false});
    benchmark::DoNotOptimize(report.residual_after);
  }
}
BENCHMARK(BM_Regauge)->Arg(4)->Arg(8);

void BM_ExactLayer(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ConnectivityGraph g = random_regular(n, 3, 1);
  ProblemInstance instance = random_qubo(g, 2);
  AnnealConfig config;
  config.total_time = 20.0;
  config.dt = 0.2;
  DenseState psi = DenseState::plus_state(n);
  std::vector<Gate> layer = trotter_layer(instance, config, 50);
  for (auto _ : state) {
    for (const Gate& gate : layer) {
      if (gate.two_qubit)
        psi.apply_2q(gate.a, gate.b, gate.m4);
      else
        psi.apply_1q(gate.a, gate.m2);
    }
    benchmark::DoNotOptimize(psi.amplitudes().data());
  }
}
BENCHMARK(BM_ExactLayer)->Arg(16)->Arg(20);

void BM_SimulatedAnnealing(benchmark::State& state) {
  ConnectivityGraph g = random_regular(static_cast<int>(state.range(0)), 3, 5);
  ProblemInstance instance = random_qubo(g, 7);
  SaConfig config;
  config.sweeps = 1000;
  config.restarts = 1;
  for (auto _ : state) {
    config.seed++;
    SaResult result = simulated_annealing(instance, config);
    benchmark::DoNotOptimize(result.value);
  }
}
BENCHMARK(BM_SimulatedAnnealing)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
