#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gtqa/errors.hpp"
#include "gtqa/oracle.hpp"
#include "support/test_helpers.hpp"

using namespace gtqa;
namespace th = gtqa::testing;

TEST_CASE("exact_evolve: trivial instance stays in |+>^n up to phase") {
  ConnectivityGraph g(4, {{0, 1}, {1, 2}, {2, 3}});
  ProblemInstance inst;
  inst.graph = g;
  inst.coupling = {0.0, 0.0, 0.0};
  inst.field = {0.0, 0.0, 0.0, 0.0};
  AnnealConfig config;
  config.total_time = 4.0;
  config.dt = 0.2;
  DenseState reference = DenseState::plus_state(4);
  exact_evolve(inst, config, [&](int, const DenseState& psi) {
    CHECK(th::amplitude_distance(reference.amplitudes(), psi.amplitudes()) < 1e-12);
  });
}

TEST_CASE("exact_evolve: single spin matches a fine-step ODE integration") {
  // One qubit, pure field. With a tiny Trotter step the circuit converges to
  // the Schroedinger dynamics; the reference is an RK4 integration.
  ConnectivityGraph g(1, {});
  ProblemInstance inst;
  inst.graph = g;
  inst.field = {0.8};
  AnnealConfig config;
  config.total_time = 2.0;
  config.dt = 2e-6;

  // RK4 on i d/dt psi = H(t) psi, H(t) = (1-s) h Z + s X
  Eigen::Vector2cd psi(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
  const double h = inst.field[0];
  auto deriv = [&](double t, const Eigen::Vector2cd& v) -> Eigen::Vector2cd {
    const double s = 1.0 - t / config.total_time;
    Eigen::Matrix2cd ham;
    ham << (1 - s) * h, s, s, -(1 - s) * h;
    return cdouble(0.0, -1.0) * (ham * v);
  };
  const double dt_ode = 1e-4;
  for (double t = 0; t < config.total_time - 1e-12; t += dt_ode) {
    Eigen::Vector2cd k1 = deriv(t, psi);
    Eigen::Vector2cd k2 = deriv(t + dt_ode / 2, psi + dt_ode / 2 * k1);
    Eigen::Vector2cd k3 = deriv(t + dt_ode / 2, psi + dt_ode / 2 * k2);
    Eigen::Vector2cd k4 = deriv(t + dt_ode, psi + dt_ode * k3);
    psi += dt_ode / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }

  std::vector<cdouble> final_amps;
  exact_evolve(inst, config, [&](int layer, const DenseState& state) {
    if (layer == layer_count(config)) final_amps = state.amplitudes();
  });
  CHECK(th::amplitude_distance({psi(0), psi(1)}, final_amps) < 1e-6);
}

TEST_CASE("exact_evolve: n=2 layers equal multiplied gate matrices") {
  ConnectivityGraph g(2, {{0, 1}});
  ProblemInstance inst;
  inst.graph = g;
  inst.coupling = {0.9};
  inst.field = {0.2, -0.6};
  AnnealConfig config;
  config.total_time = 2.0;
  config.dt = 0.2;

  // psi indexed by (bit_a, bit_b) = 2*bit_0 + bit_1, matching the edge-gate
  // matrix convention for the edge {0, 1}.
  Eigen::Vector4cd psi;
  psi.setConstant(0.5);
  int checked = 0;
  exact_evolve(inst, config, [&](int layer, const DenseState& state) {
    for (const Gate& gate : trotter_layer(inst, config, layer)) {
      if (gate.two_qubit) {
        psi = (gate.m4 * psi).eval();
        continue;
      }
      // embed the 1q gate: gate.a == 0 acts on the high bit of the psi index
      Eigen::Matrix4cd full = Eigen::Matrix4cd::Zero();
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (int other = 0; other < 2; ++other) {
            if (gate.a == 0)
              full(2 * i + other, 2 * j + other) += gate.m2(i, j);
            else
              full(2 * other + i, 2 * other + j) += gate.m2(i, j);
          }
      psi = (full * psi).eval();
    }
    const auto& amps = state.amplitudes();
    for (int x = 0; x < 4; ++x) {
      const int bit0 = x & 1, bit1 = (x >> 1) & 1;
      CHECK(std::abs(amps[x] - psi(2 * bit0 + bit1)) < 1e-12);
    }
    ++checked;
  });
  CHECK(checked == 10);
}

TEST_CASE("exact_rdm / exact_entropy basics") {
  // product state: pure reductions, zero entropy
  DenseState product = DenseState::plus_state(3);
  ConnectivityGraph g(3, {{0, 1}, {1, 2}});
  for (int a = 0; a < 3; ++a) {
    Eigen::Matrix2cd rho = exact_rdm(product, a);
    CHECK((rho * rho - rho).norm() < 1e-12);  // pure
  }
  CHECK(exact_entropy(product, make_bipartition(g, {0})) == doctest::Approx(0.0).epsilon(1e-12));

  // Bell pair: entropy ln 2 across the cut
  std::vector<cdouble> bell{1.0 / std::sqrt(2.0), 0, 0, 1.0 / std::sqrt(2.0)};
  DenseState bell_state = DenseState::from_amplitudes(bell);
  ConnectivityGraph pair(2, {{0, 1}});
  CHECK(exact_entropy(bell_state, make_bipartition(pair, {0})) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("exact_entropy: symmetric under swapping the parts") {
  std::mt19937_64 rng(5);
  std::vector<cdouble> amps(1 << 6);
  std::normal_distribution<double> gauss;
  for (auto& v : amps) v = cdouble(gauss(rng), gauss(rng));
  double nrm = 0;
  for (auto& v : amps) nrm += std::norm(v);
  for (auto& v : amps) v /= std::sqrt(nrm);
  DenseState psi = DenseState::from_amplitudes(amps);
  ConnectivityGraph g(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}});
  Bipartition cut = make_bipartition(g, {0, 2, 4});
  Bipartition swapped = make_bipartition(g, {1, 3, 5});
  CHECK(std::abs(exact_entropy(psi, cut) - exact_entropy(psi, swapped)) < 1e-10);
}

TEST_CASE("exact_evolve preserves the norm over a thousand layers") {
  ConnectivityGraph g(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
  ProblemInstance inst = random_qubo(g, 21);
  AnnealConfig config;
  config.total_time = 200.0;
  config.dt = 0.2;  // 1000 layers
  double worst = 0;
  exact_evolve(inst, config, [&](int, const DenseState& psi) {
    worst = std::max(worst, std::abs(psi.norm() - 1.0));
  });
  CHECK(worst < 1e-10);
}

TEST_CASE("trace_distance_error: identical, analytic and shape-checked") {
  std::vector<std::vector<Eigen::Matrix2cd>> a(3, std::vector<Eigen::Matrix2cd>(2));
  for (auto& row : a)
    for (auto& m : row) m = 0.5 * Eigen::Matrix2cd::Identity();
  CHECK(trace_distance_error(a, a, 0.2, 0.6) == doctest::Approx(0.0));

  // single layer, single qubit, diag(1,0) vs diag(0,1): ||diff||_1 = 2
  std::vector<std::vector<Eigen::Matrix2cd>> e(1, std::vector<Eigen::Matrix2cd>(1));
  std::vector<std::vector<Eigen::Matrix2cd>> b(1, std::vector<Eigen::Matrix2cd>(1));
  e[0][0] << 1, 0, 0, 0;
  b[0][0] << 0, 0, 0, 1;
  const double dt = 0.2, total = 0.2;
  CHECK(trace_distance_error(e, b, dt, total) == doctest::Approx(dt / (2 * total) * 2));

  std::vector<std::vector<Eigen::Matrix2cd>> wrong(2, std::vector<Eigen::Matrix2cd>(1));
  CHECK_THROWS_AS((void)trace_distance_error(e, wrong, dt, total), Error);
}

TEST_CASE("entropy_rel_error: identical, doubled, degenerate") {
  std::vector<double> exact{1.0, 2.0, 3.0};
  CHECK(entropy_rel_error(exact, exact) == doctest::Approx(0.0));
  std::vector<double> twice{2.0, 4.0, 6.0};
  CHECK(entropy_rel_error(exact, twice) == doctest::Approx(1.0));
  std::vector<double> zero{0.0, 0.0, 0.0};
  CHECK_THROWS_AS((void)entropy_rel_error(zero, exact), Error);
}

TEST_CASE("brute_force_optimum: examples") {
  ConnectivityGraph g(2, {{0, 1}});
  ProblemInstance inst;
  inst.graph = g;
  inst.coupling = {1.0};
  inst.field = {0.5, 0.0};
  OptimumResult best = brute_force_optimum(inst);
  CHECK(best.value == doctest::Approx(1.5));
  CHECK(best.bitstring == std::vector<int>{1, 1});

  ConnectivityGraph triangle(3, {{0, 1}, {1, 2}, {0, 2}});
  ProblemInstance maxcut = maxcut_instance(triangle);
  OptimumResult cut_best = brute_force_optimum(maxcut);
  CHECK(cut_value(maxcut, cut_best.bitstring) == 2);
  CHECK(cut_best.degeneracy == 6);
}

TEST_CASE("brute_force_optimum: self-consistent on a random instance") {
  ConnectivityGraph g = random_regular(20, 3, 9);
  ProblemInstance inst = random_qubo(g, 31);
  OptimumResult best = brute_force_optimum(inst);
  CHECK(best.value == doctest::Approx(objective(inst, best.bitstring)).epsilon(1e-12));
  // sample random strings; none may beat the optimum
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> x(20);
    for (int& v : x) v = rng() % 2 ? 1 : -1;
    CHECK(objective(inst, x) <= best.value + 1e-9);
  }
}

TEST_CASE("fidelity_vs_exact: product states and a truncated tree") {
  std::mt19937_64 rng(13);
  ConnectivityGraph g = th::random_tree(8, rng);
  std::vector<Eigen::Vector2cd> amps(8);
  for (auto& a : amps) {
    Eigen::Vector2cd v(cdouble(1.0, 0.3), cdouble(-0.2, 0.9));
    a = v / v.norm();
  }
  VidalState state = product_state(g, amps);
  DenseState psi = DenseState::from_amplitudes(dense_amplitudes(state));
  double nrm = psi.norm();
  for (auto& v : psi.amplitudes()) v /= nrm;
  CHECK(fidelity_vs_exact(psi, state) == doctest::Approx(1.0).epsilon(1e-12));

  // orthogonal product state
  std::vector<Eigen::Vector2cd> flipped = amps;
  for (auto& a : flipped) {
    Eigen::Vector2cd v(-std::conj(a(1)), std::conj(a(0)));
    a = v;
  }
  VidalState other = product_state(g, flipped);
  CHECK(fidelity_vs_exact(psi, other) == doctest::Approx(0.0).epsilon(1e-12));

  // single truncated edge: fidelity equals the squared retained weight
  VidalState rich = th::random_vidal_state(g, 4, rng);
  int edge_index = -1;
  for (int e = 0; e < g.edge_count(); ++e)
    if (rich.lambdas[e].size() >= 3) edge_index = e;
  if (edge_index >= 0) {
    DenseState pre = DenseState::from_amplitudes(dense_amplitudes(rich));
    double pre_norm = pre.norm();
    for (auto& v : pre.amplitudes()) v /= pre_norm;
    const double retained = rich.lambdas[edge_index].head(2).squaredNorm();
    truncate_edge(rich, edge_index, 2);
    CHECK(fidelity_vs_exact(pre, rich) == doctest::Approx(retained).epsilon(1e-9));
  }
}

TEST_CASE("capacity guards") {
  CHECK_THROWS_AS((void)DenseState(27), Error);
  ConnectivityGraph big = random_regular(40, 3, 2);
  ProblemInstance inst = random_qubo(big, 2);
  AnnealConfig config;
  CHECK_THROWS_AS(exact_evolve(inst, config, {}), Error);
  CHECK_THROWS_AS((void)brute_force_optimum(inst), Error);
}
