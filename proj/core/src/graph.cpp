#include "gtqa/graph.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <random>
#include <set>

#include <Eigen/Dense>

#include "gtqa/errors.hpp"

namespace gtqa {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer over seed ^ salt
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

ConnectivityGraph::ConnectivityGraph(int n, const std::vector<std::pair<int, int>>& edges) : n_(n) {
  if (n <= 0) throw Error(ErrorKind::Parameter, "graph needs a positive vertex count");
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n)
      throw Error(ErrorKind::Parameter, "edge endpoint out of range");
    if (a == b) throw Error(ErrorKind::Parameter, "self-loops are not allowed");
    auto key = std::minmax(a, b);
    if (!seen.insert(key).second)
      throw Error(ErrorKind::Parameter, "duplicate edge in edge list");
  }
  edges_.reserve(seen.size());
  for (auto [a, b] : seen) edges_.push_back({a, b});
  adjacency_.assign(n_, {});
  for (const Edge& e : edges_) {
    adjacency_[e.a].push_back(e.b);
    adjacency_[e.b].push_back(e.a);
  }
  for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());
}

bool ConnectivityGraph::has_edge(int a, int b) const {
  if (a < 0 || b < 0 || a >= n_ || b >= n_ || a == b) return false;
  const auto& nb = adjacency_[a];
  return std::binary_search(nb.begin(), nb.end(), b);
}

int ConnectivityGraph::edge_index(int a, int b) const {
  auto [lo, hi] = std::minmax(a, b);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), Edge{lo, hi},
                             [](const Edge& x, const Edge& y) {
                               return std::pair(x.a, x.b) < std::pair(y.a, y.b);
                             });
  if (it == edges_.end() || !(*it == Edge{lo, hi}))
    throw Error(ErrorKind::Topology, "no such edge {" + std::to_string(a) + "," + std::to_string(b) + "}");
  return static_cast<int>(it - edges_.begin());
}

bool ConnectivityGraph::is_connected() const {
  if (n_ == 0) return false;
  std::vector<char> seen(n_, 0);
  std::deque<int> queue{0};
  seen[0] = 1;
  int count = 1;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (int u : adjacency_[v])
      if (!seen[u]) {
        seen[u] = 1;
        ++count;
        queue.push_back(u);
      }
  }
  return count == n_;
}

bool ConnectivityGraph::is_tree() const {
  return is_connected() && edge_count() == n_ - 1;
}

ConnectivityGraph random_regular(int n, int d, std::uint64_t seed) {
  if (n <= 0 || d <= 0) throw Error(ErrorKind::Parameter, "n and d must be positive");
  if ((static_cast<long long>(n) * d) % 2 != 0)
    throw Error(ErrorKind::Parameter, "n*d must be even for a d-regular graph");
  if (d >= n) throw Error(ErrorKind::Parameter, "degree must satisfy d < n");

  constexpr int kMaxAttempts = 2000;
  std::vector<int> stubs(static_cast<size_t>(n) * d);
  for (int v = 0; v < n; ++v)
    for (int k = 0; k < d; ++k) stubs[static_cast<size_t>(v) * d + k] = v;

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(attempt)));
    std::shuffle(stubs.begin(), stubs.end(), rng);
    std::set<std::pair<int, int>> edge_set;
    bool ok = true;
    for (size_t i = 0; i + 1 < stubs.size(); i += 2) {
      int a = stubs[i], b = stubs[i + 1];
      if (a == b) {
        ok = false;
        break;
      }
      if (!edge_set.insert(std::minmax(a, b)).second) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    std::vector<std::pair<int, int>> edges(edge_set.begin(), edge_set.end());
    return ConnectivityGraph(n, edges);
  }
  throw Error(ErrorKind::Generation, "pairing-model retry budget exhausted for random_regular");
}

std::vector<std::optional<int>> shortest_loop_lengths(const ConnectivityGraph& g) {
  const int n = g.vertex_count();
  std::vector<std::optional<int>> result(g.edge_count());
  std::vector<int> dist(n);
  for (int e = 0; e < g.edge_count(); ++e) {
    const Edge edge = g.edge(e);
    std::fill(dist.begin(), dist.end(), -1);
    std::deque<int> queue{edge.a};
    dist[edge.a] = 0;
    while (!queue.empty() && dist[edge.b] < 0) {
      int v = queue.front();
      queue.pop_front();
      for (int u : g.neighbors(v)) {
        if (v == edge.a && u == edge.b) continue;  // the removed edge
        if (dist[u] < 0) {
          dist[u] = dist[v] + 1;
          queue.push_back(u);
        }
      }
    }
    if (dist[edge.b] >= 0) result[e] = dist[edge.b] + 1;
  }
  return result;
}

double bipartition_objective(const ConnectivityGraph& g, const std::vector<int>& part_a) {
  const int n = g.vertex_count();
  std::vector<char> in_a(n, 0);
  for (int v : part_a) in_a[v] = 1;
  const long long size_a = static_cast<long long>(part_a.size());
  const long long size_b = n - size_a;
  if (size_a == 0 || size_b == 0)
    throw Error(ErrorKind::Parameter, "bipartition parts must be non-empty");
  long long cut = 0;
  for (const Edge& e : g.edges())
    if (in_a[e.a] != in_a[e.b]) ++cut;
  return static_cast<double>(cut) / static_cast<double>(size_a * size_b);
}

Bipartition make_bipartition(const ConnectivityGraph& g, const std::vector<int>& part_a) {
  Bipartition result;
  result.part_a = part_a;
  std::sort(result.part_a.begin(), result.part_a.end());
  std::vector<char> in_a(g.vertex_count(), 0);
  for (int v : result.part_a) in_a[v] = 1;
  for (int v = 0; v < g.vertex_count(); ++v)
    if (!in_a[v]) result.part_b.push_back(v);
  for (const Edge& e : g.edges())
    if (in_a[e.a] != in_a[e.b]) result.cut_edges.push_back(e);
  return result;
}

Bipartition spectral_bipartition(const ConnectivityGraph& g) {
  const int n = g.vertex_count();
  if (n < 2) throw Error(ErrorKind::Parameter, "bipartition needs at least two vertices");
  if (!g.is_connected()) throw Error(ErrorKind::Parameter, "graph must be connected");

  Eigen::MatrixXd laplacian = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : g.edges()) {
    laplacian(e.a, e.b) -= 1.0;
    laplacian(e.b, e.a) -= 1.0;
    laplacian(e.a, e.a) += 1.0;
    laplacian(e.b, e.b) += 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::Numerical, "Laplacian eigensolver failed");
  Eigen::VectorXd fiedler = solver.eigenvectors().col(1);
  // Canonical sign so the prefix family is reproducible.
  for (int i = 0; i < n; ++i) {
    if (std::abs(fiedler(i)) > 1e-12) {
      if (fiedler(i) < 0) fiedler = -fiedler;
      break;
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    if (fiedler(x) != fiedler(y)) return fiedler(x) < fiedler(y);
    return x < y;
  });

  // Incremental cut size over prefix cuts of the Fiedler order. Ties in the
  // objective go to the more balanced cut.
  std::vector<char> in_a(n, 0);
  long long cut = 0;
  double best_objective = 0.0;
  int best_k = -1;
  for (int k = 1; k < n; ++k) {
    int v = order[k - 1];
    in_a[v] = 1;
    long long crossing = 0;
    for (int u : g.neighbors(v)) crossing += in_a[u] ? -1 : 1;
    cut += crossing;
    double objective = static_cast<double>(cut) / (static_cast<double>(k) * (n - k));
    const bool tie = best_k > 0 && std::abs(objective - best_objective) <=
                                       1e-12 * std::max(objective, best_objective);
    const bool more_balanced = best_k > 0 && std::abs(2 * k - n) < std::abs(2 * best_k - n);
    if (best_k < 0 || (tie ? more_balanced : objective < best_objective)) {
      best_objective = objective;
      best_k = k;
    }
  }
  return make_bipartition(g, std::vector<int>(order.begin(), order.begin() + best_k));
}

ConnectivityGraph heavy_hex_lattice() {
  // 7 rows of 15 columns (first row missing its last site, last row missing
  // its first), plus one bridge site on every vertical link. Vertical links
  // sit at columns 0,4,8,12 below even rows and 2,6,10,14 below odd rows.
  const int rows = 7, cols = 15;
  auto row_has = [&](int r, int c) {
    if (r == 0 && c == cols - 1) return false;
    if (r == rows - 1 && c == 0) return false;
    return true;
  };
  std::vector<std::vector<int>> id(rows, std::vector<int>(cols, -1));
  std::vector<std::vector<int>> bridge(rows - 1, std::vector<int>(cols, -1));
  std::vector<std::pair<int, int>> edges;
  int next = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c)
      if (row_has(r, c)) id[r][c] = next++;
    if (r + 1 < rows)
      for (int c = (r % 2 == 0) ? 0 : 2; c < cols; c += 4) bridge[r][c] = next++;
  }
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c + 1 < cols; ++c)
      if (id[r][c] >= 0 && id[r][c + 1] >= 0) edges.emplace_back(id[r][c], id[r][c + 1]);
  for (int r = 0; r + 1 < rows; ++r)
    for (int c = 0; c < cols; ++c)
      if (bridge[r][c] >= 0) {
        edges.emplace_back(id[r][c], bridge[r][c]);
        edges.emplace_back(bridge[r][c], id[r + 1][c]);
      }
  return ConnectivityGraph(next, edges);
}

}  // namespace gtqa
