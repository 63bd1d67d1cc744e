// Connectivity graphs: construction, random regular generation, shortest-loop
// analysis and spectral bipartitioning.
#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace gtqa {

struct Edge {
  int a = 0;  // a < b
  int b = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

// Simple undirected graph on vertices 0..n-1. No self-loops, no duplicate
// edges; the edge list is kept sorted so that iteration order is canonical.
class ConnectivityGraph {
 public:
  ConnectivityGraph() = default;
  ConnectivityGraph(int n, const std::vector<std::pair<int, int>>& edges);

  int vertex_count() const { return n_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int index) const { return edges_[index]; }
  const std::vector<int>& neighbors(int a) const { return adjacency_[a]; }
  int degree(int a) const { return static_cast<int>(adjacency_[a].size()); }

  bool has_edge(int a, int b) const;
  // Index of {a,b} in the canonical edge order; Topology error if absent.
  int edge_index(int a, int b) const;

  bool is_connected() const;
  bool is_tree() const;

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adjacency_;
};

// Uniform-ish random d-regular simple graph via the pairing model with
// rejection. Deterministic for a fixed seed. Parameter error when n*d is odd
// or d >= n; Generation error when the retry budget is exhausted.
ConnectivityGraph random_regular(int n, int d, std::uint64_t seed);

// Length of the shortest cycle through each edge (BFS between the endpoints
// with the edge removed, plus one), or nullopt for edges on no cycle.
// Indexed like graph.edges().
std::vector<std::optional<int>> shortest_loop_lengths(const ConnectivityGraph& g);

struct Bipartition {
  std::vector<int> part_a;
  std::vector<int> part_b;
  std::vector<Edge> cut_edges;
};

// |cut| / (|A| * |complement|) for a given vertex subset; helper for tests
// and for the prefix scan inside spectral_bipartition.
double bipartition_objective(const ConnectivityGraph& g, const std::vector<int>& part_a);

// Approximate minimizer of |cut|/(|A||B|): sort vertices by the Fiedler
// vector of the graph Laplacian and take the best prefix cut.
Bipartition spectral_bipartition(const ConnectivityGraph& g);

Bipartition make_bipartition(const ConnectivityGraph& g, const std::vector<int>& part_a);

// The 127-vertex heavy-hexagon lattice (7 qubit rows, 4-qubit connector rows
// in between). Smallest cycle is the 12-site plaquette boundary.
ConnectivityGraph heavy_hex_lattice();

}  // namespace gtqa
