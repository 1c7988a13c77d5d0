#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace copytree {

inline constexpr double kEps = 1e-9;

struct Edge {
  int u = 0;
  int v = 0;
  double w = 1.0;
};

// Undirected weighted graph over vertex ids [0, n). Immutable after
// construction; all operations on it are pure.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  WeightedGraph(int n, std::vector<Edge> edges, std::optional<int> root = std::nullopt);

  int n() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int id) const { return edges_[static_cast<size_t>(id)]; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  std::optional<int> root() const { return root_; }
  double min_weight() const;
  double total_weight(const std::vector<int>& edge_ids) const;
  const std::vector<std::vector<std::pair<int, int>>>& adjacency() const { return adj_; }  // (neighbor, edge id)
  bool is_connected() const;
  // Finds the edge id joining u and v, or -1.
  int find_edge(int u, int v) const;

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::optional<int> root_;
  std::vector<std::vector<std::pair<int, int>>> adj_;
};

struct DisjointSet {
  explicit DisjointSet(int n) : parent(n) {
    for (int i = 0; i < n; ++i) parent[static_cast<size_t>(i)] = i;
  }
  int find(int x) {
    while (parent[static_cast<size_t>(x)] != x) {
      parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      x = parent[static_cast<size_t>(x)];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (a > b) std::swap(a, b);
    parent[static_cast<size_t>(b)] = a;
    return true;
  }
  std::vector<int> parent;
};

// All-pairs shortest path metric with deterministic predecessor choice
// (ties broken toward the smaller vertex id).
class Metric {
 public:
  Metric() = default;
  explicit Metric(const WeightedGraph& g);

  int n() const { return n_; }
  double d(int u, int v) const { return dist_[static_cast<size_t>(u)][static_cast<size_t>(v)]; }
  double diameter() const { return diameter_; }
  // Closed ball B(v, x); always contains v. Sorted by vertex id.
  std::vector<int> ball(int v, double x) const;
  // One shortest u-v path as a vertex sequence; deterministic.
  std::vector<int> shortest_path(int u, int v) const;

 private:
  int n_ = 0;
  std::vector<std::vector<double>> dist_;
  std::vector<std::vector<int>> pred_;  // pred_[s][v]: predecessor of v on the s->v path
  double diameter_ = 0.0;
};

Metric shortest_path_metric(const WeightedGraph& g);

// Rooted tree over [0, n) with parent pointers; pw[v] is the weight of the
// edge from v to parent[v]. Edge ids are child vertex ids.
class RootedTree {
 public:
  RootedTree() = default;
  // Interprets g as a tree rooted at root; rejects non-trees.
  RootedTree(const WeightedGraph& g, int root);
  static RootedTree from_parents(int root, std::vector<int> parent, std::vector<double> pw);

  int n() const { return static_cast<int>(parent_.size()); }
  int root() const { return root_; }
  int parent(int v) const { return parent_[static_cast<size_t>(v)]; }
  double parent_weight(int v) const { return pw_[static_cast<size_t>(v)]; }
  const std::vector<int>& children(int v) const { return children_[static_cast<size_t>(v)]; }
  int depth(int v) const { return depth_[static_cast<size_t>(v)]; }
  int max_depth() const;
  double dist(int u, int v) const;
  // Vertices in order of non-decreasing depth.
  const std::vector<int>& bfs_order() const { return order_; }
  double total_weight() const;

 private:
  void finalize();
  int root_ = 0;
  std::vector<int> parent_;
  std::vector<double> pw_;
  std::vector<std::vector<int>> children_;
  std::vector<int> depth_;
  std::vector<int> order_;
};

// Connectivity of vertex sets U, W under the edge set F (ids into g.edges()).
// A vertex is connected to itself under the empty edge set.
bool connected(const WeightedGraph& g, const std::vector<int>& F, const std::vector<int>& U,
               const std::vector<int>& W);

// Component labels of (V, F).
std::vector<int> components(const WeightedGraph& g, const std::vector<int>& F);

struct EulerPath {
  std::vector<int> vertices;
  double weight = 0.0;
};

// Partitions the doubled multigraph 2F (F must form a tree whose every leaf
// is marked) into multiedge-disjoint paths with marked endpoints.
std::vector<EulerPath> euler_path_partition(const WeightedGraph& g, const std::vector<int>& F,
                                            const std::vector<int>& marked);

// True iff every child edge weighs at most half of its parent edge.
bool is_well_separated(const RootedTree& t);

// Result of loading/normalizing a graph: weights scaled so the minimum is
// at least 1, zero-weight edges contracted, parallel edges deduplicated.
struct LoadedGraph {
  WeightedGraph graph;
  double weight_scale = 1.0;      // normalized = original * weight_scale
  int contracted_edges = 0;
  std::vector<int> vertex_map;    // original id -> id in graph
};

LoadedGraph normalize_graph(int n, const std::vector<Edge>& edges, std::optional<int> root);

}  // namespace copytree
