#include "copytree/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <set>

namespace copytree {

WeightedGraph::WeightedGraph(int n, std::vector<Edge> edges, std::optional<int> root)
    : n_(n), edges_(std::move(edges)), root_(root) {
  if (n_ < 0) throw std::invalid_argument("vertex count must be nonnegative");
  for (const Edge& e : edges_) {
    if (e.u < 0 || e.u >= n_ || e.v < 0 || e.v >= n_)
      throw std::invalid_argument("edge endpoint out of range");
    if (e.u == e.v) throw std::invalid_argument("self-loops are not allowed");
    if (!(e.w > 0)) throw std::invalid_argument("edge weights must be positive");
  }
  if (root_ && (*root_ < 0 || *root_ >= n_)) throw std::invalid_argument("root out of range");
  adj_.assign(static_cast<size_t>(n_), {});
  for (int id = 0; id < edge_count(); ++id) {
    const Edge& e = edges_[static_cast<size_t>(id)];
    adj_[static_cast<size_t>(e.u)].push_back({e.v, id});
    adj_[static_cast<size_t>(e.v)].push_back({e.u, id});
  }
}

double WeightedGraph::min_weight() const {
  double m = std::numeric_limits<double>::infinity();
  for (const Edge& e : edges_) m = std::min(m, e.w);
  return m;
}

double WeightedGraph::total_weight(const std::vector<int>& edge_ids) const {
  double s = 0.0;
  for (int id : edge_ids) s += edge(id).w;
  return s;
}

bool WeightedGraph::is_connected() const {
  if (n_ <= 1) return true;
  std::vector<char> seen(static_cast<size_t>(n_), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int cnt = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (auto [u, id] : adj_[static_cast<size_t>(v)]) {
      (void)id;
      if (!seen[static_cast<size_t>(u)]) {
        seen[static_cast<size_t>(u)] = 1;
        ++cnt;
        stack.push_back(u);
      }
    }
  }
  return cnt == n_;
}

int WeightedGraph::find_edge(int u, int v) const {
  for (auto [nb, id] : adj_[static_cast<size_t>(u)])
    if (nb == v) return id;
  return -1;
}

Metric::Metric(const WeightedGraph& g) : n_(g.n()) {
  if (!g.is_connected()) throw std::invalid_argument("graph must be connected");
  const double inf = std::numeric_limits<double>::infinity();
  dist_.assign(static_cast<size_t>(n_), std::vector<double>(static_cast<size_t>(n_), inf));
  pred_.assign(static_cast<size_t>(n_), std::vector<int>(static_cast<size_t>(n_), -1));
  // Dijkstra from every source; deterministic tie-breaks by vertex id.
  for (int s = 0; s < n_; ++s) {
    auto& dist = dist_[static_cast<size_t>(s)];
    auto& pred = pred_[static_cast<size_t>(s)];
    dist[static_cast<size_t>(s)] = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    pq.push({0.0, s});
    std::vector<char> done(static_cast<size_t>(n_), 0);
    while (!pq.empty()) {
      auto [d, v] = pq.top();
      pq.pop();
      if (done[static_cast<size_t>(v)]) continue;
      done[static_cast<size_t>(v)] = 1;
      for (auto [u, id] : g.adjacency()[static_cast<size_t>(v)]) {
        double nd = d + g.edge(id).w;
        double& cur = dist[static_cast<size_t>(u)];
        int& cp = pred[static_cast<size_t>(u)];
        if (nd < cur - kEps || (std::abs(nd - cur) <= kEps && (cp == -1 || v < cp))) {
          cur = std::min(cur, nd);
          cp = v;
          pq.push({nd, u});
        }
      }
    }
  }
  diameter_ = 0.0;
  for (int u = 0; u < n_; ++u)
    for (int v = 0; v < n_; ++v) diameter_ = std::max(diameter_, d(u, v));
}

std::vector<int> Metric::ball(int v, double x) const {
  if (x < 0) throw std::invalid_argument("ball radius must be nonnegative");
  std::vector<int> out;
  for (int u = 0; u < n_; ++u)
    if (d(v, u) <= x + kEps) out.push_back(u);
  return out;
}

std::vector<int> Metric::shortest_path(int u, int v) const {
  // Always walk predecessors from the smaller endpoint so repeated calls for
  // the same pair return the identical path.
  bool flip = u > v;
  if (flip) std::swap(u, v);
  std::vector<int> path;
  int cur = v;
  while (cur != u) {
    path.push_back(cur);
    cur = pred_[static_cast<size_t>(u)][static_cast<size_t>(cur)];
  }
  path.push_back(u);
  if (!flip) std::reverse(path.begin(), path.end());
  return path;
}

Metric shortest_path_metric(const WeightedGraph& g) { return Metric(g); }

RootedTree::RootedTree(const WeightedGraph& g, int root) {
  if (g.edge_count() != g.n() - 1) throw std::invalid_argument("not a tree: wrong edge count");
  if (root < 0 || root >= g.n()) throw std::invalid_argument("root out of range");
  parent_.assign(static_cast<size_t>(g.n()), -2);
  pw_.assign(static_cast<size_t>(g.n()), 0.0);
  parent_[static_cast<size_t>(root)] = -1;
  root_ = root;
  std::vector<int> stack{root};
  int seen = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (auto [u, id] : g.adjacency()[static_cast<size_t>(v)]) {
      if (parent_[static_cast<size_t>(u)] != -2) continue;
      parent_[static_cast<size_t>(u)] = v;
      pw_[static_cast<size_t>(u)] = g.edge(id).w;
      ++seen;
      stack.push_back(u);
    }
  }
  if (seen != g.n()) throw std::invalid_argument("not a tree: disconnected");
  finalize();
}

RootedTree RootedTree::from_parents(int root, std::vector<int> parent, std::vector<double> pw) {
  RootedTree t;
  t.root_ = root;
  t.parent_ = std::move(parent);
  t.pw_ = std::move(pw);
  t.finalize();
  return t;
}

void RootedTree::finalize() {
  int n = static_cast<int>(parent_.size());
  children_.assign(static_cast<size_t>(n), {});
  for (int v = 0; v < n; ++v)
    if (parent_[static_cast<size_t>(v)] >= 0)
      children_[static_cast<size_t>(parent_[static_cast<size_t>(v)])].push_back(v);
  depth_.assign(static_cast<size_t>(n), 0);
  order_.clear();
  order_.reserve(static_cast<size_t>(n));
  std::vector<int> queue{root_};
  for (size_t i = 0; i < queue.size(); ++i) {
    int v = queue[i];
    order_.push_back(v);
    for (int c : children_[static_cast<size_t>(v)]) {
      depth_[static_cast<size_t>(c)] = depth_[static_cast<size_t>(v)] + 1;
      queue.push_back(c);
    }
  }
  if (static_cast<int>(order_.size()) != n)
    throw std::invalid_argument("parent map does not describe a rooted tree");
}

int RootedTree::max_depth() const {
  int d = 0;
  for (int v = 0; v < n(); ++v) d = std::max(d, depth_[static_cast<size_t>(v)]);
  return d;
}

double RootedTree::dist(int u, int v) const {
  double s = 0.0;
  while (u != v) {
    if (depth_[static_cast<size_t>(u)] < depth_[static_cast<size_t>(v)]) std::swap(u, v);
    s += pw_[static_cast<size_t>(u)];
    u = parent_[static_cast<size_t>(u)];
  }
  return s;
}

double RootedTree::total_weight() const {
  double s = 0.0;
  for (int v = 0; v < n(); ++v)
    if (parent_[static_cast<size_t>(v)] >= 0) s += pw_[static_cast<size_t>(v)];
  return s;
}

bool connected(const WeightedGraph& g, const std::vector<int>& F, const std::vector<int>& U,
               const std::vector<int>& W) {
  if (U.empty() || W.empty()) throw std::invalid_argument("connectivity query needs nonempty sets");
  DisjointSet ds(g.n());
  for (int id : F) ds.unite(g.edge(id).u, g.edge(id).v);
  std::set<int> roots;
  for (int u : U) roots.insert(ds.find(u));
  for (int w : W)
    if (roots.count(ds.find(w))) return true;
  return false;
}

std::vector<int> components(const WeightedGraph& g, const std::vector<int>& F) {
  DisjointSet ds(g.n());
  for (int id : F) ds.unite(g.edge(id).u, g.edge(id).v);
  std::vector<int> label(static_cast<size_t>(g.n()));
  for (int v = 0; v < g.n(); ++v) label[static_cast<size_t>(v)] = ds.find(v);
  return label;
}

std::vector<EulerPath> euler_path_partition(const WeightedGraph& g, const std::vector<int>& F,
                                            const std::vector<int>& marked) {
  if (F.empty()) return {};
  // Validate tree shape on the vertices touched by F.
  std::set<int> verts;
  DisjointSet ds(g.n());
  for (int id : F) {
    const Edge& e = g.edge(id);
    verts.insert(e.u);
    verts.insert(e.v);
    if (!ds.unite(e.u, e.v)) throw std::invalid_argument("edge set contains a cycle");
  }
  if (verts.size() != F.size() + 1) throw std::invalid_argument("edge set is not connected");

  std::vector<char> is_marked(static_cast<size_t>(g.n()), 0);
  for (int v : marked) is_marked[static_cast<size_t>(v)] = 1;
  std::vector<int> degree(static_cast<size_t>(g.n()), 0);
  for (int id : F) {
    ++degree[static_cast<size_t>(g.edge(id).u)];
    ++degree[static_cast<size_t>(g.edge(id).v)];
  }
  for (int v : verts)
    if (degree[static_cast<size_t>(v)] == 1 && !is_marked[static_cast<size_t>(v)])
      throw std::invalid_argument("every leaf of the edge set must be marked");

  // Build the doubled multigraph and walk an Euler circuit (Hierholzer).
  struct Arc {
    int to;
    int edge;
    bool used;
  };
  std::vector<Arc> arcs;
  std::vector<std::vector<int>> out(static_cast<size_t>(g.n()));
  auto add_arc = [&](int a, int b, int id) {
    out[static_cast<size_t>(a)].push_back(static_cast<int>(arcs.size()));
    arcs.push_back({b, id, false});
  };
  for (int id : F) {
    const Edge& e = g.edge(id);
    // each tree edge twice, traversable in both directions
    add_arc(e.u, e.v, id);
    add_arc(e.v, e.u, id);
    add_arc(e.u, e.v, id);
    add_arc(e.v, e.u, id);
  }
  // Each undirected copy must be used exactly once; pair arcs (2i, 2i+1) and
  // (2i+2, 2i+3) so using one marks its reverse.
  auto mate = [](int a) { return a ^ 1; };

  int start = -1;
  for (int v : verts)
    if (is_marked[static_cast<size_t>(v)]) {
      start = v;
      break;
    }
  if (start < 0) throw std::invalid_argument("no marked vertex on the edge set");

  std::vector<size_t> it(static_cast<size_t>(g.n()), 0);
  std::vector<int> circuit;  // vertex sequence
  std::vector<int> stack{start};
  std::vector<int> edge_stack;
  std::vector<int> circuit_edges;
  while (!stack.empty()) {
    int v = stack.back();
    auto& ptr = it[static_cast<size_t>(v)];
    bool advanced = false;
    while (ptr < out[static_cast<size_t>(v)].size()) {
      int a = out[static_cast<size_t>(v)][ptr];
      if (arcs[static_cast<size_t>(a)].used) {
        ++ptr;
        continue;
      }
      arcs[static_cast<size_t>(a)].used = true;
      arcs[static_cast<size_t>(mate(a))].used = true;
      stack.push_back(arcs[static_cast<size_t>(a)].to);
      edge_stack.push_back(arcs[static_cast<size_t>(a)].edge);
      advanced = true;
      break;
    }
    if (!advanced) {
      circuit.push_back(v);
      stack.pop_back();
      if (!edge_stack.empty() && !stack.empty()) {
        circuit_edges.push_back(edge_stack.back());
        edge_stack.pop_back();
      }
    }
  }
  std::reverse(circuit.begin(), circuit.end());
  std::reverse(circuit_edges.begin(), circuit_edges.end());

  // Split the circuit at every visit to a marked vertex.
  std::vector<EulerPath> paths;
  EulerPath cur;
  cur.vertices.push_back(circuit[0]);
  for (size_t i = 1; i < circuit.size(); ++i) {
    cur.vertices.push_back(circuit[i]);
    cur.weight += g.edge(circuit_edges[i - 1]).w;
    if (is_marked[static_cast<size_t>(circuit[i])]) {
      paths.push_back(cur);
      cur = EulerPath{};
      cur.vertices.push_back(circuit[i]);
    }
  }
  if (cur.vertices.size() > 1)
    throw std::logic_error("euler circuit did not end at a marked vertex");
  return paths;
}

bool is_well_separated(const RootedTree& t) {
  for (int v = 0; v < t.n(); ++v) {
    int p = t.parent(v);
    if (p < 0 || t.parent(p) < 0) continue;  // root edges have no parent edge
    if (t.parent_weight(v) > 0.5 * t.parent_weight(p) + kEps) return false;
  }
  return true;
}

LoadedGraph normalize_graph(int n, const std::vector<Edge>& edges, std::optional<int> root) {
  for (const Edge& e : edges) {
    if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n)
      throw std::invalid_argument("edge endpoint out of range");
    if (e.w < 0) throw std::invalid_argument("negative edge weights are not supported");
  }
  // Contract zero-weight edges.
  DisjointSet ds(n);
  int contracted = 0;
  for (const Edge& e : edges)
    if (e.w <= kEps && e.u != e.v) {
      if (ds.unite(e.u, e.v)) ++contracted;
    }
  std::vector<int> vertex_map(static_cast<size_t>(n), -1);
  int m = 0;
  for (int v = 0; v < n; ++v)
    if (ds.find(v) == v) vertex_map[static_cast<size_t>(v)] = m++;
  for (int v = 0; v < n; ++v) vertex_map[static_cast<size_t>(v)] = vertex_map[static_cast<size_t>(ds.find(v))];

  // Deduplicate parallel edges keeping the lightest.
  std::map<std::pair<int, int>, double> best;
  for (const Edge& e : edges) {
    if (e.w <= kEps) continue;
    int a = vertex_map[static_cast<size_t>(e.u)];
    int b = vertex_map[static_cast<size_t>(e.v)];
    if (a == b) continue;  // loop created by contraction
    if (a > b) std::swap(a, b);
    auto it = best.find({a, b});
    if (it == best.end() || e.w < it->second) best[{a, b}] = e.w;
  }
  double min_w = std::numeric_limits<double>::infinity();
  for (auto& [k, w] : best) min_w = std::min(min_w, w);
  double scale = 1.0;
  if (!best.empty() && min_w < 1.0) scale = 1.0 / min_w;

  std::vector<Edge> out;
  out.reserve(best.size());
  for (auto& [k, w] : best) out.push_back({k.first, k.second, w * scale});
  std::optional<int> new_root;
  if (root) {
    if (*root < 0 || *root >= n) throw std::invalid_argument("root out of range");
    new_root = vertex_map[static_cast<size_t>(*root)];
  }
  LoadedGraph lg{WeightedGraph(m, std::move(out), new_root), scale, contracted, vertex_map};
  if (!lg.graph.is_connected()) throw std::invalid_argument("graph must be connected");
  return lg;
}

}  // namespace copytree
