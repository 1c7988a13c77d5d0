#include "copytree/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace copytree {

namespace {

// Shared contraction: embed the vertices of `keep_vertex` (which must
// contain r) from the decomposition tree.
PartialTreeEmbedding contract(const Metric& m, const HierarchicalDecomposition& hd, int r,
                              const std::vector<char>& keep_vertex) {
  DecompositionTree dt = tree_of(hd);
  const RootedTree& th = dt.tree;
  int tn = th.n();

  // Nodes on the path from r's leaf to the top collapse onto r.
  std::vector<char> on_path(static_cast<size_t>(tn), 0);
  for (int x = dt.leaf_of_vertex[static_cast<size_t>(r)]; x >= 0; x = th.parent(x))
    on_path[static_cast<size_t>(x)] = 1;

  // Smallest kept vertex in each subtree; infinity marks prunable subtrees.
  const int kNone = std::numeric_limits<int>::max();
  std::vector<int> minv(static_cast<size_t>(tn), kNone);
  const auto& order = th.bfs_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int x = *it;
    int v = dt.vertex_of_node[static_cast<size_t>(x)];
    if (v >= 0 && keep_vertex[static_cast<size_t>(v)]) minv[static_cast<size_t>(x)] = v;
    for (int c : th.children(x))
      minv[static_cast<size_t>(x)] = std::min(minv[static_cast<size_t>(x)], minv[static_cast<size_t>(c)]);
  }

  // Representative after all contractions: the path maps to r, a level-0
  // leaf maps to its vertex, and an internal node merges into the child
  // subtree holding the smallest kept vertex.
  std::vector<int> rep(static_cast<size_t>(tn), -1);
  for (int x : order) {
    if (minv[static_cast<size_t>(x)] == kNone && !on_path[static_cast<size_t>(x)]) continue;
    if (on_path[static_cast<size_t>(x)]) {
      rep[static_cast<size_t>(x)] = r;
      continue;
    }
    int v = dt.vertex_of_node[static_cast<size_t>(x)];
    if (v >= 0) {
      rep[static_cast<size_t>(x)] = v;
      continue;
    }
    int best = -1;
    for (int c : th.children(x)) {
      if (minv[static_cast<size_t>(c)] == kNone) continue;
      if (best < 0 || minv[static_cast<size_t>(c)] < minv[static_cast<size_t>(best)]) best = c;
    }
    rep[static_cast<size_t>(x)] = -2 - best;  // resolved below (child may not be done yet)
  }
  // Resolve chains bottom-up: bfs order guarantees children precede parents
  // when walking in reverse, so a second pass suffices.
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int x = *it;
    if (rep[static_cast<size_t>(x)] <= -2) rep[static_cast<size_t>(x)] = rep[static_cast<size_t>(-2 - rep[static_cast<size_t>(x)])];
  }

  PartialTreeEmbedding out;
  out.root_graph = r;
  for (int v = 0; v < m.n(); ++v)
    if (keep_vertex[static_cast<size_t>(v)]) out.verts.push_back(v);
  out.local_of.assign(static_cast<size_t>(m.n()), -1);
  for (size_t i = 0; i < out.verts.size(); ++i) out.local_of[static_cast<size_t>(out.verts[i])] = static_cast<int>(i);

  int nv = static_cast<int>(out.verts.size());
  std::vector<int> parent(static_cast<size_t>(nv), -1);
  std::vector<double> pw(static_cast<size_t>(nv), 0.0);
  for (int x : order) {
    if (on_path[static_cast<size_t>(x)] || minv[static_cast<size_t>(x)] == kNone) continue;
    int px = th.parent(x);
    int rx = rep[static_cast<size_t>(x)];
    int rpx = rep[static_cast<size_t>(px)];
    if (rx == rpx) continue;
    int li = out.local_of[static_cast<size_t>(rx)];
    parent[static_cast<size_t>(li)] = out.local_of[static_cast<size_t>(rpx)];
    pw[static_cast<size_t>(li)] = 4.0 * th.parent_weight(x);
  }
  out.tree = RootedTree::from_parents(out.local_of[static_cast<size_t>(r)], std::move(parent), std::move(pw));

  out.gamma = 1.0;
  for (int i = 0; i < nv; ++i)
    for (int j = i + 1; j < nv; ++j) {
      double dg = m.d(out.verts[static_cast<size_t>(i)], out.verts[static_cast<size_t>(j)]);
      double dt_ = out.tree.dist(i, j);
      if (dt_ + kEps < dg) throw std::logic_error("partial tree distances must dominate the metric");
      if (dg > kEps) out.gamma = std::max(out.gamma, dt_ / dg);
    }
  return out;
}

// Minimal subtree edges (child local ids) spanning the local vertex set S.
void span_edges(const PartialTreeEmbedding& p, const std::vector<int>& S, std::vector<char>& mark) {
  if (S.size() < 2) return;
  std::vector<int> cnt(static_cast<size_t>(p.tree.n()), 0);
  for (int s : S) cnt[static_cast<size_t>(s)] = 1;
  const auto& order = p.tree.bfs_order();
  int total = static_cast<int>(S.size());
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int v = *it;
    for (int c : p.tree.children(v)) cnt[static_cast<size_t>(v)] += cnt[static_cast<size_t>(c)];
    if (p.tree.parent(v) >= 0 && cnt[static_cast<size_t>(v)] > 0 && cnt[static_cast<size_t>(v)] < total)
      mark[static_cast<size_t>(v)] = 1;
  }
}

// Forest with the same connected components as F, per constituent.
std::vector<int> component_forest(const PartialTreeEmbedding& p, const WeightedGraph& g,
                                  const std::vector<int>& F) {
  std::vector<char> mark(static_cast<size_t>(p.tree.n()), 0);
  auto label = components(g, F);
  std::map<int, std::vector<int>> groups;
  std::vector<char> touched(static_cast<size_t>(g.n()), 0);
  for (int id : F) {
    touched[static_cast<size_t>(g.edge(id).u)] = 1;
    touched[static_cast<size_t>(g.edge(id).v)] = 1;
  }
  for (int v = 0; v < g.n(); ++v) {
    if (!touched[static_cast<size_t>(v)]) continue;
    int li = p.local_of[static_cast<size_t>(v)];
    if (li >= 0) groups[label[static_cast<size_t>(v)]].push_back(li);
  }
  for (auto& [lab, S] : groups) span_edges(p, S, mark);
  std::vector<int> out;
  for (int v = 0; v < p.tree.n(); ++v)
    if (mark[static_cast<size_t>(v)]) out.push_back(v);
  return out;
}

double forest_weight(const PartialTreeEmbedding& p, const std::vector<int>& children) {
  double s = 0.0;
  for (int c : children) s += p.tree.parent_weight(c);
  return s;
}

CopyTreeEmbedding merge_parts(std::string construction, const WeightedGraph& g, Metric metric,
                              int r, std::vector<PartialTreeEmbedding> parts) {
  CopyTreeEmbedding e;
  e.construction = std::move(construction);
  e.graph = g;
  e.metric = std::move(metric);
  e.root = r;
  e.parts = std::move(parts);

  e.inv.push_back(r);
  e.source.push_back(-1);
  e.phi.assign(static_cast<size_t>(g.n()), {});
  e.phi[static_cast<size_t>(r)].push_back(0);
  std::vector<int> parent{-1};
  std::vector<double> pw{0.0};
  e.copy_of.resize(e.parts.size());
  for (size_t i = 0; i < e.parts.size(); ++i) {
    const PartialTreeEmbedding& p = e.parts[i];
    auto& cmap = e.copy_of[i];
    cmap.assign(static_cast<size_t>(p.tree.n()), -1);
    cmap[static_cast<size_t>(p.tree.root())] = 0;
    for (int li = 0; li < p.tree.n(); ++li) {
      if (li == p.tree.root()) continue;
      int id = static_cast<int>(e.inv.size());
      cmap[static_cast<size_t>(li)] = id;
      e.inv.push_back(p.verts[static_cast<size_t>(li)]);
      e.source.push_back(static_cast<int>(i));
      e.phi[static_cast<size_t>(p.verts[static_cast<size_t>(li)])].push_back(id);
      parent.push_back(-2);  // fixed below
      pw.push_back(0.0);
    }
    for (int li = 0; li < p.tree.n(); ++li) {
      if (li == p.tree.root()) continue;
      int id = cmap[static_cast<size_t>(li)];
      parent[static_cast<size_t>(id)] = cmap[static_cast<size_t>(p.tree.parent(li))];
      pw[static_cast<size_t>(id)] = p.tree.parent_weight(li);
    }
  }
  e.tree = RootedTree::from_parents(0, std::move(parent), std::move(pw));
  e.chi = 0;
  for (int v = 0; v < g.n(); ++v) e.chi = std::max(e.chi, static_cast<int>(e.phi[static_cast<size_t>(v)].size()));
  return e;
}

PartialTreeEmbedding sample_frt_tree(const Metric& m, int r, Rng rng) {
  std::vector<int> pi(static_cast<size_t>(m.n()));
  for (int v = 0; v < m.n(); ++v) pi[static_cast<size_t>(v)] = v;
  rng.shuffle(pi);
  double beta = 0.5 + 0.5 * rng.uniform();
  HierarchicalDecomposition hd = decomposition_from(m, CuttingDraw{pi, beta});
  return full_tree_from(m, hd, r);
}

}  // namespace

PartialTreeEmbedding partial_tree_from(const Metric& m, const HierarchicalDecomposition& hd, int r,
                                       double alpha) {
  std::vector<char> keep(static_cast<size_t>(m.n()), 0);
  for (int v = 0; v < m.n(); ++v) keep[static_cast<size_t>(v)] = is_alpha_padded(m, hd, v, alpha) ? 1 : 0;
  if (!keep[static_cast<size_t>(r)])
    throw std::invalid_argument("root is not padded in this decomposition");
  return contract(m, hd, r, keep);
}

PartialTreeEmbedding full_tree_from(const Metric& m, const HierarchicalDecomposition& hd, int r) {
  std::vector<char> keep(static_cast<size_t>(m.n()), 1);
  return contract(m, hd, r, keep);
}

std::vector<int> project_to_tree(const PartialTreeEmbedding& p, const WeightedGraph& g,
                                 const std::vector<int>& F) {
  return component_forest(p, g, F);
}

std::vector<int> project_to_graph(const PartialTreeEmbedding& p, const WeightedGraph& g,
                                  const Metric& m, const std::vector<int>& Fp) {
  std::set<int> ids;
  for (int c : Fp) {
    int u = p.verts[static_cast<size_t>(c)];
    int v = p.verts[static_cast<size_t>(p.tree.parent(c))];
    auto path = m.shortest_path(std::min(u, v), std::max(u, v));
    for (size_t i = 0; i + 1 < path.size(); ++i) {
      int id = g.find_edge(path[i], path[i + 1]);
      if (id < 0) throw std::logic_error("shortest path left the graph");
      ids.insert(id);
    }
  }
  return {ids.begin(), ids.end()};
}

double CopyTreeEmbedding::tree_weight(const std::vector<int>& copy_children) const {
  double s = 0.0;
  for (int c : copy_children) s += tree.parent_weight(c);
  return s;
}

CopyTreeEmbedding build_construction1(const WeightedGraph& g, int r, double epsilon,
                                      int tau_override, double alpha_override) {
  Metric m(g);
  if (g.n() == 1) {
    CopyTreeEmbedding e = merge_parts("merged-partial", g, std::move(m), r, {});
    e.epsilon = epsilon;
    e.alpha_pad = 0.125;
    e.family_size = 1;
    return e;
  }
  double alpha = alpha_override > 0 ? alpha_override : calibrate_alpha(m, uniform_distribution(g.n()));
  PaddedFamily fam;
  for (;;) {
    try {
      fam = padded_family(m, epsilon, alpha, tau_override);
      break;
    } catch (const GoodStartError&) {
      alpha /= 2;
      if (alpha < 1e-12) throw;
    }
  }
  std::vector<PartialTreeEmbedding> parts;
  for (int t = 0; t < fam.tau; ++t) {
    if (!fam.padded[static_cast<size_t>(t)][static_cast<size_t>(r)]) continue;
    parts.push_back(partial_tree_from(m, fam.decompositions[static_cast<size_t>(t)], r, alpha));
  }
  CopyTreeEmbedding e = merge_parts("merged-partial", g, std::move(m), r, std::move(parts));
  e.alpha_pad = alpha;
  e.epsilon = epsilon;
  e.family_size = fam.tau;
  return e;
}

CopyTreeEmbedding build_construction2(const WeightedGraph& g, int r, int k, uint64_t seed) {
  if (k < 1) throw std::invalid_argument("tree count must be at least 1");
  Metric m(g);
  Rng rng(seed);
  std::vector<PartialTreeEmbedding> parts;
  if (g.n() > 1)
    for (int i = 0; i < k; ++i) parts.push_back(sample_frt_tree(m, r, rng.fork(static_cast<uint64_t>(i))));
  CopyTreeEmbedding e = merge_parts("frt-support", g, std::move(m), r, std::move(parts));
  e.family_size = k;
  return e;
}

CopyTreeEmbedding build_demand_robust(const WeightedGraph& g, int r, int scenario_count,
                                      uint64_t seed) {
  if (scenario_count < 1) throw std::invalid_argument("scenario count must be at least 1");
  int k = static_cast<int>(std::ceil(4.0 * std::log(4.0 * g.n() * (scenario_count + 1))));
  for (int attempt = 0; attempt < 10; ++attempt) {
    CopyTreeEmbedding e = build_construction2(g, r, k, seed + static_cast<uint64_t>(attempt));
    e.construction = "demand-robust";
    e.scenario_capacity = scenario_count;
    if (verify_embedding(e, 0, 0).ok()) return e;
  }
  throw std::runtime_error("demand-robust embedding failed structural verification");
}

std::vector<int> map_tree_to_graph(const CopyTreeEmbedding& e, const std::vector<int>& copy_children) {
  std::set<int> ids;
  std::vector<std::vector<int>> per_part(e.parts.size());
  for (int c : copy_children) {
    int s = e.source[static_cast<size_t>(c)];
    const PartialTreeEmbedding& p = e.parts[static_cast<size_t>(s)];
    // recover the constituent-local child index
    int v = e.inv[static_cast<size_t>(c)];
    per_part[static_cast<size_t>(s)].push_back(p.local_of[static_cast<size_t>(v)]);
  }
  for (size_t i = 0; i < e.parts.size(); ++i) {
    auto part_ids = project_to_graph(e.parts[i], e.graph, e.metric, per_part[i]);
    ids.insert(part_ids.begin(), part_ids.end());
  }
  return {ids.begin(), ids.end()};
}

std::vector<int> map_graph_to_tree(const CopyTreeEmbedding& e, const std::vector<int>& F) {
  std::vector<int> out;
  if (e.construction == "merged-partial") {
    for (size_t i = 0; i < e.parts.size(); ++i)
      for (int c : project_to_tree(e.parts[i], e.graph, F))
        out.push_back(e.copy_of[i][static_cast<size_t>(c)]);
    std::sort(out.begin(), out.end());
    return out;
  }
  if (e.parts.empty()) return {};
  int best = 0;
  double best_w = std::numeric_limits<double>::infinity();
  std::vector<std::vector<int>> forests(e.parts.size());
  for (size_t i = 0; i < e.parts.size(); ++i) {
    forests[i] = component_forest(e.parts[i], e.graph, F);
    double w = forest_weight(e.parts[i], forests[i]);
    if (w < best_w - kEps) {
      best_w = w;
      best = static_cast<int>(i);
    }
  }
  for (int c : forests[static_cast<size_t>(best)])
    out.push_back(e.copy_of[static_cast<size_t>(best)][static_cast<size_t>(c)]);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<int>> forward_map_tuple(const CopyTreeEmbedding& e,
                                                const std::vector<std::vector<int>>& stages) {
  if (e.construction == "demand-robust" &&
      static_cast<int>(stages.size()) != e.scenario_capacity + 1)
    throw std::invalid_argument("stage tuple length does not match the embedding");
  std::vector<std::vector<int>> out(stages.size());
  if (e.parts.empty()) return out;

  std::vector<std::vector<int>> base_forest(e.parts.size());
  std::vector<double> base_weight(e.parts.size());
  for (size_t j = 0; j < e.parts.size(); ++j) {
    base_forest[j] = component_forest(e.parts[j], e.graph, stages[0]);
    base_weight[j] = forest_weight(e.parts[j], base_forest[j]);
    for (int c : base_forest[j]) out[0].push_back(e.copy_of[j][static_cast<size_t>(c)]);
  }
  std::sort(out[0].begin(), out[0].end());

  for (size_t i = 1; i < stages.size(); ++i) {
    int best = 0;
    double best_w = std::numeric_limits<double>::infinity();
    std::vector<std::vector<int>> forests(e.parts.size());
    for (size_t j = 0; j < e.parts.size(); ++j) {
      forests[j] = component_forest(e.parts[j], e.graph, stages[i]);
      double w = base_weight[j] + forest_weight(e.parts[j], forests[j]);
      if (w < best_w - kEps) {
        best_w = w;
        best = static_cast<int>(j);
      }
    }
    for (int c : forests[static_cast<size_t>(best)])
      out[i].push_back(e.copy_of[static_cast<size_t>(best)][static_cast<size_t>(c)]);
    std::sort(out[i].begin(), out[i].end());
  }
  return out;
}

bool VerifyReport::ok() const {
  return structure_ok && phi_partition_ok && root_copy_singleton && well_separated &&
         forward_connectivity_failures == 0 && backward_connectivity_failures == 0 &&
         backward_cost_failures == 0 && monotonicity_failures == 0 && strong_root_failures == 0;
}

VerifyReport verify_embedding(const CopyTreeEmbedding& e, int trials, uint64_t seed) {
  VerifyReport rep;
  rep.chi = e.chi;
  rep.trials = trials;

  // phi is a partition of the copies, nonempty per vertex, with phi(r)={root}.
  std::vector<int> owner(static_cast<size_t>(e.tree.n()), -1);
  bool partition = true;
  for (int v = 0; v < e.graph.n(); ++v) {
    if (e.phi[static_cast<size_t>(v)].empty()) partition = false;
    for (int c : e.phi[static_cast<size_t>(v)]) {
      if (owner[static_cast<size_t>(c)] != -1) partition = false;
      owner[static_cast<size_t>(c)] = v;
      if (e.inv[static_cast<size_t>(c)] != v) partition = false;
    }
  }
  for (int c = 0; c < e.tree.n(); ++c)
    if (owner[static_cast<size_t>(c)] == -1) partition = false;
  rep.phi_partition_ok = partition;
  rep.root_copy_singleton =
      e.phi[static_cast<size_t>(e.root)].size() == 1 && e.phi[static_cast<size_t>(e.root)][0] == 0;
  rep.well_separated = is_well_separated(e.tree);
  rep.structure_ok = rep.phi_partition_ok && rep.root_copy_singleton && rep.well_separated;

  Rng rng(seed);
  auto random_edge_subset = [&](const WeightedGraph& g) {
    std::vector<int> F;
    for (int id = 0; id < g.edge_count(); ++id)
      if (rng.uniform() < 0.5) F.push_back(id);
    return F;
  };

  for (int t = 0; t < trials; ++t) {
    std::vector<int> F = random_edge_subset(e.graph);
    std::vector<int> Ft = map_graph_to_tree(e, F);
    double wf = e.graph.total_weight(F);

    // forward connectivity: connected graph pairs must have connected copies.
    // Both relations are checked through component labels to stay linear.
    auto glabel = components(e.graph, F);
    DisjointSet ds(e.tree.n());
    for (int c : Ft) ds.unite(c, e.tree.parent(c));
    std::vector<std::vector<int>> comp_sets(static_cast<size_t>(e.graph.n()));
    for (int u = 0; u < e.graph.n(); ++u) {
      auto& s = comp_sets[static_cast<size_t>(u)];
      for (int cu : e.phi[static_cast<size_t>(u)]) s.push_back(ds.find(cu));
      std::sort(s.begin(), s.end());
      s.erase(std::unique(s.begin(), s.end()), s.end());
    }
    auto share_component = [&](int u, int v) {
      const auto& a = comp_sets[static_cast<size_t>(u)];
      const auto& b = comp_sets[static_cast<size_t>(v)];
      size_t i = 0, j = 0;
      while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) return true;
        if (a[i] < b[j])
          ++i;
        else
          ++j;
      }
      return false;
    };
    for (int u = 0; u < e.graph.n(); ++u)
      for (int v = u + 1; v < e.graph.n(); ++v) {
        if (glabel[static_cast<size_t>(u)] != glabel[static_cast<size_t>(v)]) continue;
        if (!share_component(u, v)) ++rep.forward_connectivity_failures;
      }

    if (wf > kEps) {
      rep.max_forward_factor_union =
          std::max(rep.max_forward_factor_union, e.tree_weight(Ft) / wf);
      for (size_t i = 0; i < e.parts.size(); ++i) {
        auto fi = component_forest(e.parts[i], e.graph, F);
        rep.max_forward_factor_per_tree =
            std::max(rep.max_forward_factor_per_tree, forest_weight(e.parts[i], fi) / wf);
      }
    }

    // strong root-connectivity property of the merged-partial construction
    if (e.construction == "merged-partial") {
      int root_comp = ds.find(0);
      for (int u = 0; u < e.graph.n(); ++u) {
        if (u == e.root || glabel[static_cast<size_t>(u)] != glabel[static_cast<size_t>(e.root)]) continue;
        for (int cu : e.phi[static_cast<size_t>(u)])
          if (ds.find(cu) != root_comp) ++rep.strong_root_failures;
      }
    }

    // backward direction on a random copy-tree edge set
    std::vector<int> Fp;
    for (int c = 1; c < e.tree.n(); ++c)
      if (rng.uniform() < 0.5) Fp.push_back(c);
    std::vector<int> Fg = map_tree_to_graph(e, Fp);
    double wp = e.tree_weight(Fp);
    double wg = e.graph.total_weight(Fg);
    if (wg > wp + kEps) ++rep.backward_cost_failures;
    if (wp > kEps) rep.max_backward_slack = std::max(rep.max_backward_slack, wg / wp);

    // every copy-tree component with an edge must land in one graph component
    DisjointSet dt(e.tree.n());
    for (int c : Fp) dt.unite(c, e.tree.parent(c));
    auto blabel = components(e.graph, Fg);
    std::map<int, int> comp_to_glabel;
    for (int c = 0; c < e.tree.n(); ++c) {
      int key = dt.find(c);
      int gl = blabel[static_cast<size_t>(e.inv[static_cast<size_t>(c)])];
      auto it = comp_to_glabel.find(key);
      if (it == comp_to_glabel.end())
        comp_to_glabel[key] = gl;
      else if (it->second != gl)
        ++rep.backward_connectivity_failures;
    }

    // monotonicity of the backward map on a nested pair
    std::vector<int> sub;
    for (int c : Fp)
      if (rng.uniform() < 0.5) sub.push_back(c);
    std::vector<int> sub_g = map_tree_to_graph(e, sub);
    if (!std::includes(Fg.begin(), Fg.end(), sub_g.begin(), sub_g.end()))
      ++rep.monotonicity_failures;
  }
  return rep;
}

}  // namespace copytree
