#include "copytree/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace copytree {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool tree_shaped(const WeightedGraph& g) {
  return g.edge_count() == g.n() - 1 && g.is_connected();
}

std::vector<int> mask_edges(uint32_t mask, int m) {
  std::vector<int> out;
  for (int i = 0; i < m; ++i)
    if (mask & (1u << i)) out.push_back(i);
  return out;
}

// Component ids under an edge mask, via union-find.
struct MaskConnectivity {
  explicit MaskConnectivity(const WeightedGraph& g) : g_(g) {}
  DisjointSet labels(uint32_t mask) const {
    DisjointSet ds(g_.n());
    for (int i = 0; i < g_.edge_count(); ++i)
      if (mask & (1u << i)) ds.unite(g_.edge(i).u, g_.edge(i).v);
    return ds;
  }
  const WeightedGraph& g_;
};

bool groups_feasible(DisjointSet& ds, int r,
                     const std::vector<std::vector<int>>& groups) {
  for (const auto& grp : groups) {
    bool ok = false;
    for (int v : grp)
      if (ds.find(v) == ds.find(r)) {
        ok = true;
        break;
      }
    if (!ok) return false;
  }
  return true;
}

bool pairs_feasible(DisjointSet& ds, const std::vector<GsfEvent>& pairs) {
  for (const auto& pr : pairs) {
    bool ok = false;
    for (int a : pr.A) {
      for (int b : pr.B)
        if (ds.find(a) == ds.find(b)) {
          ok = true;
          break;
        }
      if (ok) break;
    }
    if (!ok) return false;
  }
  return true;
}

void check_groups(const WeightedGraph& g, const std::vector<std::vector<int>>& groups) {
  for (const auto& grp : groups) {
    if (grp.empty()) throw std::invalid_argument("groups must be nonempty");
    for (int v : grp)
      if (v < 0 || v >= g.n()) throw std::invalid_argument("group member out of range");
  }
}

}  // namespace

OracleResult opt_gst_enumeration(const WeightedGraph& g, int r,
                                 const std::vector<std::vector<int>>& groups,
                                 const OracleBudget& budget) {
  check_groups(g, groups);
  int m = g.edge_count();
  if (m > budget.max_edges_general) throw std::invalid_argument("edge budget exceeded");
  MaskConnectivity conn(g);
  double best = kInf;
  uint32_t best_mask = 0;
  for (uint32_t mask = 0; mask < (1u << m); ++mask) {
    double cost = 0.0;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) cost += g.edge(i).w;
    if (cost >= best) continue;
    DisjointSet ds = conn.labels(mask);
    if (groups_feasible(ds, r, groups)) {
      best = cost;
      best_mask = mask;
    }
  }
  return {best, mask_edges(best_mask, m)};
}

OracleResult opt_gst_tree_dp(const WeightedGraph& g, int r,
                             const std::vector<std::vector<int>>& groups,
                             const OracleBudget& budget) {
  check_groups(g, groups);
  if (!tree_shaped(g)) throw std::invalid_argument("tree DP needs a tree");
  if (g.edge_count() > budget.max_edges_tree) throw std::invalid_argument("edge budget exceeded");
  int k = static_cast<int>(groups.size());
  if (k > budget.max_group_bits) throw std::invalid_argument("too many groups for the DP");
  RootedTree t(g, r);
  int full = (1 << k) - 1;
  std::vector<int> vmask(static_cast<size_t>(g.n()), 0);
  for (int gi = 0; gi < k; ++gi)
    for (int v : groups[static_cast<size_t>(gi)]) vmask[static_cast<size_t>(v)] |= 1 << gi;

  int n = g.n();
  std::vector<std::vector<double>> dp(static_cast<size_t>(n),
                                      std::vector<double>(static_cast<size_t>(full) + 1, kInf));
  // from[v][mask]: (previous mask, child, child mask) or base sentinel
  struct Choice {
    int prev = -1, child = -1, cmask = -1;
  };
  std::vector<std::vector<Choice>> from(static_cast<size_t>(n),
                                        std::vector<Choice>(static_cast<size_t>(full) + 1));
  const auto& order = t.bfs_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int v = *it;
    auto& dv = dp[static_cast<size_t>(v)];
    dv[static_cast<size_t>(vmask[static_cast<size_t>(v)])] = 0.0;
    for (int c : t.children(v)) {
      double w = t.parent_weight(c);
      auto snapshot = dv;
      for (int m2 = 0; m2 <= full; ++m2) {
        double dc = dp[static_cast<size_t>(c)][static_cast<size_t>(m2)];
        if (dc == kInf) continue;
        for (int m1 = 0; m1 <= full; ++m1) {
          if (snapshot[static_cast<size_t>(m1)] == kInf) continue;
          double cand = snapshot[static_cast<size_t>(m1)] + w + dc;
          int m = m1 | m2;
          if (cand < dv[static_cast<size_t>(m)] - 1e-12) {
            dv[static_cast<size_t>(m)] = cand;
            from[static_cast<size_t>(v)][static_cast<size_t>(m)] = {m1, c, m2};
          }
        }
      }
    }
    // monotone closure: covering more never costs less
    for (int m = full; m >= 0; --m)
      for (int b = 0; b < k; ++b)
        if (!(m & (1 << b))) {
          int sup = m | (1 << b);
          if (dv[static_cast<size_t>(sup)] < dv[static_cast<size_t>(m)]) {
            dv[static_cast<size_t>(m)] = dv[static_cast<size_t>(sup)];
            from[static_cast<size_t>(v)][static_cast<size_t>(m)] = {-2, sup, -1};
          }
        }
  }

  OracleResult res;
  res.cost = dp[static_cast<size_t>(r)][static_cast<size_t>(full)];
  // reconstruct bought edges
  std::vector<std::pair<int, int>> stack{{r, full}};
  while (!stack.empty()) {
    auto [v, m] = stack.back();
    stack.pop_back();
    const Choice& ch = from[static_cast<size_t>(v)][static_cast<size_t>(m)];
    if (ch.prev == -1) continue;  // base
    if (ch.prev == -2) {          // closure redirect
      stack.push_back({v, ch.child});
      continue;
    }
    int id = g.find_edge(v, ch.child);
    res.edges.push_back(id);
    stack.push_back({v, ch.prev});
    stack.push_back({ch.child, ch.cmask});
  }
  std::sort(res.edges.begin(), res.edges.end());
  return res;
}

OracleResult opt_group_steiner_tree(const WeightedGraph& g, int r,
                                    const std::vector<std::vector<int>>& groups,
                                    const OracleBudget& budget) {
  if (tree_shaped(g) && static_cast<int>(groups.size()) <= budget.max_group_bits &&
      g.edge_count() <= budget.max_edges_tree)
    return opt_gst_tree_dp(g, r, groups, budget);
  return opt_gst_enumeration(g, r, groups, budget);
}

OracleResult opt_group_steiner_forest(const WeightedGraph& g, const std::vector<GsfEvent>& pairs,
                                      const OracleBudget& budget) {
  int m = g.edge_count();
  if (m > budget.max_edges_general) throw std::invalid_argument("edge budget exceeded");
  for (const auto& pr : pairs)
    if (pr.A.empty() || pr.B.empty()) throw std::invalid_argument("pair sides must be nonempty");
  MaskConnectivity conn(g);
  double best = kInf;
  uint32_t best_mask = 0;
  for (uint32_t mask = 0; mask < (1u << m); ++mask) {
    double cost = 0.0;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) cost += g.edge(i).w;
    if (cost >= best) continue;
    DisjointSet ds = conn.labels(mask);
    if (pairs_feasible(ds, pairs)) {
      best = cost;
      best_mask = mask;
    }
  }
  return {best, mask_edges(best_mask, m)};
}

OracleResult opt_two_level_partial(const WeightedGraph& g, int r,
                                   const std::vector<TwoLevelEvent>& events,
                                   const OracleBudget& budget) {
  if (!tree_shaped(g)) throw std::invalid_argument("two-level oracle needs a tree");
  int m = g.edge_count();
  if (m > budget.max_edges_tree) throw std::invalid_argument("edge budget exceeded");
  for (const auto& ev : events) {
    if (ev.f < 1 || ev.f > static_cast<int>(ev.groups.size()))
      throw std::invalid_argument("infeasible requirement");
    for (const auto& grp : ev.groups)
      if (grp.empty()) throw std::invalid_argument("groups must be nonempty");
  }
  double best = kInf;
  uint32_t best_mask = 0;
  for (uint32_t mask = 0; mask < (1u << m); ++mask) {
    double cost = 0.0;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) cost += g.edge(i).w;
    if (cost >= best) continue;
    DisjointSet ds(g.n());
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) ds.unite(g.edge(i).u, g.edge(i).v);
    // the subtree must hang off the root: every chosen edge joins r's component
    bool rooted = true;
    for (int i = 0; i < m && rooted; ++i)
      if (mask & (1u << i))
        if (ds.find(g.edge(i).u) != ds.find(r)) rooted = false;
    if (!rooted) continue;
    bool ok = true;
    for (const auto& ev : events) {
      int cnt = 0;
      for (const auto& grp : ev.groups) {
        for (int v : grp)
          if (ds.find(v) == ds.find(r)) {
            ++cnt;
            break;
          }
      }
      if (cnt < ev.f) {
        ok = false;
        break;
      }
    }
    if (ok) {
      best = cost;
      best_mask = mask;
    }
  }
  return {best, mask_edges(best_mask, m)};
}

OracleResult opt_partial_gst(const WeightedGraph& g, int r, const std::vector<GstEvent>& events,
                             const OracleBudget& budget) {
  int m = g.edge_count();
  if (m > budget.max_edges_general) throw std::invalid_argument("edge budget exceeded");
  for (const auto& ev : events) {
    if (ev.group.empty()) throw std::invalid_argument("groups must be nonempty");
    if (ev.f < 1 || ev.f > static_cast<int>(ev.group.size()))
      throw std::invalid_argument("infeasible requirement");
  }
  MaskConnectivity conn(g);
  double best = kInf;
  uint32_t best_mask = 0;
  for (uint32_t mask = 0; mask < (1u << m); ++mask) {
    double cost = 0.0;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) cost += g.edge(i).w;
    if (cost >= best) continue;
    DisjointSet ds = conn.labels(mask);
    bool ok = true;
    for (const auto& ev : events) {
      int cnt = 0;
      for (int v : ev.group)
        if (ds.find(v) == ds.find(r)) ++cnt;
      if (cnt < ev.f) {
        ok = false;
        break;
      }
    }
    if (ok) {
      best = cost;
      best_mask = mask;
    }
  }
  return {best, mask_edges(best_mask, m)};
}

RobustOracleResult opt_robust(const WeightedGraph& g, int r, const RobustInstance& inst,
                              const OracleBudget& budget) {
  int m = g.edge_count();
  if (inst.m() > budget.max_scenarios) throw std::invalid_argument("scenario budget exceeded");
  // Exact subset enumeration within the general budget; the tree DP extends
  // the reach for group scenarios (free edges modeled with a negligible
  // weight, so costs are exact to ~1e-6 there).
  bool use_tree_dp = tree_shaped(g) && !inst.has_pairs() &&
                     m > budget.max_edges_robust_general && m <= budget.max_edges_robust_tree;
  if (!use_tree_dp && m > budget.max_edges_robust_general)
    throw std::invalid_argument("edge budget exceeded");

  auto scenario_feasible = [&](const Scenario& s, DisjointSet& ds) {
    return groups_feasible(ds, r, s.groups) && pairs_feasible(ds, s.pairs);
  };

  RobustOracleResult best;
  best.cost = kInf;

  if (use_tree_dp) {
    // Second stage on a tree: the cheapest completion is a group Steiner
    // tree with first-stage edges free.
    std::vector<Edge> base = g.edges();
    for (uint32_t x0 = 0; x0 < (1u << m); ++x0) {
      double cost0 = 0.0;
      for (int i = 0; i < m; ++i)
        if (x0 & (1u << i)) cost0 += g.edge(i).w;
      if (cost0 >= best.cost) continue;
      double worst = 0.0;
      std::vector<std::vector<int>> stages(static_cast<size_t>(inst.m()) + 1);
      stages[0] = mask_edges(x0, m);
      bool ok = true;
      for (int i = 0; i < inst.m(); ++i) {
        std::vector<Edge> mod = base;
        for (int e = 0; e < m; ++e)
          if (x0 & (1u << e)) mod[static_cast<size_t>(e)].w = 1e-7;  // effectively free
        WeightedGraph gm(g.n(), mod, r);
        OracleResult sec = opt_gst_tree_dp(gm, r, inst.scenarios[static_cast<size_t>(i)].groups, budget);
        double extra = 0.0;
        std::vector<int> xi;
        for (int e : sec.edges)
          if (!(x0 & (1u << e))) {
            extra += g.edge(e).w;
            xi.push_back(e);
          }
        stages[static_cast<size_t>(i) + 1] = xi;
        worst = std::max(worst, cost0 + inst.scenarios[static_cast<size_t>(i)].sigma * extra);
        if (worst >= best.cost) {
          ok = false;
          break;
        }
      }
      if (ok && worst < best.cost) {
        best.cost = worst;
        best.stages = stages;
      }
    }
    return best;
  }

  // General graphs: enumerate completions as supersets of the first stage.
  std::vector<std::vector<char>> feasible(static_cast<size_t>(inst.m()),
                                          std::vector<char>(1u << m, 0));
  for (int i = 0; i < inst.m(); ++i)
    for (uint32_t mask = 0; mask < (1u << m); ++mask) {
      DisjointSet ds = MaskConnectivity(g).labels(mask);
      feasible[static_cast<size_t>(i)][mask] = scenario_feasible(inst.scenarios[static_cast<size_t>(i)], ds) ? 1 : 0;
    }
  std::vector<double> mask_cost(1u << m, 0.0);
  for (uint32_t mask = 1; mask < (1u << m); ++mask) {
    int low = __builtin_ctz(mask);
    mask_cost[mask] = mask_cost[mask & (mask - 1)] + g.edge(low).w;
  }
  for (uint32_t x0 = 0; x0 < (1u << m); ++x0) {
    double cost0 = mask_cost[x0];
    if (cost0 >= best.cost) continue;
    double worst = 0.0;
    std::vector<std::vector<int>> stages(static_cast<size_t>(inst.m()) + 1);
    stages[0] = mask_edges(x0, m);
    bool ok = true;
    for (int i = 0; i < inst.m(); ++i) {
      double besti = kInf;
      uint32_t besti_mask = 0;
      uint32_t comp = (~x0) & ((1u << m) - 1);
      // all supersets of x0: iterate submasks of the complement
      uint32_t sub = comp;
      for (;;) {
        uint32_t full = x0 | sub;
        if (feasible[static_cast<size_t>(i)][full]) {
          double c = mask_cost[sub];
          if (c < besti) {
            besti = c;
            besti_mask = sub;
          }
        }
        if (sub == 0) break;
        sub = (sub - 1) & comp;
      }
      if (besti == kInf) {
        ok = false;
        break;
      }
      stages[static_cast<size_t>(i) + 1] = mask_edges(besti_mask, m);
      worst = std::max(worst, cost0 + inst.scenarios[static_cast<size_t>(i)].sigma * besti);
      if (worst >= best.cost) {
        ok = false;
        break;
      }
    }
    if (ok && worst < best.cost) {
      best.cost = worst;
      best.stages = stages;
    }
  }
  return best;
}

PaddingEstimate monte_carlo_padding(const Metric& m, const NodeDistribution& p, double alpha,
                                    const PrefixPermutation& prefix, double beta, int samples,
                                    uint64_t seed) {
  Rng rng(seed);
  std::vector<char> in_prefix(static_cast<size_t>(m.n()), 0);
  for (int v : prefix.order) in_prefix[static_cast<size_t>(v)] = 1;
  std::vector<int> suffix;
  for (int v = 0; v < m.n(); ++v)
    if (!in_prefix[static_cast<size_t>(v)]) suffix.push_back(v);

  double sum = 0.0, sumsq = 0.0;
  for (int s = 0; s < samples; ++s) {
    rng.shuffle(suffix);
    std::vector<int> pi = prefix.order;
    pi.insert(pi.end(), suffix.begin(), suffix.end());
    HierarchicalDecomposition hd = decomposition_from(m, CuttingDraw{pi, beta});
    double val = 0.0;
    for (int v = 0; v < m.n(); ++v)
      if (is_alpha_padded(m, hd, v, alpha)) val += p.p[static_cast<size_t>(v)];
    sum += val;
    sumsq += val * val;
  }
  PaddingEstimate est;
  est.estimate = sum / samples;
  double var = std::max(0.0, sumsq / samples - est.estimate * est.estimate);
  est.stderr_ = std::sqrt(var / samples);
  return est;
}

}  // namespace copytree
