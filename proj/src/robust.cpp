#include "copytree/robust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace copytree {

namespace {

std::vector<int> lift_set(const CopyTreeEmbedding& emb, const std::vector<int>& vs) {
  std::vector<int> out;
  for (int v : vs)
    for (int c : emb.phi[static_cast<size_t>(v)]) out.push_back(c);
  std::sort(out.begin(), out.end());
  return out;
}

void validate_instance(const RobustInstance& inst, int n) {
  for (const auto& s : inst.scenarios) {
    if (s.sigma < 1.0) throw std::invalid_argument("inflation factors must be at least 1");
    for (const auto& g : s.groups) {
      if (g.empty()) throw std::invalid_argument("groups must be nonempty");
      for (int v : g)
        if (v < 0 || v >= n) throw std::invalid_argument("group member out of range");
    }
    for (const auto& pr : s.pairs) {
      if (pr.A.empty() || pr.B.empty()) throw std::invalid_argument("pair sides must be nonempty");
      for (int v : pr.A)
        if (v < 0 || v >= n) throw std::invalid_argument("pair member out of range");
      for (int v : pr.B)
        if (v < 0 || v >= n) throw std::invalid_argument("pair member out of range");
    }
  }
}

// Root-to-vertex path as child ids.
std::vector<int> root_path(const RootedTree& t, int v) {
  std::vector<int> out;
  for (int x = v; t.parent(x) >= 0; x = t.parent(x)) out.push_back(x);
  return out;
}

}  // namespace

RobustInstance map_robust_instance(const RobustInstance& inst, const CopyTreeEmbedding& emb) {
  if (emb.construction != "demand-robust")
    throw std::invalid_argument("instance mapping needs a demand-robust embedding");
  if (inst.m() > emb.scenario_capacity)
    throw std::invalid_argument("embedding was built for fewer scenarios");
  RobustInstance out;
  for (const Scenario& s : inst.scenarios) {
    Scenario t;
    t.sigma = s.sigma;
    for (const auto& g : s.groups) t.groups.push_back(lift_set(emb, g));
    for (const auto& pr : s.pairs) t.pairs.push_back({lift_set(emb, pr.A), lift_set(emb, pr.B)});
    out.scenarios.push_back(std::move(t));
  }
  return out;
}

GstLpModel build_lp_gst(const RootedTree& t, const RobustInstance& inst) {
  validate_instance(inst, t.n());
  for (const auto& s : inst.scenarios)
    if (!s.pairs.empty()) throw std::invalid_argument("group Steiner tree LP got pair scenarios");
  int m = inst.m();
  GstLpModel model;
  model.z_var = model.lp.add_var("z", 1.0);

  // variables only for edges on some root-to-member path
  std::vector<char> rel(static_cast<size_t>(t.n()), 0);
  for (const auto& s : inst.scenarios)
    for (const auto& g : s.groups)
      for (int v : g)
        for (int c : root_path(t, v)) rel[static_cast<size_t>(c)] = 1;
  for (int v = 0; v < t.n(); ++v)
    if (rel[static_cast<size_t>(v)]) model.relevant.push_back(v);

  model.x_var.assign(static_cast<size_t>(m) + 1, std::vector<int>(static_cast<size_t>(t.n()), -1));
  for (int i = 0; i <= m; ++i)
    for (int v : model.relevant)
      model.x_var[static_cast<size_t>(i)][static_cast<size_t>(v)] =
          model.lp.add_var("x_" + std::to_string(i) + "_" + std::to_string(v));

  // per-scenario cost
  for (int i = 1; i <= m; ++i) {
    LpRow row;
    row.name = "cost_" + std::to_string(i);
    for (int v : model.relevant) {
      double w = t.parent_weight(v);
      row.terms.push_back({model.x_var[0][static_cast<size_t>(v)], w});
      row.terms.push_back({model.x_var[static_cast<size_t>(i)][static_cast<size_t>(v)],
                           w * inst.scenarios[static_cast<size_t>(i) - 1].sigma});
    }
    row.terms.push_back({model.z_var, -1.0});
    row.rel = Rel::Le;
    row.rhs = 0.0;
    model.lp.rows.push_back(std::move(row));
  }

  // unit max-flow per group, as path flows with per-edge capacities
  for (int i = 1; i <= m; ++i) {
    const Scenario& s = inst.scenarios[static_cast<size_t>(i) - 1];
    for (size_t j = 0; j < s.groups.size(); ++j) {
      std::vector<int> members = s.groups[j];
      std::sort(members.begin(), members.end());
      members.erase(std::unique(members.begin(), members.end()), members.end());
      std::vector<int> y;
      for (int v : members)
        y.push_back(model.lp.add_var("y_" + std::to_string(i) + "_" + std::to_string(j) + "_" +
                                     std::to_string(v)));
      // capacity per edge used by some member path
      std::map<int, std::vector<int>> users;  // child -> member indices
      for (size_t k = 0; k < members.size(); ++k)
        for (int c : root_path(t, members[k])) users[c].push_back(static_cast<int>(k));
      for (auto& [c, ks] : users) {
        LpRow row;
        row.name = "cap_" + std::to_string(i) + "_" + std::to_string(j) + "_" + std::to_string(c);
        for (int k : ks) row.terms.push_back({y[static_cast<size_t>(k)], 1.0});
        row.terms.push_back({model.x_var[0][static_cast<size_t>(c)], -1.0});
        row.terms.push_back({model.x_var[static_cast<size_t>(i)][static_cast<size_t>(c)], -1.0});
        row.rel = Rel::Le;
        row.rhs = 0.0;
        model.lp.rows.push_back(std::move(row));
      }
      LpRow total;
      total.name = "flow_" + std::to_string(i) + "_" + std::to_string(j);
      for (int yv : y) total.terms.push_back({yv, 1.0});
      total.rel = Rel::Ge;
      total.rhs = 1.0;
      model.lp.rows.push_back(std::move(total));
    }
  }

  // first-stage values decrease away from the root
  for (int v : model.relevant) {
    int p = t.parent(v);
    if (p < 0 || t.parent(p) < 0) continue;
    LpRow row;
    row.name = "mono_" + std::to_string(v);
    row.terms.push_back({model.x_var[0][static_cast<size_t>(v)], 1.0});
    row.terms.push_back({model.x_var[0][static_cast<size_t>(p)], -1.0});
    row.rel = Rel::Le;
    row.rhs = 0.0;
    model.lp.rows.push_back(std::move(row));
  }
  return model;
}

LayeredForest build_layered_forest(const RootedTree& t) {
  LayeredForest f;
  f.depth = t.max_depth();
  f.edge_id.assign(static_cast<size_t>(f.depth) + 1,
                   std::vector<int>(static_cast<size_t>(t.n()), -1));
  for (int l = 0; l <= f.depth; ++l)
    for (int v : t.bfs_order()) {
      if (t.parent(v) < 0 || t.depth(t.parent(v)) < l) continue;
      int id = f.edges();
      f.edge_id[static_cast<size_t>(l)][static_cast<size_t>(v)] = id;
      f.base_child.push_back(v);
      f.layer_of.push_back(l);
      int p = t.parent(v);
      f.parent_edge.push_back(t.parent(p) >= 0 && t.depth(t.parent(p)) >= l
                                  ? f.edge_id[static_cast<size_t>(l)][static_cast<size_t>(p)]
                                  : -1);
    }
  return f;
}

GsfLpModel build_lp_gsf(const RootedTree& t, const RobustInstance& inst) {
  validate_instance(inst, t.n());
  for (const auto& s : inst.scenarios)
    if (!s.groups.empty())
      throw std::invalid_argument("group Steiner forest LP got group scenarios");
  int m = inst.m();
  GsfLpModel model;
  model.forest = build_layered_forest(t);
  const LayeredForest& lf = model.forest;
  model.z_var = model.lp.add_var("z", 1.0);

  // ancestor of v at a given depth
  auto ancestor_at = [&](int v, int depth) {
    int x = v;
    while (t.depth(x) > depth) x = t.parent(x);
    return x;
  };
  // forest edges on the path from v up to its layer-l root
  auto path_in_layer = [&](int v, int l) {
    std::vector<int> out;
    int x = v;
    while (t.depth(x) > l) {
      out.push_back(lf.edge_id[static_cast<size_t>(l)][static_cast<size_t>(x)]);
      x = t.parent(x);
    }
    return out;
  };

  // trees useful for some pair: both sides reach into the subtree
  struct UsefulTree {
    int layer, root, scenario, pair;
    std::vector<int> a_members, b_members;
  };
  std::vector<UsefulTree> useful;
  std::vector<char> edge_used(static_cast<size_t>(lf.edges()), 0);
  for (int i = 1; i <= m; ++i) {
    const Scenario& s = inst.scenarios[static_cast<size_t>(i) - 1];
    for (size_t j = 0; j < s.pairs.size(); ++j) {
      const GsfEvent& pr = s.pairs[j];
      for (int l = 0; l <= lf.depth; ++l) {
        std::map<int, UsefulTree> trees;
        for (int a : pr.A)
          if (t.depth(a) >= l) trees[ancestor_at(a, l)].a_members.push_back(a);
        for (int b : pr.B)
          if (t.depth(b) >= l) trees[ancestor_at(b, l)].b_members.push_back(b);
        for (auto& [root, ut] : trees) {
          if (ut.a_members.empty() || ut.b_members.empty()) continue;
          ut.layer = l;
          ut.root = root;
          ut.scenario = i;
          ut.pair = static_cast<int>(j);
          for (int v : ut.a_members)
            for (int e : path_in_layer(v, l)) edge_used[static_cast<size_t>(e)] = 1;
          for (int v : ut.b_members)
            for (int e : path_in_layer(v, l)) edge_used[static_cast<size_t>(e)] = 1;
          useful.push_back(ut);
        }
      }
    }
  }
  // close edge set under parents so monotonicity chains stay intact
  for (int e = lf.edges() - 1; e >= 0; --e)
    if (edge_used[static_cast<size_t>(e)] && lf.parent_edge[static_cast<size_t>(e)] >= 0)
      edge_used[static_cast<size_t>(lf.parent_edge[static_cast<size_t>(e)])] = 1;

  model.x_var.assign(static_cast<size_t>(m) + 1, std::vector<int>(static_cast<size_t>(lf.edges()), -1));
  for (int i = 0; i <= m; ++i)
    for (int e = 0; e < lf.edges(); ++e)
      if (edge_used[static_cast<size_t>(e)])
        model.x_var[static_cast<size_t>(i)][static_cast<size_t>(e)] =
            model.lp.add_var("x_" + std::to_string(i) + "_" + std::to_string(e));

  for (int i = 1; i <= m; ++i) {
    LpRow row;
    row.name = "cost_" + std::to_string(i);
    for (int e = 0; e < lf.edges(); ++e) {
      if (!edge_used[static_cast<size_t>(e)]) continue;
      double w = t.parent_weight(lf.base_child[static_cast<size_t>(e)]);
      row.terms.push_back({model.x_var[0][static_cast<size_t>(e)], w});
      row.terms.push_back({model.x_var[static_cast<size_t>(i)][static_cast<size_t>(e)],
                           w * inst.scenarios[static_cast<size_t>(i) - 1].sigma});
    }
    row.terms.push_back({model.z_var, -1.0});
    row.rel = Rel::Le;
    row.rhs = 0.0;
    model.lp.rows.push_back(std::move(row));
  }

  // per-(layer, tree, scenario, pair) flow amount plus both one-sided flows
  std::map<std::pair<int, int>, std::vector<int>> fvars;  // (scenario, pair) -> f vars
  for (size_t ui = 0; ui < useful.size(); ++ui) {
    const UsefulTree& ut = useful[ui];
    int fv = model.lp.add_var("f_" + std::to_string(ut.layer) + "_" + std::to_string(ut.root) +
                              "_" + std::to_string(ut.scenario) + "_" + std::to_string(ut.pair));
    fvars[{ut.scenario, ut.pair}].push_back(fv);
    {
      LpRow cap;
      cap.name = "fcap_" + std::to_string(ui);
      cap.terms.push_back({fv, 1.0});
      cap.rel = Rel::Le;
      cap.rhs = 1.0;
      model.lp.rows.push_back(std::move(cap));
    }
    for (int side = 0; side < 2; ++side) {
      const std::vector<int>& members = side == 0 ? ut.a_members : ut.b_members;
      // a member at the tree root ships flow with no edges: side unconstrained
      bool at_root = false;
      for (int v : members)
        if (v == ut.root) at_root = true;
      if (at_root) continue;
      std::vector<int> y;
      std::vector<int> mem;
      for (int v : members) {
        mem.push_back(v);
        y.push_back(model.lp.add_var("yf_" + std::to_string(ui) + "_" + std::to_string(side) +
                                     "_" + std::to_string(v)));
      }
      std::map<int, std::vector<int>> users;
      for (size_t k = 0; k < mem.size(); ++k)
        for (int e : path_in_layer(mem[k], ut.layer)) users[e].push_back(static_cast<int>(k));
      for (auto& [e, ks] : users) {
        LpRow row;
        row.name = "gcap_" + std::to_string(ui) + "_" + std::to_string(side) + "_" + std::to_string(e);
        for (int k : ks) row.terms.push_back({y[static_cast<size_t>(k)], 1.0});
        row.terms.push_back({model.x_var[0][static_cast<size_t>(e)], -1.0});
        row.terms.push_back({model.x_var[static_cast<size_t>(ut.scenario)][static_cast<size_t>(e)], -1.0});
        row.rel = Rel::Le;
        row.rhs = 0.0;
        model.lp.rows.push_back(std::move(row));
      }
      LpRow tot;
      tot.name = "fside_" + std::to_string(ui) + "_" + std::to_string(side);
      for (int yv : y) tot.terms.push_back({yv, 1.0});
      tot.terms.push_back({fv, -1.0});
      tot.rel = Rel::Ge;
      tot.rhs = 0.0;
      model.lp.rows.push_back(std::move(tot));
    }
  }
  for (int i = 1; i <= m; ++i) {
    const Scenario& s = inst.scenarios[static_cast<size_t>(i) - 1];
    for (size_t j = 0; j < s.pairs.size(); ++j) {
      LpRow row;
      row.name = "flow_" + std::to_string(i) + "_" + std::to_string(j);
      auto it = fvars.find({i, static_cast<int>(j)});
      if (it == fvars.end()) throw std::logic_error("pair with no usable layered tree");
      for (int fv : it->second) row.terms.push_back({fv, 1.0});
      row.rel = Rel::Ge;
      row.rhs = 1.0;
      model.lp.rows.push_back(std::move(row));
    }
  }

  // first-stage monotonicity within each layered tree
  for (int e = 0; e < lf.edges(); ++e) {
    if (!edge_used[static_cast<size_t>(e)]) continue;
    int pe = lf.parent_edge[static_cast<size_t>(e)];
    if (pe < 0) continue;
    LpRow row;
    row.name = "mono_" + std::to_string(e);
    row.terms.push_back({model.x_var[0][static_cast<size_t>(e)], 1.0});
    row.terms.push_back({model.x_var[0][static_cast<size_t>(pe)], -1.0});
    row.rel = Rel::Le;
    row.rhs = 0.0;
    model.lp.rows.push_back(std::move(row));
  }
  return model;
}

DependentRounding::DependentRounding(std::vector<int> parent_edge, uint64_t seed)
    : parent_(std::move(parent_edge)), rng_(seed) {
  int n = static_cast<int>(parent_.size());
  in_.assign(static_cast<size_t>(n), 0);
  prev_.assign(static_cast<size_t>(n), 0.0);
  std::vector<int> depth(static_cast<size_t>(n), -1);
  auto get_depth = [&](auto&& self, int e) -> int {
    if (e < 0) return -1;
    if (depth[static_cast<size_t>(e)] >= 0) return depth[static_cast<size_t>(e)];
    depth[static_cast<size_t>(e)] = self(self, parent_[static_cast<size_t>(e)]) + 1;
    return depth[static_cast<size_t>(e)];
  };
  order_.resize(static_cast<size_t>(n));
  for (int e = 0; e < n; ++e) {
    order_[static_cast<size_t>(e)] = e;
    get_depth(get_depth, e);
  }
  std::stable_sort(order_.begin(), order_.end(),
                   [&](int a, int b) { return depth[static_cast<size_t>(a)] < depth[static_cast<size_t>(b)]; });
}

const std::vector<char>& DependentRounding::feed(const std::vector<double>& y) {
  int n = static_cast<int>(parent_.size());
  if (static_cast<int>(y.size()) != n) throw std::invalid_argument("feed size mismatch");
  for (int e = 0; e < n; ++e) {
    double v = y[static_cast<size_t>(e)];
    if (v < -kEps || v > 1.0 + kEps) throw std::invalid_argument("feed values must lie in [0,1]");
    int p = parent_[static_cast<size_t>(e)];
    double pv = p >= 0 ? y[static_cast<size_t>(p)] : 1.0;
    if (v > pv + 1e-9)
      throw std::invalid_argument("feed must be decreasing on root-leaf paths");
    if (fed_ && v < prev_[static_cast<size_t>(e)] - 1e-9)
      throw std::invalid_argument("feeds must be coordinatewise non-decreasing");
  }

  if (!fed_) {
    for (int e : order_) {
      int p = parent_[static_cast<size_t>(e)];
      bool pin = p < 0 ? true : static_cast<bool>(in_[static_cast<size_t>(p)]);
      double ye = y[static_cast<size_t>(e)];
      double yp = p < 0 ? 1.0 : y[static_cast<size_t>(p)];
      double ratio = yp > 0 ? ye / yp : 1.0;  // 0/0 counts as 1
      double u = rng_.uniform();
      in_[static_cast<size_t>(e)] = (pin && u < ratio) ? 1 : 0;
    }
  } else {
    std::vector<char> next(static_cast<size_t>(n), 0);
    for (int e : order_) {
      int p = parent_[static_cast<size_t>(e)];
      bool pn = p < 0 ? true : static_cast<bool>(next[static_cast<size_t>(p)]);
      double u = rng_.uniform();
      if (in_[static_cast<size_t>(e)]) {
        next[static_cast<size_t>(e)] = 1;
        continue;
      }
      if (!pn) continue;
      double yo = prev_[static_cast<size_t>(e)];
      double yo_p = p < 0 ? 1.0 : prev_[static_cast<size_t>(p)];
      double yn_p = p < 0 ? 1.0 : y[static_cast<size_t>(p)];
      // conditional fill rate: exact marginals while only ever adding edges
      double capacity = (yo_p - yo) + (yn_p - yo_p);
      double need = y[static_cast<size_t>(e)] - yo;
      double lambda = capacity > 1e-15 ? std::min(1.0, need / capacity) : 0.0;
      next[static_cast<size_t>(e)] = u < lambda ? 1 : 0;
    }
    in_ = std::move(next);
  }
  prev_ = y;
  fed_ = true;
  return in_;
}

int default_gst_copies(int n) {
  double l = std::log(std::max(2, n));
  return 4 * static_cast<int>(std::ceil(l * l));
}

int default_gsf_copies(int n) {
  double l = std::log(std::max(2, n));
  return 4 * static_cast<int>(std::ceil(l * l * l));
}

namespace {

// y1 = min(1, x0 + xi), then a root-to-leaf pass lowers any child above its
// parent. Never drops below y0.
std::vector<double> repaired_second_feed(const std::vector<double>& x0,
                                         const std::vector<double>& xi,
                                         const std::vector<int>& parent,
                                         const std::vector<int>& order) {
  std::vector<double> y(x0.size());
  for (size_t e = 0; e < y.size(); ++e) y[e] = std::min(1.0, x0[e] + xi[e]);
  for (int e : order) {
    int p = parent[static_cast<size_t>(e)];
    if (p >= 0) y[static_cast<size_t>(e)] = std::min(y[static_cast<size_t>(e)], y[static_cast<size_t>(p)]);
  }
  return y;
}

std::vector<double> capped_first_feed(const std::vector<double>& x0, const std::vector<int>& parent,
                                      const std::vector<int>& order) {
  std::vector<double> y(x0.size());
  for (size_t e = 0; e < y.size(); ++e) y[e] = std::min(1.0, std::max(0.0, x0[e]));
  for (int e : order) {
    int p = parent[static_cast<size_t>(e)];
    if (p >= 0) y[static_cast<size_t>(e)] = std::min(y[static_cast<size_t>(e)], y[static_cast<size_t>(p)]);
  }
  return y;
}

std::vector<int> topo_order(const std::vector<int>& parent) {
  int n = static_cast<int>(parent.size());
  std::vector<int> depth(static_cast<size_t>(n), -1);
  auto get_depth = [&](auto&& self, int e) -> int {
    if (e < 0) return -1;
    if (depth[static_cast<size_t>(e)] >= 0) return depth[static_cast<size_t>(e)];
    depth[static_cast<size_t>(e)] = self(self, parent[static_cast<size_t>(e)]) + 1;
    return depth[static_cast<size_t>(e)];
  };
  std::vector<int> order(static_cast<size_t>(n));
  for (int e = 0; e < n; ++e) {
    order[static_cast<size_t>(e)] = e;
    get_depth(get_depth, e);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return depth[static_cast<size_t>(a)] < depth[static_cast<size_t>(b)]; });
  return order;
}

}  // namespace

RoundedStages round_robust_gst(const RootedTree& t, const GstLpModel& model,
                               const LpSolution& sol, const RobustInstance& inst, int copies,
                               uint64_t seed) {
  int m = inst.m();
  // dense edge index = child vertex; root slot unused
  std::vector<int> parent(static_cast<size_t>(t.n()), -1);
  for (int v = 0; v < t.n(); ++v) {
    if (v == t.root()) continue;
    int p = t.parent(v);
    parent[static_cast<size_t>(v)] = (p == t.root() || p < 0) ? -1 : p;
  }
  parent[static_cast<size_t>(t.root())] = -1;
  auto order = topo_order(parent);

  auto stage_values = [&](int stage) {
    std::vector<double> x(static_cast<size_t>(t.n()), 0.0);
    for (int v = 0; v < t.n(); ++v) {
      int var = model.x_var[static_cast<size_t>(stage)][static_cast<size_t>(v)];
      if (var >= 0) x[static_cast<size_t>(v)] = sol.x[static_cast<size_t>(var)];
    }
    x[static_cast<size_t>(t.root())] = 0.0;
    return x;
  };
  std::vector<double> x0 = stage_values(0);
  std::vector<double> y0 = capped_first_feed(x0, parent, order);

  Rng rng(seed);
  std::vector<DependentRounding> rounders;
  for (int c = 0; c < copies; ++c)
    rounders.emplace_back(parent, rng.fork(static_cast<uint64_t>(c)).next_u64());

  RoundedStages out;
  out.stages.assign(static_cast<size_t>(m) + 1, {});
  std::set<int> x0_set;
  for (auto& rd : rounders) {
    const auto& in = rd.feed(y0);
    for (int v = 0; v < t.n(); ++v)
      if (v != t.root() && in[static_cast<size_t>(v)]) x0_set.insert(v);
  }
  out.stages[0].assign(x0_set.begin(), x0_set.end());

  out.scenario_feasible.assign(static_cast<size_t>(m), 1);
  for (int i = 1; i <= m; ++i) {
    std::vector<double> y1 = repaired_second_feed(y0, stage_values(i), parent, order);
    std::set<int> bought = x0_set;
    for (auto& rd : rounders) {
      DependentRounding snapshot = rd;  // scenario branches revert the state
      const auto& in = snapshot.feed(y1);
      for (int v = 0; v < t.n(); ++v)
        if (v != t.root() && in[static_cast<size_t>(v)]) bought.insert(v);
    }
    for (int v : bought)
      if (!x0_set.count(v)) out.stages[static_cast<size_t>(i)].push_back(v);
    // feasibility on the tree: every group connected to the root
    std::vector<char> have(static_cast<size_t>(t.n()), 0);
    for (int v : bought) have[static_cast<size_t>(v)] = 1;
    auto reaches_root = [&](int v) {
      for (int x = v; t.parent(x) >= 0; x = t.parent(x))
        if (!have[static_cast<size_t>(x)]) return false;
      return true;
    };
    for (const auto& g : inst.scenarios[static_cast<size_t>(i) - 1].groups) {
      bool ok = false;
      for (int v : g)
        if (reaches_root(v)) {
          ok = true;
          break;
        }
      if (!ok) {
        out.scenario_feasible[static_cast<size_t>(i) - 1] = 0;
        out.all_feasible = false;
      }
    }
  }
  return out;
}

RoundedStages round_robust_gsf(const RootedTree& t, const GsfLpModel& model,
                               const LpSolution& sol, const RobustInstance& inst, int copies,
                               uint64_t seed) {
  int m = inst.m();
  const LayeredForest& lf = model.forest;
  auto order = topo_order(lf.parent_edge);
  auto stage_values = [&](int stage) {
    std::vector<double> x(static_cast<size_t>(lf.edges()), 0.0);
    for (int e = 0; e < lf.edges(); ++e) {
      int var = model.x_var[static_cast<size_t>(stage)][static_cast<size_t>(e)];
      if (var >= 0) x[static_cast<size_t>(e)] = sol.x[static_cast<size_t>(var)];
    }
    return x;
  };
  std::vector<double> y0 = capped_first_feed(stage_values(0), lf.parent_edge, order);

  Rng rng(seed);
  std::vector<DependentRounding> rounders;
  for (int c = 0; c < copies; ++c)
    rounders.emplace_back(lf.parent_edge, rng.fork(static_cast<uint64_t>(c)).next_u64());

  RoundedStages out;
  out.stages.assign(static_cast<size_t>(m) + 1, {});
  std::set<int> f0;
  for (auto& rd : rounders) {
    const auto& in = rd.feed(y0);
    for (int e = 0; e < lf.edges(); ++e)
      if (in[static_cast<size_t>(e)]) f0.insert(e);
  }
  out.stages[0].assign(f0.begin(), f0.end());

  out.scenario_feasible.assign(static_cast<size_t>(m), 1);
  for (int i = 1; i <= m; ++i) {
    std::vector<double> y1 = repaired_second_feed(y0, stage_values(i), lf.parent_edge, order);
    std::set<int> bought = f0;
    for (auto& rd : rounders) {
      DependentRounding snapshot = rd;
      const auto& in = snapshot.feed(y1);
      for (int e = 0; e < lf.edges(); ++e)
        if (in[static_cast<size_t>(e)]) bought.insert(e);
    }
    for (int e : bought)
      if (!f0.count(e)) out.stages[static_cast<size_t>(i)].push_back(e);

    // feasibility after projecting to the base tree
    DisjointSet ds(t.n());
    for (int e : bought) {
      int c = lf.base_child[static_cast<size_t>(e)];
      ds.unite(c, t.parent(c));
    }
    for (const auto& pr : inst.scenarios[static_cast<size_t>(i) - 1].pairs) {
      bool ok = false;
      for (int a : pr.A) {
        for (int b : pr.B)
          if (ds.find(a) == ds.find(b)) {
            ok = true;
            break;
          }
        if (ok) break;
      }
      if (!ok) {
        out.scenario_feasible[static_cast<size_t>(i) - 1] = 0;
        out.all_feasible = false;
      }
    }
  }
  return out;
}

RobustEvaluation evaluate_robust(const WeightedGraph& g, int r,
                                 const std::vector<std::vector<int>>& stages,
                                 const RobustInstance& inst) {
  if (static_cast<int>(stages.size()) != inst.m() + 1)
    throw std::invalid_argument("stage tuple length does not match the scenario count");
  RobustEvaluation ev;
  double w0 = g.total_weight(stages[0]);
  ev.worst_cost = inst.m() == 0 ? w0 : 0.0;
  for (int i = 1; i <= inst.m(); ++i) {
    const Scenario& s = inst.scenarios[static_cast<size_t>(i) - 1];
    double cost = w0 + s.sigma * g.total_weight(stages[static_cast<size_t>(i)]);
    ev.scenario_cost.push_back(cost);
    ev.worst_cost = std::max(ev.worst_cost, cost);
    std::vector<int> both = stages[0];
    both.insert(both.end(), stages[static_cast<size_t>(i)].begin(), stages[static_cast<size_t>(i)].end());
    bool ok = true;
    for (const auto& grp : s.groups)
      if (!connected(g, both, {r}, grp)) ok = false;
    for (const auto& pr : s.pairs)
      if (!connected(g, both, pr.A, pr.B)) ok = false;
    ev.feasible.push_back(ok ? 1 : 0);
    if (!ok) ev.all_feasible = false;
  }
  return ev;
}

namespace {

std::vector<int> tree_children_to_graph_edges(const WeightedGraph& g, const RootedTree& t,
                                              const std::vector<int>& children) {
  std::vector<int> out;
  for (int c : children) out.push_back(g.find_edge(c, t.parent(c)));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

RobustSolveResult solve_robust_tree(const WeightedGraph& g, int r, const RobustInstance& inst,
                                    bool forest_kind, int copies, uint64_t seed, bool export_lp) {
  RootedTree t(g, r);
  RobustSolveResult res;
  if (inst.m() == 0) {
    res.stages.push_back({});
    res.eval = evaluate_robust(g, r, res.stages, inst);
    return res;
  }
  if (copies <= 0) copies = forest_kind ? default_gsf_copies(g.n()) : default_gst_copies(g.n());

  if (!forest_kind) {
    GstLpModel model = build_lp_gst(t, inst);
    LpSolution sol = solve_lp(model.lp);
    if (!sol.optimal()) throw std::runtime_error("relaxation did not solve to optimality");
    res.z = sol.objective;
    if (export_lp) res.lp_text = lp_to_text(model.lp);
    for (int attempt = 0; attempt < 5; ++attempt) {
      res.attempts = attempt + 1;
      RoundedStages rs = round_robust_gst(t, model, sol, inst, copies,
                                          seed + 1000003ULL * static_cast<uint64_t>(attempt));
      if (rs.all_feasible || attempt == 4) {
        res.feasible = rs.all_feasible;
        res.stages.clear();
        for (const auto& st : rs.stages) res.stages.push_back(tree_children_to_graph_edges(g, t, st));
        break;
      }
    }
  } else {
    GsfLpModel model = build_lp_gsf(t, inst);
    LpSolution sol = solve_lp(model.lp);
    if (!sol.optimal()) throw std::runtime_error("relaxation did not solve to optimality");
    res.z = sol.objective;
    if (export_lp) res.lp_text = lp_to_text(model.lp);
    for (int attempt = 0; attempt < 5; ++attempt) {
      res.attempts = attempt + 1;
      RoundedStages rs = round_robust_gsf(t, model, sol, inst, copies,
                                          seed + 1000003ULL * static_cast<uint64_t>(attempt));
      if (rs.all_feasible || attempt == 4) {
        res.feasible = rs.all_feasible;
        res.stages.clear();
        for (const auto& st : rs.stages) {
          std::set<int> ids;
          for (int e : st) {
            int c = model.forest.base_child[static_cast<size_t>(e)];
            ids.insert(g.find_edge(c, t.parent(c)));
          }
          res.stages.push_back({ids.begin(), ids.end()});
        }
        break;
      }
    }
  }
  res.eval = evaluate_robust(g, r, res.stages, inst);
  return res;
}

RobustSolveResult solve_robust_general(const WeightedGraph& g, int r, const RobustInstance& inst,
                                       bool forest_kind, int copies, uint64_t seed,
                                       bool export_lp) {
  RobustSolveResult res;
  if (inst.m() == 0) {
    res.stages.push_back({});
    res.eval = evaluate_robust(g, r, res.stages, inst);
    return res;
  }
  CopyTreeEmbedding emb = build_demand_robust(g, r, inst.m(), seed);
  RobustInstance lifted = map_robust_instance(inst, emb);
  if (copies <= 0)
    copies = forest_kind ? default_gsf_copies(emb.tree.n()) : default_gst_copies(emb.tree.n());

  // The copy tree lives in copy-id space; solve there and map each stage back.
  const RootedTree& ct = emb.tree;
  if (!forest_kind) {
    GstLpModel model = build_lp_gst(ct, lifted);
    LpSolution sol = solve_lp(model.lp);
    if (!sol.optimal()) throw std::runtime_error("relaxation did not solve to optimality");
    res.z = sol.objective;
    if (export_lp) res.lp_text = lp_to_text(model.lp);
    for (int attempt = 0; attempt < 5; ++attempt) {
      res.attempts = attempt + 1;
      RoundedStages rs = round_robust_gst(ct, model, sol, lifted, copies,
                                          seed + 1000003ULL * static_cast<uint64_t>(attempt));
      if (rs.all_feasible || attempt == 4) {
        res.feasible = rs.all_feasible;
        res.tree_stages = rs.stages;
        break;
      }
    }
  } else {
    GsfLpModel model = build_lp_gsf(ct, lifted);
    LpSolution sol = solve_lp(model.lp);
    if (!sol.optimal()) throw std::runtime_error("relaxation did not solve to optimality");
    res.z = sol.objective;
    if (export_lp) res.lp_text = lp_to_text(model.lp);
    for (int attempt = 0; attempt < 5; ++attempt) {
      res.attempts = attempt + 1;
      RoundedStages rs = round_robust_gsf(ct, model, sol, lifted, copies,
                                          seed + 1000003ULL * static_cast<uint64_t>(attempt));
      if (rs.all_feasible || attempt == 4) {
        res.feasible = rs.all_feasible;
        res.tree_stages.clear();
        for (const auto& st : rs.stages) {
          std::set<int> children;
          for (int e : st) children.insert(model.forest.base_child[static_cast<size_t>(e)]);
          res.tree_stages.push_back({children.begin(), children.end()});
        }
        break;
      }
    }
  }
  for (const auto& st : res.tree_stages) {
    res.stages.push_back(map_tree_to_graph(emb, st));
    res.tree_stage_weight.push_back(emb.tree_weight(st));
  }
  res.eval = evaluate_robust(g, r, res.stages, inst);
  return res;
}

}  // namespace copytree
