#include "copytree/online.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace copytree {

GreedyTreeSolver::GreedyTreeSolver(const RootedTree* t)
    : tree_(t), bought_(static_cast<size_t>(t->n()), 0) {}

double GreedyTreeSolver::residual_to_root(int v) const {
  double s = 0.0;
  for (int x = v; tree_->parent(x) >= 0; x = tree_->parent(x))
    if (!bought_[static_cast<size_t>(x)]) s += tree_->parent_weight(x);
  return s;
}

void GreedyTreeSolver::buy_to_root(int v) {
  for (int x = v; tree_->parent(x) >= 0; x = tree_->parent(x)) bought_[static_cast<size_t>(x)] = 1;
}

void GreedyTreeSolver::reveal_group(const std::vector<int>& group) {
  if (group.empty()) throw std::invalid_argument("groups must be nonempty");
  int best = -1;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int v : group) {
    double c = residual_to_root(v);
    if (c < best_cost - kEps) {
      best_cost = c;
      best = v;
    }
  }
  buy_to_root(best);
}

void GreedyTreeSolver::reveal_pair(const std::vector<int>& A, const std::vector<int>& B) {
  if (A.empty() || B.empty()) throw std::invalid_argument("pair sides must be nonempty");
  auto residual_path = [&](int a, int b) {
    double s = 0.0;
    int u = a, v = b;
    while (u != v) {
      if (tree_->depth(u) < tree_->depth(v)) std::swap(u, v);
      if (!bought_[static_cast<size_t>(u)]) s += tree_->parent_weight(u);
      u = tree_->parent(u);
    }
    return s;
  };
  int ba = -1, bb = -1;
  double best = std::numeric_limits<double>::infinity();
  for (int a : A)
    for (int b : B) {
      double c = residual_path(a, b);
      if (c < best - kEps) {
        best = c;
        ba = a;
        bb = b;
      }
    }
  int u = ba, v = bb;
  while (u != v) {
    if (tree_->depth(u) < tree_->depth(v)) std::swap(u, v);
    bought_[static_cast<size_t>(u)] = 1;
    u = tree_->parent(u);
  }
}

std::vector<int> GreedyTreeSolver::solution() const {
  std::vector<int> out;
  for (int v = 0; v < tree_->n(); ++v)
    if (bought_[static_cast<size_t>(v)]) out.push_back(v);
  return out;
}

double GreedyTreeSolver::cost() const {
  double s = 0.0;
  for (int v = 0; v < tree_->n(); ++v)
    if (bought_[static_cast<size_t>(v)]) s += tree_->parent_weight(v);
  return s;
}

GadgetResult apply_group_gadget(const WeightedGraph& g, const std::vector<GstEvent>& stream) {
  // Count memberships; the gadget only fires when some vertex is shared.
  std::vector<int> uses(static_cast<size_t>(g.n()), 0);
  for (const auto& ev : stream)
    for (int v : ev.group) ++uses[static_cast<size_t>(v)];
  bool overlap = false;
  for (int v = 0; v < g.n(); ++v)
    if (uses[static_cast<size_t>(v)] > 1) overlap = true;
  if (!overlap) return {g, stream, 1.0, false};

  double scale = static_cast<double>(g.n()) * g.n() * g.n();
  std::vector<Edge> edges;
  for (const Edge& e : g.edges()) edges.push_back({e.u, e.v, e.w * scale});
  int next = g.n();
  std::vector<GstEvent> out_stream = stream;
  for (auto& ev : out_stream) {
    for (int& v : ev.group) {
      if (uses[static_cast<size_t>(v)] <= 1) continue;
      edges.push_back({v, next, 1.0});
      v = next++;
    }
  }
  GadgetResult res;
  res.graph = WeightedGraph(next, std::move(edges), g.root());
  res.stream = std::move(out_stream);
  res.cost_scale = scale;
  res.applied = true;
  return res;
}

namespace {

std::vector<int> lift_group(const CopyTreeEmbedding& emb, const std::vector<int>& group) {
  std::vector<int> out;
  for (int v : group)
    for (int c : emb.phi[static_cast<size_t>(v)]) out.push_back(c);
  std::sort(out.begin(), out.end());
  return out;
}

bool is_superset(const std::vector<int>& big, const std::vector<int>& small) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

}  // namespace

OnlineRun online_gst_driver(const CopyTreeEmbedding& emb, const std::vector<GstEvent>& stream,
                            bool with_oracle, const OracleBudget& budget) {
  OnlineRun run;
  GreedyTreeSolver solver(&emb.tree);
  std::vector<std::vector<int>> revealed;
  std::vector<int> prev;
  for (const auto& ev : stream) {
    revealed.push_back(ev.group);
    std::vector<int> lifted = lift_group(emb, ev.group);
    solver.reveal_group(lifted);
    std::vector<int> tree_sol = solver.solution();
    // contract check: the tree solver must connect every lifted group to the root copy
    DisjointSet ds(emb.tree.n());
    for (int c : tree_sol) ds.unite(c, emb.tree.parent(c));
    for (const auto& grp : revealed) {
      bool ok = false;
      for (int c : lift_group(emb, grp))
        if (ds.find(c) == ds.find(0)) ok = true;
      if (!ok) throw std::runtime_error("tree solver returned an infeasible solution");
    }
    std::vector<int> sol = map_tree_to_graph(emb, tree_sol);
    if (!prev.empty() && !is_superset(sol, prev)) run.monotone = false;
    prev = sol;

    OnlineStep step;
    step.cost = emb.graph.total_weight(sol);
    step.feasible = true;
    for (const auto& grp : revealed)
      if (!connected(emb.graph, sol, {emb.root}, grp)) step.feasible = false;
    if (with_oracle) {
      std::vector<std::vector<int>> groups = revealed;
      step.opt = opt_group_steiner_tree(emb.graph, emb.root, groups, budget).cost;
      if (step.opt > kEps) {
        step.ratio = step.cost / step.opt;
        run.max_ratio = std::max(run.max_ratio, step.ratio);
      }
    }
    run.steps.push_back(step);
    run.solutions.push_back(std::move(sol));
  }
  return run;
}

OnlineRun online_gsf_driver(const CopyTreeEmbedding& emb, const std::vector<GsfEvent>& stream,
                            bool with_oracle, const OracleBudget& budget) {
  OnlineRun run;
  GreedyTreeSolver solver(&emb.tree);
  std::vector<GsfEvent> revealed;
  std::vector<int> prev;
  for (const auto& ev : stream) {
    revealed.push_back(ev);
    solver.reveal_pair(lift_group(emb, ev.A), lift_group(emb, ev.B));
    std::vector<int> tree_sol = solver.solution();
    // contract check: every lifted pair must be connected on the tree side
    DisjointSet ds(emb.tree.n());
    for (int c : tree_sol) ds.unite(c, emb.tree.parent(c));
    for (const auto& pr : revealed) {
      bool ok = false;
      for (int a : lift_group(emb, pr.A)) {
        for (int b : lift_group(emb, pr.B))
          if (ds.find(a) == ds.find(b)) {
            ok = true;
            break;
          }
        if (ok) break;
      }
      if (!ok) throw std::runtime_error("tree solver returned an infeasible solution");
    }
    std::vector<int> sol = map_tree_to_graph(emb, tree_sol);
    if (!prev.empty() && !is_superset(sol, prev)) run.monotone = false;
    prev = sol;

    OnlineStep step;
    step.cost = emb.graph.total_weight(sol);
    step.feasible = true;
    for (const auto& pr : revealed)
      if (!connected(emb.graph, sol, pr.A, pr.B)) step.feasible = false;
    if (with_oracle) {
      step.opt = opt_group_steiner_forest(emb.graph, revealed, budget).cost;
      if (step.opt > kEps) {
        step.ratio = step.cost / step.opt;
        run.max_ratio = std::max(run.max_ratio, step.ratio);
      }
    }
    run.steps.push_back(step);
    run.solutions.push_back(std::move(sol));
  }
  return run;
}

WaterFill::WaterFill(const RootedTree* t) : tree_(t), x_(static_cast<size_t>(t->n()), 0.0) {}

bool WaterFill::saturated(int child) const {
  return x_[static_cast<size_t>(child)] >= tree_->parent_weight(child) - kEps;
}

std::vector<char> WaterFill::root_component() const {
  std::vector<char> in(static_cast<size_t>(tree_->n()), 0);
  in[static_cast<size_t>(tree_->root())] = 1;
  for (int v : tree_->bfs_order()) {
    if (v == tree_->root()) continue;
    if (in[static_cast<size_t>(tree_->parent(v))] && saturated(v)) in[static_cast<size_t>(v)] = 1;
  }
  return in;
}

std::vector<int> WaterFill::reveal(const std::vector<std::vector<int>>& groups, int f, double eps) {
  if (!(eps > 0.0) || !(eps < 1.0)) throw std::invalid_argument("epsilon must be in (0, 1)");
  if (f < 1 || f > static_cast<int>(groups.size()))
    throw std::invalid_argument("requirement exceeds the number of groups");
  for (const auto& grp : groups)
    if (grp.empty()) throw std::invalid_argument("groups must be nonempty");
  int target = static_cast<int>(std::ceil((1.0 - eps) * f - kEps));
  target = std::max(target, 1);
  last_iterations_ = 0;
  for (;;) {
    std::vector<char> in = root_component();
    int connected_groups = 0;
    std::vector<char> unconnected_member(static_cast<size_t>(tree_->n()), 0);
    for (const auto& grp : groups) {
      bool touched = false;
      for (int v : grp)
        if (in[static_cast<size_t>(v)]) {
          touched = true;
          break;
        }
      if (touched)
        ++connected_groups;
      else
        for (int v : grp) unconnected_member[static_cast<size_t>(v)] = 1;
    }
    if (connected_groups >= target) break;

    // frontier pressure: each unconnected-group vertex pushes one unit at the
    // first unsaturated edge toward the root
    std::map<int, int> pressure;
    for (int v = 0; v < tree_->n(); ++v) {
      if (!unconnected_member[static_cast<size_t>(v)]) continue;
      int x = v;
      while (tree_->parent(x) >= 0 && saturated(x)) x = tree_->parent(x);
      if (tree_->parent(x) < 0) throw std::logic_error("unconnected vertex with saturated path");
      ++pressure[x];
    }
    double delta = std::numeric_limits<double>::infinity();
    for (auto [e, r] : pressure)
      delta = std::min(delta, (tree_->parent_weight(e) - x_[static_cast<size_t>(e)]) / r);
    int newly = 0;
    for (auto [e, r] : pressure) {
      x_[static_cast<size_t>(e)] += r * delta;
      if (saturated(e)) ++newly;
    }
    if (newly == 0) throw std::logic_error("water filling made no progress");
    ++last_iterations_;
  }
  return solution();
}

double WaterFill::total_x() const {
  double s = 0.0;
  for (double v : x_) s += v;
  return s;
}

std::vector<int> WaterFill::solution() const {
  std::vector<char> in = root_component();
  std::vector<int> out;
  for (int v = 0; v < tree_->n(); ++v)
    if (v != tree_->root() && in[static_cast<size_t>(v)] && saturated(v)) out.push_back(v);
  return out;
}

OnlineRun partial_gst_general(const WeightedGraph& g, int r, const std::vector<GstEvent>& stream,
                              const PartialGstOptions& opt) {
  GadgetResult inst = apply_group_gadget(g, stream);
  CopyTreeEmbedding emb = build_construction1(inst.graph, r, opt.embed_epsilon);
  WaterFill wf(&emb.tree);
  OnlineRun run;
  std::vector<GstEvent> revealed;
  std::vector<int> prev;
  for (const auto& ev : inst.stream) {
    revealed.push_back(ev);
    std::vector<std::vector<int>> lifted;
    for (int v : ev.group) lifted.push_back(emb.phi[static_cast<size_t>(v)]);
    wf.reveal(lifted, ev.f, opt.epsilon);
    std::vector<int> tree_sol = wf.solution();
    std::vector<int> sol = map_tree_to_graph(emb, tree_sol);
    if (!prev.empty() && !is_superset(sol, prev)) run.monotone = false;
    prev = sol;

    OnlineStep step;
    step.cost = inst.graph.total_weight(sol) / inst.cost_scale;
    step.feasible = true;
    auto label = components(inst.graph, sol);
    for (const auto& past : revealed) {
      int cnt = 0;
      for (int v : past.group)
        if (label[static_cast<size_t>(v)] == label[static_cast<size_t>(r)]) ++cnt;
      int need = std::max(1, static_cast<int>(std::ceil((1.0 - opt.epsilon) * past.f - kEps)));
      if (&past == &revealed.back()) {
        step.connected = cnt;
        step.required = need;
      }
      if (cnt < need) step.feasible = false;
    }
    if (opt.with_oracle) {
      step.opt = opt_partial_gst(inst.graph, r, revealed, opt.budget).cost / inst.cost_scale;
      if (step.opt > kEps) {
        step.ratio = step.cost / step.opt;
        run.max_ratio = std::max(run.max_ratio, step.ratio);
      }
    }
    run.steps.push_back(step);
    run.solutions.push_back(std::move(sol));
  }
  return run;
}

}  // namespace copytree
