#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "copytree/oracle.hpp"
#include "copytree/robust.hpp"
#include "test_util.hpp"

using namespace copytree;

namespace {

RobustInstance single_group_instance(double sigma, std::vector<int> group) {
  RobustInstance inst;
  Scenario s;
  s.sigma = sigma;
  s.groups.push_back(std::move(group));
  inst.scenarios.push_back(std::move(s));
  return inst;
}

}  // namespace

TEST_CASE("LP for the single-edge robust instance") {
  WeightedGraph g(2, {{0, 1, 1}}, 0);
  RootedTree t(g, 0);
  GstLpModel model = build_lp_gst(t, single_group_instance(2.0, {1}));
  LpSolution sol = solve_lp(model.lp);
  REQUIRE(sol.optimal());
  CHECK(sol.objective == doctest::Approx(1.0));  // buy first stage
}

TEST_CASE("LP with no scenarios is zero") {
  WeightedGraph g(2, {{0, 1, 1}}, 0);
  RootedTree t(g, 0);
  GstLpModel model = build_lp_gst(t, RobustInstance{});
  LpSolution sol = solve_lp(model.lp);
  REQUIRE(sol.optimal());
  CHECK(sol.objective == doctest::Approx(0.0));
}

TEST_CASE("LP on a path buys both edges first-stage") {
  WeightedGraph g(3, {{0, 1, 1}, {1, 2, 1}}, 0);
  RootedTree t(g, 0);
  GstLpModel model = build_lp_gst(t, single_group_instance(3.0, {2}));
  LpSolution sol = solve_lp(model.lp);
  REQUIRE(sol.optimal());
  CHECK(sol.objective == doctest::Approx(2.0));
}

TEST_CASE("non-trees are rejected by the LP builders") {
  WeightedGraph cyc(3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}}, 0);
  CHECK_THROWS_AS(RootedTree(cyc, 0), std::invalid_argument);
}

TEST_CASE("GST relaxation is within twice the exact optimum") {
  Rng rng(211);
  for (int it = 0; it < 12; ++it) {
    int n = 3 + rng.uniform_int(7);
    WeightedGraph g = testutil::random_tree(rng, n, 5);
    RobustInstance inst;
    int m = 1 + rng.uniform_int(3);
    for (int i = 0; i < m; ++i) {
      Scenario s;
      s.sigma = 1.0 + 4.0 * rng.uniform();
      int k = 1 + rng.uniform_int(2);
      for (int j = 0; j < k; ++j) s.groups.push_back(testutil::random_nonempty_subset(rng, n, 0.3));
      inst.scenarios.push_back(s);
    }
    RootedTree t(g, 0);
    GstLpModel model = build_lp_gst(t, inst);
    LpSolution sol = solve_lp(model.lp);
    REQUIRE(sol.optimal());
    RobustOracleResult opt = opt_robust(g, 0, inst);
    CHECK(sol.objective <= 2.0 * opt.cost + 1e-6);
    CHECK(opt.cost <= sol.objective * 100 + 1e-6);  // sanity: same order
  }
}

TEST_CASE("layered forest structure") {
  // path 0-1-2 (depths 0,1,2)
  WeightedGraph g(3, {{0, 1, 1}, {1, 2, 1}}, 0);
  RootedTree t(g, 0);
  LayeredForest lf = build_layered_forest(t);
  CHECK(lf.depth == 2);
  // layer 0: both edges; layer 1: edge to vertex 2 only; layer 2: none
  CHECK(lf.edges() == 3);
  int e10 = lf.edge_id[0][1], e20 = lf.edge_id[0][2], e21 = lf.edge_id[1][2];
  REQUIRE(e10 >= 0);
  REQUIRE(e20 >= 0);
  REQUIRE(e21 >= 0);
  CHECK(lf.parent_edge[static_cast<size_t>(e20)] == e10);
  CHECK(lf.parent_edge[static_cast<size_t>(e21)] == -1);
  CHECK(lf.base_child[static_cast<size_t>(e21)] == 2);
}

TEST_CASE("GSF LP on the depth-1 star") {
  WeightedGraph g(3, {{0, 1, 1}, {0, 2, 1}}, 0);
  RootedTree t(g, 0);
  RobustInstance inst;
  Scenario s;
  s.sigma = 1.0;
  s.pairs.push_back({{1}, {2}});
  inst.scenarios.push_back(s);
  GsfLpModel model = build_lp_gsf(t, inst);
  LpSolution sol = solve_lp(model.lp);
  REQUIRE(sol.optimal());
  CHECK(sol.objective == doctest::Approx(2.0));  // only the layer-0 tree routes both sides
}

TEST_CASE("GSF LP with a shared vertex is free") {
  WeightedGraph g(3, {{0, 1, 1}, {0, 2, 1}}, 0);
  RootedTree t(g, 0);
  RobustInstance inst;
  Scenario s;
  s.sigma = 1.0;
  s.pairs.push_back({{1}, {1}});
  inst.scenarios.push_back(s);
  GsfLpModel model = build_lp_gsf(t, inst);
  LpSolution sol = solve_lp(model.lp);
  REQUIRE(sol.optimal());
  CHECK(sol.objective == doctest::Approx(0.0));
}

TEST_CASE("GSF relaxation is within 2(D+1) of the optimum") {
  Rng rng(221);
  for (int it = 0; it < 10; ++it) {
    int n = 3 + rng.uniform_int(6);
    WeightedGraph g = testutil::random_tree_depth(rng, n, 4, 3);
    RootedTree t(g, 0);
    int D = t.max_depth();
    RobustInstance inst;
    int m = 1 + rng.uniform_int(2);
    for (int i = 0; i < m; ++i) {
      Scenario s;
      s.sigma = 1.0 + 3.0 * rng.uniform();
      s.pairs.push_back({testutil::random_nonempty_subset(rng, n, 0.3),
                         testutil::random_nonempty_subset(rng, n, 0.3)});
      inst.scenarios.push_back(s);
    }
    GsfLpModel model = build_lp_gsf(t, inst);
    LpSolution sol = solve_lp(model.lp);
    REQUIRE(sol.optimal());
    RobustOracleResult opt = opt_robust(g, 0, inst);
    CHECK(sol.objective <= 2.0 * (D + 1) * opt.cost + 1e-6);
  }
}

TEST_CASE("dependent rounding edge cases") {
  // path of two edges below the root: parent chain 0 <- 1
  std::vector<int> parent{-1, 0};
  DependentRounding zero(parent, 1);
  auto f0 = zero.feed({0.0, 0.0});
  CHECK(f0 == std::vector<char>{0, 0});

  DependentRounding one(parent, 2);
  auto f1 = one.feed({1.0, 1.0});
  CHECK(f1 == std::vector<char>{1, 1});

  DependentRounding bad(parent, 3);
  CHECK_THROWS_AS(bad.feed({0.2, 0.4}), std::invalid_argument);  // increasing on the path
  DependentRounding bad2(parent, 4);
  bad2.feed({0.5, 0.25});
  CHECK_THROWS_AS(bad2.feed({0.4, 0.25}), std::invalid_argument);  // decreasing over time
}

TEST_CASE("rounding marginals match the fed values") {
  std::vector<int> parent{-1, 0};
  int trials = 100000;
  int hit_first = 0, hit_second = 0, monotone_ok = 0;
  int hit1_first = 0, hit1_second = 0;
  for (int s = 0; s < trials; ++s) {
    DependentRounding rd(parent, 1000 + static_cast<uint64_t>(s));
    auto f = rd.feed({0.5, 0.25});
    hit_first += f[0];
    hit_second += f[1];
    std::vector<char> before = f;
    auto f2 = rd.feed({0.8, 0.5});
    hit1_first += f2[0];
    hit1_second += f2[1];
    bool mono = true;
    for (int e = 0; e < 2; ++e)
      if (before[static_cast<size_t>(e)] && !f2[static_cast<size_t>(e)]) mono = false;
    monotone_ok += mono;
  }
  auto within = [&](int hits, double p) {
    double sigma = std::sqrt(p * (1 - p) / trials);
    return std::abs(static_cast<double>(hits) / trials - p) <= 3 * sigma + 1e-12;
  };
  CHECK(within(hit_first, 0.5));
  CHECK(within(hit_second, 0.25));
  CHECK(within(hit1_first, 0.8));
  CHECK(within(hit1_second, 0.5));
  CHECK(monotone_ok == trials);
}

TEST_CASE("rounding marginals stay exact when path ratios decrease") {
  // y0 = (0.4, 0.2), y1 = (1.0, 0.2): the child ratio drops from 1/2 to 1/5
  std::vector<int> parent{-1, 0};
  int trials = 100000;
  int hit = 0, mono = 0;
  for (int s = 0; s < trials; ++s) {
    DependentRounding rd(parent, 5000 + static_cast<uint64_t>(s));
    auto f = rd.feed({0.4, 0.2});
    bool before = f[1];
    auto f2 = rd.feed({1.0, 0.2});
    hit += f2[1];
    mono += (!before || f2[1]) ? 1 : 0;
  }
  double sigma = std::sqrt(0.2 * 0.8 / trials);
  CHECK(std::abs(hit / static_cast<double>(trials) - 0.2) <= 3 * sigma + 1e-12);
  CHECK(mono == trials);
}

TEST_CASE("integral LP solutions round deterministically") {
  WeightedGraph g(2, {{0, 1, 1}}, 0);
  RootedTree t(g, 0);
  RobustInstance inst = single_group_instance(2.0, {1});
  GstLpModel model = build_lp_gst(t, inst);
  LpSolution sol = solve_lp(model.lp);
  REQUIRE(sol.optimal());
  // x0 is integral here: the rounded first stage is exactly the edge
  for (int s = 0; s < 20; ++s) {
    RoundedStages rs = round_robust_gst(t, model, sol, inst, 4, static_cast<uint64_t>(s));
    CHECK(rs.stages[0] == std::vector<int>{1});
    CHECK(rs.all_feasible);
  }
}

TEST_CASE("robust GST rounding is usually feasible") {
  Rng rng(231);
  int trials = 0, feasible = 0;
  for (int it = 0; it < 6; ++it) {
    int n = 3 + rng.uniform_int(7);
    WeightedGraph g = testutil::random_tree(rng, n, 4);
    RobustInstance inst;
    int m = 1 + rng.uniform_int(3);
    for (int i = 0; i < m; ++i) {
      Scenario s;
      s.sigma = 1.0 + 4.0 * rng.uniform();
      s.groups.push_back(testutil::random_nonempty_subset(rng, n, 0.35));
      inst.scenarios.push_back(s);
    }
    RootedTree t(g, 0);
    GstLpModel model = build_lp_gst(t, inst);
    LpSolution sol = solve_lp(model.lp);
    REQUIRE(sol.optimal());
    int copies = default_gst_copies(n);
    for (int s = 0; s < 40; ++s) {
      RoundedStages rs = round_robust_gst(t, model, sol, inst, copies, rng.next_u64());
      ++trials;
      feasible += rs.all_feasible ? 1 : 0;
      // monotone: second-stage edges are disjoint additions
      for (size_t i = 1; i < rs.stages.size(); ++i)
        for (int e : rs.stages[i])
          CHECK(std::find(rs.stages[0].begin(), rs.stages[0].end(), e) == rs.stages[0].end());
    }
  }
  CHECK(feasible >= trials * 95 / 100);
}

TEST_CASE("robust solver end-to-end on a tree") {
  WeightedGraph g(2, {{0, 1, 1}}, 0);
  RobustInstance inst = single_group_instance(2.0, {1});
  RobustSolveResult res = solve_robust_tree(g, 0, inst, false, 0, 7);
  CHECK(res.feasible);
  CHECK(res.eval.all_feasible);
  CHECK(res.eval.worst_cost == doctest::Approx(1.0));
  RobustOracleResult opt = opt_robust(g, 0, inst);
  CHECK(opt.cost == doctest::Approx(1.0));
}

TEST_CASE("robust GSF solver end-to-end on the star") {
  WeightedGraph g(3, {{0, 1, 1}, {0, 2, 1}}, 0);
  RobustInstance inst;
  Scenario s;
  s.sigma = 1.0;
  s.pairs.push_back({{1}, {2}});
  inst.scenarios.push_back(s);
  RobustSolveResult res = solve_robust_tree(g, 0, inst, true, 0, 7);
  CHECK(res.feasible);
  CHECK(res.eval.all_feasible);
  CHECK(res.z == doctest::Approx(2.0));
}

TEST_CASE("general-graph robust solver") {
  // single scenario, sigma 1, group {1}: optimal cost is the edge weight
  WeightedGraph g(2, {{0, 1, 1}}, 0);
  RobustInstance inst = single_group_instance(1.0, {1});
  RobustSolveResult res = solve_robust_general(g, 0, inst, false, 0, 3);
  CHECK(res.feasible);
  CHECK(res.eval.all_feasible);
  CHECK(res.eval.worst_cost == doctest::Approx(1.0));

  // empty scenario list: empty solution at zero cost
  RobustSolveResult empty = solve_robust_general(g, 0, RobustInstance{}, false, 0, 3);
  CHECK(empty.eval.worst_cost == doctest::Approx(0.0));
}

TEST_CASE("general-graph robust solver on random instances") {
  Rng rng(241);
  for (int it = 0; it < 4; ++it) {
    int n = 3 + rng.uniform_int(5);
    WeightedGraph g = testutil::random_graph(rng, n, 3, 2);
    if (g.edge_count() > 12) continue;
    RobustInstance inst;
    int m = 1 + rng.uniform_int(2);
    for (int i = 0; i < m; ++i) {
      Scenario s;
      s.sigma = 1.0 + 3.0 * rng.uniform();
      s.groups.push_back(testutil::random_nonempty_subset(rng, n, 0.4));
      inst.scenarios.push_back(s);
    }
    RobustSolveResult res = solve_robust_general(g, 0, inst, false, 0, static_cast<uint64_t>(it));
    CHECK(res.eval.all_feasible);
    // backward cost preservation: graph stages cost at most their tree stages
    for (size_t i = 0; i < res.tree_stages.size(); ++i)
      CHECK(g.total_weight(res.stages[i]) <= res.tree_stage_weight[i] + kEps);
    RobustOracleResult opt = opt_robust(g, 0, inst);
    CHECK(res.eval.worst_cost >= opt.cost - 1e-6);
  }
}

TEST_CASE("general-graph robust forest solver") {
  // 4-cycle with a pair scenario: the solver must connect {1} to {3}
  WeightedGraph g(4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {0, 3, 1}}, 0);
  RobustInstance inst;
  Scenario s;
  s.sigma = 2.0;
  s.pairs.push_back({{1}, {3}});
  inst.scenarios.push_back(s);
  RobustSolveResult res = solve_robust_general(g, 0, inst, true, 0, 11);
  CHECK(res.eval.all_feasible);
  for (size_t i = 0; i < res.tree_stages.size(); ++i)
    CHECK(g.total_weight(res.stages[i]) <= res.tree_stage_weight[i] + kEps);
  RobustOracleResult opt = opt_robust(g, 0, inst);
  CHECK(res.eval.worst_cost >= opt.cost - 1e-9);
}

TEST_CASE("instance mapping lifts groups through the copy mapping") {
  WeightedGraph g(2, {{0, 1, 1}}, 0);
  CopyTreeEmbedding emb = build_demand_robust(g, 0, 2, 5);
  RobustInstance inst = single_group_instance(2.0, {1});
  RobustInstance lifted = map_robust_instance(inst, emb);
  CHECK(lifted.scenarios[0].groups[0] == emb.phi[1]);
  CHECK(lifted.scenarios[0].sigma == doctest::Approx(2.0));

  RobustInstance empty;
  CHECK(map_robust_instance(empty, emb).scenarios.empty());

  RobustInstance big;
  big.scenarios.resize(3);
  for (auto& s : big.scenarios) s.groups.push_back({1});
  CHECK_THROWS_AS(map_robust_instance(big, emb), std::invalid_argument);
}

TEST_CASE("lifted solutions map back to feasible originals") {
  Rng rng(251);
  for (int it = 0; it < 5; ++it) {
    int n = 3 + rng.uniform_int(7);
    int m = 1 + rng.uniform_int(2);
    WeightedGraph g = testutil::random_graph(rng, n, 4, 2);
    CopyTreeEmbedding emb = build_demand_robust(g, 0, m, static_cast<uint64_t>(300 + it));
    RobustInstance inst;
    for (int i = 0; i < m; ++i) {
      Scenario s;
      s.sigma = 1.0 + rng.uniform();
      s.groups.push_back(testutil::random_nonempty_subset(rng, n, 0.4));
      inst.scenarios.push_back(s);
    }
    RobustInstance lifted = map_robust_instance(inst, emb);
    // a feasible tree solution: buy ALL copy-tree edges in both stages
    std::vector<int> all_edges;
    for (int c = 1; c < emb.tree.n(); ++c) all_edges.push_back(c);
    std::vector<std::vector<int>> stages(static_cast<size_t>(m) + 1, all_edges);
    std::vector<std::vector<int>> graph_stages;
    for (const auto& st : stages) graph_stages.push_back(map_tree_to_graph(emb, st));
    RobustEvaluation ev = evaluate_robust(g, 0, graph_stages, inst);
    CHECK(ev.all_feasible);
  }
}

TEST_CASE("worst-case evaluation") {
  WeightedGraph g(2, {{0, 1, 1}}, 0);
  RobustInstance none;
  CHECK(evaluate_robust(g, 0, {{}}, none).worst_cost == doctest::Approx(0.0));

  RobustInstance inst = single_group_instance(5.0, {1});
  CHECK(evaluate_robust(g, 0, {{0}, {}}, inst).worst_cost == doctest::Approx(1.0));
  CHECK(evaluate_robust(g, 0, {{}, {0}}, inst).worst_cost == doctest::Approx(5.0));
  CHECK_THROWS_AS(evaluate_robust(g, 0, {{}}, inst), std::invalid_argument);
}
