#include <doctest.h>

#include <algorithm>
#include <set>

#include "copytree/embedding.hpp"
#include "test_util.hpp"

using namespace copytree;

namespace {

WeightedGraph two_vertex() { return WeightedGraph(2, {{0, 1, 1}}, 0); }

}  // namespace

TEST_CASE("partial tree embedding of the two-vertex instance") {
  WeightedGraph g = two_vertex();
  Metric m(g);
  HierarchicalDecomposition hd = decomposition_from(m, CuttingDraw{{0, 1}, 0.75});
  PartialTreeEmbedding p = partial_tree_from(m, hd, 0, 1.0 / 16);
  REQUIRE(p.verts == std::vector<int>{0, 1});
  int l0 = p.local_of[0], l1 = p.local_of[1];
  CHECK(p.tree.dist(l0, l1) == doctest::Approx(16.0));  // 4 * 2^2
  CHECK(p.tree.root() == l0);
  CHECK(is_well_separated(p.tree));
  CHECK(p.gamma == doctest::Approx(16.0));
}

TEST_CASE("partial tree embedding on a single vertex") {
  WeightedGraph g(1, {}, 0);
  Metric m(g);
  HierarchicalDecomposition hd = decomposition_from(m, CuttingDraw{{0}, 0.5});
  PartialTreeEmbedding p = partial_tree_from(m, hd, 0, 0.125);
  CHECK(p.verts.size() == 1);
  CHECK(p.tree.n() == 1);
}

TEST_CASE("unpadded roots are rejected") {
  WeightedGraph g = two_vertex();
  Metric m(g);
  HierarchicalDecomposition hd = decomposition_from(m, CuttingDraw{{0, 1}, 0.75});
  CHECK_THROWS_AS(partial_tree_from(m, hd, 0, 0.5), std::invalid_argument);
}

TEST_CASE("partial tree distances dominate the metric") {
  Rng rng(61);
  for (int it = 0; it < 20; ++it) {
    int n = 2 + rng.uniform_int(11);
    WeightedGraph g = testutil::random_graph(rng, n, 6, rng.uniform_int(4));
    Metric m(g);
    std::vector<int> pi(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) pi[static_cast<size_t>(v)] = v;
    rng.shuffle(pi);
    HierarchicalDecomposition hd = decomposition_from(m, CuttingDraw{pi, 0.5 + 0.5 * rng.uniform()});
    double alpha = 0.0625;
    int r = -1;
    for (int v = 0; v < n && r < 0; ++v)
      if (is_alpha_padded(m, hd, v, alpha)) r = v;
    if (r < 0) continue;
    PartialTreeEmbedding p = partial_tree_from(m, hd, r, alpha);
    CHECK(is_well_separated(p.tree));
    for (size_t i = 0; i < p.verts.size(); ++i)
      for (size_t j = i + 1; j < p.verts.size(); ++j) {
        double dg = m.d(p.verts[i], p.verts[j]);
        double dt = p.tree.dist(static_cast<int>(i), static_cast<int>(j));
        CHECK(dg <= dt + kEps);                  // exact domination
        CHECK(dt <= (64.0 / alpha) * dg + kEps); // loose distortion guard
      }
  }
}

TEST_CASE("tree projection: minimal subtrees per component") {
  WeightedGraph g = two_vertex();
  Metric m(g);
  HierarchicalDecomposition hd = decomposition_from(m, CuttingDraw{{0, 1}, 0.75});
  PartialTreeEmbedding p = partial_tree_from(m, hd, 0, 1.0 / 16);
  CHECK(project_to_tree(p, g, {}).empty());
  auto proj = project_to_tree(p, g, {0});
  REQUIRE(proj.size() == 1);
  double w = p.tree.parent_weight(proj[0]);
  CHECK(w == doctest::Approx(16.0));

  // graph projection inverts it at no more cost
  CHECK(project_to_graph(p, g, m, {}).empty());
  auto back = project_to_graph(p, g, m, proj);
  CHECK(back == std::vector<int>{0});
  CHECK(project_to_graph(p, g, m, proj) == back);  // deterministic repeat
}

TEST_CASE("projection connectivity on random instances") {
  Rng rng(71);
  for (int it = 0; it < 15; ++it) {
    int n = 3 + rng.uniform_int(10);
    WeightedGraph g = testutil::random_graph(rng, n, 5, rng.uniform_int(4));
    Metric m(g);
    std::vector<int> pi(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) pi[static_cast<size_t>(v)] = v;
    rng.shuffle(pi);
    HierarchicalDecomposition hd = decomposition_from(m, CuttingDraw{pi, 0.5 + 0.5 * rng.uniform()});
    double alpha = 0.0625;
    int r = -1;
    for (int v = 0; v < n && r < 0; ++v)
      if (is_alpha_padded(m, hd, v, alpha)) r = v;
    if (r < 0) continue;
    PartialTreeEmbedding p = partial_tree_from(m, hd, r, alpha);

    std::vector<int> F = testutil::random_subset(rng, g.edge_count(), 0.5);
    auto Ft = project_to_tree(p, g, F);
    auto label = components(g, F);
    DisjointSet ds(p.tree.n());
    for (int c : Ft) ds.unite(c, p.tree.parent(c));
    for (size_t i = 0; i < p.verts.size(); ++i)
      for (size_t j = i + 1; j < p.verts.size(); ++j)
        if (label[static_cast<size_t>(p.verts[i])] == label[static_cast<size_t>(p.verts[j])]) {
          bool has_edge = false;
          for (int id : F) {
            const Edge& e = g.edge(id);
            if (label[static_cast<size_t>(e.u)] == label[static_cast<size_t>(p.verts[i])]) has_edge = true;
          }
          if (has_edge)
            CHECK(ds.find(static_cast<int>(i)) == ds.find(static_cast<int>(j)));
        }
  }
}

TEST_CASE("construction 1 on the two-vertex instance") {
  WeightedGraph g = two_vertex();
  CopyTreeEmbedding e = build_construction1(g, 0, 0.25);
  CHECK(e.alpha_pad == doctest::Approx(1.0 / 16));
  CHECK(e.family_size == 45);
  CHECK(e.chi <= 45);
  CHECK(e.phi[0].size() == 1);
  VerifyReport rep = verify_embedding(e, 50, 1);
  CHECK(rep.ok());
  CHECK(rep.max_forward_factor_per_tree == doctest::Approx(16.0));
  // the union forward map pays once per constituent tree
  CHECK(rep.max_forward_factor_union == doctest::Approx(16.0 * e.parts.size()));
}

TEST_CASE("construction 1 on a single vertex") {
  WeightedGraph g(1, {}, 0);
  CopyTreeEmbedding e = build_construction1(g, 0, 0.25);
  CHECK(e.chi == 1);
  CHECK(e.tree.n() == 1);
  CHECK(verify_embedding(e, 10, 0).ok());
}

TEST_CASE("construction 1 verifies on random graphs") {
  Rng rng(81);
  for (int it = 0; it < 6; ++it) {
    int n = 2 + rng.uniform_int(9);
    WeightedGraph g = testutil::random_graph(rng, n, 8, rng.uniform_int(4));
    CopyTreeEmbedding e = build_construction1(g, 0, 0.25);
    VerifyReport rep = verify_embedding(e, 40, static_cast<uint64_t>(it));
    CHECK(rep.ok());
    CHECK(rep.chi <= e.family_size);
  }
}

TEST_CASE("forward map of construction 1 is monotone") {
  Rng rng(91);
  WeightedGraph g = testutil::random_graph(rng, 8, 5, 3);
  CopyTreeEmbedding e = build_construction1(g, 0, 0.25);
  for (int it = 0; it < 30; ++it) {
    std::vector<int> big = testutil::random_subset(rng, g.edge_count(), 0.6);
    std::vector<int> small;
    for (int id : big)
      if (rng.uniform() < 0.5) small.push_back(id);
    auto mb = map_graph_to_tree(e, big);
    auto ms = map_graph_to_tree(e, small);
    CHECK(std::includes(mb.begin(), mb.end(), ms.begin(), ms.end()));
  }
}

TEST_CASE("construction 2: sampled trees merged at the root") {
  WeightedGraph g = two_vertex();
  CopyTreeEmbedding e = build_construction2(g, 0, 3, 7);
  CHECK(e.phi[1].size() == 3);
  CHECK(e.phi[0].size() == 1);
  for (const auto& p : e.parts) {
    int l0 = p.local_of[0], l1 = p.local_of[1];
    CHECK(p.tree.dist(l0, l1) >= 1.0 - kEps);  // distances dominate
  }
  CHECK(map_graph_to_tree(e, {}).empty());
  CHECK(verify_embedding(e, 40, 3).ok());
}

TEST_CASE("construction 2 backward cost domination") {
  Rng rng(101);
  for (int it = 0; it < 8; ++it) {
    int n = 2 + rng.uniform_int(11);
    WeightedGraph g = testutil::random_graph(rng, n, 6, rng.uniform_int(4));
    CopyTreeEmbedding e = build_construction2(g, 0, 4, static_cast<uint64_t>(it));
    std::vector<int> Fp;
    for (int c = 1; c < e.tree.n(); ++c)
      if (rng.uniform() < 0.4) Fp.push_back(c);
    auto Fg = map_tree_to_graph(e, Fp);
    CHECK(g.total_weight(Fg) <= e.tree_weight(Fp) + kEps);
  }
}

TEST_CASE("demand-robust embedding: tree count and structure") {
  WeightedGraph g = two_vertex();
  CopyTreeEmbedding e = build_demand_robust(g, 0, 1, 5);
  CHECK(e.family_size == 12);  // ceil(4 ln 16)
  CHECK(e.scenario_capacity == 1);
  for (const auto& p : e.parts) CHECK(p.tree.dist(p.local_of[0], p.local_of[1]) >= 1.0 - kEps);
  CHECK(verify_embedding(e, 30, 11).ok());
}

TEST_CASE("tuple forward map") {
  WeightedGraph g = two_vertex();
  CopyTreeEmbedding e = build_demand_robust(g, 0, 1, 5);

  auto empty = forward_map_tuple(e, {{}, {}});
  CHECK(empty[0].empty());
  CHECK(empty[1].empty());

  auto mapped = forward_map_tuple(e, {{0}, {}});
  CHECK(mapped[0].size() == e.parts.size());  // spans r to its copy in every tree
  CHECK(mapped[1].empty());

  CHECK_THROWS_AS(forward_map_tuple(e, {{}}), std::invalid_argument);
}

TEST_CASE("tuple map preserves scenario connectivity") {
  Rng rng(111);
  for (int it = 0; it < 6; ++it) {
    int n = 3 + rng.uniform_int(7);
    int m = 1 + rng.uniform_int(3);
    WeightedGraph g = testutil::random_graph(rng, n, 4, rng.uniform_int(4));
    CopyTreeEmbedding e = build_demand_robust(g, 0, m, static_cast<uint64_t>(100 + it));
    std::vector<std::vector<int>> stages(static_cast<size_t>(m) + 1);
    for (auto& st : stages) st = testutil::random_subset(rng, g.edge_count(), 0.4);
    auto mapped = forward_map_tuple(e, stages);
    for (int i = 1; i <= m; ++i) {
      std::vector<int> joint = stages[0];
      joint.insert(joint.end(), stages[static_cast<size_t>(i)].begin(), stages[static_cast<size_t>(i)].end());
      auto label = components(g, joint);
      DisjointSet ds(e.tree.n());
      for (int c : mapped[0]) ds.unite(c, e.tree.parent(c));
      for (int c : mapped[static_cast<size_t>(i)]) ds.unite(c, e.tree.parent(c));
      for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) {
          if (label[static_cast<size_t>(u)] != label[static_cast<size_t>(v)]) continue;
          bool has_edge = false;
          for (int id : joint) {
            const Edge& ed = g.edge(id);
            if (label[static_cast<size_t>(ed.u)] == label[static_cast<size_t>(u)]) has_edge = true;
          }
          if (!has_edge) continue;
          bool ok = false;
          for (int cu : e.phi[static_cast<size_t>(u)])
            for (int cv : e.phi[static_cast<size_t>(v)])
              if (ds.find(cu) == ds.find(cv)) ok = true;
          CHECK(ok);
        }
    }
  }
}

TEST_CASE("verify with zero trials runs the structural checks only") {
  WeightedGraph g = two_vertex();
  CopyTreeEmbedding e = build_construction1(g, 0, 0.25);
  VerifyReport rep = verify_embedding(e, 0, 0);
  CHECK(rep.ok());
  CHECK(rep.trials == 0);
  CHECK(rep.max_forward_factor_union == 0.0);
}

TEST_CASE("construction 1 build is deterministic") {
  Rng rng(121);
  WeightedGraph g = testutil::random_graph(rng, 7, 6, 3);
  CopyTreeEmbedding a = build_construction1(g, 0, 0.25);
  CopyTreeEmbedding b = build_construction1(g, 0, 0.25);
  REQUIRE(a.tree.n() == b.tree.n());
  for (int c = 1; c < a.tree.n(); ++c) {
    CHECK(a.tree.parent(c) == b.tree.parent(c));
    CHECK(a.tree.parent_weight(c) == b.tree.parent_weight(c));
  }
  CHECK(a.phi == b.phi);
}
