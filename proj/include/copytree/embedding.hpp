#pragma once

#include <string>
#include <vector>

#include "copytree/decomposition.hpp"
#include "copytree/graph.hpp"
#include "copytree/rng.hpp"

namespace copytree {

// Well-separated tree over a vertex subset V' whose distances dominate the
// graph metric and stretch it by at most gamma (measured).
struct PartialTreeEmbedding {
  std::vector<int> verts;     // local index -> graph id, sorted ascending
  std::vector<int> local_of;  // graph id -> local index, -1 if absent
  RootedTree tree;            // over local indices
  int root_graph = 0;
  double gamma = 1.0;

  bool contains(int graph_v) const { return local_of[static_cast<size_t>(graph_v)] >= 0; }
};

// Contract a decomposition tree onto the embedded set: the root-to-top path
// collapses onto r, subtrees without embedded vertices are deleted, internal
// part nodes merge into the child subtree holding the smallest embedded id,
// and all weights are multiplied by 4.
PartialTreeEmbedding partial_tree_from(const Metric& m, const HierarchicalDecomposition& h, int r,
                                       double alpha);

// Same contraction over all of V; used for sampled tree constructions.
PartialTreeEmbedding full_tree_from(const Metric& m, const HierarchicalDecomposition& h, int r);

// Tree edges are named by their child endpoint (local index).
std::vector<int> project_to_tree(const PartialTreeEmbedding& p, const WeightedGraph& g,
                                 const std::vector<int>& F);
std::vector<int> project_to_graph(const PartialTreeEmbedding& p, const WeightedGraph& g,
                                  const Metric& m, const std::vector<int>& Fp);

struct CopyTreeEmbedding {
  std::string construction;  // "merged-partial" | "frt-support" | "demand-robust"
  WeightedGraph graph;
  Metric metric;
  int root = 0;

  double alpha_pad = 0.0;  // padding parameter used (merged-partial only)
  double epsilon = 0.0;
  int family_size = 0;     // tau, or the number of sampled trees
  int scenario_capacity = 0;  // m the embedding was built for (demand-robust)

  std::vector<PartialTreeEmbedding> parts;

  RootedTree tree;                       // copy space; copy 0 is the root copy
  std::vector<int> inv;                  // copy -> graph vertex
  std::vector<int> source;               // copy -> constituent index (-1 for the root copy)
  std::vector<std::vector<int>> phi;     // graph vertex -> copies
  std::vector<std::vector<int>> copy_of; // [constituent][local index] -> copy id
  int chi = 0;

  double copy_edge_weight(int copy) const { return tree.parent_weight(copy); }
  double tree_weight(const std::vector<int>& copy_children) const;
};

CopyTreeEmbedding build_construction1(const WeightedGraph& g, int r, double epsilon,
                                      int tau_override = 0, double alpha_override = 0.0);
CopyTreeEmbedding build_construction2(const WeightedGraph& g, int r, int k, uint64_t seed);
CopyTreeEmbedding build_demand_robust(const WeightedGraph& g, int r, int scenario_count,
                                      uint64_t seed);

// Backward map: union over constituents of per-edge shortest paths.
// Returns graph edge ids, sorted. Monotone.
std::vector<int> map_tree_to_graph(const CopyTreeEmbedding& e, const std::vector<int>& copy_children);

// Forward map (verification grade). merged-partial: union over constituents;
// sampled constructions: the single constituent of minimum projected weight.
std::vector<int> map_graph_to_tree(const CopyTreeEmbedding& e, const std::vector<int>& F);

// Demand-robust tuple map: X'_0 is the union over all constituents of the
// forest with X_0's connected components; every X'_i lives in the single
// constituent minimizing the joint weight of X_0 and X_i.
std::vector<std::vector<int>> forward_map_tuple(const CopyTreeEmbedding& e,
                                                const std::vector<std::vector<int>>& stages);

struct VerifyReport {
  bool structure_ok = false;
  bool phi_partition_ok = false;
  bool root_copy_singleton = false;
  bool well_separated = false;
  int chi = 0;
  int trials = 0;
  int forward_connectivity_failures = 0;
  int backward_connectivity_failures = 0;
  int backward_cost_failures = 0;
  int monotonicity_failures = 0;
  int strong_root_failures = 0;  // merged-partial only: every copy of u reaches the root
  double max_forward_factor_union = 0.0;     // max w'(pi(F)) / w(F)
  double max_forward_factor_per_tree = 0.0;  // max over constituents of per-tree ratio
  double max_backward_slack = 0.0;           // max w(pi(F')) / w'(F'), at most 1
  bool ok() const;
};

VerifyReport verify_embedding(const CopyTreeEmbedding& e, int trials, uint64_t seed);

}  // namespace copytree
