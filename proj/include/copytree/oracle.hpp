#pragma once

#include "copytree/decomposition.hpp"
#include "copytree/graph.hpp"
#include "copytree/instances.hpp"
#include "copytree/rng.hpp"

namespace copytree {

struct OracleBudget {
  int max_edges_general = 18;
  int max_edges_tree = 20;
  int max_edges_robust_general = 12;
  int max_edges_robust_tree = 16;
  int max_scenarios = 3;
  int max_group_bits = 12;
};

struct OracleResult {
  double cost = 0.0;
  std::vector<int> edges;
};

// Exact offline optimum: minimum-weight edge set connecting at least one
// vertex of every group to r. Uses the subtree DP on trees and subset
// enumeration otherwise.
OracleResult opt_group_steiner_tree(const WeightedGraph& g, int r,
                                    const std::vector<std::vector<int>>& groups,
                                    const OracleBudget& budget = {});
// The two methods individually, for cross-checking.
OracleResult opt_gst_enumeration(const WeightedGraph& g, int r,
                                 const std::vector<std::vector<int>>& groups,
                                 const OracleBudget& budget = {});
OracleResult opt_gst_tree_dp(const WeightedGraph& g, int r,
                             const std::vector<std::vector<int>>& groups,
                             const OracleBudget& budget = {});

OracleResult opt_group_steiner_forest(const WeightedGraph& g, const std::vector<GsfEvent>& pairs,
                                      const OracleBudget& budget = {});

// Minimum-weight rooted subtree touching at least f_i groups of each event.
OracleResult opt_two_level_partial(const WeightedGraph& g, int r,
                                   const std::vector<TwoLevelEvent>& events,
                                   const OracleBudget& budget = {});

// f-partial group Steiner tree on a general graph, by enumeration.
OracleResult opt_partial_gst(const WeightedGraph& g, int r, const std::vector<GstEvent>& events,
                             const OracleBudget& budget = {});

struct RobustOracleResult {
  double cost = 0.0;
  std::vector<std::vector<int>> stages;  // X_0, X_1..X_m
};

// Exact demand-robust optimum by first-stage enumeration with per-scenario
// minimum completions.
RobustOracleResult opt_robust(const WeightedGraph& g, int r, const RobustInstance& inst,
                              const OracleBudget& budget = {});

struct PaddingEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
};

// Unbiased Monte-Carlo estimate of the weighted alpha-padded fraction over
// uniformly random suffix permutations.
PaddingEstimate monte_carlo_padding(const Metric& m, const NodeDistribution& p, double alpha,
                                    const PrefixPermutation& prefix, double beta, int samples,
                                    uint64_t seed);

}  // namespace copytree
