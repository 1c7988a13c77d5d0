#pragma once

#include <vector>

#include "copytree/graph.hpp"
#include "copytree/rng.hpp"

namespace copytree {

// Raised when no candidate beta reaches the 0.95 start bound at the current
// alpha; callers shrink alpha and retry.
struct GoodStartError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Nested partitions P_0..P_h of the vertex set: P_h is a single part, each
// part of P_i has diameter at most 2^i, P_i refines P_{i+1}, and P_0 is all
// singletons (weights are at least 1).
struct HierarchicalDecomposition {
  int n = 0;
  int h = 0;
  std::vector<std::vector<std::vector<int>>> levels;  // levels[i] = parts, each sorted
  std::vector<std::vector<int>> part_of;              // part_of[i][v] = part index at level i
};

struct CuttingDraw {
  std::vector<int> pi;  // ordering of V: pi[0] is first
  double beta = 0.5;    // in [1/2, 1)
};

struct NodeDistribution {
  std::vector<double> p;
};

NodeDistribution uniform_distribution(int n);
// Floors entries at 1/n^3 and renormalizes; zero-probability vertices are
// not supported by the precedence-probability formula.
NodeDistribution floored(const NodeDistribution& p);

// Number of levels above 0 used for a metric of diameter D: smallest h with
// r_h = beta*2^(h-1) >= D for every beta >= 1/2.
int level_count(const Metric& m);

HierarchicalDecomposition decomposition_from(const Metric& m, const CuttingDraw& draw);

bool validate_decomposition(const Metric& m, const HierarchicalDecomposition& h);

// True iff B(v, alpha*2^i) is inside one part of P_i for every level i.
bool is_alpha_padded(const Metric& m, const HierarchicalDecomposition& h, int v, double alpha);

// The well-separated tree of a decomposition: one node per part, an edge of
// weight 2^(i+1) between a part at level i and its parent at level i+1, and
// leaves identified with the vertices (singleton parts of P_0).
struct DecompositionTree {
  RootedTree tree;
  std::vector<int> leaf_of_vertex;  // graph vertex -> tree node
  std::vector<int> level_of_node;
  std::vector<int> vertex_of_node;  // -1 for non-leaf part nodes
};

DecompositionTree tree_of(const HierarchicalDecomposition& h);

// Vertices whose level-i cluster ball could cut B(v, alpha*2^i):
// 2^(i-2) - 2^i*alpha <= d(u,v) <= 2^(i-1) + 2^i*alpha. Requires alpha <= 1/8.
std::vector<int> candidate_cutters(const Metric& m, int v, int level, double alpha);

struct PrefixPermutation {
  std::vector<int> order;  // fixed prefix, in order
};

// The pessimistic estimator f̂(π_P, β): a lower bound on the expected
// weighted fraction of alpha-padded vertices over random suffixes.
double pessimistic_estimate(const Metric& m, const NodeDistribution& p,
                            const PrefixPermutation& prefix, double beta, double alpha);

// One representative β per interval of [1/2, 1) on which f̂(π_∅, ·) is
// constant. Interval midpoints, plus degenerate single-point intervals.
std::vector<double> beta_thresholds(const Metric& m, double alpha);

// Largest alpha in {1/8, 1/16, ...} whose best candidate β reaches
// f̂(π_∅, β) >= 0.95 under distribution p.
double calibrate_alpha(const Metric& m, const NodeDistribution& p);

struct DerandTrace {
  double beta = 0.0;
  std::vector<int> order;
  std::vector<double> fhat;  // f̂ after each greedy fix; fhat[0] is the start value
};

// Conditional-expectation fixing of (π, β): picks the best candidate β, then
// greedily fixes the permutation one vertex at a time, maximizing f̂.
// The returned decomposition has weighted padded fraction >= 0.95.
HierarchicalDecomposition derandomized_decomposition(const Metric& m, const NodeDistribution& p,
                                                     double alpha, DerandTrace* trace = nullptr);

struct PaddedFamily {
  double alpha = 0.0;
  double epsilon = 0.0;
  int tau = 0;
  std::vector<HierarchicalDecomposition> decompositions;
  std::vector<std::vector<char>> padded;     // [t][v]
  std::vector<std::vector<double>> weights;  // multiplicative weights before round t
  std::vector<std::vector<char>> mistakes;   // m_v^(t), 1 iff padded in round t
  std::vector<double> round_padded_weight;   // sum_v p_v^(t) * padded, per round
  std::vector<double> round_beta;
};

// Multiplicative-weights loop: tau = ceil(4 ln n / eps^2) rounds of the
// derandomized decomposition, down-weighting padded vertices each round.
// Every vertex ends up padded in at least (0.95 - eps) * tau rounds.
PaddedFamily padded_family(const Metric& m, double epsilon, double alpha, int tau_override = 0);

}  // namespace copytree
