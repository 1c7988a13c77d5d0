#pragma once

#include "copytree/embedding.hpp"
#include "copytree/instances.hpp"
#include "copytree/simplex.hpp"

namespace copytree {

// Lifts groups and pairs through the copy mapping; sigma and the scenario
// count are unchanged.
RobustInstance map_robust_instance(const RobustInstance& inst, const CopyTreeEmbedding& emb);

// LP for demand-robust group Steiner tree on a rooted tree. Variables are
// pruned to edges on some root-to-member path; everything else is zero.
struct GstLpModel {
  LinearProgram lp;
  int z_var = -1;
  std::vector<std::vector<int>> x_var;  // [stage][child vertex] -> var id or -1
  std::vector<int> relevant;            // child vertices with variables
};

GstLpModel build_lp_gst(const RootedTree& t, const RobustInstance& inst);

// The depth-truncated copies of a tree: layer l keeps vertices of depth >= l,
// splitting into maximal subtrees rooted at depth-l vertices. Forest edges
// project back to their original edge.
struct LayeredForest {
  int depth = 0;
  std::vector<int> parent_edge;            // forest edge -> forest edge or -1
  std::vector<int> base_child;             // forest edge -> original child vertex
  std::vector<int> layer_of;               // forest edge -> layer
  std::vector<std::vector<int>> edge_id;   // [layer][child] -> forest edge or -1
  int edges() const { return static_cast<int>(parent_edge.size()); }
};

LayeredForest build_layered_forest(const RootedTree& t);

struct GsfLpModel {
  LinearProgram lp;
  int z_var = -1;
  LayeredForest forest;
  std::vector<std::vector<int>> x_var;  // [stage][forest edge] -> var id or -1
};

GsfLpModel build_lp_gsf(const RootedTree& t, const RobustInstance& inst);

// Online dependent rounding over a forest of edges. Feeds must be in [0,1],
// decreasing along parent chains, and coordinatewise non-decreasing over
// time. Each feed has exact marginals Pr[e in F] = y[e], the rounded set
// only grows, and it stays closed under parents.
class DependentRounding {
 public:
  DependentRounding(std::vector<int> parent_edge, uint64_t seed);
  const std::vector<char>& feed(const std::vector<double>& y);
  const std::vector<char>& current() const { return in_; }

 private:
  std::vector<int> parent_;
  std::vector<int> order_;
  std::vector<double> prev_;
  std::vector<char> in_;
  bool fed_ = false;
  Rng rng_;
};

struct RoundedStages {
  std::vector<std::vector<int>> stages;  // [0..m]; GST: tree child ids, GSF: forest edges
  std::vector<char> scenario_feasible;
  bool all_feasible = true;
};

// C independent rounding copies fed y0 = x0, then per scenario y1 =
// repair(min(1, x0 + xi)); the first stage is the union of the copies.
RoundedStages round_robust_gst(const RootedTree& t, const GstLpModel& model,
                               const LpSolution& sol, const RobustInstance& inst, int copies,
                               uint64_t seed);
RoundedStages round_robust_gsf(const RootedTree& t, const GsfLpModel& model,
                               const LpSolution& sol, const RobustInstance& inst, int copies,
                               uint64_t seed);

int default_gst_copies(int n);  // 4 * ceil(ln^2 n)
int default_gsf_copies(int n);  // 4 * ceil(ln^3 n)

struct RobustEvaluation {
  double worst_cost = 0.0;
  std::vector<double> scenario_cost;
  std::vector<char> feasible;
  bool all_feasible = true;
};

RobustEvaluation evaluate_robust(const WeightedGraph& g, int r,
                                 const std::vector<std::vector<int>>& stages,
                                 const RobustInstance& inst);

struct RobustSolveResult {
  std::vector<std::vector<int>> stages;       // graph edge ids per stage
  std::vector<std::vector<int>> tree_stages;  // copy-space stages (general path)
  std::vector<double> tree_stage_weight;
  double z = 0.0;
  RobustEvaluation eval;
  int attempts = 1;
  bool feasible = true;
  std::string lp_text;
};

// Direct solver when the input graph is a rooted tree.
RobustSolveResult solve_robust_tree(const WeightedGraph& g, int r, const RobustInstance& inst,
                                    bool forest_kind, int copies, uint64_t seed,
                                    bool export_lp = false);

// General graphs: demand-robust embedding, instance mapping, LP + rounding on
// the copy tree, and per-set backward mapping.
RobustSolveResult solve_robust_general(const WeightedGraph& g, int r, const RobustInstance& inst,
                                       bool forest_kind, int copies, uint64_t seed,
                                       bool export_lp = false);

}  // namespace copytree
