#pragma once

#include "copytree/embedding.hpp"
#include "copytree/instances.hpp"
#include "copytree/oracle.hpp"

namespace copytree {

// Tree-side online solver: buys the cheapest connection measured against
// already-bought edges. Feasible and monotone; no competitive guarantee.
class GreedyTreeSolver {
 public:
  explicit GreedyTreeSolver(const RootedTree* t);
  void reveal_group(const std::vector<int>& group);            // connect group to the root
  void reveal_pair(const std::vector<int>& A, const std::vector<int>& B);
  std::vector<int> solution() const;  // bought edges as child ids, sorted
  double cost() const;

 private:
  double residual_to_root(int v) const;
  void buy_to_root(int v);
  const RootedTree* tree_;
  std::vector<char> bought_;
};

struct OnlineStep {
  double cost = 0.0;          // solution cost after this step
  bool feasible = false;
  double opt = -1.0;          // offline optimum, when the oracle ran
  double ratio = -1.0;
  int connected = 0;          // partial variant: members connected
  int required = 0;
};

struct OnlineRun {
  std::vector<OnlineStep> steps;
  std::vector<std::vector<int>> solutions;  // graph edge ids per step
  bool monotone = true;
  double max_ratio = -1.0;
};

// Attaches zero-cost-style satellites when groups overlap: weights scale by
// n^3 and each shared member gets a weight-1 pendant per group.
struct GadgetResult {
  WeightedGraph graph;
  std::vector<GstEvent> stream;
  double cost_scale = 1.0;  // reported costs divide by this
  bool applied = false;
};

GadgetResult apply_group_gadget(const WeightedGraph& g, const std::vector<GstEvent>& stream);

OnlineRun online_gst_driver(const CopyTreeEmbedding& emb, const std::vector<GstEvent>& stream,
                            bool with_oracle, const OracleBudget& budget = {});
OnlineRun online_gsf_driver(const CopyTreeEmbedding& emb, const std::vector<GsfEvent>& stream,
                            bool with_oracle, const OracleBudget& budget = {});

// Fractional frontier growth on a tree. x is monotone, and each inner
// iteration saturates at least one edge.
class WaterFill {
 public:
  explicit WaterFill(const RootedTree* t);
  // Raises x until at least ceil((1-eps)*f) groups touch the root component;
  // returns the solution (saturated edges in the root component).
  std::vector<int> reveal(const std::vector<std::vector<int>>& groups, int f, double eps);
  const std::vector<double>& x() const { return x_; }
  double total_x() const;
  std::vector<int> solution() const;
  int last_iterations() const { return last_iterations_; }

 private:
  bool saturated(int child) const;
  std::vector<char> root_component() const;
  const RootedTree* tree_;
  std::vector<double> x_;  // indexed by child vertex
  int last_iterations_ = 0;
};

// General-graph online f-partial group Steiner tree through a merged-partial
// embedding: groups lift to groups-of-copies and water filling runs on the
// copy tree.
struct PartialGstOptions {
  double epsilon = 0.25;        // connection slack of the water filling
  double embed_epsilon = 0.25;  // accuracy of the embedding family
  bool with_oracle = false;
  OracleBudget budget;
};

OnlineRun partial_gst_general(const WeightedGraph& g, int r, const std::vector<GstEvent>& stream,
                              const PartialGstOptions& opt);

}  // namespace copytree
