#pragma once

#include <string>
#include <vector>

namespace copytree {

struct GstEvent {
  std::vector<int> group;
  int f = 1;  // connection requirement; 1 for plain group Steiner
};

struct GsfEvent {
  std::vector<int> A;
  std::vector<int> B;
};

// One step of the 2-level problem: a group of groups plus a requirement on
// how many constituent groups must be touched.
struct TwoLevelEvent {
  std::vector<std::vector<int>> groups;
  int f = 1;
};

struct Scenario {
  double sigma = 1.0;
  std::vector<std::vector<int>> groups;  // group Steiner tree scenarios
  std::vector<GsfEvent> pairs;           // group Steiner forest scenarios
};

struct RobustInstance {
  std::vector<Scenario> scenarios;
  int m() const { return static_cast<int>(scenarios.size()); }
  bool has_pairs() const {
    for (const auto& s : scenarios)
      if (!s.pairs.empty()) return true;
    return false;
  }
};

}  // namespace copytree
