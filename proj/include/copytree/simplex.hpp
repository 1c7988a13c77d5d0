#pragma once

#include <string>
#include <vector>

namespace copytree {

enum class Rel { Le, Ge, Eq };

struct LpRow {
  std::vector<std::pair<int, double>> terms;  // (variable, coefficient)
  Rel rel = Rel::Le;
  double rhs = 0.0;
  std::string name;
};

// min c^T x subject to the rows, x >= 0.
struct LinearProgram {
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<LpRow> rows;
  std::vector<std::string> names;

  int add_var(const std::string& name, double cost = 0.0) {
    names.push_back(name);
    objective.push_back(cost);
    return num_vars++;
  }
};

struct LpSolution {
  enum class Status { Optimal, Infeasible, Unbounded };
  Status status = Status::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
  bool optimal() const { return status == Status::Optimal; }
};

// Dense two-phase simplex. Dantzig pricing with a Bland fallback against
// cycling; feasibility of the returned point is re-checked to 1e-7.
LpSolution solve_lp(const LinearProgram& lp);

// CPLEX LP text format, for external cross-checking.
std::string lp_to_text(const LinearProgram& lp);

}  // namespace copytree
