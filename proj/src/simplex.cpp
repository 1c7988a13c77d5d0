#include "copytree/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace copytree {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kFeasTol = 1e-7;

struct Tableau {
  int m = 0;  // rows
  int n = 0;  // columns (structural + slack + artificial)
  std::vector<std::vector<double>> a;  // m x n
  std::vector<double> b;               // m
  std::vector<double> c;               // n (current phase costs)
  std::vector<int> basis;              // m

  void pivot(int row, int col) {
    double piv = a[static_cast<size_t>(row)][static_cast<size_t>(col)];
    auto& ar = a[static_cast<size_t>(row)];
    for (double& x : ar) x /= piv;
    b[static_cast<size_t>(row)] /= piv;
    for (int i = 0; i < m; ++i) {
      if (i == row) continue;
      double f = a[static_cast<size_t>(i)][static_cast<size_t>(col)];
      if (std::abs(f) < kPivotTol) continue;
      auto& ai = a[static_cast<size_t>(i)];
      for (int j = 0; j < n; ++j) ai[static_cast<size_t>(j)] -= f * ar[static_cast<size_t>(j)];
      b[static_cast<size_t>(i)] -= f * b[static_cast<size_t>(row)];
    }
    basis[static_cast<size_t>(row)] = col;
  }
};

// Reduced costs z_j = c_j - c_B^T B^{-1} A_j computed directly from the
// current tableau (columns are already B^{-1} A).
std::vector<double> reduced_costs(const Tableau& t) {
  std::vector<double> red = t.c;
  for (int i = 0; i < t.m; ++i) {
    double cb = t.c[static_cast<size_t>(t.basis[static_cast<size_t>(i)])];
    if (std::abs(cb) < kPivotTol) continue;
    for (int j = 0; j < t.n; ++j)
      red[static_cast<size_t>(j)] -= cb * t.a[static_cast<size_t>(i)][static_cast<size_t>(j)];
  }
  return red;
}

// Returns false on unbounded.
bool run_simplex(Tableau& t, const std::vector<char>& allowed) {
  long long stall = 0;
  double last_obj = std::numeric_limits<double>::infinity();
  bool bland = false;
  for (long long iter = 0;; ++iter) {
    std::vector<double> red = reduced_costs(t);
    int enter = -1;
    if (!bland) {
      double best = -kPivotTol;
      for (int j = 0; j < t.n; ++j)
        if (allowed[static_cast<size_t>(j)] && red[static_cast<size_t>(j)] < best) {
          best = red[static_cast<size_t>(j)];
          enter = j;
        }
    } else {
      for (int j = 0; j < t.n; ++j)
        if (allowed[static_cast<size_t>(j)] && red[static_cast<size_t>(j)] < -kPivotTol) {
          enter = j;
          break;
        }
    }
    if (enter < 0) return true;  // optimal for this phase

    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < t.m; ++i) {
      double aij = t.a[static_cast<size_t>(i)][static_cast<size_t>(enter)];
      if (aij > kPivotTol) {
        double ratio = t.b[static_cast<size_t>(i)] / aij;
        if (ratio < best_ratio - kPivotTol ||
            (ratio < best_ratio + kPivotTol && leave >= 0 &&
             t.basis[static_cast<size_t>(i)] < t.basis[static_cast<size_t>(leave)])) {
          best_ratio = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) return false;  // unbounded
    t.pivot(leave, enter);

    double obj = 0.0;
    for (int i = 0; i < t.m; ++i)
      obj += t.c[static_cast<size_t>(t.basis[static_cast<size_t>(i)])] * t.b[static_cast<size_t>(i)];
    if (obj < last_obj - kPivotTol) {
      last_obj = obj;
      stall = 0;
    } else if (++stall > 2 * (t.m + t.n)) {
      bland = true;  // degeneracy guard
    }
    if (iter > 200000LL + 50LL * (t.m + t.n) * 4)
      throw std::runtime_error("simplex iteration limit exceeded");
  }
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
  int m = static_cast<int>(lp.rows.size());
  int nv = lp.num_vars;

  // Count extra columns: one slack/surplus per inequality, artificials as needed.
  int n_slack = 0;
  for (const LpRow& r : lp.rows)
    if (r.rel != Rel::Eq) ++n_slack;

  Tableau t;
  t.m = m;
  t.n = nv + n_slack;  // artificials appended below
  t.a.assign(static_cast<size_t>(m), std::vector<double>(static_cast<size_t>(t.n), 0.0));
  t.b.assign(static_cast<size_t>(m), 0.0);
  t.basis.assign(static_cast<size_t>(m), -1);

  int slack_at = nv;
  std::vector<int> needs_artificial;
  for (int i = 0; i < m; ++i) {
    const LpRow& r = lp.rows[static_cast<size_t>(i)];
    double sign = 1.0;
    // normalize to b >= 0
    double rhs = r.rhs;
    Rel rel = r.rel;
    if (rhs < 0) {
      sign = -1.0;
      rhs = -rhs;
      if (rel == Rel::Le)
        rel = Rel::Ge;
      else if (rel == Rel::Ge)
        rel = Rel::Le;
    }
    for (auto [j, v] : r.terms) t.a[static_cast<size_t>(i)][static_cast<size_t>(j)] += sign * v;
    t.b[static_cast<size_t>(i)] = rhs;
    if (r.rel != Rel::Eq) {
      double s = (rel == Rel::Le) ? 1.0 : -1.0;
      t.a[static_cast<size_t>(i)][static_cast<size_t>(slack_at)] = s;
      if (rel == Rel::Le)
        t.basis[static_cast<size_t>(i)] = slack_at;  // slack starts basic
      else
        needs_artificial.push_back(i);
      ++slack_at;
    } else {
      needs_artificial.push_back(i);
    }
  }
  int n_art = static_cast<int>(needs_artificial.size());
  int art_at = t.n;
  t.n += n_art;
  for (auto& row : t.a) row.resize(static_cast<size_t>(t.n), 0.0);
  for (int k = 0; k < n_art; ++k) {
    int i = needs_artificial[static_cast<size_t>(k)];
    t.a[static_cast<size_t>(i)][static_cast<size_t>(art_at + k)] = 1.0;
    t.basis[static_cast<size_t>(i)] = art_at + k;
  }

  LpSolution sol;

  // Phase 1: minimize the artificial sum.
  if (n_art > 0) {
    t.c.assign(static_cast<size_t>(t.n), 0.0);
    for (int k = 0; k < n_art; ++k) t.c[static_cast<size_t>(art_at + k)] = 1.0;
    std::vector<char> allowed(static_cast<size_t>(t.n), 1);
    if (!run_simplex(t, allowed)) throw std::runtime_error("phase-1 unbounded");
    double art_sum = 0.0;
    for (int i = 0; i < m; ++i)
      if (t.basis[static_cast<size_t>(i)] >= art_at) art_sum += t.b[static_cast<size_t>(i)];
    if (art_sum > kFeasTol) {
      sol.status = LpSolution::Status::Infeasible;
      return sol;
    }
    // Drive leftover artificials out of the basis when possible.
    for (int i = 0; i < m; ++i) {
      if (t.basis[static_cast<size_t>(i)] < art_at) continue;
      int col = -1;
      for (int j = 0; j < art_at; ++j)
        if (std::abs(t.a[static_cast<size_t>(i)][static_cast<size_t>(j)]) > 1e-7) {
          col = j;
          break;
        }
      if (col >= 0) t.pivot(i, col);
    }
  }

  // Phase 2 over the original objective; artificial columns frozen.
  t.c.assign(static_cast<size_t>(t.n), 0.0);
  for (int j = 0; j < nv; ++j) t.c[static_cast<size_t>(j)] = lp.objective[static_cast<size_t>(j)];
  std::vector<char> allowed(static_cast<size_t>(t.n), 1);
  for (int k = 0; k < n_art; ++k) allowed[static_cast<size_t>(art_at + k)] = 0;
  if (!run_simplex(t, allowed)) {
    sol.status = LpSolution::Status::Unbounded;
    return sol;
  }

  sol.status = LpSolution::Status::Optimal;
  sol.x.assign(static_cast<size_t>(nv), 0.0);
  for (int i = 0; i < m; ++i)
    if (t.basis[static_cast<size_t>(i)] < nv)
      sol.x[static_cast<size_t>(t.basis[static_cast<size_t>(i)])] = t.b[static_cast<size_t>(i)];
  sol.objective = 0.0;
  for (int j = 0; j < nv; ++j) sol.objective += lp.objective[static_cast<size_t>(j)] * sol.x[static_cast<size_t>(j)];

  // Feasibility re-check.
  for (const LpRow& r : lp.rows) {
    double lhs = 0.0;
    for (auto [j, v] : r.terms) lhs += v * sol.x[static_cast<size_t>(j)];
    double viol = 0.0;
    if (r.rel == Rel::Le) viol = lhs - r.rhs;
    if (r.rel == Rel::Ge) viol = r.rhs - lhs;
    if (r.rel == Rel::Eq) viol = std::abs(lhs - r.rhs);
    if (viol > kFeasTol * (1.0 + std::abs(r.rhs)) * 10)
      throw std::runtime_error("simplex returned an infeasible point");
  }
  return sol;
}

std::string lp_to_text(const LinearProgram& lp) {
  std::ostringstream out;
  out.precision(12);
  out << "Minimize\n obj:";
  bool first = true;
  for (int j = 0; j < lp.num_vars; ++j) {
    double c = lp.objective[static_cast<size_t>(j)];
    if (c == 0.0) continue;
    out << (c >= 0 && !first ? " + " : first ? " " : " - ") << std::abs(c) << " "
        << lp.names[static_cast<size_t>(j)];
    first = false;
  }
  if (first) out << " 0 " << (lp.num_vars > 0 ? lp.names[0] : "x0");
  out << "\nSubject To\n";
  for (size_t i = 0; i < lp.rows.size(); ++i) {
    const LpRow& r = lp.rows[i];
    out << " " << (r.name.empty() ? "c" + std::to_string(i) : r.name) << ":";
    bool f = true;
    for (auto [j, v] : r.terms) {
      out << (v >= 0 && !f ? " + " : f ? " " : " - ") << std::abs(v) << " "
          << lp.names[static_cast<size_t>(j)];
      f = false;
    }
    if (f) out << " 0 " << lp.names[0];
    out << (r.rel == Rel::Le ? " <= " : r.rel == Rel::Ge ? " >= " : " = ") << r.rhs << "\n";
  }
  out << "Bounds\n";
  for (int j = 0; j < lp.num_vars; ++j) out << " 0 <= " << lp.names[static_cast<size_t>(j)] << "\n";
  out << "End\n";
  return out.str();
}

}  // namespace copytree
