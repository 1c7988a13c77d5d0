#include "copytree/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace copytree {

namespace {

constexpr double kBetaTol = 1e-12;

double level_radius(double beta, int i) { return beta * std::ldexp(1.0, i - 1); }

// One union-bound term of the estimator: u may cut B(level, v) when beta
// falls in the open interval (lo, hi).
struct EstTriple {
  int v = 0;
  int u = 0;
  int level = 0;
  double lo = 0.0;
  double hi = 0.0;
  double inv_nsize = 0.0;
  std::vector<int> nset;  // N_v(u) = {w : d(w,v) <= d(u,v)}
};

std::vector<EstTriple> build_triples(const Metric& m, double alpha) {
  std::vector<EstTriple> triples;
  int h = level_count(m);
  for (int v = 0; v < m.n(); ++v) {
    for (int i = 0; i <= h; ++i) {
      for (int u : candidate_cutters(m, v, i, alpha)) {
        EstTriple t;
        t.v = v;
        t.u = u;
        t.level = i;
        double duv = m.d(u, v);
        t.lo = duv * std::ldexp(1.0, 1 - i) - 2 * alpha;
        t.hi = duv * std::ldexp(1.0, 1 - i) + 2 * alpha;
        if (t.hi <= 0.5 || t.lo >= 1.0) continue;  // never threatens for beta in [1/2, 1)
        for (int w = 0; w < m.n(); ++w)
          if (m.d(w, v) <= duv + kEps) t.nset.push_back(w);
        t.inv_nsize = 1.0 / static_cast<double>(t.nset.size());
        triples.push_back(std::move(t));
      }
    }
  }
  return triples;
}

bool threatens(const EstTriple& t, double beta) { return t.lo < beta && beta < t.hi; }

// Precedence probability of u within N_v(u) given a fixed prefix.
double precedence_probability(const EstTriple& t, const std::vector<int>& pos) {
  int pu = pos[static_cast<size_t>(t.u)];
  if (pu >= 0) {
    for (int w : t.nset)
      if (w != t.u && pos[static_cast<size_t>(w)] >= 0 && pos[static_cast<size_t>(w)] < pu) return 0.0;
    return 1.0;
  }
  for (int w : t.nset)
    if (w != t.u && pos[static_cast<size_t>(w)] >= 0) return 0.0;
  return t.inv_nsize;
}

std::vector<int> prefix_positions(int n, const PrefixPermutation& prefix) {
  std::vector<int> pos(static_cast<size_t>(n), -1);
  for (size_t i = 0; i < prefix.order.size(); ++i) pos[static_cast<size_t>(prefix.order[i])] = static_cast<int>(i);
  return pos;
}

void check_alpha(double alpha) {
  if (!(alpha > 0) || alpha > 0.125 + kBetaTol)
    throw std::invalid_argument("alpha must be in (0, 1/8]");
}

void check_beta(double beta) {
  if (beta < 0.5 || beta >= 1.0) throw std::invalid_argument("beta must be in [1/2, 1)");
}

void check_distribution(const NodeDistribution& p, int n) {
  if (static_cast<int>(p.p.size()) != n)
    throw std::invalid_argument("distribution size mismatch");
  double sum = 0.0;
  for (double x : p.p) {
    if (x < 0) throw std::invalid_argument("distribution entries must be nonnegative");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("distribution must sum to 1");
}

}  // namespace

NodeDistribution uniform_distribution(int n) {
  NodeDistribution d;
  d.p.assign(static_cast<size_t>(n), 1.0 / static_cast<double>(n));
  return d;
}

NodeDistribution floored(const NodeDistribution& p) {
  NodeDistribution q = p;
  int n = static_cast<int>(q.p.size());
  double floor_val = 1.0 / (static_cast<double>(n) * n * n);
  double sum = 0.0;
  for (double& x : q.p) {
    x = std::max(x, floor_val);
    sum += x;
  }
  for (double& x : q.p) x /= sum;
  return q;
}

int level_count(const Metric& m) {
  if (m.n() <= 1) return 0;
  double D = m.diameter();
  // Smallest h with beta * 2^(h-1) >= D for every beta in [1/2, 1).
  return static_cast<int>(std::ceil(std::log2(D) - kBetaTol)) + 2;
}

HierarchicalDecomposition decomposition_from(const Metric& m, const CuttingDraw& draw) {
  check_beta(draw.beta);
  if (static_cast<int>(draw.pi.size()) != m.n())
    throw std::invalid_argument("permutation size mismatch");
  std::vector<char> seen(static_cast<size_t>(m.n()), 0);
  for (int v : draw.pi) {
    if (v < 0 || v >= m.n() || seen[static_cast<size_t>(v)])
      throw std::invalid_argument("ordering must be a permutation of the vertices");
    seen[static_cast<size_t>(v)] = 1;
  }
  HierarchicalDecomposition hd;
  hd.n = m.n();
  hd.h = level_count(m);
  hd.levels.assign(static_cast<size_t>(hd.h) + 1, {});
  hd.part_of.assign(static_cast<size_t>(hd.h) + 1, std::vector<int>(static_cast<size_t>(m.n()), 0));

  std::vector<int> all(static_cast<size_t>(m.n()));
  for (int v = 0; v < m.n(); ++v) all[static_cast<size_t>(v)] = v;
  hd.levels[static_cast<size_t>(hd.h)].push_back(all);

  for (int i = hd.h - 1; i >= 0; --i) {
    double r = level_radius(draw.beta, i);
    auto& parts = hd.levels[static_cast<size_t>(i)];
    for (const auto& upper : hd.levels[static_cast<size_t>(i + 1)]) {
      // Assign each vertex of the part to the first permutation vertex whose
      // radius-r ball contains it; the center need not lie in the part.
      std::map<int, std::vector<int>> by_center;  // position in pi -> members
      for (int v : upper) {
        for (size_t k = 0; k < draw.pi.size(); ++k) {
          int u = draw.pi[k];
          if (m.d(u, v) <= r + kEps) {
            by_center[static_cast<int>(k)].push_back(v);
            break;
          }
        }
      }
      for (auto& [k, members] : by_center) {
        std::sort(members.begin(), members.end());
        parts.push_back(members);
      }
    }
    std::sort(parts.begin(), parts.end(),
              [](const std::vector<int>& a, const std::vector<int>& b) { return a.front() < b.front(); });
  }
  for (int i = 0; i <= hd.h; ++i)
    for (size_t pid = 0; pid < hd.levels[static_cast<size_t>(i)].size(); ++pid)
      for (int v : hd.levels[static_cast<size_t>(i)][pid])
        hd.part_of[static_cast<size_t>(i)][static_cast<size_t>(v)] = static_cast<int>(pid);
  return hd;
}

bool validate_decomposition(const Metric& m, const HierarchicalDecomposition& hd) {
  if (hd.levels.empty()) return false;
  if (hd.levels.back().size() != 1 ||
      static_cast<int>(hd.levels.back().front().size()) != m.n())
    return false;
  for (int i = 0; i <= hd.h; ++i) {
    std::vector<char> seen(static_cast<size_t>(m.n()), 0);
    double bound = std::ldexp(1.0, i);
    for (const auto& part : hd.levels[static_cast<size_t>(i)]) {
      if (part.empty()) return false;
      for (int u : part) {
        if (seen[static_cast<size_t>(u)]) return false;
        seen[static_cast<size_t>(u)] = 1;
        for (int v : part)
          if (m.d(u, v) > bound + kEps) return false;
      }
      if (i == 0 && part.size() != 1) return false;
      if (i < hd.h) {
        int pid = hd.part_of[static_cast<size_t>(i) + 1][static_cast<size_t>(part.front())];
        for (int v : part)
          if (hd.part_of[static_cast<size_t>(i) + 1][static_cast<size_t>(v)] != pid) return false;
      }
    }
    for (int v = 0; v < m.n(); ++v)
      if (!seen[static_cast<size_t>(v)]) return false;
  }
  return true;
}

bool is_alpha_padded(const Metric& m, const HierarchicalDecomposition& hd, int v, double alpha) {
  if (!(alpha > 0) || alpha > 1.0) throw std::invalid_argument("alpha must be in (0, 1]");
  for (int i = 0; i <= hd.h; ++i) {
    double radius = alpha * std::ldexp(1.0, i);
    int pid = hd.part_of[static_cast<size_t>(i)][static_cast<size_t>(v)];
    for (int u : m.ball(v, radius))
      if (hd.part_of[static_cast<size_t>(i)][static_cast<size_t>(u)] != pid) return false;
  }
  return true;
}

DecompositionTree tree_of(const HierarchicalDecomposition& hd) {
  DecompositionTree out;
  int total = 0;
  std::vector<std::vector<int>> node_id(static_cast<size_t>(hd.h) + 1);
  for (int i = 0; i <= hd.h; ++i) {
    node_id[static_cast<size_t>(i)].resize(hd.levels[static_cast<size_t>(i)].size());
    for (size_t pid = 0; pid < hd.levels[static_cast<size_t>(i)].size(); ++pid)
      node_id[static_cast<size_t>(i)][pid] = total++;
  }
  std::vector<int> parent(static_cast<size_t>(total), -1);
  std::vector<double> pw(static_cast<size_t>(total), 0.0);
  out.level_of_node.assign(static_cast<size_t>(total), 0);
  out.vertex_of_node.assign(static_cast<size_t>(total), -1);
  for (int i = 0; i <= hd.h; ++i)
    for (size_t pid = 0; pid < hd.levels[static_cast<size_t>(i)].size(); ++pid) {
      int id = node_id[static_cast<size_t>(i)][pid];
      out.level_of_node[static_cast<size_t>(id)] = i;
      if (i < hd.h) {
        int rep = hd.levels[static_cast<size_t>(i)][pid].front();
        int up = hd.part_of[static_cast<size_t>(i) + 1][static_cast<size_t>(rep)];
        parent[static_cast<size_t>(id)] = node_id[static_cast<size_t>(i) + 1][static_cast<size_t>(up)];
        pw[static_cast<size_t>(id)] = std::ldexp(1.0, i + 1);
      }
    }
  int root = node_id[static_cast<size_t>(hd.h)][0];
  out.tree = RootedTree::from_parents(root, std::move(parent), std::move(pw));
  out.leaf_of_vertex.assign(static_cast<size_t>(hd.n), -1);
  for (size_t pid = 0; pid < hd.levels[0].size(); ++pid) {
    int v = hd.levels[0][pid].front();
    int id = node_id[0][pid];
    out.leaf_of_vertex[static_cast<size_t>(v)] = id;
    out.vertex_of_node[static_cast<size_t>(id)] = v;
  }
  return out;
}

std::vector<int> candidate_cutters(const Metric& m, int v, int level, double alpha) {
  check_alpha(alpha);
  double lo = std::ldexp(1.0, level - 2) - std::ldexp(1.0, level) * alpha;
  double hi = std::ldexp(1.0, level - 1) + std::ldexp(1.0, level) * alpha;
  std::vector<int> out;
  for (int u = 0; u < m.n(); ++u) {
    double d = m.d(u, v);
    if (d >= lo - kEps && d <= hi + kEps) out.push_back(u);
  }
  return out;
}

double pessimistic_estimate(const Metric& m, const NodeDistribution& p,
                            const PrefixPermutation& prefix, double beta, double alpha) {
  check_alpha(alpha);
  check_beta(beta);
  check_distribution(p, m.n());
  auto triples = build_triples(m, alpha);
  auto pos = prefix_positions(m.n(), prefix);
  double s = 0.0;
  for (const EstTriple& t : triples) {
    if (!threatens(t, beta)) continue;
    s += p.p[static_cast<size_t>(t.v)] * precedence_probability(t, pos);
  }
  return 1.0 - s;
}

std::vector<double> beta_thresholds(const Metric& m, double alpha) {
  check_alpha(alpha);
  int h = level_count(m);
  std::vector<double> cuts;
  for (int u = 0; u < m.n(); ++u)
    for (int v = 0; v < m.n(); ++v) {
      if (u == v) continue;
      for (int i = 0; i <= h; ++i) {
        double base = m.d(u, v) * std::ldexp(1.0, 1 - i);
        for (double t : {base - 2 * alpha, base + 2 * alpha})
          if (t > 0.5 + kBetaTol && t < 1.0 - kBetaTol) cuts.push_back(t);
      }
    }
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> points{0.5};
  for (double t : cuts)
    if (std::abs(t - points.back()) > kBetaTol) points.push_back(t);
  points.push_back(1.0);
  std::vector<double> reps;
  for (size_t i = 0; i + 1 < points.size(); ++i) reps.push_back(0.5 * (points[i] + points[i + 1]));
  return reps;
}

double calibrate_alpha(const Metric& m, const NodeDistribution& p) {
  PrefixPermutation empty;
  for (double alpha = 0.125; alpha > 1e-12; alpha /= 2) {
    double best = -1.0;
    for (double beta : beta_thresholds(m, alpha))
      best = std::max(best, pessimistic_estimate(m, p, empty, beta, alpha));
    if (best >= 0.95 - kBetaTol) return alpha;
  }
  throw std::runtime_error("alpha calibration failed to reach the good-start bound");
}

HierarchicalDecomposition derandomized_decomposition(const Metric& m, const NodeDistribution& p,
                                                     double alpha, DerandTrace* trace) {
  check_alpha(alpha);
  check_distribution(p, m.n());
  int n = m.n();
  auto triples = build_triples(m, alpha);

  // Scan the candidate betas with a sweep: with an empty prefix every
  // precedence probability is 1/|N|, so f̂ is piecewise constant in beta.
  std::vector<double> candidates = beta_thresholds(m, alpha);
  struct Event {
    double x;
    double delta;
  };
  std::vector<Event> events;
  for (const EstTriple& t : triples) {
    double w = p.p[static_cast<size_t>(t.v)] * t.inv_nsize;
    events.push_back({t.lo, w});
    events.push_back({t.hi, -w});
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.x < b.x; });
  std::sort(candidates.begin(), candidates.end());
  double best_beta = candidates.front();
  double best_val = -std::numeric_limits<double>::infinity();
  {
    double acc = 0.0;
    size_t ei = 0;
    for (double beta : candidates) {
      while (ei < events.size() && events[ei].x < beta) acc += events[ei++].delta;
      double val = 1.0 - acc;
      if (val > best_val + kBetaTol) {
        best_val = val;
        best_beta = beta;
      }
    }
  }
  if (best_val < 0.95 - kBetaTol)
    throw GoodStartError("good-start condition failed; recalibrate alpha");

  // Greedy prefix fixing at beta*. Triple states: 0 = untouched by the
  // prefix, 1 = u placed first among N (probability locked to 1), 2 = dead.
  std::vector<char> state(triples.size(), 0);
  std::vector<char> active(triples.size(), 0);
  std::vector<std::vector<int>> by_vertex(static_cast<size_t>(n));
  double s = 0.0;
  for (size_t ti = 0; ti < triples.size(); ++ti) {
    const EstTriple& t = triples[ti];
    if (!threatens(t, best_beta)) continue;
    active[ti] = 1;
    s += p.p[static_cast<size_t>(t.v)] * t.inv_nsize;
    for (int w : t.nset) by_vertex[static_cast<size_t>(w)].push_back(static_cast<int>(ti));
  }
  if (trace) {
    trace->beta = best_beta;
    trace->fhat.clear();
    trace->fhat.push_back(1.0 - s);
  }

  std::vector<int> order;
  std::vector<char> placed(static_cast<size_t>(n), 0);
  for (int step = 0; step < n; ++step) {
    int best_v = -1;
    double best_delta = std::numeric_limits<double>::infinity();  // minimize delta of s
    for (int x = 0; x < n; ++x) {
      if (placed[static_cast<size_t>(x)]) continue;
      double delta = 0.0;
      for (int ti : by_vertex[static_cast<size_t>(x)]) {
        if (!active[static_cast<size_t>(ti)] || state[static_cast<size_t>(ti)] != 0) continue;
        const EstTriple& t = triples[static_cast<size_t>(ti)];
        double w = p.p[static_cast<size_t>(t.v)];
        if (t.u == x)
          delta += w * (1.0 - t.inv_nsize);
        else
          delta -= w * t.inv_nsize;
      }
      if (delta < best_delta - kBetaTol) {
        best_delta = delta;
        best_v = x;
      }
    }
    placed[static_cast<size_t>(best_v)] = 1;
    order.push_back(best_v);
    for (int ti : by_vertex[static_cast<size_t>(best_v)]) {
      if (!active[static_cast<size_t>(ti)] || state[static_cast<size_t>(ti)] != 0) continue;
      EstTriple& t = triples[static_cast<size_t>(ti)];
      double w = p.p[static_cast<size_t>(t.v)];
      if (t.u == best_v) {
        state[static_cast<size_t>(ti)] = 1;
        s += w * (1.0 - t.inv_nsize);
      } else {
        state[static_cast<size_t>(ti)] = 2;
        s -= w * t.inv_nsize;
      }
    }
    if (trace) trace->fhat.push_back(1.0 - s);
  }
  if (trace) trace->order = order;
  return decomposition_from(m, CuttingDraw{order, best_beta});
}

PaddedFamily padded_family(const Metric& m, double epsilon, double alpha, int tau_override) {
  if (!(epsilon > 0) || epsilon > 0.25)
    throw std::invalid_argument("epsilon must be in (0, 0.25]");
  check_alpha(alpha);
  int n = m.n();
  PaddedFamily fam;
  fam.alpha = alpha;
  fam.epsilon = epsilon;
  fam.tau = tau_override > 0
                ? tau_override
                : std::max(1, static_cast<int>(std::ceil(4.0 * std::log(n) / (epsilon * epsilon))));

  std::vector<double> w(static_cast<size_t>(n), 1.0);
  for (int t = 0; t < fam.tau; ++t) {
    double sum = 0.0;
    for (double x : w) sum += x;
    NodeDistribution p;
    p.p.resize(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) p.p[static_cast<size_t>(v)] = w[static_cast<size_t>(v)] / sum;
    p = floored(p);

    fam.weights.push_back(w);
    DerandTrace trace;
    HierarchicalDecomposition hd = derandomized_decomposition(m, p, alpha, &trace);
    fam.round_beta.push_back(trace.beta);

    std::vector<char> padded(static_cast<size_t>(n), 0);
    double padded_weight = 0.0;
    for (int v = 0; v < n; ++v) {
      padded[static_cast<size_t>(v)] = is_alpha_padded(m, hd, v, alpha) ? 1 : 0;
      if (padded[static_cast<size_t>(v)]) padded_weight += p.p[static_cast<size_t>(v)];
    }
    fam.round_padded_weight.push_back(padded_weight);
    fam.mistakes.push_back(padded);
    fam.padded.push_back(padded);
    fam.decompositions.push_back(std::move(hd));
    for (int v = 0; v < n; ++v)
      if (padded[static_cast<size_t>(v)]) w[static_cast<size_t>(v)] *= std::exp(-epsilon);
  }

  // The multiplicative-weights guarantee; surfaced as an error rather than
  // silently returning a family that breaks downstream contracts.
  double need = (0.95 - epsilon) * fam.tau - 1e-9;
  for (int v = 0; v < n; ++v) {
    int cnt = 0;
    for (int t = 0; t < fam.tau; ++t)
      if (fam.padded[static_cast<size_t>(t)][static_cast<size_t>(v)]) ++cnt;
    if (cnt < need) throw std::runtime_error("padded-family guarantee violated");
  }
  return fam;
}

}  // namespace copytree
