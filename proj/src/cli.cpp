#include "copytree/cli.hpp"

#include <chrono>
#include <fstream>

#include <CLI11.hpp>

#include "copytree/io.hpp"
#include "copytree/online.hpp"
#include "copytree/oracle.hpp"
#include "copytree/robust.hpp"

namespace copytree {

namespace {

struct Common {
  std::string graph_path;
  std::string out_path;
  uint64_t seed = 0;
  bool timings = false;
};

void add_common(CLI::App* cmd, Common& c, bool needs_graph = true) {
  if (needs_graph) cmd->add_option("--graph", c.graph_path, "graph JSON file")->required();
  cmd->add_option("--out", c.out_path, "write the report here instead of stdout");
  cmd->add_option("--seed", c.seed, "seed for randomized paths (default 0)");
  cmd->add_flag("--timings", c.timings, "include wall-clock timings in the report");
}

void emit(const Json& report, const Common& c, std::ostream& out) {
  std::string text = report.dump(2);
  text.push_back('\n');
  if (!c.out_path.empty()) {
    std::ofstream f(c.out_path);
    if (!f) throw std::invalid_argument("cannot write to " + c.out_path);
    f << text;
  } else {
    out << text;
  }
}

Json base_report(const std::string& command, const Common& c, const LoadedGraph& lg) {
  Json j;
  j["schema"] = 1;
  j["command"] = command;
  j["seed"] = c.seed;
  j["weight_scale"] = lg.weight_scale;
  j["contracted_edges"] = lg.contracted_edges;
  j["n"] = lg.graph.n();
  return j;
}

int require_root(const LoadedGraph& lg) {
  if (lg.graph.root()) return *lg.graph.root();
  return 0;
}

Json steps_to_json(const OnlineRun& run) {
  Json steps = Json::array();
  for (const auto& s : run.steps) {
    Json j;
    j["cost"] = s.cost;
    j["feasible"] = s.feasible;
    if (s.opt >= 0) {
      j["opt"] = s.opt;
      j["ratio"] = s.ratio;
    }
    if (s.required > 0) {
      j["connected"] = s.connected;
      j["required"] = s.required;
    }
    steps.push_back(j);
  }
  return steps;
}

Json robust_result_to_json(const RobustSolveResult& res) {
  Json j;
  j["z"] = res.z;
  j["feasible"] = res.feasible;
  j["attempts"] = res.attempts;
  j["worst_cost"] = res.eval.worst_cost;
  j["scenario_cost"] = res.eval.scenario_cost;
  Json feas = Json::array();
  for (char f : res.eval.feasible) feas.push_back(static_cast<bool>(f));
  j["scenario_feasible"] = feas;
  j["stages"] = res.stages;
  if (!res.tree_stage_weight.empty()) j["tree_stage_weight"] = res.tree_stage_weight;
  return j;
}

int run_parsed(const std::vector<std::string>& args, std::ostream& out) {
  CLI::App app{"copy tree embeddings and group Steiner solvers"};
  app.require_subcommand(1);

  // embed / verify
  Common ec;
  std::string construction = "merged-partial";
  double epsilon = 0.25;
  std::string alpha_text = "auto";
  int tau_override = 0;
  int trees = 8;
  int trials = 64;
  bool dump_decompositions = false;
  auto* embed = app.add_subcommand("embed", "build a copy tree embedding");
  add_common(embed, ec);
  embed->add_option("--construction", construction)
      ->check(CLI::IsMember({"merged-partial", "frt-support"}));
  embed->add_option("--epsilon", epsilon, "multiplicative-weights accuracy");
  embed->add_option("--alpha", alpha_text, "padding parameter or 'auto'");
  embed->add_option("--tau-override", tau_override, "override the family size");
  embed->add_option("--trees", trees, "sampled tree count (frt-support)");
  embed->add_flag("--dump-decompositions", dump_decompositions);

  Common vc;
  std::string v_construction = "merged-partial";
  double v_epsilon = 0.25;
  int v_trees = 8;
  auto* verify = app.add_subcommand("verify", "build and verify an embedding");
  add_common(verify, vc);
  verify->add_option("--construction", v_construction)
      ->check(CLI::IsMember({"merged-partial", "frt-support"}));
  verify->add_option("--epsilon", v_epsilon);
  verify->add_option("--trees", v_trees);
  verify->add_option("--trials", trials, "random edge sets per direction");

  // online drivers
  Common oc;
  std::string stream_path;
  double embed_epsilon = 0.25;
  bool with_oracle = false;
  auto* ogst = app.add_subcommand("online-gst", "online group Steiner tree via an embedding");
  add_common(ogst, oc);
  ogst->add_option("--stream", stream_path, "stream JSON file")->required();
  ogst->add_option("--epsilon", embed_epsilon, "embedding accuracy");
  ogst->add_flag("--oracle", with_oracle, "compare against the exact offline optimum");

  Common fc;
  std::string f_stream;
  double f_embed_epsilon = 0.25;
  bool f_oracle = false;
  auto* ogsf = app.add_subcommand("online-gsf", "online group Steiner forest via an embedding");
  add_common(ogsf, fc);
  ogsf->add_option("--stream", f_stream)->required();
  ogsf->add_option("--epsilon", f_embed_epsilon, "embedding accuracy");
  ogsf->add_flag("--oracle", f_oracle);

  Common pc;
  std::string p_stream;
  double p_epsilon = 0.25;
  double p_embed_epsilon = 0.25;
  bool p_oracle = false;
  auto* pgst = app.add_subcommand("partial-gst", "online partial group Steiner tree");
  add_common(pgst, pc);
  pgst->add_option("--stream", p_stream)->required();
  pgst->add_option("--epsilon", p_epsilon, "connection slack");
  pgst->add_option("--embed-epsilon", p_embed_epsilon);
  pgst->add_flag("--oracle", p_oracle);

  // robust
  Common rc;
  std::string scen_path, export_lp_path;
  int copies = 0;
  bool force_general = false;
  auto* rgst = app.add_subcommand("robust-gst", "demand-robust group Steiner tree");
  add_common(rgst, rc);
  rgst->add_option("--scenarios", scen_path)->required();
  rgst->add_option("--copies", copies, "rounding copies (default 4*ceil(ln^2 n))");
  rgst->add_option("--export-lp", export_lp_path, "write the relaxation in LP format");
  rgst->add_flag("--general", force_general, "use the embedding even on trees");

  Common rfc;
  std::string f_scen, f_export;
  int f_copies = 0;
  bool f_general = false;
  auto* rgsf = app.add_subcommand("robust-gsf", "demand-robust group Steiner forest");
  add_common(rgsf, rfc);
  rgsf->add_option("--scenarios", f_scen)->required();
  rgsf->add_option("--copies", f_copies);
  rgsf->add_option("--export-lp", f_export);
  rgsf->add_flag("--general", f_general);

  // oracle
  Common orc;
  std::string problem, input_path;
  auto* orac = app.add_subcommand("oracle", "exact brute-force optimum");
  add_common(orac, orc);
  orac->add_option("--problem", problem)
      ->required()
      ->check(CLI::IsMember({"gst", "gsf", "2level", "partial", "robust"}));
  orac->add_option("--input", input_path, "stream or scenario JSON file")->required();

  // bench
  Common bc;
  auto* bench = app.add_subcommand("bench", "small built-in benchmark");
  add_common(bench, bc, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    throw std::invalid_argument(std::string("argument error: ") + e.what());
  }

  auto now = [] { return std::chrono::steady_clock::now(); };
  auto ms_since = [](auto t0) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - t0)
        .count();
  };

  if (embed->parsed() || verify->parsed()) {
    Common& c = embed->parsed() ? ec : vc;
    std::string cons = embed->parsed() ? construction : v_construction;
    double eps = embed->parsed() ? epsilon : v_epsilon;
    int k = embed->parsed() ? trees : v_trees;
    auto t0 = now();
    LoadedGraph lg = load_graph_file(c.graph_path);
    int r = require_root(lg);
    double alpha_override = 0.0;
    if (embed->parsed() && alpha_text != "auto") alpha_override = std::stod(alpha_text);
    CopyTreeEmbedding emb =
        cons == "merged-partial"
            ? build_construction1(lg.graph, r, eps, embed->parsed() ? tau_override : 0, alpha_override)
            : build_construction2(lg.graph, r, k, c.seed);
    VerifyReport vr = verify_embedding(emb, embed->parsed() ? 32 : trials, c.seed);
    Json rep = base_report(embed->parsed() ? "embed" : "verify", c, lg);
    rep["construction"] = emb.construction;
    rep["verify"] = verify_report_to_json(vr);
    rep["embedding"] = embedding_to_json(emb);
    if (embed->parsed() && dump_decompositions && cons == "merged-partial") {
      // rebuilt here so the dump reflects exactly what the build used
      Metric m(lg.graph);
      PaddedFamily fam = padded_family(m, eps, emb.alpha_pad, tau_override);
      Json ds = Json::array();
      for (const auto& hd : fam.decompositions) ds.push_back(decomposition_to_json(hd));
      rep["decompositions"] = ds;
    }
    if (c.timings) rep["runtime_ms"] = ms_since(t0);
    emit(rep, c, out);
    return vr.ok() ? 0 : 2;
  }

  if (ogst->parsed() || ogsf->parsed()) {
    Common& c = ogst->parsed() ? oc : fc;
    auto t0 = now();
    LoadedGraph lg = load_graph_file(c.graph_path);
    StreamData sd = load_stream_file(ogst->parsed() ? stream_path : f_stream);
    int r = require_root(lg);
    Json rep;
    OnlineRun run;
    if (ogst->parsed()) {
      GadgetResult gadget = apply_group_gadget(lg.graph, sd.gst);
      CopyTreeEmbedding emb = build_construction1(gadget.graph, r, embed_epsilon);
      run = online_gst_driver(emb, gadget.stream, with_oracle);
      rep = base_report("online-gst", c, lg);
      rep["gadget_applied"] = gadget.applied;
      rep["cost_scale"] = gadget.cost_scale;
      size_t max_group = 0;
      for (const auto& ev : sd.gst) max_group = std::max(max_group, ev.group.size());
      rep["max_group_size"] = max_group;
    } else {
      if (!sd.has_pairs) throw std::invalid_argument("online-gsf needs pair events");
      CopyTreeEmbedding emb = build_construction1(lg.graph, r, f_embed_epsilon);
      run = online_gsf_driver(emb, sd.gsf, f_oracle);
      rep = base_report("online-gsf", c, lg);
    }
    rep["steps"] = steps_to_json(run);
    rep["monotone"] = run.monotone;
    if (run.max_ratio >= 0) rep["max_ratio"] = run.max_ratio;
    bool feasible = run.monotone;
    for (const auto& s : run.steps) feasible = feasible && s.feasible;
    if (c.timings) rep["runtime_ms"] = ms_since(t0);
    emit(rep, c, out);
    return feasible ? 0 : 2;
  }

  if (pgst->parsed()) {
    auto t0 = now();
    LoadedGraph lg = load_graph_file(pc.graph_path);
    StreamData sd = load_stream_file(p_stream);
    int r = require_root(lg);
    PartialGstOptions opt;
    opt.epsilon = p_epsilon;
    opt.embed_epsilon = p_embed_epsilon;
    opt.with_oracle = p_oracle;
    OnlineRun run = partial_gst_general(lg.graph, r, sd.gst, opt);
    Json rep = base_report("partial-gst", pc, lg);
    rep["steps"] = steps_to_json(run);
    rep["monotone"] = run.monotone;
    if (run.max_ratio >= 0) rep["max_ratio"] = run.max_ratio;
    bool feasible = run.monotone;
    for (const auto& s : run.steps) feasible = feasible && s.feasible;
    if (pc.timings) rep["runtime_ms"] = ms_since(t0);
    emit(rep, pc, out);
    return feasible ? 0 : 2;
  }

  if (rgst->parsed() || rgsf->parsed()) {
    Common& c = rgst->parsed() ? rc : rfc;
    bool forest_kind = rgsf->parsed();
    auto t0 = now();
    LoadedGraph lg = load_graph_file(c.graph_path);
    RobustInstance inst = load_scenarios_file(rgst->parsed() ? scen_path : f_scen);
    int r = require_root(lg);
    bool tree_input = lg.graph.edge_count() == lg.graph.n() - 1;
    bool general = forest_kind ? f_general : force_general;
    int cps = rgst->parsed() ? copies : f_copies;
    std::string lp_path = rgst->parsed() ? export_lp_path : f_export;
    RobustSolveResult res =
        (tree_input && !general)
            ? solve_robust_tree(lg.graph, r, inst, forest_kind, cps, c.seed, !lp_path.empty())
            : solve_robust_general(lg.graph, r, inst, forest_kind, cps, c.seed, !lp_path.empty());
    if (!lp_path.empty()) {
      std::ofstream f(lp_path);
      if (!f) throw std::invalid_argument("cannot write to " + lp_path);
      f << res.lp_text;
    }
    Json rep = base_report(forest_kind ? "robust-gsf" : "robust-gst", c, lg);
    rep["general_pipeline"] = !(tree_input && !general);
    rep["result"] = robust_result_to_json(res);
    if (inst.m() <= 3 && lg.graph.edge_count() <= 12) {
      RobustOracleResult opt = opt_robust(lg.graph, r, inst);
      rep["oracle_cost"] = opt.cost;
      if (opt.cost > kEps) rep["ratio"] = res.eval.worst_cost / opt.cost;
    }
    if (c.timings) rep["runtime_ms"] = ms_since(t0);
    emit(rep, c, out);
    return res.feasible && res.eval.all_feasible ? 0 : 2;
  }

  if (orac->parsed()) {
    auto t0 = now();
    LoadedGraph lg = load_graph_file(orc.graph_path);
    int r = require_root(lg);
    Json rep = base_report("oracle", orc, lg);
    rep["problem"] = problem;
    if (problem == "robust") {
      RobustInstance inst = load_scenarios_file(input_path);
      RobustOracleResult res = opt_robust(lg.graph, r, inst);
      rep["cost"] = res.cost;
      rep["stages"] = res.stages;
    } else {
      StreamData sd = load_stream_file(input_path);
      OracleResult res;
      if (problem == "gst") {
        std::vector<std::vector<int>> groups;
        for (const auto& e : sd.gst) groups.push_back(e.group);
        res = opt_group_steiner_tree(lg.graph, r, groups);
      } else if (problem == "gsf") {
        res = opt_group_steiner_forest(lg.graph, sd.gsf);
      } else if (problem == "2level") {
        res = opt_two_level_partial(lg.graph, r, sd.two_level);
      } else {  // partial
        res = opt_partial_gst(lg.graph, r, sd.gst);
      }
      rep["cost"] = res.cost;
      rep["edges"] = res.edges;
    }
    if (orc.timings) rep["runtime_ms"] = ms_since(t0);
    emit(rep, orc, out);
    return 0;
  }

  // bench
  {
    auto t0 = now();
    std::vector<Edge> edges;
    int n = 10;
    Rng rng(bc.seed);
    for (int v = 1; v < n; ++v) edges.push_back({rng.uniform_int(v), v, 1.0 + rng.uniform_int(8)});
    for (int extra = 0; extra < 4; ++extra) {
      int u = rng.uniform_int(n), v = rng.uniform_int(n);
      if (u != v) edges.push_back({std::min(u, v), std::max(u, v), 1.0 + rng.uniform_int(8)});
    }
    LoadedGraph lg = normalize_graph(n, edges, 0);
    Json rep;
    rep["schema"] = 1;
    rep["command"] = "bench";
    rep["weight_scale"] = lg.weight_scale;
    auto tb = now();
    CopyTreeEmbedding emb = build_construction1(lg.graph, 0, 0.25);
    rep["construction1_ms"] = ms_since(tb);
    rep["chi"] = emb.chi;
    tb = now();
    VerifyReport vr = verify_embedding(emb, 50, bc.seed);
    rep["verify_ms"] = ms_since(tb);
    rep["verify_ok"] = vr.ok();
    rep["total_ms"] = ms_since(t0);
    emit(rep, bc, out);
    return 0;
  }
}

}  // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return run_parsed(args, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace copytree
