#include "copytree/io.hpp"

#include <fstream>

namespace copytree {

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw std::invalid_argument("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

LoadedGraph graph_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("edges"))
    throw std::invalid_argument("graph file needs \"n\" and \"edges\"");
  int n = j.at("n").get<int>();
  std::optional<int> root;
  if (j.contains("root") && !j.at("root").is_null()) root = j.at("root").get<int>();
  std::vector<Edge> edges;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 3)
      throw std::invalid_argument("each edge must be [u, v, w]");
    edges.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
  }
  return normalize_graph(n, edges, root);
}

LoadedGraph load_graph_file(const std::string& path) { return graph_from_json(load_json_file(path)); }

StreamData stream_from_json(const Json& j) {
  if (!j.is_array()) throw std::invalid_argument("stream file must be a JSON array of events");
  StreamData s;
  for (const auto& ev : j) {
    if (ev.contains("pair")) {
      const auto& p = ev.at("pair");
      if (!p.is_array() || p.size() != 2)
        throw std::invalid_argument("\"pair\" must be [[a...],[b...]]");
      GsfEvent e;
      for (const auto& a : p[0]) e.A.push_back(a.get<int>());
      for (const auto& b : p[1]) e.B.push_back(b.get<int>());
      s.gsf.push_back(std::move(e));
      s.has_pairs = true;
    } else if (ev.contains("groups")) {
      TwoLevelEvent e;
      for (const auto& grp : ev.at("groups")) {
        std::vector<int> g;
        for (const auto& v : grp) g.push_back(v.get<int>());
        e.groups.push_back(std::move(g));
      }
      e.f = ev.value("f", 1);
      s.two_level.push_back(std::move(e));
      s.has_two_level = true;
    } else if (ev.contains("group")) {
      GstEvent e;
      for (const auto& v : ev.at("group")) e.group.push_back(v.get<int>());
      e.f = ev.value("f", 1);
      s.gst.push_back(std::move(e));
    } else {
      throw std::invalid_argument("event needs a \"group\", \"groups\" or \"pair\" key");
    }
  }
  return s;
}

StreamData load_stream_file(const std::string& path) { return stream_from_json(load_json_file(path)); }

RobustInstance scenarios_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("scenarios"))
    throw std::invalid_argument("scenario file needs a \"scenarios\" array");
  RobustInstance inst;
  for (const auto& sj : j.at("scenarios")) {
    Scenario s;
    s.sigma = sj.value("sigma", 1.0);
    if (sj.contains("groups"))
      for (const auto& grp : sj.at("groups")) {
        std::vector<int> g;
        for (const auto& v : grp) g.push_back(v.get<int>());
        s.groups.push_back(std::move(g));
      }
    if (sj.contains("pairs"))
      for (const auto& p : sj.at("pairs")) {
        if (!p.is_array() || p.size() != 2)
          throw std::invalid_argument("each pair must be [[a...],[b...]]");
        GsfEvent e;
        for (const auto& a : p[0]) e.A.push_back(a.get<int>());
        for (const auto& b : p[1]) e.B.push_back(b.get<int>());
        s.pairs.push_back(std::move(e));
      }
    inst.scenarios.push_back(std::move(s));
  }
  return inst;
}

RobustInstance load_scenarios_file(const std::string& path) {
  return scenarios_from_json(load_json_file(path));
}

Json decomposition_to_json(const HierarchicalDecomposition& h) {
  Json j;
  j["n"] = h.n;
  j["h"] = h.h;
  j["levels"] = h.levels;
  return j;
}

Json embedding_to_json(const CopyTreeEmbedding& e) {
  Json j;
  j["construction"] = e.construction;
  j["root"] = e.root;
  j["chi"] = e.chi;
  j["family_size"] = e.family_size;
  if (e.construction == "merged-partial") {
    j["alpha"] = e.alpha_pad;
    j["epsilon"] = e.epsilon;
    // per-tree stretch guard times the number of merged trees
    j["nominal_cost_factor"] = 32.0 / e.alpha_pad * static_cast<double>(e.parts.size());
  }
  Json tree = Json::array();
  for (int c = 1; c < e.tree.n(); ++c)
    tree.push_back({c, e.tree.parent(c), e.tree.parent_weight(c)});
  j["tree_edges"] = tree;
  Json phi = Json::array();
  for (int v = 0; v < e.graph.n(); ++v) phi.push_back(e.phi[static_cast<size_t>(v)]);
  j["phi"] = phi;
  j["copy_source"] = e.source;
  return j;
}

Json verify_report_to_json(const VerifyReport& r) {
  Json j;
  j["ok"] = r.ok();
  j["phi_partition_ok"] = r.phi_partition_ok;
  j["root_copy_singleton"] = r.root_copy_singleton;
  j["well_separated"] = r.well_separated;
  j["chi"] = r.chi;
  j["trials"] = r.trials;
  j["forward_connectivity_failures"] = r.forward_connectivity_failures;
  j["backward_connectivity_failures"] = r.backward_connectivity_failures;
  j["backward_cost_failures"] = r.backward_cost_failures;
  j["monotonicity_failures"] = r.monotonicity_failures;
  j["strong_root_failures"] = r.strong_root_failures;
  j["max_forward_factor_union"] = r.max_forward_factor_union;
  j["max_forward_factor_per_tree"] = r.max_forward_factor_per_tree;
  j["max_backward_slack"] = r.max_backward_slack;
  return j;
}

}  // namespace copytree
