#pragma once

#include <string>

#include <json.hpp>

#include "copytree/decomposition.hpp"
#include "copytree/embedding.hpp"
#include "copytree/graph.hpp"
#include "copytree/instances.hpp"

namespace copytree {

using Json = nlohmann::json;

// {"n": int, "root": int, "edges": [[u, v, w], ...]}
LoadedGraph graph_from_json(const Json& j);
LoadedGraph load_graph_file(const std::string& path);

// Ordered list of events: {"group": [...], "f": k}, {"pair": [[...],[...]]},
// or {"groups": [[...], ...], "f": k} for 2-level streams.
struct StreamData {
  std::vector<GstEvent> gst;
  std::vector<GsfEvent> gsf;
  std::vector<TwoLevelEvent> two_level;
  bool has_pairs = false;
  bool has_two_level = false;
};

StreamData stream_from_json(const Json& j);
StreamData load_stream_file(const std::string& path);

// {"scenarios": [{"sigma": s, "groups": [...]} | {"sigma": s, "pairs": [...]}]}
RobustInstance scenarios_from_json(const Json& j);
RobustInstance load_scenarios_file(const std::string& path);

Json decomposition_to_json(const HierarchicalDecomposition& h);
Json embedding_to_json(const CopyTreeEmbedding& e);
Json verify_report_to_json(const VerifyReport& r);

Json load_json_file(const std::string& path);

}  // namespace copytree
