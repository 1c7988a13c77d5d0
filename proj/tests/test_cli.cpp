#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "copytree/cli.hpp"
#include "copytree/io.hpp"

using namespace copytree;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content)
      : path("/tmp/copytree_test_" + name) {
    std::ofstream f(path);
    f << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = cli_run(args, out, err);
  return {code, out.str(), err.str()};
}

const char* kPathGraph = R"({"n": 3, "root": 0, "edges": [[0,1,1],[1,2,2]]})";

}  // namespace

TEST_CASE("embed command reports a verified embedding") {
  TempFile g("g1.json", R"({"n": 2, "root": 0, "edges": [[0,1,1]]})");
  RunResult r = run({"embed", "--graph", g.path, "--construction", "merged-partial",
                     "--epsilon", "0.25"});
  REQUIRE(r.code == 0);
  Json rep = Json::parse(r.out);
  CHECK(rep["schema"] == 1);
  CHECK(rep["weight_scale"] == 1.0);
  CHECK(rep["embedding"]["chi"].get<int>() <= 45);
  CHECK(rep["verify"]["ok"] == true);
}

TEST_CASE("oracle command matches the hand value") {
  TempFile g("g2.json", kPathGraph);
  TempFile s("s2.json", R"([{"group": [2]}])");
  RunResult r = run({"oracle", "--graph", g.path, "--problem", "gst", "--input", s.path});
  REQUIRE(r.code == 0);
  Json rep = Json::parse(r.out);
  CHECK(rep["cost"] == 3.0);
}

TEST_CASE("missing input files exit with code 1") {
  RunResult r = run({"oracle", "--graph", "/nonexistent.json", "--problem", "gst", "--input",
                     "/nonexistent2.json"});
  CHECK(r.code == 1);
  CHECK(!r.err.empty());
}

TEST_CASE("malformed files exit with code 1") {
  TempFile g("g3.json", "{not json");
  TempFile s("s3.json", R"([{"group": [1]}])");
  RunResult r = run({"oracle", "--graph", g.path, "--problem", "gst", "--input", s.path});
  CHECK(r.code == 1);
}

TEST_CASE("reports are byte-identical across runs") {
  TempFile g("g4.json", R"({"n": 4, "root": 0, "edges": [[0,1,1],[1,2,2],[0,3,1],[2,3,3]]})");
  RunResult a = run({"embed", "--graph", g.path, "--epsilon", "0.25", "--seed", "3"});
  RunResult b = run({"embed", "--graph", g.path, "--epsilon", "0.25", "--seed", "3"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);

  TempFile sc("sc4.json", R"({"scenarios": [{"sigma": 2.0, "groups": [[2]]}]})");
  TempFile tg("t4.json", kPathGraph);
  RunResult c = run({"robust-gst", "--graph", tg.path, "--scenarios", sc.path, "--seed", "5"});
  RunResult d = run({"robust-gst", "--graph", tg.path, "--scenarios", sc.path, "--seed", "5"});
  REQUIRE(c.code == 0);
  CHECK(c.out == d.out);
}

TEST_CASE("weight normalization factor is reported") {
  TempFile g("g5.json", R"({"n": 2, "root": 0, "edges": [[0,1,0.25]]})");
  RunResult r = run({"embed", "--graph", g.path});
  REQUIRE(r.code == 0);
  Json rep = Json::parse(r.out);
  CHECK(rep["weight_scale"] == 4.0);
}

TEST_CASE("online drivers run from stream files") {
  TempFile g("g6.json", kPathGraph);
  TempFile s("s6.json", R"([{"group": [1]}, {"group": [2]}])");
  RunResult r = run({"online-gst", "--graph", g.path, "--stream", s.path, "--oracle"});
  REQUIRE(r.code == 0);
  Json rep = Json::parse(r.out);
  CHECK(rep["monotone"] == true);
  CHECK(rep["steps"].size() == 2);
  for (const auto& st : rep["steps"]) CHECK(st["feasible"] == true);

  TempFile p("p6.json", R"([{"pair": [[1],[2]]}])");
  RunResult r2 = run({"online-gsf", "--graph", g.path, "--stream", p.path});
  REQUIRE(r2.code == 0);

  TempFile q("q6.json", R"([{"group": [1,2], "f": 1}])");
  RunResult r3 = run({"partial-gst", "--graph", g.path, "--stream", q.path, "--epsilon", "0.5"});
  REQUIRE(r3.code == 0);
}

TEST_CASE("robust commands solve tree and general inputs") {
  TempFile g("g7.json", R"({"n": 3, "root": 0, "edges": [[0,1,1],[1,2,1]]})");
  TempFile sc("sc7.json", R"({"scenarios": [{"sigma": 3.0, "groups": [[2]]}]})");
  RunResult r = run({"robust-gst", "--graph", g.path, "--scenarios", sc.path});
  REQUIRE(r.code == 0);
  Json rep = Json::parse(r.out);
  CHECK(rep["general_pipeline"] == false);
  CHECK(rep["result"]["z"].get<double>() == doctest::Approx(2.0));
  CHECK(rep["result"]["feasible"] == true);
  CHECK(rep["oracle_cost"].get<double>() == doctest::Approx(2.0));

  TempFile cg("g8.json", R"({"n": 3, "root": 0, "edges": [[0,1,1],[1,2,2],[0,2,2]]})");
  RunResult r2 = run({"robust-gst", "--graph", cg.path, "--scenarios", sc.path, "--seed", "2"});
  REQUIRE(r2.code == 0);
  Json rep2 = Json::parse(r2.out);
  CHECK(rep2["general_pipeline"] == true);
  CHECK(rep2["result"]["feasible"] == true);
}

TEST_CASE("single-vertex graphs embed trivially") {
  TempFile g("g10.json", R"({"n": 1, "root": 0, "edges": []})");
  RunResult r = run({"embed", "--graph", g.path});
  REQUIRE(r.code == 0);
  Json rep = Json::parse(r.out);
  CHECK(rep["embedding"]["chi"] == 1);
  CHECK(rep["verify"]["ok"] == true);
}

TEST_CASE("LP export writes a readable file") {
  TempFile g("g9.json", kPathGraph);
  TempFile sc("sc9.json", R"({"scenarios": [{"sigma": 2.0, "groups": [[2]]}]})");
  std::string lp_path = "/tmp/copytree_test_export.lp";
  RunResult r = run({"robust-gst", "--graph", g.path, "--scenarios", sc.path, "--export-lp", lp_path});
  REQUIRE(r.code == 0);
  std::ifstream f(lp_path);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(ss.str().find("Minimize") != std::string::npos);
  std::remove(lp_path.c_str());
}
