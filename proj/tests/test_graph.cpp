#include <sstream>

#include "doctest.h"
#include "dcsgl/graph.hpp"
#include "dcsgl/jsonl.hpp"
#include "dcsgl/synth.hpp"
#include "helpers.hpp"

using namespace dcsgl;
using testutil::has_message;

namespace {

std::string encode(const Dataset& ds) {
  std::ostringstream os;
  encode_jsonl(ds, os);
  return os.str();
}

Dataset decode(const std::string& s) {
  std::istringstream is(s);
  return decode_jsonl(is);
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("validate_graph on a triangle is empty") {
  CHECK(validate_graph(testutil::triangle()).empty());
}

TEST_CASE("validate_graph reports forced violations") {
  Graph g = testutil::triangle();
  g.edges.push_back({0, 5});
  CHECK(has_message(validate_graph(g), "endpoint out of range"));

  g = testutil::triangle();
  g.edges.push_back({1, 1});
  CHECK(has_message(validate_graph(g), "self-loop"));

  g = testutil::triangle();
  g.edges.push_back({0, 1});
  CHECK(has_message(validate_graph(g), "duplicate edge"));

  g = testutil::triangle();
  g.features.pop_back();
  CHECK(has_message(validate_graph(g), "feature rows"));

  g = testutil::triangle();
  g.node_labels = std::vector<int>{0, 1};
  CHECK(has_message(validate_graph(g), "node label length"));
}

TEST_CASE("junction mask consistency follows the boundary-edge scan") {
  Graph g = testutil::triangle();
  g.junction[1] = 1;  // only same-role neighbours
  CHECK(has_message(validate_graph(g), "junction mask inconsistent"));

  // path 0-1-2 with roles 0,0,1: brute force says {1,2}
  Graph p;
  p.num_nodes = 3;
  p.feature_dim = 1;
  p.edges = {{0, 1}, {1, 2}};
  p.features = {0.f, 0.f, 0.f};
  p.roles = {0, 0, 1};
  p.junction = testutil::brute_force_junctions(p);
  CHECK(p.junction == std::vector<std::uint8_t>{0, 1, 1});
  CHECK(validate_graph(p).empty());
  CHECK(boundary_mask(p) == p.junction);
}

TEST_CASE("empty graph is well formed") {
  Graph g;
  CHECK(validate_graph(g).empty());
}

TEST_CASE("empty dataset round-trips as a header line") {
  Dataset ds;
  ds.name = "empty";
  ds.feature_dim = 3;
  const std::string s = encode(ds);
  CHECK(count_lines(s) == 1);
  CHECK(decode(s) == ds);
}

TEST_CASE("one-graph dataset is two lines and re-encodes byte-identically") {
  Dataset ds;
  ds.name = "one";
  ds.feature_dim = 2;
  ds.bias = 0.7;
  Graph g = testutil::triangle();
  g.label = 2;
  ds.graphs.push_back(g);
  ds.splits.train = {0};
  const std::string s = encode(ds);
  CHECK(count_lines(s) == 2);
  const Dataset back = decode(s);
  CHECK(back == ds);
  CHECK(encode(back) == s);
}

TEST_CASE("generated datasets round-trip under deep equality") {
  for (Family f : {Family::SpuriousMotif, Family::MotifVariant}) {
    GenSpec spec;
    spec.family = f;
    spec.count = 1000;
    spec.bias = 0.7;
    spec.seed = 3;
    const Dataset ds = gen_motif_dataset(spec);
    const std::string s = encode(ds);
    const Dataset back = decode(s);
    CHECK(back == ds);
    CHECK(encode(back) == s);
  }
  GenSpec node;
  node.count = 60;
  node.task = Task::NodeCls;
  const Dataset nds = gen_motif_dataset(node);
  CHECK(decode(encode(nds)) == nds);

  GenSpec marker;
  marker.family = Family::Marker;
  marker.count = 60;
  const Dataset mds = gen_marker_dataset(marker);
  CHECK(decode(encode(mds)) == mds);
}

TEST_CASE("decode errors carry line numbers and field names") {
  Dataset ds;
  ds.name = "one";
  ds.feature_dim = 2;
  ds.graphs.push_back(testutil::triangle());
  ds.splits.train = {0};
  const std::string good = encode(ds);
  const std::string header = good.substr(0, good.find('\n') + 1);

  SUBCASE("malformed line") {
    try {
      decode(header + "{not json\n");
      FAIL("expected DecodeError");
    } catch (const DecodeError& e) {
      CHECK(e.line() == 2);
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("missing field") {
    std::string line = good.substr(header.size());
    const auto pos = line.find("\"roles\"");
    REQUIRE(pos != std::string::npos);
    line.replace(pos, 7, "\"rolez\"");
    try {
      decode(header + line);
      FAIL("expected DecodeError");
    } catch (const DecodeError& e) {
      CHECK(std::string(e.what()).find("roles") != std::string::npos);
    }
  }
  SUBCASE("missing header") { CHECK_THROWS_AS(decode(""), DecodeError); }
}

TEST_CASE("dataset validation catches overlapping splits") {
  Dataset ds;
  ds.feature_dim = 2;
  ds.graphs.push_back(testutil::triangle());
  ds.splits.train = {0};
  ds.splits.test = {0};
  CHECK(has_message(validate_dataset(ds), "listed twice"));
  ds.splits.test = {4};
  CHECK(has_message(validate_dataset(ds), "out of range"));
}
