#include "dcsgl/jsonl.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace dcsgl {
namespace {

using nlohmann::json;

void put_float(std::string& out, float v) {
  char buf[32];
  int n = std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
  out.append(buf, static_cast<std::size_t>(n));
}

void put_double(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

void put_int_list(std::string& out, const std::vector<int>& xs) {
  out += '[';
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(xs[i]);
  }
  out += ']';
}

void put_escaped(std::string& out, const std::string& s) {
  out += json(s).dump();
}

const json& field(const json& obj, const char* name, std::size_t line) {
  auto it = obj.find(name);
  if (it == obj.end()) throw DecodeError(line, std::string("missing field '") + name + "'");
  return *it;
}

template <class T>
T as(const json& v, const char* name, std::size_t line) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw DecodeError(line, std::string("field '") + name + "' has the wrong type");
  }
}

std::optional<std::vector<int>> optional_int_list(const json& obj, const char* name, std::size_t line) {
  const json& v = field(obj, name, line);
  if (v.is_null()) return std::nullopt;
  return as<std::vector<int>>(v, name, line);
}

Graph parse_graph(const json& obj, int feature_dim, std::size_t line) {
  if (!obj.is_object()) throw DecodeError(line, "expected a JSON object");
  Graph g;
  g.id = as<std::int64_t>(field(obj, "id", line), "id", line);
  g.num_nodes = as<int>(field(obj, "n", line), "n", line);
  g.feature_dim = feature_dim;
  const json& edges = field(obj, "edges", line);
  if (!edges.is_array()) throw DecodeError(line, "field 'edges' has the wrong type");
  for (const auto& e : edges) {
    if (!e.is_array() || e.size() != 2) throw DecodeError(line, "field 'edges' entries must be [u,v] pairs");
    g.edges.push_back({as<int>(e[0], "edges", line), as<int>(e[1], "edges", line)});
  }
  const json& x = field(obj, "x", line);
  if (!x.is_array()) throw DecodeError(line, "field 'x' has the wrong type");
  for (const auto& row : x) {
    if (!row.is_array() || static_cast<int>(row.size()) != feature_dim)
      throw DecodeError(line, "field 'x' rows must have " + std::to_string(feature_dim) + " entries");
    for (const auto& f : row) g.features.push_back(static_cast<float>(as<double>(f, "x", line)));
  }
  g.roles = as<std::vector<int>>(field(obj, "roles", line), "roles", line);
  for (int j : as<std::vector<int>>(field(obj, "junction", line), "junction", line))
    g.junction.push_back(static_cast<std::uint8_t>(j != 0));
  g.label = as<int>(field(obj, "y", line), "y", line);
  g.node_labels = optional_int_list(obj, "y_node", line);
  g.marker_span = optional_int_list(obj, "marker", line);
  return g;
}

}  // namespace

std::string encode_header(const Dataset& ds) {
  std::string out = "{\"name\":";
  put_escaped(out, ds.name);
  out += ",\"bias\":";
  if (ds.bias)
    put_double(out, *ds.bias);
  else
    out += "\"balanced\"";
  out += ",\"task\":";
  out += ds.task == Task::GraphCls ? "\"graph\"" : "\"node\"";
  out += ",\"d\":" + std::to_string(ds.feature_dim);
  out += ",\"splits\":{\"train\":";
  put_int_list(out, ds.splits.train);
  out += ",\"val\":";
  put_int_list(out, ds.splits.val);
  out += ",\"test\":";
  put_int_list(out, ds.splits.test);
  out += "}}";
  return out;
}

std::string encode_graph(const Graph& g) {
  std::string out;
  out.reserve(64 + g.features.size() * 12);
  out += "{\"id\":" + std::to_string(g.id);
  out += ",\"n\":" + std::to_string(g.num_nodes);
  out += ",\"edges\":[";
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    if (i) out += ',';
    out += '[' + std::to_string(g.edges[i].u) + ',' + std::to_string(g.edges[i].v) + ']';
  }
  out += "],\"x\":[";
  for (int i = 0; i < g.num_nodes; ++i) {
    if (i) out += ',';
    out += '[';
    for (int k = 0; k < g.feature_dim; ++k) {
      if (k) out += ',';
      put_float(out, g.feature(i, k));
    }
    out += ']';
  }
  out += "],\"roles\":";
  put_int_list(out, g.roles);
  out += ",\"junction\":[";
  for (std::size_t i = 0; i < g.junction.size(); ++i) {
    if (i) out += ',';
    out += g.junction[i] ? '1' : '0';
  }
  out += "],\"y\":" + std::to_string(g.label);
  out += ",\"y_node\":";
  if (g.node_labels)
    put_int_list(out, *g.node_labels);
  else
    out += "null";
  out += ",\"marker\":";
  if (g.marker_span)
    put_int_list(out, *g.marker_span);
  else
    out += "null";
  out += '}';
  return out;
}

void encode_jsonl(const Dataset& ds, std::ostream& out) {
  out << encode_header(ds) << '\n';
  for (const auto& g : ds.graphs) out << encode_graph(g) << '\n';
}

void encode_jsonl(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  encode_jsonl(ds, out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Dataset decode_jsonl(std::istream& in) {
  Dataset ds;
  std::string text;
  std::size_t line = 0;
  bool have_header = false;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      throw DecodeError(line, std::string("malformed JSON: ") + e.what());
    }
    if (!have_header) {
      if (!obj.is_object()) throw DecodeError(line, "expected a JSON object");
      ds.name = as<std::string>(field(obj, "name", line), "name", line);
      const json& bias = field(obj, "bias", line);
      if (bias.is_string()) {
        if (bias.get<std::string>() != "balanced") throw DecodeError(line, "field 'bias' must be a number or \"balanced\"");
      } else {
        ds.bias = as<double>(bias, "bias", line);
      }
      auto task = as<std::string>(field(obj, "task", line), "task", line);
      if (task == "graph")
        ds.task = Task::GraphCls;
      else if (task == "node")
        ds.task = Task::NodeCls;
      else
        throw DecodeError(line, "field 'task' must be \"graph\" or \"node\"");
      ds.feature_dim = as<int>(field(obj, "d", line), "d", line);
      const json& splits = field(obj, "splits", line);
      ds.splits.train = as<std::vector<int>>(field(splits, "train", line), "train", line);
      ds.splits.val = as<std::vector<int>>(field(splits, "val", line), "val", line);
      ds.splits.test = as<std::vector<int>>(field(splits, "test", line), "test", line);
      have_header = true;
      continue;
    }
    Graph g = parse_graph(obj, ds.feature_dim, line);
    if (auto violations = validate_graph(g); !violations.empty()) throw DecodeError(line, violations.front());
    ds.graphs.push_back(std::move(g));
  }
  if (!have_header) throw DecodeError(line + 1, "missing header line");
  if (auto violations = validate_dataset(ds); !violations.empty()) throw DecodeError(1, violations.front());
  return ds;
}

Dataset decode_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return decode_jsonl(in);
}

}  // namespace dcsgl
