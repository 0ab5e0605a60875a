#include "dcsgl/graph.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace dcsgl {

std::vector<int> Graph::junction_nodes() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(junction.size()); ++i)
    if (junction[i]) out.push_back(i);
  return out;
}

const char* split_name(SplitName s) {
  switch (s) {
    case SplitName::Train: return "train";
    case SplitName::Val: return "val";
    case SplitName::Test: return "test";
  }
  return "?";
}

const std::vector<int>& Dataset::split(SplitName s) const {
  switch (s) {
    case SplitName::Train: return splits.train;
    case SplitName::Val: return splits.val;
    case SplitName::Test: return splits.test;
  }
  throw std::logic_error("bad split");
}

std::vector<std::vector<int>> adjacency(const Graph& g) {
  std::vector<std::vector<int>> adj(g.num_nodes);
  for (const auto& e : g.edges) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  return adj;
}

std::vector<std::uint8_t> boundary_mask(const Graph& g) {
  std::vector<std::uint8_t> mask(g.num_nodes, 0);
  for (const auto& e : g.edges) {
    if (e.u < 0 || e.v < 0 || e.u >= g.num_nodes || e.v >= g.num_nodes) continue;
    if (g.roles[e.u] != g.roles[e.v]) mask[e.u] = mask[e.v] = 1;
  }
  return mask;
}

std::vector<std::string> validate_graph(const Graph& g) {
  std::vector<std::string> out;
  if (g.num_nodes < 0) {
    out.emplace_back("negative node count");
    return out;
  }
  std::set<std::pair<int, int>> seen;
  bool endpoints_ok = true;
  for (const auto& e : g.edges) {
    if (e.u < 0 || e.v < 0 || e.u >= g.num_nodes || e.v >= g.num_nodes) {
      out.push_back("endpoint out of range: (" + std::to_string(e.u) + "," + std::to_string(e.v) + ")");
      endpoints_ok = false;
      continue;
    }
    if (e.u == e.v) {
      out.push_back("self-loop at node " + std::to_string(e.u));
      continue;
    }
    auto key = std::minmax(e.u, e.v);
    if (!seen.insert({key.first, key.second}).second)
      out.push_back("duplicate edge (" + std::to_string(key.first) + "," + std::to_string(key.second) + ")");
  }
  if (g.feature_dim < 0 ||
      g.features.size() != static_cast<std::size_t>(g.num_nodes) * static_cast<std::size_t>(std::max(g.feature_dim, 0)))
    out.emplace_back("feature rows do not match node count");
  bool roles_ok = g.roles.size() == static_cast<std::size_t>(g.num_nodes);
  if (!roles_ok) out.emplace_back("roles length does not match node count");
  if (g.junction.size() != static_cast<std::size_t>(g.num_nodes)) {
    out.emplace_back("junction mask length does not match node count");
  } else if (roles_ok && endpoints_ok) {
    auto expected = boundary_mask(g);
    for (int i = 0; i < g.num_nodes; ++i) {
      if (g.junction[i] && !expected[i]) {
        out.push_back("junction mask inconsistent at node " + std::to_string(i));
      }
    }
  }
  if (g.node_labels && g.node_labels->size() != static_cast<std::size_t>(g.num_nodes))
    out.emplace_back("node label length does not match node count");
  if (g.marker_span) {
    for (int v : *g.marker_span)
      if (v < 0 || v >= g.num_nodes) out.push_back("marker span index out of range: " + std::to_string(v));
  }
  return out;
}

std::vector<std::string> validate_dataset(const Dataset& ds) {
  std::vector<std::string> out;
  const int n = static_cast<int>(ds.graphs.size());
  std::vector<int> owner(n, -1);
  const std::vector<int>* lists[] = {&ds.splits.train, &ds.splits.val, &ds.splits.test};
  for (int s = 0; s < 3; ++s) {
    for (int idx : *lists[s]) {
      if (idx < 0 || idx >= n) {
        out.push_back("split index out of range: " + std::to_string(idx));
      } else if (owner[idx] != -1) {
        out.push_back("split index listed twice: " + std::to_string(idx));
      } else {
        owner[idx] = s;
      }
    }
  }
  if (ds.bias && (*ds.bias < 1.0 / 3.0 - 1e-12 || *ds.bias > 1.0)) out.emplace_back("bias outside [1/3,1]");
  for (const auto& g : ds.graphs) {
    if (g.feature_dim != ds.feature_dim)
      out.push_back("graph " + std::to_string(g.id) + " feature dimension differs from dataset");
    for (auto& v : validate_graph(g)) out.push_back("graph " + std::to_string(g.id) + ": " + v);
  }
  return out;
}

int num_classes(const Dataset& ds) {
  int c = 0;
  for (const auto& g : ds.graphs) {
    if (ds.task == Task::NodeCls && g.node_labels) {
      for (int y : *g.node_labels) c = std::max(c, y + 1);
    } else {
      c = std::max(c, g.label + 1);
    }
  }
  return c;
}

}  // namespace dcsgl
