#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "dcsgl/graph.hpp"
#include "dcsgl/rng.hpp"
#include "dcsgl/tensor.hpp"

namespace testutil {

using dcsgl::Graph;
using dcsgl::Matrix;

inline Matrix random_matrix(dcsgl::Rng& rng, int r, int c, double lo = -1.0, double hi = 1.0) {
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = dcsgl::uniform(rng, lo, hi);
  return m;
}

// brute force: every node, every pair of nodes, check edge membership and roles
inline std::vector<std::uint8_t> brute_force_junctions(const Graph& g) {
  std::set<std::pair<int, int>> es;
  for (const auto& e : g.edges) {
    es.insert({e.u, e.v});
    es.insert({e.v, e.u});
  }
  std::vector<std::uint8_t> out(static_cast<std::size_t>(g.num_nodes), 0);
  for (int i = 0; i < g.num_nodes; ++i)
    for (int j = 0; j < g.num_nodes; ++j)
      if (es.count({i, j}) && g.roles[i] != g.roles[j]) out[i] = 1;
  return out;
}

inline Graph triangle() {
  Graph g;
  g.num_nodes = 3;
  g.feature_dim = 2;
  g.edges = {{0, 1}, {1, 2}, {0, 2}};
  g.features = {0.f, 1.f, 0.5f, 0.25f, 1.f, 0.f};
  g.roles = {0, 0, 0};
  g.junction = {0, 0, 0};
  return g;
}

inline bool has_message(const std::vector<std::string>& report, const std::string& needle) {
  return std::any_of(report.begin(), report.end(),
                     [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

}  // namespace testutil
