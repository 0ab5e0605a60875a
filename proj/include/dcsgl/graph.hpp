#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dcsgl {

enum class Task { GraphCls, NodeCls };

// Role tag of a node: 0 is the confounding base, k >= 1 is motif instance k.
using Role = int;
inline constexpr Role kBaseRole = 0;

struct Edge {
  int u = 0;
  int v = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Node-attributed undirected graph. Edges are stored once with u < v.
struct Graph {
  std::int64_t id = 0;
  int num_nodes = 0;
  int feature_dim = 0;
  std::vector<Edge> edges;
  std::vector<float> features;  // num_nodes x feature_dim, row-major
  std::vector<Role> roles;
  std::vector<std::uint8_t> junction;
  int label = 0;
  std::optional<std::vector<int>> node_labels;
  std::optional<std::vector<int>> marker_span;

  float feature(int node, int k) const { return features[static_cast<std::size_t>(node) * feature_dim + k]; }
  std::vector<int> junction_nodes() const;

  friend bool operator==(const Graph&, const Graph&) = default;
};

struct Splits {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
  friend bool operator==(const Splits&, const Splits&) = default;
};

enum class SplitName { Train, Val, Test };
const char* split_name(SplitName s);

struct Dataset {
  std::string name;
  std::vector<Graph> graphs;
  Splits splits;
  std::optional<double> bias;  // nullopt means balanced
  Task task = Task::GraphCls;
  int feature_dim = 0;

  const std::vector<int>& split(SplitName s) const;
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Adjacency lists with both directions expanded.
std::vector<std::vector<int>> adjacency(const Graph& g);

/// Nodes incident to at least one edge whose endpoints carry different roles.
std::vector<std::uint8_t> boundary_mask(const Graph& g);

/// Invariant violations of a graph; empty when the graph is well formed.
std::vector<std::string> validate_graph(const Graph& g);

/// Dataset-level violations (splits, shared feature dimension) plus per-graph ones.
std::vector<std::string> validate_dataset(const Dataset& ds);

/// Number of classes implied by labels in the dataset (graph or node level).
int num_classes(const Dataset& ds);

}  // namespace dcsgl
