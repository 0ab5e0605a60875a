#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dcsgl/graph.hpp"

namespace dcsgl {

enum class Family { SpuriousMotif, MotifVariant, Marker };

const char* family_name(Family f);
Family parse_family(const std::string& s);

struct GenSpec {
  Family family = Family::SpuriousMotif;
  int count = 3000;               // total graphs; split 2/3 train, 1/6 val, 1/6 test
  std::optional<double> bias;     // P(paired base | motif) in the train split; nullopt = balanced
  Task task = Task::GraphCls;
  int base_min = 8;
  int base_max = 20;
  int feature_dim = 4;
  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument describing the first problem found.
void validate_spec(const GenSpec& spec);

/// Base shapes per family, indexed by class: base c is the spurious partner of motif c.
//   SPURIOUS_MOTIF: tree, ladder, wheel  / motifs cycle, house, crane
//   MOTIF_VARIANT:  grid, barbell, star  / motifs diamond, pentagon-chord, triangle-tail
inline constexpr int kMotifClasses = 3;

struct Shape {
  int num_nodes = 0;
  std::vector<Edge> edges;
};

Shape make_base(Family f, int cls, int size);
Shape make_motif(Family f, int cls);

struct GeneratedDataset {
  Dataset dataset;
  std::vector<int> base_class;  // per graph; -1 for marker graphs
};

GeneratedDataset gen_motif_dataset_with_meta(const GenSpec& spec);
Dataset gen_motif_dataset(const GenSpec& spec);

/// Union of two NODE_CLS families with disjoint motif label ranges:
/// label 0 = base, 1..3 = motifs of `a`, 4..6 = motifs of `b`. A spec with
/// count 0 contributes nothing.
Dataset gen_mixed_node_dataset(const GenSpec& a, const GenSpec& b);

/// True exactly on nodes incident to an edge whose endpoints have different roles.
std::vector<std::uint8_t> annotate_junctions(const Graph& g);

/// Token paths; half carry a contrast marker that flips polarity for the rest
/// of the path. Feature 0 holds token polarity, feature 1 flags the marker.
Dataset gen_marker_dataset(const GenSpec& spec);

struct DatasetSummary {
  std::size_t graphs = 0;
  std::size_t train = 0, val = 0, test = 0;
  double avg_nodes = 0.0;
  std::vector<std::size_t> class_histogram;
  std::size_t with_marker = 0;
};

DatasetSummary summarize(const Dataset& ds);

}  // namespace dcsgl
