#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dcsgl/graph.hpp"
#include "dcsgl/tensor.hpp"

namespace dcsgl {

enum class Backbone { LocalExtremum, MeanGcn };

struct GnnConfig {
  Backbone backbone = Backbone::LocalExtremum;
  int num_layers = 4;
  int hidden_dim = 32;
  int feature_dim = 4;
  int num_classes = 3;
  int head_hidden = 32;
  Task task = Task::GraphCls;
};

void validate_config(const GnnConfig& cfg);

/// Number of classes of the junction-count auxiliary target (0, 1, 2, >=3).
inline constexpr int kJunctionCountBuckets = 4;

struct Parameter {
  std::string name;
  Matrix value;
};

/// Parameters of the backbone, the label head, the causal head and the two
/// auxiliary heads used by the ablation modes. Layer l (0-based) owns
///   LOCAL_EXTREMUM: layer<l>.w_self, layer<l>.w_center, layer<l>.w_nbr, layer<l>.bias
///   MEAN_GCN:       layer<l>.weight, layer<l>.bias
class GnnModel {
 public:
  GnnModel() = default;
  /// Glorot-uniform weights from `seed`, zero biases.
  GnnModel(const GnnConfig& cfg, std::uint64_t seed);

  const GnnConfig& config() const { return cfg_; }
  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  int index_of(const std::string& name) const;
  Matrix& param(const std::string& name) { return params_[index_of(name)].value; }
  const Matrix& param(const std::string& name) const { return params_[index_of(name)].value; }

  friend bool operator==(const GnnModel& a, const GnnModel& b);

 private:
  void add(std::string name, Matrix value);
  GnnConfig cfg_;
  std::vector<Parameter> params_;
};

/// Disjoint union of graphs prepared for message passing.
struct GraphBatch {
  int num_graphs = 0;
  int num_nodes = 0;
  Matrix features;
  std::vector<int> node_offsets;  // size num_graphs + 1
  std::vector<double> degree;
  std::shared_ptr<const SparseOperator> adjacency;       // neighbor sum
  std::shared_ptr<const SparseOperator> mean_aggregate;  // mean over N(i) and i

  static GraphBatch build(std::span<const Graph* const> graphs);
  static GraphBatch build(const Graph& g);
};

/// Model parameters bound as leaves on a tape.
struct BoundModel {
  const GnnModel* model = nullptr;
  std::vector<Tensor> leaves;
  const Tensor& operator[](const std::string& name) const { return leaves[model->index_of(name)]; }
};

BoundModel bind(const GnnModel& model, Tape& tape, bool requires_grad = true);

Tensor layer_forward(const BoundModel& bm, int layer, const GraphBatch& batch, const Tensor& h);

/// Outputs of the first `layers` message-passing layers.
std::vector<Tensor> encode(const BoundModel& bm, const GraphBatch& batch, int layers);

struct BatchOutput {
  std::vector<Tensor> layer_outputs;
  Tensor graph_embedding;  // num_graphs x hidden
  Tensor logits;           // num_graphs x classes (graph task) or num_nodes x classes (node task)
};

BatchOutput forward(const BoundModel& bm, const GraphBatch& batch);

/// POOL then two-layer MLP over segments of selected rows; one 2-class logit row per segment.
Tensor causal_head(const BoundModel& bm, const Tensor& selected, std::span<const int> segment_offsets);

/// Plain-value results for a single graph.
struct ModelOutput {
  std::vector<Matrix> layer_outputs;
  Matrix graph_embedding;
  Matrix graph_logits;  // 1 x classes for graph tasks, num_nodes x classes for node tasks
};

ModelOutput forward_full(const GnnModel& model, const Graph& graph);
Matrix layer_forward(const GnnModel& model, int layer, const Graph& graph, const Matrix& h);
Matrix causal_head(const GnnModel& model, const Matrix& selected);

// Checkpoints are JSON: a config header plus named parameter matrices written
// with round-trip precision.
void save_checkpoint(const GnnModel& model, const std::filesystem::path& path);
GnnModel load_checkpoint(const std::filesystem::path& path);

const char* backbone_name(Backbone b);
Backbone parse_backbone(const std::string& s);

}  // namespace dcsgl
