#include "dcsgl/gnn.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "dcsgl/rng.hpp"
#include "json.hpp"

namespace dcsgl {
namespace {

Matrix glorot(int fan_in, int fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  Matrix m(fan_in, fan_out);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, -a, a);
  return m;
}

std::string layer_key(int l, const char* what) { return "layer" + std::to_string(l) + "." + what; }

}  // namespace

const char* backbone_name(Backbone b) { return b == Backbone::LocalExtremum ? "local-extremum" : "mean-gcn"; }

Backbone parse_backbone(const std::string& s) {
  if (s == "local-extremum") return Backbone::LocalExtremum;
  if (s == "mean-gcn") return Backbone::MeanGcn;
  throw std::invalid_argument("unknown backbone '" + s + "' (expected local-extremum or mean-gcn)");
}

void validate_config(const GnnConfig& cfg) {
  if (cfg.num_layers < 1) throw std::invalid_argument("num_layers must be >= 1");
  if (cfg.hidden_dim < 1 || cfg.feature_dim < 1 || cfg.head_hidden < 1)
    throw std::invalid_argument("hidden_dim, feature_dim and head_hidden must be positive");
  if (cfg.num_classes < 1) throw std::invalid_argument("num_classes must be positive");
}

GnnModel::GnnModel(const GnnConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  validate_config(cfg);
  Rng rng(derive_seed(seed, {0x6e6e}));
  const int h = cfg.hidden_dim;
  for (int l = 0; l < cfg.num_layers; ++l) {
    const int in = l == 0 ? cfg.feature_dim : h;
    if (cfg.backbone == Backbone::LocalExtremum) {
      add(layer_key(l, "w_self"), glorot(in, h, rng));
      add(layer_key(l, "w_center"), glorot(in, h, rng));
      add(layer_key(l, "w_nbr"), glorot(in, h, rng));
    } else {
      add(layer_key(l, "weight"), glorot(in, h, rng));
    }
    add(layer_key(l, "bias"), Matrix::Zero(1, h));
  }
  add("cls.weight", glorot(h, cfg.num_classes, rng));
  add("cls.bias", Matrix::Zero(1, cfg.num_classes));
  add("causal.w1", glorot(h, cfg.head_hidden, rng));
  add("causal.b1", Matrix::Zero(1, cfg.head_hidden));
  add("causal.w2", glorot(cfg.head_hidden, 2, rng));
  add("causal.b2", Matrix::Zero(1, 2));
  add("aux_junction.weight", glorot(h, 2, rng));
  add("aux_junction.bias", Matrix::Zero(1, 2));
  add("aux_count.weight", glorot(h, kJunctionCountBuckets, rng));
  add("aux_count.bias", Matrix::Zero(1, kJunctionCountBuckets));
}

void GnnModel::add(std::string name, Matrix value) { params_.push_back({std::move(name), std::move(value)}); }

int GnnModel::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name) return static_cast<int>(i);
  throw std::out_of_range("no parameter named '" + name + "'");
}

bool operator==(const GnnModel& a, const GnnModel& b) {
  if (a.params_.size() != b.params_.size()) return false;
  const auto& ca = a.cfg_;
  const auto& cb = b.cfg_;
  if (ca.backbone != cb.backbone || ca.num_layers != cb.num_layers || ca.hidden_dim != cb.hidden_dim ||
      ca.feature_dim != cb.feature_dim || ca.num_classes != cb.num_classes || ca.head_hidden != cb.head_hidden ||
      ca.task != cb.task)
    return false;
  for (std::size_t i = 0; i < a.params_.size(); ++i) {
    if (a.params_[i].name != b.params_[i].name) return false;
    if (a.params_[i].value.rows() != b.params_[i].value.rows() || a.params_[i].value.cols() != b.params_[i].value.cols())
      return false;
    if (a.params_[i].value != b.params_[i].value) return false;
  }
  return true;
}

GraphBatch GraphBatch::build(std::span<const Graph* const> graphs) {
  GraphBatch b;
  b.num_graphs = static_cast<int>(graphs.size());
  b.node_offsets.reserve(graphs.size() + 1);
  b.node_offsets.push_back(0);
  int d = graphs.empty() ? 0 : graphs.front()->feature_dim;
  for (const Graph* g : graphs) {
    if (g->feature_dim != d) throw std::invalid_argument("GraphBatch: graphs disagree on feature dimension");
    b.node_offsets.push_back(b.node_offsets.back() + g->num_nodes);
  }
  b.num_nodes = b.node_offsets.back();
  b.features.resize(b.num_nodes, d);
  b.degree.assign(b.num_nodes, 0.0);
  std::vector<Eigen::Triplet<double>> adj, mean;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const Graph& g = *graphs[gi];
    const int off = b.node_offsets[gi];
    for (int i = 0; i < g.num_nodes; ++i)
      for (int k = 0; k < d; ++k) b.features(off + i, k) = static_cast<double>(g.feature(i, k));
    for (const Edge& e : g.edges) {
      adj.emplace_back(off + e.u, off + e.v, 1.0);
      adj.emplace_back(off + e.v, off + e.u, 1.0);
      b.degree[off + e.u] += 1.0;
      b.degree[off + e.v] += 1.0;
    }
  }
  for (const auto& t : adj) mean.emplace_back(t.row(), t.col(), 1.0 / (b.degree[t.row()] + 1.0));
  for (int i = 0; i < b.num_nodes; ++i) mean.emplace_back(i, i, 1.0 / (b.degree[i] + 1.0));
  SparseMatrix a(b.num_nodes, b.num_nodes), m(b.num_nodes, b.num_nodes);
  a.setFromTriplets(adj.begin(), adj.end());
  m.setFromTriplets(mean.begin(), mean.end());
  b.adjacency = std::make_shared<SparseOperator>(std::move(a));
  b.mean_aggregate = std::make_shared<SparseOperator>(std::move(m));
  return b;
}

GraphBatch GraphBatch::build(const Graph& g) {
  const Graph* one[] = {&g};
  return build(std::span<const Graph* const>(one, 1));
}

BoundModel bind(const GnnModel& model, Tape& tape, bool requires_grad) {
  BoundModel bm;
  bm.model = &model;
  bm.leaves.reserve(model.parameters().size());
  for (const auto& p : model.parameters()) bm.leaves.push_back(tape.leaf(p.value, requires_grad));
  return bm;
}

Tensor layer_forward(const BoundModel& bm, int layer, const GraphBatch& batch, const Tensor& h) {
  const GnnConfig& cfg = bm.model->config();
  if (layer < 0 || layer >= cfg.num_layers) throw std::out_of_range("layer index " + std::to_string(layer));
  if (h.rows() != batch.num_nodes)
    throw std::invalid_argument("layer_forward: " + std::to_string(h.rows()) + " feature rows for " +
                                std::to_string(batch.num_nodes) + " nodes");
  Tensor pre;
  if (cfg.backbone == Backbone::LocalExtremum) {
    // h_i W_self + sum_{j in N(i)} (h_i W_center - h_j W_nbr)
    Tensor self = ad::matmul(h, bm[layer_key(layer, "w_self")]);
    Tensor center = ad::scale_rows(ad::matmul(h, bm[layer_key(layer, "w_center")]), batch.degree);
    Tensor nbr = ad::spmm(batch.adjacency, ad::matmul(h, bm[layer_key(layer, "w_nbr")]));
    pre = ad::add(self, ad::sub(center, nbr));
  } else {
    pre = ad::matmul(ad::spmm(batch.mean_aggregate, h), bm[layer_key(layer, "weight")]);
  }
  return ad::relu(ad::add_row(pre, bm[layer_key(layer, "bias")]));
}

std::vector<Tensor> encode(const BoundModel& bm, const GraphBatch& batch, int layers) {
  if (layers < 0 || layers > bm.model->config().num_layers)
    throw std::out_of_range("encode: requested " + std::to_string(layers) + " layers");
  Tape* tape = bm.leaves.front().tape();
  std::vector<Tensor> out;
  Tensor h = tape->constant(batch.features);
  for (int l = 0; l < layers; ++l) {
    h = layer_forward(bm, l, batch, h);
    out.push_back(h);
  }
  return out;
}

BatchOutput forward(const BoundModel& bm, const GraphBatch& batch) {
  const GnnConfig& cfg = bm.model->config();
  BatchOutput out;
  out.layer_outputs = encode(bm, batch, cfg.num_layers);
  const Tensor& last = out.layer_outputs.back();
  out.graph_embedding = ad::segment_mean(last, batch.node_offsets);
  const Tensor& src = cfg.task == Task::GraphCls ? out.graph_embedding : last;
  out.logits = ad::add_row(ad::matmul(src, bm["cls.weight"]), bm["cls.bias"]);
  return out;
}

Tensor causal_head(const BoundModel& bm, const Tensor& selected, std::span<const int> segment_offsets) {
  Tensor pooled = ad::segment_mean(selected, segment_offsets);
  Tensor hidden = ad::relu(ad::add_row(ad::matmul(pooled, bm["causal.w1"]), bm["causal.b1"]));
  return ad::add_row(ad::matmul(hidden, bm["causal.w2"]), bm["causal.b2"]);
}

ModelOutput forward_full(const GnnModel& model, const Graph& graph) {
  if (graph.feature_dim != model.config().feature_dim)
    throw std::invalid_argument("forward_full: graph feature dimension " + std::to_string(graph.feature_dim) +
                                " differs from model " + std::to_string(model.config().feature_dim));
  Tape tape;
  BoundModel bm = bind(model, tape, false);
  GraphBatch batch = GraphBatch::build(graph);
  BatchOutput o = forward(bm, batch);
  ModelOutput out;
  for (const auto& t : o.layer_outputs) out.layer_outputs.push_back(t.value());
  out.graph_embedding = o.graph_embedding.value();
  out.graph_logits = o.logits.value();
  return out;
}

Matrix layer_forward(const GnnModel& model, int layer, const Graph& graph, const Matrix& h) {
  Tape tape;
  BoundModel bm = bind(model, tape, false);
  GraphBatch batch = GraphBatch::build(graph);
  return layer_forward(bm, layer, batch, tape.constant(h)).value();
}

Matrix causal_head(const GnnModel& model, const Matrix& selected) {
  Tape tape;
  BoundModel bm = bind(model, tape, false);
  int offsets[2] = {0, static_cast<int>(selected.rows())};
  return causal_head(bm, tape.constant(selected), offsets).value();
}

void save_checkpoint(const GnnModel& model, const std::filesystem::path& path) {
  using nlohmann::ordered_json;
  const GnnConfig& c = model.config();
  ordered_json j;
  j["format"] = "dcsgl-checkpoint-1";
  j["config"] = {{"backbone", backbone_name(c.backbone)},
                 {"num_layers", c.num_layers},
                 {"hidden_dim", c.hidden_dim},
                 {"feature_dim", c.feature_dim},
                 {"num_classes", c.num_classes},
                 {"head_hidden", c.head_hidden},
                 {"task", c.task == Task::GraphCls ? "graph" : "node"}};
  ordered_json params = ordered_json::array();
  for (const auto& p : model.parameters()) {
    std::vector<double> data(p.value.data(), p.value.data() + p.value.size());
    params.push_back({{"name", p.name}, {"rows", p.value.rows()}, {"cols", p.value.cols()}, {"data", data}});
  }
  j["parameters"] = std::move(params);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << j.dump() << '\n';
}

GnnModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    const auto& c = j.at("config");
    GnnConfig cfg;
    cfg.backbone = parse_backbone(c.at("backbone").get<std::string>());
    cfg.num_layers = c.at("num_layers").get<int>();
    cfg.hidden_dim = c.at("hidden_dim").get<int>();
    cfg.feature_dim = c.at("feature_dim").get<int>();
    cfg.num_classes = c.at("num_classes").get<int>();
    cfg.head_hidden = c.at("head_hidden").get<int>();
    cfg.task = c.at("task").get<std::string>() == "node" ? Task::NodeCls : Task::GraphCls;
    GnnModel model(cfg, 0);
    for (const auto& p : j.at("parameters")) {
      Matrix& dst = model.param(p.at("name").get<std::string>());
      auto rows = p.at("rows").get<Eigen::Index>();
      auto cols = p.at("cols").get<Eigen::Index>();
      auto data = p.at("data").get<std::vector<double>>();
      if (rows != dst.rows() || cols != dst.cols() || static_cast<Eigen::Index>(data.size()) != rows * cols)
        throw std::runtime_error("parameter '" + p.at("name").get<std::string>() + "' has the wrong shape");
      dst = Eigen::Map<const Matrix>(data.data(), rows, cols);
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace dcsgl
