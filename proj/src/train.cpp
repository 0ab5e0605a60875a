#include "dcsgl/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dcsgl/rng.hpp"

namespace dcsgl {
namespace {

constexpr int kEvalBatch = 128;

int argmax_row(const Matrix& m, Eigen::Index r) {
  int best = 0;
  for (Eigen::Index c = 1; c < m.cols(); ++c)
    if (m(r, c) > m(r, best)) best = static_cast<int>(c);
  return best;
}

std::vector<int> labels_of(std::span<const Graph* const> graphs, Task task) {
  std::vector<int> y;
  for (const Graph* g : graphs) {
    if (task == Task::GraphCls) {
      y.push_back(g->label);
    } else {
      if (!g->node_labels) throw std::invalid_argument("graph " + std::to_string(g->id) + " is missing node labels");
      y.insert(y.end(), g->node_labels->begin(), g->node_labels->end());
    }
  }
  return y;
}

int correct_count(const Matrix& logits, std::span<const int> labels) {
  int ok = 0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) ok += argmax_row(logits, r) == labels[r];
  return ok;
}

struct CosineAcc {
  double dot = 0.0, aa = 0.0, bb = 0.0;
  void add(const Matrix& targets, const Matrix& logits) {
    Matrix q = softmax(logits);
    dot += targets.cwiseProduct(q).sum();
    aa += targets.squaredNorm();
    bb += q.squaredNorm();
  }
  double value() const { return (aa <= 0.0 || bb <= 0.0) ? 0.0 : dot / std::sqrt(aa * bb); }
};

std::vector<const Graph*> pick(const Dataset& ds, std::span<const int> idx) {
  std::vector<const Graph*> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(&ds.graphs[i]);
  return out;
}

Tensor aux_loss(const BoundModel& bm, const BatchOutput& out, std::span<const Graph* const> graphs, TrainMode mode) {
  if (mode == TrainMode::DcsOnlyD) {
    std::vector<int> marks;
    for (const Graph* g : graphs)
      for (auto j : g->junction) marks.push_back(j ? 1 : 0);
    Tensor logits = ad::add_row(ad::matmul(out.layer_outputs.back(), bm["aux_junction.weight"]), bm["aux_junction.bias"]);
    return ad::cross_entropy(logits, marks);
  }
  std::vector<int> buckets;
  for (const Graph* g : graphs) {
    int count = static_cast<int>(std::count(g->junction.begin(), g->junction.end(), std::uint8_t{1}));
    buckets.push_back(std::min(count, kJunctionCountBuckets - 1));
  }
  Tensor logits = ad::add_row(ad::matmul(out.graph_embedding, bm["aux_count.weight"]), bm["aux_count.bias"]);
  return ad::cross_entropy(logits, buckets);
}

struct Stepper {
  const TrainConfig& cfg;
  std::vector<AdamState> states;

  void apply(GnnModel& model, const BoundModel& bm, double lr) {
    auto& params = model.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
      const Tensor& leaf = bm.leaves[i];
      if (!leaf.tape()->has_grad(leaf.node_id())) continue;
      Matrix g = leaf.grad();
      if (cfg.optimizer == OptimizerKind::Adam) {
        AdamOptions o;
        o.lr = lr;
        adam_step(params[i].value, g, states[i], o);
      } else {
        sgd_step(params[i].value, g, lr);
      }
    }
  }
};

void check_finite(double v, const char* what, int epoch, std::size_t batch) {
  if (!std::isfinite(v))
    throw TrainingError(std::string("non-finite ") + what + " at epoch " + std::to_string(epoch) + ", batch " +
                        std::to_string(batch));
}

// Running sums for the train row of one epoch.
struct EpochAcc {
  double lg = 0.0, lc = 0.0, ld = 0.0;
  long predictions = 0, correct = 0, graphs = 0, aligned = 0;
  CosineAcc cos;
};

void put_opt(std::string& out, const std::optional<double>& v) {
  out += ',';
  if (v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", *v);
    out += buf;
  }
}

}  // namespace

const char* mode_name(TrainMode m) {
  switch (m) {
    case TrainMode::Dcsgl: return "dcsgl";
    case TrainMode::BackboneOnly: return "backbone-only";
    case TrainMode::DcsglT: return "dcsgl-t";
    case TrainMode::DcsglA: return "dcsgl-a";
    case TrainMode::DcsOnlyD: return "dcs-only-d";
    case TrainMode::DcsOnlyL: return "dcs-only-l";
  }
  return "?";
}

TrainMode parse_mode(const std::string& s) {
  for (TrainMode m : {TrainMode::Dcsgl, TrainMode::BackboneOnly, TrainMode::DcsglT, TrainMode::DcsglA,
                      TrainMode::DcsOnlyD, TrainMode::DcsOnlyL})
    if (s == mode_name(m)) return m;
  throw std::invalid_argument("unknown mode '" + s + "'");
}

void validate(const TrainConfig& cfg, const GnnConfig& gnn) {
  validate_config(gnn);
  if (cfg.m < 1 || cfg.m > gnn.num_layers)
    throw std::invalid_argument("m must satisfy 1 <= m <= num_layers (" + std::to_string(gnn.num_layers) + ")");
  if (cfg.lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  if (cfg.K < 0) throw std::invalid_argument("K must be >= 0");
  if (cfg.patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (cfg.epochs < 0 || cfg.max_epochs < cfg.epochs) throw std::invalid_argument("need 0 <= epochs <= max_epochs");
  if (!(cfg.lr > 0.0)) throw std::invalid_argument("lr must be positive");
  if (cfg.replace_fraction < 0.0 || cfg.replace_fraction > 1.0)
    throw std::invalid_argument("replace_fraction must be in [0,1]");
}

int effective_tap(const TrainConfig& cfg, const GnnConfig& gnn) {
  return cfg.mode == TrainMode::DcsglT ? gnn.num_layers : cfg.m;
}

bool uses_alignment(TrainMode mode) {
  return mode == TrainMode::Dcsgl || mode == TrainMode::DcsglT || mode == TrainMode::DcsglA;
}

CausalOracle make_oracle(const TrainConfig& cfg) {
  CausalOracle o;
  o.domain = cfg.domain;
  o.K = cfg.K;
  o.mode = cfg.mode == TrainMode::DcsglA ? InterventionMode::RandomNegative : InterventionMode::Interchange;
  o.seed = derive_seed(cfg.seed, {0x0c});
  o.replace_fraction = cfg.replace_fraction;
  return o;
}

std::vector<std::optional<SelectionPlan>> plan_batch(const CausalOracle& oracle, std::span<const Graph* const> graphs,
                                                     std::uint64_t round) {
  std::vector<std::optional<SelectionPlan>> plans;
  plans.reserve(graphs.size());
  for (const Graph* g : graphs) plans.push_back(make_plan(oracle, *g, round));
  return plans;
}

AlignmentBatch build_alignment_batch(const GraphBatch& batch, std::span<const std::optional<SelectionPlan>> plans) {
  if (static_cast<int>(plans.size()) != batch.num_graphs)
    throw std::invalid_argument("build_alignment_batch: one plan per graph required");
  AlignmentBatch ab;
  std::vector<Target> base_t, iv_t;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    if (!plans[i]) {
      ++ab.skipped;
      continue;
    }
    const int off = batch.node_offsets[i];
    const SelectionPlan& p = *plans[i];
    for (int v : p.base.indices) ab.base_rows.push_back({v + off, false});
    ab.base_offsets.push_back(static_cast<int>(ab.base_rows.size()));
    base_t.push_back(p.base.target);
    for (const auto& iv : p.interventions) {
      for (const auto& r : iv.rows) ab.intervention_rows.push_back({r.index + off, r.detached});
      ab.intervention_offsets.push_back(static_cast<int>(ab.intervention_rows.size()));
      iv_t.push_back(iv.target);
    }
    ++ab.samples;
  }
  ab.base_targets.resize(static_cast<Eigen::Index>(base_t.size()), 2);
  for (std::size_t i = 0; i < base_t.size(); ++i)
    ab.base_targets.row(static_cast<Eigen::Index>(i)) << base_t[i][0], base_t[i][1];
  ab.intervention_targets.resize(static_cast<Eigen::Index>(iv_t.size()), 2);
  for (std::size_t i = 0; i < iv_t.size(); ++i)
    ab.intervention_targets.row(static_cast<Eigen::Index>(i)) << iv_t[i][0], iv_t[i][1];
  return ab;
}

AlignmentLosses alignment_losses(const BoundModel& bm, const Tensor& tapped, const AlignmentBatch& ab, double lambda,
                                 const Matrix* frozen) {
  Tape& tape = *tapped.tape();
  AlignmentLosses out;
  auto zero = [&] { return tape.constant(Matrix::Zero(1, 1)); };
  if (ab.samples > 0) {
    out.base_logits = causal_head(bm, apply_selection(tapped, ab.base_rows, frozen), ab.base_offsets);
    out.lc = ad::kl_categorical(ab.base_targets, out.base_logits);
  } else {
    out.lc = zero();
  }
  if (ab.intervention_targets.rows() > 0) {
    out.intervention_logits =
        causal_head(bm, apply_selection(tapped, ab.intervention_rows, frozen), ab.intervention_offsets);
    out.ld = ad::kl_categorical(ab.intervention_targets, out.intervention_logits);
  } else {
    out.ld = zero();
  }
  out.la = lambda == 0.0 ? out.lc : ad::add(out.lc, ad::scale(out.ld, lambda));
  return out;
}

Tensor label_loss(const BatchOutput& out, std::span<const Graph* const> graphs, Task task) {
  std::vector<int> y = labels_of(graphs, task);
  return ad::cross_entropy(out.logits, y);
}

namespace {

AlignmentLosses value_losses(const GnnModel& model, std::span<const Graph* const> graphs, const CausalOracle& oracle,
                             int m, double lambda, std::uint64_t round, Tape& tape) {
  if (m < 1 || m > model.config().num_layers) throw std::invalid_argument("tap layer out of range");
  BoundModel bm = bind(model, tape, false);
  GraphBatch batch = GraphBatch::build(graphs);
  auto layers = encode(bm, batch, m);
  auto plans = plan_batch(oracle, graphs, round);
  AlignmentBatch ab = build_alignment_batch(batch, plans);
  return alignment_losses(bm, layers.back(), ab, lambda);
}

}  // namespace

double loss_Lc(const GnnModel& model, std::span<const Graph* const> graphs, const CausalOracle& oracle, int m,
               std::uint64_t round) {
  Tape tape;
  return value_losses(model, graphs, oracle, m, 1.0, round, tape).lc.item();
}

double loss_Ld(const GnnModel& model, std::span<const Graph* const> graphs, const CausalOracle& oracle, int m,
               std::uint64_t round) {
  Tape tape;
  return value_losses(model, graphs, oracle, m, 1.0, round, tape).ld.item();
}

double loss_La(const GnnModel& model, std::span<const Graph* const> graphs, const CausalOracle& oracle, int m,
               double lambda, std::uint64_t round) {
  Tape tape;
  return value_losses(model, graphs, oracle, m, lambda, round, tape).la.item();
}

double loss_Lg(const GnnModel& model, std::span<const Graph* const> graphs) {
  Tape tape;
  BoundModel bm = bind(model, tape, false);
  GraphBatch batch = GraphBatch::build(graphs);
  return label_loss(forward(bm, batch), graphs, model.config().task).item();
}

GnnConfig gnn_config_for(const Dataset& ds, GnnConfig base) {
  base.feature_dim = ds.feature_dim;
  base.num_classes = std::max(1, num_classes(ds));
  base.task = ds.task;
  return base;
}

SplitMetrics evaluate_split(const GnnModel& model, const Dataset& ds, SplitName split, const CausalOracle* oracle, int m,
                            double lambda) {
  const auto& idx = ds.split(split);
  if (idx.empty()) throw std::invalid_argument(std::string("split '") + split_name(split) + "' is empty");
  SplitMetrics sm;
  double lg = 0.0, lc = 0.0, ld = 0.0;
  long predictions = 0, correct = 0, aligned = 0;
  CosineAcc cos;
  for (std::size_t start = 0; start < idx.size(); start += kEvalBatch) {
    std::size_t end = std::min(idx.size(), start + kEvalBatch);
    auto graphs = pick(ds, std::span<const int>(idx).subspan(start, end - start));
    Tape tape;
    BoundModel bm = bind(model, tape, false);
    GraphBatch batch = GraphBatch::build(graphs);
    BatchOutput out = forward(bm, batch);
    auto y = labels_of(graphs, model.config().task);
    lg += ad::cross_entropy(out.logits, y).item();
    correct += correct_count(out.logits.value(), y);
    predictions += static_cast<long>(y.size());
    if (oracle) {
      auto plans = plan_batch(*oracle, graphs, 0);
      AlignmentBatch ab = build_alignment_batch(batch, plans);
      AlignmentLosses al = alignment_losses(bm, out.layer_outputs[m - 1], ab, lambda);
      lc += al.lc.item();
      ld += al.ld.item();
      aligned += ab.samples;
      if (ab.samples > 0) cos.add(ab.base_targets, al.base_logits.value());
      if (ab.intervention_targets.rows() > 0) cos.add(ab.intervention_targets, al.intervention_logits.value());
    }
  }
  sm.samples = static_cast<int>(idx.size());
  sm.loss_g = lg / static_cast<double>(predictions);
  sm.accuracy = static_cast<double>(correct) / static_cast<double>(predictions);
  if (oracle && aligned > 0) {
    sm.loss_c = lc / static_cast<double>(aligned);
    sm.loss_d = ld / static_cast<double>(aligned);
    sm.loss_a = *sm.loss_c + lambda * *sm.loss_d;
    sm.alignment_cosine = cos.value();
  }
  return sm;
}

double evaluate(const GnnModel& model, const Dataset& ds, SplitName split) {
  return evaluate_split(model, ds, split).accuracy;
}

double diagnostic_alignment(const GnnModel& model, const Dataset& ds, SplitName split, const CausalOracle& oracle, int m) {
  auto sm = evaluate_split(model, ds, split, &oracle, m);
  if (!sm.alignment_cosine) throw std::invalid_argument("diagnostic_alignment: no sample takes part in the alignment");
  return *sm.alignment_cosine;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine_similarity: length mismatch");
  double dot = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return (aa <= 0.0 || bb <= 0.0) ? 0.0 : dot / std::sqrt(aa * bb);
}

TrainResult train(const TrainConfig& cfg, const Dataset& ds, const GnnConfig& gnn) {
  validate(cfg, gnn);
  if (ds.feature_dim != gnn.feature_dim)
    throw std::invalid_argument("dataset feature dimension " + std::to_string(ds.feature_dim) +
                                " does not match model " + std::to_string(gnn.feature_dim));
  if (ds.task != gnn.task) throw std::invalid_argument("dataset task does not match model task");
  if (ds.splits.train.empty() || ds.splits.val.empty())
    throw std::invalid_argument("training needs nonempty train and val splits");

  TrainResult res{GnnModel(gnn, derive_seed(cfg.seed, {0x1})), {}};
  TrainReport& rep = res.report;
  if (cfg.epochs == 0) return res;

  GnnModel& model = res.model;
  const int tap = effective_tap(cfg, gnn);
  const bool align = uses_alignment(cfg.mode);
  const CausalOracle oracle = make_oracle(cfg);
  const double lr_align = cfg.lr_alignment.value_or(cfg.lr);
  Stepper stepper{cfg, std::vector<AdamState>(model.parameters().size())};

  GnnModel best = model;
  double best_val = -1.0;
  std::vector<int> order = ds.splits.train;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng rng(derive_seed(cfg.seed, {0x5b, static_cast<std::uint64_t>(epoch)}));
    shuffle(order.begin(), order.end(), rng);
    const bool label_steps = cfg.alternation == Alternation::PerBatch || epoch % 2 == 1;
    const bool align_steps = align && (cfg.alternation == Alternation::PerBatch || epoch % 2 == 0);
    EpochAcc acc;

    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size), ++batch_no) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      auto graphs = pick(ds, std::span<const int>(order).subspan(start, end - start));
      GraphBatch batch = GraphBatch::build(graphs);
      acc.graphs += static_cast<long>(graphs.size());

      if (label_steps) {
        Tape tape;
        BoundModel bm = bind(model, tape);
        BatchOutput out = forward(bm, batch);
        auto y = labels_of(graphs, gnn.task);
        Tensor lg = ad::cross_entropy(out.logits, y);
        check_finite(lg.item(), "L_g", epoch, batch_no);
        acc.lg += lg.item();
        acc.correct += correct_count(out.logits.value(), y);
        acc.predictions += static_cast<long>(y.size());
        Tensor objective = lg;
        if (cfg.mode == TrainMode::DcsOnlyD || cfg.mode == TrainMode::DcsOnlyL)
          objective = ad::add(lg, aux_loss(bm, out, graphs, cfg.mode));
        check_finite(objective.item(), "L_g", epoch, batch_no);
        tape.backward(objective);
        stepper.apply(model, bm, cfg.lr);
      }

      if (align_steps) {
        auto plans = plan_batch(oracle, graphs, static_cast<std::uint64_t>(epoch));
        AlignmentBatch ab = build_alignment_batch(batch, plans);
        rep.skipped_samples += static_cast<std::size_t>(ab.skipped);
        for (const auto& p : plans)
          if (p) rep.skipped_interventions += static_cast<std::size_t>(cfg.K) - p->interventions.size();
        if (ab.samples > 0) {
          Tape tape;
          BoundModel bm = bind(model, tape);
          auto layers = encode(bm, batch, tap);
          AlignmentLosses al = alignment_losses(bm, layers.back(), ab, cfg.lambda);
          check_finite(al.la.item(), "L_a", epoch, batch_no);
          acc.lc += al.lc.item();
          acc.ld += al.ld.item();
          acc.aligned += ab.samples;
          acc.cos.add(ab.base_targets, al.base_logits.value());
          if (ab.intervention_targets.rows() > 0) acc.cos.add(ab.intervention_targets, al.intervention_logits.value());
          tape.backward(al.la);
          stepper.apply(model, bm, lr_align);
        }
      }
    }

    MetricRow tr;
    tr.epoch = epoch;
    tr.split = SplitName::Train;
    if (acc.predictions > 0) {
      tr.loss_g = acc.lg / static_cast<double>(acc.predictions);
      tr.accuracy = static_cast<double>(acc.correct) / static_cast<double>(acc.predictions);
    } else {
      tr.loss_g = std::nan("");
    }
    if (acc.aligned > 0) {
      tr.loss_c = acc.lc / static_cast<double>(acc.aligned);
      tr.loss_d = acc.ld / static_cast<double>(acc.aligned);
      tr.loss_a = *tr.loss_c + cfg.lambda * *tr.loss_d;
      tr.alignment_cosine = acc.cos.value();
    }
    rep.rows.push_back(tr);

    SplitMetrics vm = evaluate_split(model, ds, SplitName::Val, align ? &oracle : nullptr, tap, cfg.lambda);
    rep.rows.push_back({epoch, SplitName::Val, vm.loss_g, vm.loss_c, vm.loss_d, vm.loss_a, vm.accuracy,
                        vm.alignment_cosine});
    rep.epochs_run = epoch;
    if (vm.accuracy > best_val) {
      best_val = vm.accuracy;
      best = model;
      rep.best_epoch = epoch;
    }
    if (epoch >= cfg.epochs && epoch - rep.best_epoch >= cfg.patience) break;
  }

  model = std::move(best);
  rep.best_val_accuracy = best_val;
  if (!ds.splits.test.empty()) {
    SplitMetrics tm = evaluate_split(model, ds, SplitName::Test, align ? &oracle : nullptr, tap, cfg.lambda);
    rep.rows.push_back({rep.best_epoch, SplitName::Test, tm.loss_g, tm.loss_c, tm.loss_d, tm.loss_a, tm.accuracy,
                        tm.alignment_cosine});
    rep.test_accuracy = tm.accuracy;
  }
  return res;
}

HeadFit fit_causal_head(GnnModel& model, std::span<const Graph* const> graphs, const CausalOracle& oracle, int m,
                        double lc_target, int max_steps, double lr) {
  GraphBatch batch = GraphBatch::build(graphs);
  Matrix tapped;
  {
    Tape tape;
    BoundModel bm = bind(model, tape, false);
    tapped = encode(bm, batch, m).back().value();
  }
  auto plans = plan_batch(oracle, graphs, 0);
  for (auto& p : plans)
    if (p) p->interventions.clear();
  AlignmentBatch ab = build_alignment_batch(batch, plans);
  if (ab.samples == 0) throw std::invalid_argument("fit_causal_head: no sample takes part in L_c");

  const char* head[] = {"causal.w1", "causal.b1", "causal.w2", "causal.b2"};
  std::vector<AdamState> states(4);
  AdamOptions opt;
  opt.lr = lr;
  HeadFit fit;
  fit.samples = ab.samples;
  for (int step = 0;; ++step) {
    Tape tape;
    BoundModel bm = bind(model, tape);
    AlignmentLosses al = alignment_losses(bm, tape.constant(tapped), ab, 0.0);
    fit.lc = al.lc.item();
    fit.steps = step;
    if (fit.lc < lc_target || step >= max_steps) {
      Matrix q = softmax(al.base_logits.value());
      fit.max_deviation = (q - ab.base_targets).cwiseAbs().maxCoeff();
      break;
    }
    tape.backward(al.lc);
    for (int i = 0; i < 4; ++i) {
      const Tensor& leaf = bm[head[i]];
      adam_step(model.param(head[i]), leaf.grad(), states[i], opt);
    }
  }
  return fit;
}

std::string report_csv(const TrainReport& report) {
  std::string out = "epoch,split,loss_g,loss_c,loss_d,loss_a,accuracy,alignment_cosine\n";
  for (const auto& r : report.rows) {
    out += std::to_string(r.epoch);
    out += ',';
    out += split_name(r.split);
    put_opt(out, r.loss_g);
    put_opt(out, r.loss_c);
    put_opt(out, r.loss_d);
    put_opt(out, r.loss_a);
    put_opt(out, r.accuracy);
    put_opt(out, r.alignment_cosine);
    out += '\n';
  }
  return out;
}

void write_report_csv(const TrainReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << report_csv(report);
}

void write_embeddings_csv(const GnnModel& model, const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "graph_id,split,label";
  for (int k = 0; k < model.config().hidden_dim; ++k) out << ",e" << k;
  out << '\n';
  std::vector<const char*> split_of(ds.graphs.size(), "none");
  for (SplitName s : {SplitName::Train, SplitName::Val, SplitName::Test})
    for (int i : ds.split(s)) split_of[i] = split_name(s);
  char buf[32];
  for (std::size_t start = 0; start < ds.graphs.size(); start += kEvalBatch) {
    std::vector<const Graph*> graphs;
    for (std::size_t i = start; i < std::min(ds.graphs.size(), start + kEvalBatch); ++i) graphs.push_back(&ds.graphs[i]);
    Tape tape;
    BoundModel bm = bind(model, tape, false);
    GraphBatch batch = GraphBatch::build(graphs);
    const Matrix& emb = forward(bm, batch).graph_embedding.value();
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      out << graphs[i]->id << ',' << split_of[start + i] << ',' << graphs[i]->label;
      for (Eigen::Index k = 0; k < emb.cols(); ++k) {
        std::snprintf(buf, sizeof buf, "%.9g", emb(static_cast<Eigen::Index>(i), k));
        out << ',' << buf;
      }
      out << '\n';
    }
  }
}

}  // namespace dcsgl
