#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcsgl/gnn.hpp"
#include "dcsgl/graph.hpp"
#include "dcsgl/optim.hpp"
#include "dcsgl/oracle.hpp"

namespace dcsgl {

enum class TrainMode { Dcsgl, BackboneOnly, DcsglT, DcsglA, DcsOnlyD, DcsOnlyL };
enum class Alternation { PerBatch, PerEpoch };

const char* mode_name(TrainMode m);
TrainMode parse_mode(const std::string& s);

struct TrainConfig {
  int m = 2;  // tap layer, 1-based
  int K = 3;
  double lambda = 1.0;
  double lr = 1e-3;
  std::optional<double> lr_alignment;  // defaults to lr
  OptimizerKind optimizer = OptimizerKind::Adam;
  int epochs = 200;
  int max_epochs = 400;
  int patience = 5;
  int batch_size = 32;
  TrainMode mode = TrainMode::Dcsgl;
  std::uint64_t seed = 0;
  Alternation alternation = Alternation::PerBatch;
  OracleDomain domain = OracleDomain::Junction;
  double replace_fraction = 0.5;
};

void validate(const TrainConfig& cfg, const GnnConfig& gnn);

/// Tap layer actually used for a mode (DCSGL-T taps the last layer).
int effective_tap(const TrainConfig& cfg, const GnnConfig& gnn);
bool uses_alignment(TrainMode mode);
CausalOracle make_oracle(const TrainConfig& cfg);

struct MetricRow {
  int epoch = 0;
  SplitName split = SplitName::Train;
  double loss_g = 0.0;
  std::optional<double> loss_c, loss_d, loss_a;
  double accuracy = 0.0;
  std::optional<double> alignment_cosine;
};

struct TrainReport {
  std::vector<MetricRow> rows;
  int best_epoch = 0;
  double best_val_accuracy = 0.0;
  std::optional<double> test_accuracy;
  int epochs_run = 0;
  std::size_t skipped_samples = 0;
  std::size_t skipped_interventions = 0;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- batched loss machinery -------------------------------------------------

/// Selections of one batch in batch-global row indices. Segment s of the base
/// rows belongs to the s-th non-skipped sample.
struct AlignmentBatch {
  std::vector<RowSource> base_rows;
  std::vector<int> base_offsets{0};
  Matrix base_targets;
  std::vector<RowSource> intervention_rows;
  std::vector<int> intervention_offsets{0};
  Matrix intervention_targets;
  int samples = 0;
  int skipped = 0;
};

std::vector<std::optional<SelectionPlan>> plan_batch(const CausalOracle& oracle, std::span<const Graph* const> graphs,
                                                     std::uint64_t round);
AlignmentBatch build_alignment_batch(const GraphBatch& batch, std::span<const std::optional<SelectionPlan>> plans);

struct AlignmentLosses {
  Tensor lc;
  Tensor ld;
  Tensor la;
  Tensor base_logits;          // one row per non-skipped sample
  Tensor intervention_logits;  // one row per intervention (invalid if none)
};

/// L_c, L_d and L_a = L_c + lambda * L_d on tapped layer features. `frozen`
/// pins the source of substituted rows (finite-difference checks).
AlignmentLosses alignment_losses(const BoundModel& bm, const Tensor& tapped, const AlignmentBatch& ab, double lambda,
                                 const Matrix* frozen = nullptr);

/// Summed cross entropy of graph (or node) labels.
Tensor label_loss(const BatchOutput& out, std::span<const Graph* const> graphs, Task task);

// ---- value-level entry points ---------------------------------------------

double loss_Lc(const GnnModel& model, std::span<const Graph* const> graphs, const CausalOracle& oracle, int m,
               std::uint64_t round = 0);
double loss_Ld(const GnnModel& model, std::span<const Graph* const> graphs, const CausalOracle& oracle, int m,
               std::uint64_t round = 0);
double loss_La(const GnnModel& model, std::span<const Graph* const> graphs, const CausalOracle& oracle, int m,
               double lambda, std::uint64_t round = 0);
double loss_Lg(const GnnModel& model, std::span<const Graph* const> graphs);

struct TrainResult {
  GnnModel model;
  TrainReport report;
};

TrainResult train(const TrainConfig& cfg, const Dataset& dataset, const GnnConfig& gnn);

/// Model config matching a dataset's feature dimension, class count and task.
GnnConfig gnn_config_for(const Dataset& ds, GnnConfig base = {});

struct SplitMetrics {
  double loss_g = 0.0;  // per sample
  double accuracy = 0.0;
  std::optional<double> loss_c, loss_d, loss_a;  // per non-skipped sample
  std::optional<double> alignment_cosine;
  int samples = 0;
};

/// Evaluates a split; alignment terms are filled when `oracle` is given.
SplitMetrics evaluate_split(const GnnModel& model, const Dataset& ds, SplitName split, const CausalOracle* oracle = nullptr,
                            int m = 2, double lambda = 1.0);

/// Fraction of argmax-correct predictions; ties go to the lowest class index.
double evaluate(const GnnModel& model, const Dataset& ds, SplitName split);

/// Cosine similarity between concatenated oracle targets and head softmax
/// outputs over a split (0 when either vector is zero).
double diagnostic_alignment(const GnnModel& model, const Dataset& ds, SplitName split, const CausalOracle& oracle, int m);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Trains only the causal head on frozen layer-m features with L_c until it
/// drops below `lc_target`.
struct HeadFit {
  double lc = 0.0;
  int steps = 0;
  double max_deviation = 0.0;  // max-norm distance of head softmax from target
  int samples = 0;
};
HeadFit fit_causal_head(GnnModel& model, std::span<const Graph* const> graphs, const CausalOracle& oracle, int m,
                        double lc_target, int max_steps, double lr);

// ---- outputs ---------------------------------------------------------------

std::string report_csv(const TrainReport& report);
void write_report_csv(const TrainReport& report, const std::filesystem::path& path);
std::string render_curves_svg(const TrainReport& report);
void write_embeddings_csv(const GnnModel& model, const Dataset& ds, const std::filesystem::path& path);

}  // namespace dcsgl
