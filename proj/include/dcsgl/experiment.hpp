#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dcsgl/gnn.hpp"
#include "dcsgl/synth.hpp"
#include "dcsgl/train.hpp"

namespace dcsgl {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1); 0 for a single value
};

MeanStd mean_std(const std::vector<double>& xs);

/// Grid of (dataset bias x training mode) runs over seeds 1..seeds. One
/// dataset is generated per bias with gen.seed; seeds only change training.
struct ReproduceOptions {
  GenSpec gen;
  std::vector<std::optional<double>> biases{0.9};
  std::vector<TrainMode> modes{TrainMode::BackboneOnly, TrainMode::Dcsgl, TrainMode::DcsglT, TrainMode::DcsglA};
  int seeds = 5;
  TrainConfig train;
  GnnConfig model;
};

struct ReproduceCell {
  std::optional<double> bias;
  TrainMode mode = TrainMode::Dcsgl;
  std::vector<std::uint64_t> seeds;
  std::vector<double> test_accuracy;
  std::vector<TrainReport> reports;
  double seconds = 0.0;
  MeanStd summary() const { return mean_std(test_accuracy); }
};

struct ReproduceResult {
  std::vector<ReproduceCell> cells;
  const ReproduceCell* find(std::optional<double> bias, TrainMode mode) const;
};

using ProgressFn = std::function<void(const std::string&)>;

ReproduceResult reproduce(const ReproduceOptions& opt, const ProgressFn& progress = {});

/// `bias,mode,seeds,mean_accuracy,std_accuracy,runs`; accuracies in percent,
/// runs joined with ';'.
std::string reproduce_csv(const ReproduceResult& r);

/// Fixed-width table, one row per mode, one column per bias, "mean±std".
std::string reproduce_table(const ReproduceResult& r);

std::string bias_label(std::optional<double> bias);

}  // namespace dcsgl
