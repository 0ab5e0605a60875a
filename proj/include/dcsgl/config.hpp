#pragma once

#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcsgl/gnn.hpp"
#include "dcsgl/synth.hpp"
#include "dcsgl/train.hpp"

namespace dcsgl {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Every generator, training and model setting under a dotted key:
///   gen.family gen.count gen.bias gen.task gen.base_min gen.base_max gen.feature_dim gen.seed
///   train.m train.K train.lambda train.lr train.lr_alignment train.optimizer train.epochs
///   train.max_epochs train.patience train.batch_size train.mode train.seed train.alternation
///   train.domain train.replace_fraction
///   model.backbone model.num_layers model.hidden_dim model.head_hidden
/// model.feature_dim, model.num_classes and model.task always follow the dataset.
struct RunConfig {
  GenSpec gen;
  TrainConfig train;
  GnnConfig model;

  /// Throws ConfigError for unknown keys and unparsable values.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;

  static const std::vector<std::string>& keys();
};

/// `key = value` lines; '#' starts a comment; blank lines are ignored.
/// Errors carry the line number.
void apply_config(RunConfig& cfg, std::istream& in);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// All keys in declaration order, one `key = value` per line.
std::string resolved_config(const RunConfig& cfg);

const char* task_name(Task t);
Task parse_task(const std::string& s);
const char* optimizer_name(OptimizerKind k);
OptimizerKind parse_optimizer(const std::string& s);
const char* alternation_name(Alternation a);
Alternation parse_alternation(const std::string& s);
const char* domain_name(OracleDomain d);
OracleDomain parse_domain(const std::string& s);

/// Shortest round-trip text for a double.
std::string format_double(double v);

}  // namespace dcsgl
