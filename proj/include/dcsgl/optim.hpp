#pragma once

#include <cstdint>

#include "dcsgl/tensor.hpp"

namespace dcsgl {

enum class OptimizerKind { Adam, Sgd };

struct AdamState {
  Matrix m;
  Matrix v;
  std::int64_t step = 0;
};

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update of `param` in place. The state is lazily
/// sized on first use.
void adam_step(Matrix& param, const Matrix& grad, AdamState& state, const AdamOptions& opt);

void sgd_step(Matrix& param, const Matrix& grad, double lr);

}  // namespace dcsgl
