#include "dcsgl/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace dcsgl {

void adam_step(Matrix& param, const Matrix& grad, AdamState& state, const AdamOptions& opt) {
  if (grad.rows() != param.rows() || grad.cols() != param.cols())
    throw std::invalid_argument("adam_step: gradient shape differs from parameter shape");
  if (state.step == 0) {
    state.m = Matrix::Zero(param.rows(), param.cols());
    state.v = Matrix::Zero(param.rows(), param.cols());
  } else if (state.m.rows() != param.rows() || state.m.cols() != param.cols()) {
    throw std::invalid_argument("adam_step: optimizer state shape differs from parameter shape");
  }
  ++state.step;
  state.m = opt.beta1 * state.m + (1.0 - opt.beta1) * grad;
  state.v = opt.beta2 * state.v + (1.0 - opt.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(state.step));
  param.array() -= opt.lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + opt.eps);
}

void sgd_step(Matrix& param, const Matrix& grad, double lr) {
  if (grad.rows() != param.rows() || grad.cols() != param.cols())
    throw std::invalid_argument("sgd_step: gradient shape differs from parameter shape");
  param -= lr * grad;
}

}  // namespace dcsgl
