#include "dcsgl/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dcsgl {
namespace {

std::string shape(const Tensor& t) {
  return "(" + std::to_string(t.rows()) + "x" + std::to_string(t.cols()) + ")";
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape(a) + " vs " + shape(b));
}

void require_same_tape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.tape() != b.tape()) throw std::invalid_argument(std::string(op) + ": operands live on different tapes");
}

// Row-wise log-softmax, max-subtracted.
Matrix log_softmax(const Matrix& z) {
  Matrix out(z.rows(), z.cols());
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    double mx = z.row(r).maxCoeff();
    double s = (z.row(r).array() - mx).exp().sum();
    out.row(r) = z.row(r).array() - mx - std::log(s);
  }
  return out;
}

}  // namespace

int Tensor::rows() const { return static_cast<int>(value().rows()); }
int Tensor::cols() const { return static_cast<int>(value().cols()); }
const Matrix& Tensor::value() const { return tape_->value(id_); }
Matrix Tensor::grad() const { return tape_->grad(id_); }
bool Tensor::requires_grad() const { return tape_->requires_grad(id_); }
double Tensor::item() const {
  if (rows() != 1 || cols() != 1) throw std::invalid_argument("item: tensor is not 1x1 but " + shape(*this));
  return value()(0, 0);
}

Tensor Tape::leaf(Matrix value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Tensor(this, static_cast<int>(nodes_.size()) - 1);
}

Tensor Tape::record(Matrix value, std::initializer_list<Tensor> parents, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  for (const auto& p : parents) {
    if (p.tape() != this) throw std::invalid_argument("operand recorded on a different tape");
    n.requires_grad = n.requires_grad || p.requires_grad();
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Tensor(this, static_cast<int>(nodes_.size()) - 1);
}

Matrix Tape::grad(int id) const {
  const Node& n = nodes_[id];
  if (n.has_grad) return n.grad;
  return Matrix::Zero(n.value.rows(), n.value.cols());
}

void Tape::accumulate(int id, const Matrix& g) { accumulate_expr(id, g); }

void Tape::accumulate_row(int id, int row, const Eigen::Ref<const Eigen::RowVectorXd>& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (!n.has_grad) {
    n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
    n.has_grad = true;
  }
  n.grad.row(row) += g;
}

void Tape::backward(const Tensor& scalar) {
  if (scalar.tape() != this) throw std::invalid_argument("backward: tensor belongs to another tape");
  if (scalar.rows() != 1 || scalar.cols() != 1)
    throw std::invalid_argument("backward: expected a 1x1 scalar, got " + shape(scalar));
  accumulate(scalar.node_id(), Matrix::Ones(1, 1));
  for (int id = scalar.node_id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.has_grad && n.backward) n.backward(*this, id, n.grad);
  }
}

Matrix softmax(const Matrix& logits) { return log_softmax(logits).array().exp().matrix(); }

namespace ad {

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_same_tape("matmul", a, b);
  if (a.cols() != b.rows())
    throw std::invalid_argument("matmul: shape mismatch " + shape(a) + " * " + shape(b));
  const int ia = a.node_id(), ib = b.node_id();
  Matrix out = a.value() * b.value();
  return a.tape()->record(std::move(out), {a, b}, [ia, ib](Tape& t, int, const Matrix& g) {
    if (t.requires_grad(ia)) t.accumulate(ia, g * t.value(ib).transpose());
    if (t.requires_grad(ib)) t.accumulate(ib, t.value(ia).transpose() * g);
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_tape("add", a, b);
  require_same_shape("add", a, b);
  const int ia = a.node_id(), ib = b.node_id();
  return a.tape()->record(a.value() + b.value(), {a, b}, [ia, ib](Tape& t, int, const Matrix& g) {
    t.accumulate(ia, g);
    t.accumulate(ib, g);
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_tape("sub", a, b);
  require_same_shape("sub", a, b);
  const int ia = a.node_id(), ib = b.node_id();
  return a.tape()->record(a.value() - b.value(), {a, b}, [ia, ib](Tape& t, int, const Matrix& g) {
    t.accumulate(ia, g);
    t.accumulate_expr(ib, -g);
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_tape("mul", a, b);
  require_same_shape("mul", a, b);
  const int ia = a.node_id(), ib = b.node_id();
  Matrix out = a.value().cwiseProduct(b.value());
  return a.tape()->record(std::move(out), {a, b}, [ia, ib](Tape& t, int, const Matrix& g) {
    if (t.requires_grad(ia)) t.accumulate_expr(ia, g.cwiseProduct(t.value(ib)));
    if (t.requires_grad(ib)) t.accumulate_expr(ib, g.cwiseProduct(t.value(ia)));
  });
}

Tensor scale(const Tensor& a, double s) {
  const int ia = a.node_id();
  return a.tape()->record(a.value() * s, {a}, [ia, s](Tape& t, int, const Matrix& g) { t.accumulate_expr(ia, g * s); });
}

Tensor add_row(const Tensor& a, const Tensor& bias) {
  require_same_tape("add_row", a, bias);
  if (bias.rows() != 1 || bias.cols() != a.cols())
    throw std::invalid_argument("add_row: shape mismatch " + shape(a) + " + " + shape(bias));
  const int ia = a.node_id(), ib = bias.node_id();
  Matrix out = a.value().rowwise() + bias.value().row(0);
  return a.tape()->record(std::move(out), {a, bias}, [ia, ib](Tape& t, int, const Matrix& g) {
    t.accumulate(ia, g);
    if (t.requires_grad(ib)) t.accumulate_expr(ib, g.colwise().sum());
  });
}

Tensor scale_rows(const Tensor& a, std::span<const double> s) {
  if (static_cast<int>(s.size()) != a.rows())
    throw std::invalid_argument("scale_rows: " + std::to_string(s.size()) + " scales for " + shape(a));
  Eigen::VectorXd sv = Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
  const int ia = a.node_id();
  Matrix out = sv.asDiagonal() * a.value();
  return a.tape()->record(std::move(out), {a}, [ia, sv](Tape& t, int, const Matrix& g) {
    t.accumulate_expr(ia, sv.asDiagonal() * g);
  });
}

Tensor relu(const Tensor& a) {
  const int ia = a.node_id();
  Matrix out = a.value().cwiseMax(0.0);
  return a.tape()->record(std::move(out), {a}, [ia](Tape& t, int, const Matrix& g) {
    // Gradient at exactly 0 is 0.
    t.accumulate_expr(ia, (t.value(ia).array() > 0.0).select(g, 0.0));
  });
}

Tensor softmax_rows(const Tensor& a) {
  for (Eigen::Index i = 0; i < a.value().size(); ++i)
    if (!std::isfinite(a.value().data()[i])) throw std::invalid_argument("softmax_rows: non-finite input");
  const int ia = a.node_id();
  return a.tape()->record(softmax(a.value()), {a}, [ia](Tape& t, int self, const Matrix& g) {
    const Matrix& s = t.value(self);
    Eigen::VectorXd dot = g.cwiseProduct(s).rowwise().sum();
    t.accumulate_expr(ia, s.cwiseProduct(g - dot.replicate(1, g.cols())));
  });
}

Tensor log_rows(const Tensor& a) {
  const int ia = a.node_id();
  Matrix out = a.value().cwiseMax(kProbClamp).array().log().matrix();
  return a.tape()->record(std::move(out), {a}, [ia](Tape& t, int, const Matrix& g) {
    const Matrix& x = t.value(ia);
    t.accumulate_expr(ia, (x.array() > kProbClamp).select(g.array() / x.array(), 0.0).matrix());
  });
}

Tensor mean_rows(const Tensor& a) {
  if (a.rows() == 0) throw std::invalid_argument("empty pool");
  const int ia = a.node_id();
  const double n = a.rows();
  Matrix out = a.value().colwise().mean();
  return a.tape()->record(std::move(out), {a}, [ia, n](Tape& t, int, const Matrix& g) {
    t.accumulate_expr(ia, (g / n).replicate(static_cast<Eigen::Index>(n), 1));
  });
}

Tensor sum(const Tensor& a) {
  const int ia = a.node_id();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape()->record(std::move(out), {a}, [ia](Tape& t, int, const Matrix& g) {
    const Matrix& x = t.value(ia);
    t.accumulate_expr(ia, Matrix::Constant(x.rows(), x.cols(), g(0, 0)));
  });
}

Tensor gather_rows(const Tensor& a, std::span<const int> idx) {
  std::vector<RowSource> recipe;
  recipe.reserve(idx.size());
  for (int i : idx) recipe.push_back({i, false});
  return select_rows(a, recipe);
}

Tensor select_rows(const Tensor& a, std::span<const RowSource> recipe, const Matrix* frozen) {
  const Matrix& src = a.value();
  if (frozen && (frozen->rows() != src.rows() || frozen->cols() != src.cols()))
    throw std::invalid_argument("select_rows: frozen source shape differs from input");
  Matrix out(static_cast<Eigen::Index>(recipe.size()), src.cols());
  for (std::size_t r = 0; r < recipe.size(); ++r) {
    const RowSource& rs = recipe[r];
    if (rs.index < 0 || rs.index >= src.rows())
      throw std::out_of_range("select_rows: row index " + std::to_string(rs.index) + " out of range for " + shape(a));
    out.row(static_cast<Eigen::Index>(r)) = (rs.detached && frozen) ? frozen->row(rs.index) : src.row(rs.index);
  }
  const int ia = a.node_id();
  std::vector<RowSource> saved(recipe.begin(), recipe.end());
  return a.tape()->record(std::move(out), {a}, [ia, saved = std::move(saved)](Tape& t, int, const Matrix& g) {
    for (std::size_t r = 0; r < saved.size(); ++r)
      if (!saved[r].detached) t.accumulate_row(ia, saved[r].index, g.row(static_cast<Eigen::Index>(r)));
  });
}

Tensor segment_mean(const Tensor& a, std::span<const int> offsets) {
  if (offsets.size() < 1 || offsets.front() != 0 || offsets.back() != a.rows())
    throw std::invalid_argument("segment_mean: offsets must start at 0 and end at " + std::to_string(a.rows()));
  const std::size_t segs = offsets.size() - 1;
  Matrix out(static_cast<Eigen::Index>(segs), a.cols());
  for (std::size_t s = 0; s < segs; ++s) {
    int lo = offsets[s], hi = offsets[s + 1];
    if (hi <= lo) throw std::invalid_argument("empty pool");
    out.row(static_cast<Eigen::Index>(s)) = a.value().middleRows(lo, hi - lo).colwise().mean();
  }
  const int ia = a.node_id();
  std::vector<int> off(offsets.begin(), offsets.end());
  return a.tape()->record(std::move(out), {a}, [ia, off = std::move(off)](Tape& t, int, const Matrix& g) {
    const Matrix& x = t.value(ia);
    Matrix gin(x.rows(), x.cols());
    for (std::size_t s = 0; s + 1 < off.size(); ++s) {
      int lo = off[s], hi = off[s + 1];
      gin.middleRows(lo, hi - lo) = (g.row(static_cast<Eigen::Index>(s)) / double(hi - lo)).replicate(hi - lo, 1);
    }
    t.accumulate(ia, gin);
  });
}

Tensor spmm(std::shared_ptr<const SparseOperator> op, const Tensor& a) {
  if (op->forward.cols() != a.rows())
    throw std::invalid_argument("spmm: operator (" + std::to_string(op->forward.rows()) + "x" +
                                std::to_string(op->forward.cols()) + ") incompatible with " + shape(a));
  const int ia = a.node_id();
  Matrix out = op->forward * a.value();
  return a.tape()->record(std::move(out), {a}, [ia, op = std::move(op)](Tape& t, int, const Matrix& g) {
    t.accumulate_expr(ia, op->transpose * g);
  });
}

Tensor kl_categorical(const Matrix& p, const Tensor& q_logits) {
  if (p.rows() != q_logits.rows() || p.cols() != q_logits.cols())
    throw std::invalid_argument("kl_categorical: target shape (" + std::to_string(p.rows()) + "x" +
                                std::to_string(p.cols()) + ") vs logits " + shape(q_logits));
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    if ((p.row(r).array() < 0.0).any() || std::abs(p.row(r).sum() - 1.0) > 1e-9)
      throw std::invalid_argument("kl_categorical: p is not a probability distribution");
  }
  const double log_clamp = std::log(kProbClamp);
  Matrix logq = log_softmax(q_logits.value());
  double total = 0.0;
  for (Eigen::Index r = 0; r < p.rows(); ++r)
    for (Eigen::Index c = 0; c < p.cols(); ++c)
      if (p(r, c) > 0.0) total += p(r, c) * (std::log(p(r, c)) - std::max(logq(r, c), log_clamp));
  Matrix out(1, 1);
  out(0, 0) = total;
  const int iq = q_logits.node_id();
  return q_logits.tape()->record(std::move(out), {q_logits}, [iq, p, logq, log_clamp](Tape& t, int, const Matrix& g) {
    Matrix gin(p.rows(), p.cols());
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      double live_mass = 0.0;
      for (Eigen::Index c = 0; c < p.cols(); ++c)
        if (logq(r, c) >= log_clamp) live_mass += p(r, c);
      for (Eigen::Index c = 0; c < p.cols(); ++c) {
        double q = std::exp(logq(r, c));
        double pc = logq(r, c) >= log_clamp ? p(r, c) : 0.0;
        gin(r, c) = g(0, 0) * (q * live_mass - pc);
      }
    }
    t.accumulate(iq, gin);
  });
}

Tensor kl_categorical(std::span<const double> p, const Tensor& q_logits) {
  Matrix pm = Eigen::Map<const Matrix>(p.data(), 1, static_cast<Eigen::Index>(p.size()));
  return kl_categorical(pm, q_logits);
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> labels) {
  if (static_cast<int>(labels.size()) != logits.rows())
    throw std::invalid_argument("cross_entropy: " + std::to_string(labels.size()) + " labels for logits " + shape(logits));
  for (int y : labels)
    if (y < 0 || y >= logits.cols())
      throw std::invalid_argument("cross_entropy: label " + std::to_string(y) + " out of range for " +
                                  std::to_string(logits.cols()) + " classes");
  Matrix logp = log_softmax(logits.value());
  double total = 0.0;
  for (std::size_t r = 0; r < labels.size(); ++r) total -= logp(static_cast<Eigen::Index>(r), labels[r]);
  Matrix out(1, 1);
  out(0, 0) = total;
  const int il = logits.node_id();
  std::vector<int> y(labels.begin(), labels.end());
  return logits.tape()->record(std::move(out), {logits}, [il, logp, y = std::move(y)](Tape& t, int, const Matrix& g) {
    Matrix gin = logp.array().exp().matrix();
    for (std::size_t r = 0; r < y.size(); ++r) gin(static_cast<Eigen::Index>(r), y[r]) -= 1.0;
    t.accumulate_expr(il, gin * g(0, 0));
  });
}

Tensor cross_entropy(const Tensor& logits, int label) {
  if (logits.rows() != 1) throw std::invalid_argument("cross_entropy: expected a single row of logits, got " + shape(logits));
  int y[1] = {label};
  return cross_entropy(logits, std::span<const int>(y, 1));
}

}  // namespace ad
}  // namespace dcsgl
