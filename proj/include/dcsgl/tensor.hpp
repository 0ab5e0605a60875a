#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace dcsgl {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; the Tape owns the data.
class Tensor {
 public:
  Tensor() = default;

  int rows() const;
  int cols() const;
  const Matrix& value() const;
  /// Gradient accumulated by the last backward pass (zeros if none reached this node).
  Matrix grad() const;
  bool requires_grad() const;
  int node_id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }
  /// Value of a 1x1 tensor.
  double item() const;

 private:
  friend class Tape;
  Tensor(Tape* tape, int id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Linear record of primitive applications. Nodes are appended in creation
/// order, which is a topological order of the computation; backward walks
/// it once in reverse.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int self, const Matrix& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Tensor leaf(Matrix value, bool requires_grad = true);
  Tensor constant(Matrix value) { return leaf(std::move(value), false); }

  /// Reverse sweep from a 1x1 tensor; gradients accumulate on every node that
  /// requires them.
  void backward(const Tensor& scalar);

  const Matrix& value(int id) const { return nodes_[id].value; }
  Matrix grad(int id) const;
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  bool has_grad(int id) const { return nodes_[id].has_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Used by primitives.
  Tensor record(Matrix value, std::initializer_list<Tensor> parents, BackwardFn backward);
  void accumulate(int id, const Matrix& g);
  template <class Expr>
  void accumulate_expr(int id, const Expr& g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (!n.has_grad) {
      n.grad = g;
      n.has_grad = true;
    } else {
      n.grad += g;
    }
  }
  // Scatter-add of a row into a node's gradient.
  void accumulate_row(int id, int row, const Eigen::Ref<const Eigen::RowVectorXd>& g);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    bool has_grad = false;
    BackwardFn backward;
  };
  Node& node(int id) { return nodes_[id]; }
  std::vector<Node> nodes_;
};

/// Precomputed sparse linear operator (and its transpose) applied on the left.
struct SparseOperator {
  SparseMatrix forward;
  SparseMatrix transpose;
  explicit SparseOperator(SparseMatrix m) : forward(std::move(m)), transpose(forward.transpose()) {}
};

/// One selected row: either a differentiable copy of a source row or a
/// detached copy treated as a constant.
struct RowSource {
  int index = 0;
  bool detached = false;
  friend bool operator==(const RowSource&, const RowSource&) = default;
};

inline constexpr double kProbClamp = 1e-12;

namespace ad {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
/// a + 1_n * bias for a 1 x cols bias row.
Tensor add_row(const Tensor& a, const Tensor& bias);
/// diag(s) * a for a constant per-row scale.
Tensor scale_rows(const Tensor& a, std::span<const double> s);
Tensor relu(const Tensor& a);
Tensor softmax_rows(const Tensor& a);
/// Elementwise log with inputs clamped at kProbClamp.
Tensor log_rows(const Tensor& a);
/// Columnwise mean, 1 x cols. Throws "empty pool" on a 0-row input.
Tensor mean_rows(const Tensor& a);
Tensor sum(const Tensor& a);
Tensor gather_rows(const Tensor& a, std::span<const int> idx);
/// Gathers rows per recipe. Detached rows are copied from `frozen` when given,
/// else from the current value of `a`, and receive no gradient.
Tensor select_rows(const Tensor& a, std::span<const RowSource> recipe, const Matrix* frozen = nullptr);
/// Mean of consecutive row segments [offsets[s], offsets[s+1]); one output row per segment.
Tensor segment_mean(const Tensor& a, std::span<const int> offsets);
Tensor spmm(std::shared_ptr<const SparseOperator> op, const Tensor& a);

/// Sum over rows of KL(p_row || softmax(logits_row)), 0 log 0 := 0, q clamped at kProbClamp.
Tensor kl_categorical(const Matrix& p, const Tensor& q_logits);
Tensor kl_categorical(std::span<const double> p, const Tensor& q_logits);
/// Sum over rows of -log softmax(logits_row)[label_row].
Tensor cross_entropy(const Tensor& logits, std::span<const int> labels);
Tensor cross_entropy(const Tensor& logits, int label);

}  // namespace ad

/// Row-wise softmax of a plain matrix (max-subtracted).
Matrix softmax(const Matrix& logits);

}  // namespace dcsgl
