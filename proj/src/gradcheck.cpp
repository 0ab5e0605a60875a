#include "dcsgl/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "dcsgl/gnn.hpp"
#include "dcsgl/oracle.hpp"
#include "dcsgl/rng.hpp"
#include "dcsgl/synth.hpp"
#include "dcsgl/train.hpp"

namespace dcsgl {
namespace {

Matrix random_matrix(Rng& rng, int r, int c, double lo = -1.0, double hi = 1.0) {
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = uniform(rng, lo, hi);
  return m;
}

// keeps entries clear of the relu kink
Matrix away_from_zero(Matrix m) {
  for (auto& v : m.reshaped()) v = v >= 0 ? v + 0.1 : v - 0.1;
  return m;
}

// scalar probe <out, w> so every output entry carries a distinct weight
Tensor probe(Tape& t, const Tensor& out, const Matrix& w) { return ad::sum(ad::mul(out, t.constant(w))); }

}  // namespace

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-3});
}

GradCheckEntry check_gradients(const std::string& name, const ScalarFn& f, const std::vector<Matrix>& inputs,
                               double eps) {
  GradCheckEntry e{name, 0, 0.0};
  std::vector<Matrix> analytic;
  {
    Tape tape;
    std::vector<Tensor> leaves;
    for (const auto& m : inputs) leaves.push_back(tape.leaf(m));
    tape.backward(f(tape, leaves));
    for (const auto& l : leaves) analytic.push_back(l.grad());
  }
  auto eval = [&](const std::vector<Matrix>& in) {
    Tape tape;
    std::vector<Tensor> leaves;
    for (const auto& m : in) leaves.push_back(tape.leaf(m, false));
    return f(tape, leaves).item();
  };
  std::vector<Matrix> work = inputs;
  for (std::size_t k = 0; k < work.size(); ++k)
    for (Eigen::Index i = 0; i < work[k].size(); ++i) {
      double& x = work[k].data()[i];
      const double x0 = x;
      x = x0 + eps;
      const double up = eval(work);
      x = x0 - eps;
      const double down = eval(work);
      x = x0;
      const double numeric = (up - down) / (2.0 * eps);
      e.max_rel_error = std::max(e.max_rel_error, relative_error(analytic[k].data()[i], numeric));
      ++e.checked;
    }
  return e;
}

double GradCheckReport::max_rel_error() const {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, e.max_rel_error);
  return m;
}

Graph gradcheck_graph(std::uint64_t seed, int feature_dim) {
  Rng rng(derive_seed(seed, {0x9c}));
  Graph g;
  g.id = 0;
  g.num_nodes = 5;
  g.feature_dim = feature_dim;
  g.edges = {{0, 1}, {0, 2}, {1, 2}, {2, 3}, {3, 4}};
  g.roles = {kBaseRole, kBaseRole, kBaseRole, 1, 1};
  g.label = 1;
  for (int i = 0; i < g.num_nodes * feature_dim; ++i) g.features.push_back(static_cast<float>(uniform01(rng)));
  g.junction = annotate_junctions(g);
  return g;
}

GradCheckReport run_gradcheck(std::uint64_t seed, double eps) {
  Rng rng(derive_seed(seed, {0x6c}));
  GradCheckReport rep;
  auto add = [&](const std::string& name, const ScalarFn& f, const std::vector<Matrix>& in) {
    rep.entries.push_back(check_gradients(name, f, in, eps));
  };

  const Matrix w34 = random_matrix(rng, 3, 4), w35 = random_matrix(rng, 3, 5), w14 = random_matrix(rng, 1, 4);
  const Matrix w24 = random_matrix(rng, 2, 4), w44 = random_matrix(rng, 4, 4);

  add("matmul", [&](Tape& t, const std::vector<Tensor>& x) { return probe(t, ad::matmul(x[0], x[1]), w35); },
      {random_matrix(rng, 3, 4), random_matrix(rng, 4, 5)});
  add("add", [&](Tape& t, const std::vector<Tensor>& x) { return probe(t, ad::add(x[0], x[1]), w34); },
      {random_matrix(rng, 3, 4), random_matrix(rng, 3, 4)});
  add("sub", [&](Tape& t, const std::vector<Tensor>& x) { return probe(t, ad::sub(x[0], x[1]), w34); },
      {random_matrix(rng, 3, 4), random_matrix(rng, 3, 4)});
  add("mul", [&](Tape& t, const std::vector<Tensor>& x) { return probe(t, ad::mul(x[0], x[1]), w34); },
      {random_matrix(rng, 3, 4), random_matrix(rng, 3, 4)});
  add("scale", [&](Tape& t, const std::vector<Tensor>& x) { return probe(t, ad::scale(x[0], -1.7), w34); },
      {random_matrix(rng, 3, 4)});
  add("add_row", [&](Tape& t, const std::vector<Tensor>& x) { return probe(t, ad::add_row(x[0], x[1]), w34); },
      {random_matrix(rng, 3, 4), random_matrix(rng, 1, 4)});
  const std::vector<double> row_scale{2.0, 0.0, 3.5};
  add("scale_rows", [&](Tape& t, const std::vector<Tensor>& x) { return probe(t, ad::scale_rows(x[0], row_scale), w34); },
      {random_matrix(rng, 3, 4)});
  add("relu", [&](Tape& t, const std::vector<Tensor>& x) { return probe(t, ad::relu(x[0]), w34); },
      {away_from_zero(random_matrix(rng, 3, 4))});
  add("softmax_rows", [&](Tape& t, const std::vector<Tensor>& x) { return probe(t, ad::softmax_rows(x[0]), w34); },
      {random_matrix(rng, 3, 4, -3.0, 3.0)});
  add("log_rows", [&](Tape& t, const std::vector<Tensor>& x) { return probe(t, ad::log_rows(x[0]), w34); },
      {random_matrix(rng, 3, 4, 0.1, 1.0)});
  add("mean_rows", [&](Tape& t, const std::vector<Tensor>& x) { return probe(t, ad::mean_rows(x[0]), w14); },
      {random_matrix(rng, 3, 4)});
  add("sum", [&](Tape&, const std::vector<Tensor>& x) { return ad::sum(x[0]); }, {random_matrix(rng, 3, 4)});
  const std::vector<int> gather_idx{2, 0, 2, 1};
  add("gather_rows", [&](Tape& t, const std::vector<Tensor>& x) { return probe(t, ad::gather_rows(x[0], gather_idx), w44); },
      {random_matrix(rng, 3, 4)});
  const Matrix select_src = random_matrix(rng, 3, 4);
  const std::vector<RowSource> recipe{{1, false}, {0, true}, {2, false}, {1, false}};
  add("select_rows",
      [&](Tape& t, const std::vector<Tensor>& x) { return probe(t, ad::select_rows(x[0], recipe, &select_src), w44); },
      {select_src});
  const std::vector<int> offsets{0, 2, 5};
  add("segment_mean",
      [&](Tape& t, const std::vector<Tensor>& x) { return probe(t, ad::segment_mean(x[0], offsets), w24); },
      {random_matrix(rng, 5, 4)});
  {
    SparseMatrix s(3, 3);
    s.insert(0, 1) = 1.0;
    s.insert(1, 0) = 0.5;
    s.insert(1, 2) = 2.0;
    s.insert(2, 2) = -1.0;
    s.makeCompressed();
    auto op = std::make_shared<const SparseOperator>(s);
    add("spmm", [&, op](Tape& t, const std::vector<Tensor>& x) { return probe(t, ad::spmm(op, x[0]), w34); },
        {random_matrix(rng, 3, 4)});
  }
  Matrix p(3, 2);
  p << 1.0, 0.0, 0.5, 0.5, 0.2, 0.8;
  add("kl_categorical", [&](Tape&, const std::vector<Tensor>& x) { return ad::kl_categorical(p, x[0]); },
      {random_matrix(rng, 3, 2, -2.0, 2.0)});
  const std::vector<int> labels{2, 0, 1};
  add("cross_entropy", [&](Tape&, const std::vector<Tensor>& x) { return ad::cross_entropy(x[0], labels); },
      {random_matrix(rng, 3, 3, -2.0, 2.0)});

  // full losses on a five-node graph with a default-sized model
  const Graph g = gradcheck_graph(seed);
  GnnConfig cfg;
  cfg.feature_dim = g.feature_dim;
  cfg.num_classes = 3;
  const GnnModel model(cfg, derive_seed(seed, {0x6d}));
  const Graph* gp = &g;
  const std::span<const Graph* const> graphs(&gp, 1);
  const GraphBatch batch = GraphBatch::build(graphs);
  CausalOracle oracle;
  oracle.seed = derive_seed(seed, {0x6e});
  const auto plans = plan_batch(oracle, graphs, 1);
  const AlignmentBatch ab = build_alignment_batch(batch, plans);
  const int m = 2;

  std::vector<Matrix> params;
  for (const auto& prm : model.parameters()) params.push_back(prm.value);
  auto rebind = [&model](const std::vector<Tensor>& x) { return BoundModel{&model, x}; };
  Matrix frozen;
  {
    Tape t;
    BoundModel bm = bind(model, t, false);
    frozen = encode(bm, batch, m).back().value();
  }
  add("L_a (5-node graph)",
      [&](Tape&, const std::vector<Tensor>& x) {
        BoundModel bm = rebind(x);
        auto layers = encode(bm, batch, m);
        return alignment_losses(bm, layers.back(), ab, 1.0, &frozen).la;
      },
      params);
  add("L_g (5-node graph)",
      [&](Tape&, const std::vector<Tensor>& x) {
        BoundModel bm = rebind(x);
        return label_loss(forward(bm, batch), graphs, Task::GraphCls);
      },
      params);
  return rep;
}

}  // namespace dcsgl
