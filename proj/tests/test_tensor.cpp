#include <cmath>
#include <functional>

#include "doctest.h"
#include "dcsgl/optim.hpp"
#include "dcsgl/tensor.hpp"
#include "helpers.hpp"

using namespace dcsgl;
using testutil::random_matrix;

namespace {

using Fn = std::function<Tensor(Tape&, const std::vector<Tensor>&)>;

// analytic vs central differences, max relative error with a 1e-3 floor
double fd_error(const Fn& f, std::vector<Matrix> in, double eps = 1e-5) {
  std::vector<Matrix> grads;
  {
    Tape t;
    std::vector<Tensor> xs;
    for (auto& m : in) xs.push_back(t.leaf(m));
    t.backward(f(t, xs));
    for (auto& x : xs) grads.push_back(x.grad());
  }
  auto eval = [&] {
    Tape t;
    std::vector<Tensor> xs;
    for (auto& m : in) xs.push_back(t.constant(m));
    return f(t, xs).item();
  };
  double worst = 0.0;
  for (std::size_t k = 0; k < in.size(); ++k)
    for (Eigen::Index i = 0; i < in[k].size(); ++i) {
      double& x = in[k].data()[i];
      const double x0 = x;
      x = x0 + eps;
      const double up = eval();
      x = x0 - eps;
      const double down = eval();
      x = x0;
      const double num = (up - down) / (2 * eps);
      const double a = grads[k].data()[i];
      worst = std::max(worst, std::abs(a - num) / std::max({std::abs(a), std::abs(num), 1e-3}));
    }
  return worst;
}

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows.begin()->size()));
  int i = 0;
  for (auto& r : rows) {
    int j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

}  // namespace

TEST_CASE("matmul examples") {
  Tape t;
  Rng rng(1);
  const Matrix a = random_matrix(rng, 3, 4);
  CHECK(ad::matmul(t.leaf(a), t.leaf(Matrix::Identity(4, 4))).value().isApprox(a, 0.0));
  CHECK(ad::matmul(t.leaf(mat({{1, 2}})), t.leaf(mat({{3}, {4}}))).item() == 11.0);

  // reference triple loop
  const Matrix b = random_matrix(rng, 4, 5);
  Matrix ref = Matrix::Zero(3, 5);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 5; ++j)
      for (int k = 0; k < 4; ++k) ref(i, j) += a(i, k) * b(k, j);
  CHECK((ad::matmul(t.leaf(a), t.leaf(b)).value() - ref).cwiseAbs().maxCoeff() < 1e-14);

  CHECK(fd_error([](Tape&, const std::vector<Tensor>& x) { return ad::sum(ad::matmul(x[0], x[1])); }, {a, b}) < 1e-6);
}

TEST_CASE("matmul shape mismatch names both shapes") {
  Tape t;
  try {
    ad::matmul(t.leaf(Matrix::Zero(2, 3)), t.leaf(Matrix::Zero(2, 3)));
    FAIL("expected throw");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2x3") != std::string::npos);
  }
  CHECK_THROWS_AS(ad::add(t.leaf(Matrix::Zero(2, 3)), t.leaf(Matrix::Zero(3, 2))), std::invalid_argument);
  CHECK_THROWS_AS(ad::mul(t.leaf(Matrix::Zero(2, 3)), t.leaf(Matrix::Zero(2, 2))), std::invalid_argument);
}

TEST_CASE("elementwise and relu") {
  Tape t;
  CHECK(ad::relu(t.leaf(mat({{-1, 0, 2}}))).value() == mat({{0, 0, 2}}));
  const Matrix a = mat({{1.5, -2}});
  CHECK(ad::add(t.leaf(a), t.leaf(Matrix::Zero(1, 2))).value() == a);
  CHECK(ad::sub(t.leaf(a), t.leaf(a)).value() == Matrix::Zero(1, 2));
  CHECK(ad::mul(t.leaf(a), t.leaf(a)).value() == mat({{2.25, 4}}));
  CHECK(ad::scale(t.leaf(a), 2.0).value() == mat({{3, -4}}));

  Tape z;
  Tensor x = z.leaf(mat({{0.0, 1.0, -1.0}}));
  z.backward(ad::sum(ad::relu(x)));
  CHECK(x.grad() == mat({{0, 1, 0}}));  // relu'(0) := 0
}

TEST_CASE("backward of sum relu") {
  Tape t;
  Tensor x = t.leaf(mat({{1, -1}}));
  t.backward(ad::sum(ad::relu(x)));
  CHECK(x.grad() == mat({{1, 0}}));
}

TEST_CASE("backward on a non-scalar is an error") {
  Tape t;
  Tensor x = t.leaf(Matrix::Ones(2, 2));
  CHECK_THROWS_AS(t.backward(x), std::invalid_argument);
}

TEST_CASE("softmax, log, mean") {
  Tape t;
  CHECK(ad::softmax_rows(t.leaf(mat({{0, 0}}))).value() == mat({{0.5, 0.5}}));
  CHECK(ad::mean_rows(t.leaf(mat({{1, 2}, {3, 4}}))).value() == mat({{2, 3}}));
  CHECK_THROWS_WITH(ad::mean_rows(t.leaf(Matrix::Zero(0, 3))), "empty pool");
  CHECK(ad::log_rows(t.leaf(mat({{0.0}}))).item() == doctest::Approx(std::log(kProbClamp)));

  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(rng, 1 + trial % 5, 2 + trial % 4, -30.0, 30.0);
    const Matrix s = ad::softmax_rows(t.leaf(a)).value();
    for (int r = 0; r < s.rows(); ++r) CHECK(std::abs(s.row(r).sum() - 1.0) < 1e-12);
  }
  const Matrix w = random_matrix(rng, 3, 4);
  CHECK(fd_error([&](Tape& tp, const std::vector<Tensor>& x) { return ad::sum(ad::mul(ad::softmax_rows(x[0]), tp.constant(w))); },
                 {random_matrix(rng, 3, 4, -2, 2)}) < 1e-6);
}

TEST_CASE("gather_rows") {
  Tape t;
  Rng rng(3);
  const Matrix a = random_matrix(rng, 4, 3);
  const std::vector<int> all{0, 1, 2, 3};
  CHECK(ad::gather_rows(t.leaf(a), all).value() == a);

  Tensor x = t.leaf(a);
  const std::vector<int> twice{0, 0};
  t.backward(ad::sum(ad::gather_rows(x, twice)));
  Matrix expect = Matrix::Zero(4, 3);
  expect.row(0).setConstant(2.0);
  CHECK(x.grad() == expect);

  const std::vector<int> bad{4};
  CHECK_THROWS(ad::gather_rows(t.leaf(a), bad));

  // one-hot matrix product oracle, forward and backward
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 4, k = 1 + trial % 6, d = 3;
    const Matrix src = random_matrix(rng, n, d);
    const Matrix w = random_matrix(rng, k, d);
    std::vector<int> idx;
    Matrix onehot = Matrix::Zero(k, n);
    for (int r = 0; r < k; ++r) {
      idx.push_back(uniform_index(rng, n));
      onehot(r, idx.back()) = 1.0;
    }
    Tape tp;
    Tensor xs = tp.leaf(src);
    Tensor g = ad::gather_rows(xs, idx);
    CHECK(g.value() == onehot * src);
    tp.backward(ad::sum(ad::mul(g, tp.constant(w))));
    CHECK((xs.grad() - onehot.transpose() * w).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("kl_categorical") {
  Tape t;
  Rng rng(5);
  const Matrix logits = random_matrix(rng, 1, 3);
  const Matrix p = softmax(logits);
  CHECK(std::abs(ad::kl_categorical(p, t.leaf(logits)).item()) < 1e-12);

  const std::vector<double> one_zero{1.0, 0.0};
  const Matrix q = mat({{std::log(0.8), std::log(0.2)}});
  CHECK(ad::kl_categorical(one_zero, t.leaf(q)).item() == doctest::Approx(std::log(1.0 / 0.8)).epsilon(1e-12));
  CHECK(ad::kl_categorical(one_zero, t.leaf(q)).item() == doctest::Approx(0.22314).epsilon(1e-4));

  const std::vector<double> half{0.5, 0.5};
  CHECK(std::abs(ad::kl_categorical(half, t.leaf(mat({{0.0, 0.0}}))).item()) < 1e-15);

  const std::vector<double> bad{0.7, 0.7};
  CHECK_THROWS_AS(ad::kl_categorical(bad, t.leaf(mat({{0.0, 0.0}}))), std::invalid_argument);

  // Gibbs inequality on random pairs
  for (int trial = 0; trial < 200; ++trial) {
    Matrix pr = softmax(random_matrix(rng, 2, 3, -5, 5));
    if (trial % 3 == 0) {
      pr.row(0) << 1.0, 0.0, 0.0;
    }
    CHECK(ad::kl_categorical(pr, t.leaf(random_matrix(rng, 2, 3, -40, 40))).item() >= -1e-12);
  }
}

TEST_CASE("cross_entropy") {
  Tape t;
  CHECK(ad::cross_entropy(t.leaf(mat({{0, 0}})), 0).item() == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  const double big = ad::cross_entropy(t.leaf(mat({{1000, 0}})), 0).item();
  CHECK(std::isfinite(big));
  CHECK(big < 1e-12);
  CHECK_THROWS_AS(ad::cross_entropy(t.leaf(mat({{0, 0}})), 2), std::invalid_argument);
  Rng rng(11);
  const std::vector<int> labels{1, 0, 2};
  CHECK(fd_error([&](Tape&, const std::vector<Tensor>& x) { return ad::cross_entropy(x[0], labels); },
                 {random_matrix(rng, 3, 3, -2, 2)}) < 1e-6);
}

TEST_CASE("independent tapes give identical gradients") {
  Rng rng(9);
  const Matrix a = random_matrix(rng, 4, 3), b = random_matrix(rng, 3, 2);
  auto run = [&] {
    Tape t;
    Tensor x = t.leaf(a), y = t.leaf(b);
    t.backward(ad::sum(ad::relu(ad::matmul(x, y))));
    return std::pair{x.grad(), y.grad()};
  };
  const auto r1 = run(), r2 = run();
  CHECK(r1.first == r2.first);
  CHECK(r1.second == r2.second);
}

TEST_CASE("property: composed primitives match finite differences over random shapes") {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    Rng rng(derive_seed(seed, {0x77}));
    const int n = uniform_int(rng, 1, 6), d = uniform_int(rng, 1, 5), h = uniform_int(rng, 1, 5);
    const int c = uniform_int(rng, 2, 4);
    const int segs = uniform_int(rng, 1, n);
    std::vector<int> offsets{0};
    for (int s = 1; s < segs; ++s) offsets.push_back(s);
    offsets.push_back(n);
    std::vector<int> idx;
    for (int i = 0; i < uniform_int(rng, 1, 7); ++i) idx.push_back(uniform_index(rng, n));
    std::vector<double> rs;
    for (int i = 0; i < n; ++i) rs.push_back(uniform(rng, 0.0, 3.0));
    Matrix p = softmax(random_matrix(rng, segs, c, -2, 2));
    std::vector<int> labels;
    for (std::size_t i = 0; i < idx.size(); ++i) labels.push_back(uniform_index(rng, c));

    Matrix adj = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && uniform01(rng) < 0.4) adj(i, j) = 1.0;
    auto op = std::make_shared<const SparseOperator>(adj.sparseView());

    Matrix x = random_matrix(rng, n, d);
    Matrix w = random_matrix(rng, d, h);
    Matrix w2 = random_matrix(rng, h, c);
    Matrix bias = random_matrix(rng, 1, h);
    // relu sees pre-activations; keep them away from the kink
    Fn f = [&](Tape&, const std::vector<Tensor>& in) {
      Tensor z = ad::add_row(ad::add(ad::matmul(in[0], in[1]), ad::spmm(op, ad::matmul(in[0], in[1]))), in[3]);
      Tensor hdn = ad::scale_rows(ad::relu(z), rs);
      Tensor logits = ad::matmul(hdn, in[2]);
      Tensor pooled = ad::segment_mean(logits, offsets);
      Tensor kl = ad::kl_categorical(p, pooled);
      Tensor ce = ad::cross_entropy(ad::gather_rows(logits, idx), labels);
      Tensor lg = ad::sum(ad::log_rows(ad::softmax_rows(ad::mean_rows(logits))));
      return ad::add(ad::add(kl, ad::scale(ce, 0.5)), ad::mul(lg, lg));
    };
    // nudge the bias so no pre-activation sits within 1e-3 of zero
    {
      const Matrix z = (x * w + adj * (x * w)).rowwise() + bias.row(0);
      for (int j = 0; j < h; ++j)
        for (int i = 0; i < n; ++i)
          if (std::abs(z(i, j)) < 1e-3) bias(0, j) += 3e-3;
    }
    worst = std::max(worst, fd_error(f, {x, w, w2, bias}));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("adam closed form and determinism") {
  AdamOptions opt;
  Matrix p = Matrix::Constant(1, 1, 0.5);
  AdamState st;
  adam_step(p, Matrix::Ones(1, 1), st, opt);
  CHECK(st.step == 1);
  const double delta = 0.5 - p(0, 0);
  CHECK(std::abs(delta - opt.lr * 1.0 / (std::sqrt(1.0) + opt.eps)) < 1e-9);

  // zero gradient: moments decay; from a fresh state the parameter stays put
  const double m1 = st.m(0, 0), v1 = st.v(0, 0);
  adam_step(p, Matrix::Zero(1, 1), st, opt);
  CHECK(st.m(0, 0) == doctest::Approx(0.9 * m1));
  CHECK(st.v(0, 0) == doctest::Approx(0.999 * v1));
  Matrix q = Matrix::Constant(2, 2, -0.3);
  const Matrix q0 = q;
  AdamState fresh;
  adam_step(q, Matrix::Zero(2, 2), fresh, opt);
  CHECK(q == q0);
  CHECK(fresh.step == 1);

  CHECK_THROWS_AS(adam_step(p, Matrix::Zero(2, 1), st, opt), std::invalid_argument);

  Rng rng(2);
  const Matrix g = random_matrix(rng, 3, 3);
  Matrix a = random_matrix(rng, 3, 3), b = a;
  AdamState sa, sb;
  for (int i = 0; i < 10; ++i) {
    adam_step(a, g, sa, opt);
    adam_step(b, g, sb, opt);
  }
  CHECK(a == b);

  Matrix s = Matrix::Ones(1, 2);
  sgd_step(s, mat({{1, -2}}), 0.1);
  CHECK(s == mat({{0.9, 1.2}}));
}
