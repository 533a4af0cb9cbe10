#include <doctest.h>

#include <cmath>

#include "bisense/nn.hpp"
#include "grad_check.hpp"

using namespace bisense;
using namespace bisense::nn;

namespace {

Mat colvec(std::initializer_list<double> xs) {
  Mat m(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) m(i++, 0) = x;
  return m;
}

// scalar reference LSTM step, the independent oracle
struct ScalarLstm {
  std::vector<double> h, c, i, f, o, g;
};
ScalarLstm scalar_lstm(const LstmParams& p, const Mat& x, const Mat& h_prev,
                       const Mat& c_prev) {
  const int H = static_cast<int>(p.b_i.value.rows());
  const int D = static_cast<int>(p.W_i.value.cols());
  ScalarLstm out;
  out.h.resize(H);
  out.c.resize(H);
  out.i.resize(H);
  out.f.resize(H);
  out.o.resize(H);
  out.g.resize(H);
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  for (int r = 0; r < H; ++r) {
    double zi = p.b_i.value(r, 0), zf = p.b_f.value(r, 0);
    double zo = p.b_o.value(r, 0), zg = p.b_c.value(r, 0);
    for (int d = 0; d < D; ++d) {
      zi += p.W_i.value(r, d) * x(d, 0);
      zf += p.W_f.value(r, d) * x(d, 0);
      zo += p.W_o.value(r, d) * x(d, 0);
      zg += p.W_c.value(r, d) * x(d, 0);
    }
    for (int k = 0; k < H; ++k) {
      zi += p.U_i.value(r, k) * h_prev(k, 0);
      zf += p.U_f.value(r, k) * h_prev(k, 0);
      zo += p.U_o.value(r, k) * h_prev(k, 0);
      zg += p.U_c.value(r, k) * h_prev(k, 0);
    }
    out.i[r] = sig(zi);
    out.f[r] = sig(zf);
    out.o[r] = sig(zo);
    out.g[r] = std::tanh(zg);
    out.c[r] = out.f[r] * c_prev(r, 0) + out.i[r] * out.g[r];
    out.h[r] = out.o[r] * std::tanh(out.c[r]);
  }
  return out;
}

}  // namespace

TEST_SUITE("nn.lstm_cell") {
  TEST_CASE("all-zero parameters and states give zero output") {
    LstmParams p;
    Rng rng(1);
    p = LstmParams("z", 3, 4, rng);
    for (Tensor* t : p.tensors()) t->value.setZero();
    Graph g;
    LstmState st = lstm_zero_state(g, 4);
    LstmState next = lstm_cell(g, g.input(Mat::Zero(3, 1)), st, p);
    CHECK(g.value(next.h).isZero(0.0));
    CHECK(g.value(next.c).isZero(0.0));
  }

  TEST_CASE("saturated forget gate carries the cell state through") {
    Rng rng(2);
    LstmParams p("s", 3, 4, rng);
    p.b_f.value.setConstant(50.0);  // forget gate ~= 1
    Graph g;
    Mat x = colvec({0.3, -0.2, 0.5});
    Mat h_prev = Mat::Zero(4, 1);
    Mat c_prev = colvec({1.0, -2.0, 0.5, 3.0});
    LstmState st{g.input(h_prev), g.input(c_prev)};
    LstmState next = lstm_cell(g, g.input(x), st, p);
    ScalarLstm oracle = scalar_lstm(p, x, h_prev, c_prev);
    for (int r = 0; r < 4; ++r) {
      double expect = c_prev(r, 0) + oracle.i[r] * oracle.g[r];
      CHECK(g.value(next.c)(r, 0) == doctest::Approx(expect).epsilon(1e-9));
    }
  }

  TEST_CASE("random instances match the scalar oracle") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      LstmParams p("r", 3, 3, rng);
      Mat x = colvec({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
      Mat h_prev = colvec({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
      Mat c_prev = colvec({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)});
      Graph g;
      LstmState st{g.input(h_prev), g.input(c_prev)};
      LstmState next = lstm_cell(g, g.input(x), st, p);
      ScalarLstm oracle = scalar_lstm(p, x, h_prev, c_prev);
      for (int r = 0; r < 3; ++r) {
        CHECK(g.value(next.h)(r, 0) == doctest::Approx(oracle.h[r]).epsilon(1e-12));
        CHECK(g.value(next.c)(r, 0) == doctest::Approx(oracle.c[r]).epsilon(1e-12));
        CHECK(oracle.i[r] > 0.0);
        CHECK(oracle.i[r] < 1.0);
        CHECK(oracle.f[r] > 0.0);
        CHECK(oracle.f[r] < 1.0);
        CHECK(oracle.o[r] > 0.0);
        CHECK(oracle.o[r] < 1.0);
      }
    }
  }

  TEST_CASE("cell state grows by at most one per step") {
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
      LstmParams p("b", 2, 3, rng);
      Mat x = colvec({rng.uniform(-3, 3), rng.uniform(-3, 3)});
      Mat h_prev = colvec({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
      Mat c_prev = colvec({rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4)});
      Graph g;
      LstmState next =
          lstm_cell(g, g.input(x), {g.input(h_prev), g.input(c_prev)}, p);
      for (int r = 0; r < 3; ++r)
        CHECK(std::abs(g.value(next.c)(r, 0)) <= std::abs(c_prev(r, 0)) + 1.0);
    }
  }

  TEST_CASE("shape mismatch raises") {
    Rng rng(5);
    LstmParams p("m", 3, 4, rng);
    Graph g;
    LstmState st = lstm_zero_state(g, 4);
    CHECK_THROWS_AS(lstm_cell(g, g.input(Mat::Zero(2, 1)), st, p),
                    std::invalid_argument);
  }
}

TEST_SUITE("nn.bce") {
  TEST_CASE("perfect prediction is ~zero after clamping") {
    Graph g;
    double loss = g.scalar(g.bce(g.input_scalar(1.0), 1.0));
    CHECK(loss == doctest::Approx(-std::log(1.0 - kBceEps)).epsilon(1e-6));
    CHECK(loss < 1e-6);
  }

  TEST_CASE("maximum uncertainty costs log 2") {
    Graph g;
    CHECK(g.scalar(g.bce(g.input_scalar(0.5), 1.0)) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }

  TEST_CASE("batch mean matches hand evaluation") {
    std::vector<double> p = {0.9, 0.2};
    std::vector<int> y = {1, 0};
    double expect = (-std::log(0.9) - std::log(0.8)) / 2.0;
    CHECK(bce_loss(p, y) == doctest::Approx(expect).epsilon(1e-12));
  }

  TEST_CASE("loss is nonnegative") {
    Rng rng(6);
    for (int i = 0; i < 200; ++i) {
      std::vector<double> p = {rng.next_double()};
      std::vector<int> y = {static_cast<int>(rng.next_index(2))};
      CHECK(bce_loss(p, y) >= 0.0);
    }
  }
}

TEST_SUITE("nn.softmax") {
  TEST_CASE("symmetry") {
    Vec out = softmax(colvec({0, 0}));
    CHECK(out(0) == doctest::Approx(0.5));
    CHECK(out(1) == doctest::Approx(0.5));
  }

  TEST_CASE("extreme logits do not overflow") {
    Vec out = softmax(colvec({1000, 0}));
    CHECK(std::isfinite(out(0)));
    CHECK(out(0) == doctest::Approx(1.0));
    CHECK(out(1) == doctest::Approx(0.0));
  }

  TEST_CASE("matches the direct formula after the max shift") {
    Vec logits = colvec({1, 2, 3});
    Vec out = softmax(logits);
    double z = std::exp(1.0 - 3.0) + std::exp(2.0 - 3.0) + std::exp(0.0);
    for (int i = 0; i < 3; ++i)
      CHECK(out(i) == doctest::Approx(std::exp(logits(i) - 3.0) / z).epsilon(1e-12));
  }

  TEST_CASE("outputs are a distribution, invariant to logit shifts") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
      int n = 2 + static_cast<int>(rng.next_index(6));
      Vec logits(n);
      for (int i = 0; i < n; ++i) logits(i) = rng.uniform(-10, 10);
      Vec out = softmax(logits);
      double sum = 0;
      for (int i = 0; i < n; ++i) {
        CHECK(out(i) >= 0.0);
        sum += out(i);
      }
      CHECK(std::abs(sum - 1.0) < 1e-6);
      Vec shifted = softmax((logits.array() + rng.uniform(-5, 5)).matrix());
      for (int i = 0; i < n; ++i)
        CHECK(std::abs(out(i) - shifted(i)) < 1e-6);
    }
  }
}

TEST_SUITE("nn.backward") {
  TEST_CASE("dense layer gradient has the outer-product pattern") {
    Tensor W("W", 3, 2);
    W.value << 1, 2, 3, 4, 5, 6;
    Mat x = colvec({0.5, -1.5});
    Graph g;
    // L = sum(Wx) via ones^T (Wx)
    Graph::NodeId y = g.matmul(g.param(W), g.input(x));
    Graph::NodeId loss = g.matmul(g.input(Mat::Ones(1, 3)), y);
    g.backward(loss);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 2; ++c)
        CHECK(W.grad(r, c) == doctest::Approx(x(c, 0)));
  }

  TEST_CASE("backward twice without zeroing doubles the gradients") {
    Tensor W("W", 2, 2);
    Rng rng(8);
    xavier_init(W, rng);
    Graph g;
    Graph::NodeId y = g.matmul(g.param(W), g.input(colvec({1.0, 2.0})));
    Graph::NodeId loss = g.matmul(g.input(Mat::Ones(1, 2)), y);
    g.backward(loss);
    Mat first = W.grad;
    g.backward(loss);
    CHECK((W.grad - 2.0 * first).norm() == doctest::Approx(0.0));
  }

  TEST_CASE("backward without a recorded forward is an error") {
    Graph g;
    CHECK_THROWS_AS(g.backward(0), std::logic_error);
    Graph g2;
    Graph::NodeId v = g2.input(colvec({1.0, 2.0}));
    CHECK_THROWS_AS(g2.backward(v), std::logic_error);  // non-scalar loss
    CHECK_THROWS_AS(g2.backward(99), std::logic_error);
  }

  TEST_CASE("composed layers pass finite differences") {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
      Dense d1("d1", 4, 5, rng);
      Dense d2("d2", 5, 1, rng);
      Mat x(4, 1);
      for (int i = 0; i < 4; ++i) x(i, 0) = rng.uniform(-1, 1);
      double label = rng.next_index(2) ? 1.0 : 0.0;
      std::vector<Tensor*> params = {&d1.W, &d1.b, &d2.W, &d2.b};

      auto loss_value = [&] {
        Graph g;
        Graph::NodeId p = g.sigmoid(d2(g, g.relu(d1(g, g.input(x)))));
        return g.scalar(g.bce(p, label));
      };
      auto backward = [&] {
        zero_grads(params);
        Graph g;
        Graph::NodeId p = g.sigmoid(d2(g, g.relu(d1(g, g.input(x)))));
        g.backward(g.bce(p, label));
      };
      auto report = testutil::finite_diff_check(params, loss_value, backward);
      CHECK(report.max_rel_err < 1e-4);
    }
  }

  TEST_CASE("lstm step passes finite differences") {
    Rng rng(10);
    for (int trial = 0; trial < 20; ++trial) {
      LstmParams p("lstm", 3, 4, rng);
      Dense out("out", 4, 1, rng);
      Mat x1(3, 1), x2(3, 1);
      for (int i = 0; i < 3; ++i) {
        x1(i, 0) = rng.uniform(-1, 1);
        x2(i, 0) = rng.uniform(-1, 1);
      }
      std::vector<Tensor*> params = p.tensors();
      params.push_back(&out.W);
      params.push_back(&out.b);

      auto loss_value = [&] {
        Graph g;
        LstmState st = lstm_zero_state(g, 4);
        st = lstm_cell(g, g.input(x1), st, p);
        st = lstm_cell(g, g.input(x2), st, p);
        return g.scalar(g.bce(g.sigmoid(out(g, st.h)), 1.0));
      };
      auto backward = [&] {
        zero_grads(params);
        Graph g;
        LstmState st = lstm_zero_state(g, 4);
        st = lstm_cell(g, g.input(x1), st, p);
        st = lstm_cell(g, g.input(x2), st, p);
        g.backward(g.bce(g.sigmoid(out(g, st.h)), 1.0));
      };
      auto report = testutil::finite_diff_check(params, loss_value, backward);
      CHECK(report.max_rel_err < 1e-4);
    }
  }

  TEST_CASE("softmax, concat, scale and pick pass finite differences") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      Tensor a("a", 3, 1), b("b", 2, 1), w("w", 1, 5);
      xavier_init(a, rng);
      xavier_init(b, rng);
      xavier_init(w, rng);
      std::vector<Tensor*> params = {&a, &b, &w};

      auto build = [&](Graph& g) {
        Graph::NodeId cat = g.concat(g.param(a), g.param(b));
        Graph::NodeId sm = g.softmax(cat);
        Graph::NodeId scaled = g.scale(cat, g.pick(sm, 1));
        Graph::NodeId mixed = g.cmul(scaled, g.tanh(cat));
        Graph::NodeId s = g.matmul(g.param(w), mixed);
        return g.bce(g.sigmoid(s), 0.0);
      };
      auto loss_value = [&] {
        Graph g;
        return g.scalar(build(g));
      };
      auto backward = [&] {
        zero_grads(params);
        Graph g;
        g.backward(build(g));
      };
      auto report = testutil::finite_diff_check(params, loss_value, backward);
      CHECK(report.max_rel_err < 1e-4);
    }
  }
}

TEST_SUITE("nn.optimizer") {
  TEST_CASE("sgd arithmetic") {
    Tensor t("t", 1, 1);
    t.value(0, 0) = 1.0;
    t.grad(0, 0) = 2.0;
    OptimizerState opt(OptimizerState::Kind::SGD, 0.1);
    Tensor* ts[] = {&t};
    opt.step(ts);
    CHECK(t.value(0, 0) == doctest::Approx(0.8));
  }

  TEST_CASE("adam first step moves by about the learning rate") {
    Tensor t("t", 1, 1);
    t.value(0, 0) = 1.0;
    t.grad(0, 0) = 1.0;
    OptimizerState opt(OptimizerState::Kind::Adam, 1e-3);
    Tensor* ts[] = {&t};
    opt.step(ts);
    // bias-corrected mhat = vhat = 1 on the first step
    CHECK(t.value(0, 0) == doctest::Approx(1.0 - 1e-3).epsilon(1e-6));
  }

  TEST_CASE("zero gradient is a fixed point") {
    Tensor t("t", 2, 2);
    t.value.setConstant(3.0);
    OptimizerState sgd(OptimizerState::Kind::SGD, 0.5);
    Tensor* ts[] = {&t};
    sgd.step(ts);
    CHECK(t.value(0, 0) == 3.0);
    OptimizerState adam(OptimizerState::Kind::Adam, 0.5);
    adam.step(ts);
    CHECK(t.value(0, 0) == doctest::Approx(3.0).epsilon(1e-12));
  }

  TEST_CASE("non-finite gradients abort with the parameter name") {
    Tensor t("culprit", 1, 1);
    t.grad(0, 0) = std::nan("");
    OptimizerState opt(OptimizerState::Kind::SGD, 0.1);
    Tensor* ts[] = {&t};
    try {
      opt.step(ts);
      FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("culprit") != std::string::npos);
    }
  }

  TEST_CASE("clipping caps the global norm") {
    Tensor a("a", 1, 1), b("b", 1, 1);
    a.grad(0, 0) = 30.0;
    b.grad(0, 0) = 40.0;  // norm 50
    Tensor* ts[] = {&a, &b};
    double norm = clip_gradients(ts, 5.0);
    CHECK(norm == doctest::Approx(50.0));
    CHECK(std::sqrt(a.grad.squaredNorm() + b.grad.squaredNorm()) ==
          doctest::Approx(5.0));
    // under the cap nothing changes
    a.grad(0, 0) = 3.0;
    b.grad(0, 0) = 4.0;
    clip_gradients(ts, 5.0);
    CHECK(a.grad(0, 0) == 3.0);
  }
}
