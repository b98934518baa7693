#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "nsurf/core/binary_io.hpp"
#include "nsurf/nn/adam.hpp"
#include "nsurf/nn/bundle.hpp"
#include "nsurf/nn/checkpoint.hpp"
#include "nsurf/nn/grad_check.hpp"
#include "nsurf/nn/ops.hpp"
#include "oracles.hpp"

namespace nsurf::nn {
namespace {

Matrix row(std::initializer_list<double> v) {
  Matrix m(1, static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) m(0, i++) = x;
  return m;
}

TEST(Ops, ReluValueAndMask) {
  Parameter p("x", Tensor{{1, 3}, row({-1.0, 0.0, 2.0})});
  Tape t;
  const Var y = relu(t, t.param(p));
  EXPECT_EQ(t.value(y), row({0.0, 0.0, 2.0}));
  p.grad.setZero();
  t.backward(sum(t, y));
  EXPECT_EQ(p.grad, row({0.0, 0.0, 1.0}));
}

TEST(Ops, SigmoidAtZero) {
  Parameter p("x", Tensor{{1, 1}, row({0.0})});
  Tape t;
  const Var y = sigmoid(t, t.param(p));
  EXPECT_EQ(t.value(y)(0, 0), 0.5);
  p.grad.setZero();
  t.backward(y);
  EXPECT_EQ(p.grad(0, 0), 0.25);
}

TEST(Ops, DenseIdentity) {
  NetworkBundle b;
  Parameter& w = b.add("l.weight", {3, 3});
  b.add("l.bias", {3});
  w.value.values = Matrix::Identity(3, 3);
  Tape t(false);
  const Matrix x = row({0.3, -2.0, 7.0});
  EXPECT_EQ(t.value(dense(t, b, "l", t.constant(x))), x);
}

TEST(Ops, ShapeErrors) {
  Tape t;
  EXPECT_THROW(matmul(t, t.constant(Matrix::Zero(2, 3)), t.constant(Matrix::Zero(2, 3))), std::invalid_argument);
  EXPECT_THROW(add(t, t.constant(Matrix::Zero(2, 3)), t.constant(Matrix::Zero(3, 2))), std::invalid_argument);
  EXPECT_THROW(gather_rows(t, t.constant(Matrix::Zero(2, 3)), {2}), std::invalid_argument);
  EXPECT_THROW(scatter_rows(t, t.constant(Matrix::Zero(3, 1)), {1, 1}, t.constant(Matrix::Zero(2, 1))),
               std::invalid_argument);
}

TEST(Tape, NonFiniteValueRaises) {
  Tape t;
  EXPECT_THROW(exp(t, t.constant(row({1000.0}))), NumericError);
  Matrix bad = row({1.0});
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(add(t, t.constant(bad), t.constant(row({1.0}))), NumericError);
}

TEST(Tape, NonRecordingTapeRejectsBackward) {
  Tape t(false);
  const Var x = t.constant(row({1.0}));
  EXPECT_THROW(t.backward(x), std::logic_error);
}

TEST(Tape, SharedSubexpressionAccumulates) {
  Parameter p("x", Tensor{{1, 1}, row({3.0})});
  Tape t;
  const Var x = t.param(p);
  const Var y = add(t, mul(t, x, x), x);  // x^2 + x
  p.grad.setZero();
  t.backward(y);
  EXPECT_DOUBLE_EQ(p.grad(0, 0), 7.0);
}

// Every differentiable op, checked against central differences in test code.
TEST(Ops, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto random = [&](int r, int c) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
  };
  Parameter a("a", Tensor{{4, 6}, random(4, 6)});
  Parameter b("b", Tensor{{6, 3}, random(6, 3)});
  Parameter c("c", Tensor{{3}, random(1, 3)});
  Parameter img("img", Tensor{{20, 2}, random(20, 2)});  // 4 x 5 image, 2 channels
  Parameter sig("sig", Tensor{{5, 1}, random(5, 1).cwiseAbs() * 3.0});
  const Matrix target = random(4, 6);
  const Vector rs = random(4, 1).col(0);
  const Vector deltas = random(5, 1).col(0).cwiseAbs() + Vector::Constant(5, 0.1);
  std::vector<Parameter*> params = {&a, &b, &c, &img, &sig};

  auto build = [&](Tape& t) {
    Var h = add_bias(t, matmul(t, t.param(a), t.param(b)), t.param(c));
    h = scale_rows(t, tanh(t, h), rs);
    Var k = concat_cols(t, {sigmoid(t, h), one_minus(t, h)});
    k = concat_rows(t, {k, scale(t, k, 0.5)});
    k = gather_rows(t, k, {0, 3, 5, 7});
    k = scatter_rows(t, k, {1, 2}, exp(t, gather_rows(t, k, {0, 3})));
    Var loss = mse(t, sub(t, k, t.constant(Matrix::Constant(4, 6, 0.1))), target);
    Var im = im2col3x3(t, t.param(img), 4, 5);
    Var pooled = avg_pool2(t, t.param(img), 4, 5);
    loss = add(t, loss, scale(t, sum(t, mul(t, im, im)), 0.01));
    loss = add(t, loss, sum(t, pooled));
    const Var rgb = sigmoid(t, gather_rows(t, t.param(img), {0, 1, 2, 3, 4}));
    const Var rgb3 = concat_cols(t, {rgb, gather_rows(t, t.param(sig), {0, 1, 2, 3, 4})});
    const Var comp = composite(t, t.param(sig), rgb3, deltas, {0, 2, 5}, Eigen::Vector3d(0.1, 0.2, 0.3));
    loss = add(t, loss, masked_l1(t, comp, Matrix::Constant(2, 3, 0.4), Matrix::Ones(2, 3)));
    return loss;
  };
  auto loss_value = [&]() {
    Tape t(false);
    return t.value(build(t))(0, 0);
  };
  Tape t;
  for (Parameter* p : params) p->grad.setZero();
  t.backward(build(t));
  double worst = 0.0;
  for (Parameter* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double numeric = oracle::central_difference(loss_value, p->value.data() + i, 1e-6);
      worst = std::max(worst, relative_error(p->grad.data()[i], numeric));
    }
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(GradCheck, QuadraticIsExact) {
  Parameter p("x", Tensor{{2, 2}, Matrix(Matrix::Random(2, 2))});
  const Matrix a = Matrix::Random(2, 2);
  std::vector<Parameter*> params = {&p};
  auto loss = [&](bool grad) {
    Tape t(grad);
    const Var d = sub(t, t.param(p), t.constant(a));
    const Var l = sum(t, mul(t, d, d));
    if (grad) {
      p.grad.setZero();
      t.backward(l);
    }
    return t.value(l)(0, 0);
  };
  EXPECT_LT(grad_check(loss, params).max_rel_error, 1e-8);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  Parameter p("x", Tensor{{3}, row({1.0, -2.0, 3.0})});
  p.grad.setZero();
  std::vector<Parameter*> params = {&p};
  adam_step(params, AdamConfig{});
  EXPECT_EQ(p.value.values, row({1.0, -2.0, 3.0}));
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Parameter p("x", Tensor{{3}, row({1.0, -2.0, 3.0})});
  p.grad = row({0.5, -3.0, 1e-3});
  std::vector<Parameter*> params = {&p};
  adam_step(params, AdamConfig{0.01});
  const Matrix step = row({1.0, -2.0, 3.0}) - p.value.values;
  EXPECT_NEAR(step(0, 0), 0.01, 1e-7);
  EXPECT_NEAR(step(0, 1), -0.01, 1e-7);
  EXPECT_NEAR(step(0, 2), 0.01, 1e-4);
}

TEST(Adam, ConstantGradientDriftsMonotonically) {
  Parameter p("x", Tensor{{2}, row({0.0, 0.0})});
  std::vector<Parameter*> params = {&p};
  Matrix prev = p.value.values;
  for (int i = 0; i < 100; ++i) {
    p.grad = row({2.0, -0.5});
    adam_step(params, AdamConfig{});
    EXPECT_LT(p.value.values(0, 0), prev(0, 0));
    EXPECT_GT(p.value.values(0, 1), prev(0, 1));
    prev = p.value.values;
  }
}

TEST(Adam, FrozenParametersSkipped) {
  Parameter p("x", Tensor{{1}, row({1.0})});
  p.grad = row({1.0});
  p.trainable = false;
  std::vector<Parameter*> params = {&p};
  adam_step(params, AdamConfig{});
  EXPECT_EQ(p.value.values(0, 0), 1.0);
}

TEST(Bundle, ShapesAndDeterminism) {
  const NetworkBundle a = NetworkBundle::create({}, 7);
  const NetworkBundle b = NetworkBundle::create({}, 7);
  const NetworkBundle c = NetworkBundle::create({}, 8);
  EXPECT_TRUE(a.same_values(b));
  EXPECT_FALSE(a.same_values(c));
  EXPECT_EQ(a.get("extractor.conv1.weight").value.shape, (std::vector<std::size_t>{3, 3, 3, 32}));
  EXPECT_EQ(a.get("projector.weight").value.shape, (std::vector<std::size_t>{83, 32}));
  EXPECT_EQ(a.get("gru.z.weight").value.shape, (std::vector<std::size_t>{64, 32}));
  EXPECT_EQ(a.get("shade.feature.0.weight").value.shape, (std::vector<std::size_t>{142, 256}));
  EXPECT_EQ(a.get("shade.sigma.weight").value.shape, (std::vector<std::size_t>{289, 1}));
  EXPECT_EQ(a.get("shade.rgb.0.weight").value.shape, (std::vector<std::size_t>{289, 256}));
  EXPECT_EQ(a.get("shade.rgb.3.weight").value.shape, (std::vector<std::size_t>{256, 3}));
  EXPECT_FALSE(a.has("refiner.enc.weight"));
  NetworkConfig with_refiner;
  with_refiner.learned_refiner = true;
  EXPECT_TRUE(NetworkBundle::create(with_refiner, 1).has("refiner.enc.weight"));
  EXPECT_THROW(a.get("nope"), std::out_of_range);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  NetworkBundle a = NetworkBundle::create({}, 3);
  quantize_to_float(a);
  std::stringstream s1;
  save_checkpoint(a, s1);
  const NetworkBundle b = load_checkpoint(s1);
  EXPECT_TRUE(a.same_values(b));
  std::stringstream s2;
  save_checkpoint(b, s2);
  EXPECT_EQ(s1.str(), s2.str());
}

TEST(Checkpoint, ConfigInferredFromShapes) {
  NetworkConfig cfg;
  cfg.learned_refiner = true;
  cfg.rgb_layers = 3;
  NetworkBundle a = NetworkBundle::create(cfg, 3);
  std::stringstream s;
  save_checkpoint(a, s);
  const NetworkBundle b = load_checkpoint(s);
  EXPECT_TRUE(b.config().learned_refiner);
  EXPECT_EQ(b.config().rgb_layers, 3);
}

TEST(Checkpoint, CorruptInputsRejected) {
  NetworkBundle a = NetworkBundle::create({}, 3);
  std::stringstream s;
  save_checkpoint(a, s);
  const std::string bytes = s.str();
  std::stringstream truncated(bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(load_checkpoint(truncated), FormatError);
  std::string bad = bytes;
  bad[0] = 'X';
  std::stringstream magic(bad);
  EXPECT_THROW(load_checkpoint(magic), FormatError);
  std::stringstream empty;
  EXPECT_THROW(load_checkpoint(empty), FormatError);
}

}  // namespace
}  // namespace nsurf::nn
