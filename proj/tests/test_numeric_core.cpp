/*
 * Copyright 2026 The lowlight Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>

#include "lowlight/adam.hpp"
#include "lowlight/ops.hpp"
#include "lowlight/rng.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

namespace lowlight {
namespace {

double max_abs_diff(const Tensor& a, const Tensor& b) { return (a.array() - b.array()).abs().maxCoeff(); }

// ---- Tensor -------------------------------------------------------------------

TEST(TensorTest, SizeMatchesShape) {
  Tensor t(Shape{2, 3, 4}, 1.5);
  EXPECT_EQ(t.size(), 24);
  EXPECT_EQ(t.channels(), 2);
  EXPECT_EQ(t.height(), 3);
  EXPECT_EQ(t.width(), 4);
  EXPECT_DOUBLE_EQ(t.at(1, 2, 3), 1.5);
  EXPECT_THROW(Tensor(Shape{2, 2}, Eigen::ArrayXd::Zero(3)), ShapeError);
}

TEST(TensorTest, ItemNeedsScalar) {
  EXPECT_DOUBLE_EQ(Tensor::scalar(3.0).item(), 3.0);
  EXPECT_THROW(Tensor(Shape{2}).item(), ShapeError);
}

// ---- conv2d -------------------------------------------------------------------

TEST(Conv2dTest, ScalarAffine) {
  const Tensor out = conv2d(Tensor({1, 3, 3}, 1.0), Tensor({1, 1, 1, 1}, 2.0), Tensor({1}, 0.5));
  ASSERT_EQ(out.shape(), (Shape{1, 3, 3}));
  for (Index i = 0; i < out.size(); ++i) EXPECT_DOUBLE_EQ(out[i], 2.5);
}

TEST(Conv2dTest, ZeroPaddingArithmetic) {
  const double c = 0.7;
  const Tensor out = conv2d(Tensor({1, 4, 4}, c), Tensor({1, 1, 3, 3}, 1.0 / 9.0), Tensor({1}), 1, 1);
  EXPECT_NEAR(out.at(0, 1, 1), c, 1e-15);
  EXPECT_NEAR(out.at(0, 2, 2), c, 1e-15);
  EXPECT_NEAR(out.at(0, 0, 0), 4.0 / 9.0 * c, 1e-15);
  EXPECT_NEAR(out.at(0, 3, 3), 4.0 / 9.0 * c, 1e-15);
  EXPECT_NEAR(out.at(0, 0, 1), 6.0 / 9.0 * c, 1e-15);
}

TEST(Conv2dTest, MatchesLoopOracle) {
  Rng rng(11);
  const Tensor x = uniform_tensor({2, 5, 5}, rng);
  const Tensor w = uniform_tensor({3, 2, 3, 3}, rng);
  const Tensor b = uniform_tensor({3}, rng);
  EXPECT_LT(max_abs_diff(conv2d(x, w, b, 1, 1), oracle::conv2d(x, w, b, 1, 1)), 1e-12);
}

TEST(Conv2dTest, MatchesLoopOracleAcrossGeometries) {
  Rng rng(12);
  struct Geo {
    Index cin, h, w, cout, k, stride, pad;
  };
  const Geo geos[] = {{1, 1, 1, 1, 1, 1, 0}, {3, 7, 5, 2, 3, 1, 1}, {2, 6, 9, 4, 3, 2, 1}, {4, 5, 5, 3, 5, 1, 2},
                      {2, 8, 3, 2, 3, 3, 0}, {1, 4, 4, 1, 3, 1, 2}, {5, 9, 11, 6, 3, 2, 0}};
  for (const Geo& g : geos) {
    const Tensor x = uniform_tensor({g.cin, g.h, g.w}, rng);
    const Tensor w = uniform_tensor({g.cout, g.cin, g.k, g.k}, rng);
    const Tensor b = uniform_tensor({g.cout}, rng);
    const Tensor got = conv2d(x, w, b, g.stride, g.pad);
    const Tensor want = oracle::conv2d(x, w, b, g.stride, g.pad);
    ASSERT_EQ(got.shape(), want.shape());
    EXPECT_LT(max_abs_diff(got, want), 1e-12);
  }
}

TEST(Conv2dTest, LargeImageUsesSeveralTiles) {
  Rng rng(13);
  const Tensor x = uniform_tensor({3, 70, 45}, rng);
  const Tensor w = uniform_tensor({4, 3, 3, 3}, rng);
  const Tensor b = uniform_tensor({4}, rng);
  EXPECT_LT(max_abs_diff(conv2d(x, w, b, 1, 1), oracle::conv2d(x, w, b, 1, 1)), 1e-12);
}

TEST(Conv2dTest, Linearity) {
  Rng rng(14);
  const Tensor x = uniform_tensor({2, 6, 6}, rng);
  const Tensor y = uniform_tensor({2, 6, 6}, rng);
  const Tensor w = uniform_tensor({3, 2, 3, 3}, rng);
  const Tensor b({3}, 0.0);
  const double a = 1.7, c = -0.4;
  const Tensor lhs = conv2d(add(scale(x, a), scale(y, c)), w, b, 1, 1);
  const Tensor rhs = add(scale(conv2d(x, w, b, 1, 1), a), scale(conv2d(y, w, b, 1, 1), c));
  EXPECT_LT(max_abs_diff(lhs, rhs), 1e-10);
}

TEST(Conv2dTest, ChannelMismatchNamesBothShapes) {
  try {
    conv2d(Tensor({2, 4, 4}), Tensor({1, 3, 3, 3}), Tensor({1}));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2x4x4]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[1x3x3x3]"), std::string::npos) << msg;
  }
}

// ---- activations --------------------------------------------------------------

TEST(ActivationTest, Values) {
  EXPECT_DOUBLE_EQ(sigmoid(Tensor::scalar(0.0))[0], 0.5);
  EXPECT_DOUBLE_EQ(leaky_relu(Tensor::scalar(-1.0))[0], -0.2);
  EXPECT_DOUBLE_EQ(leaky_relu(Tensor::scalar(2.0))[0], 2.0);
  EXPECT_DOUBLE_EQ(relu(Tensor::scalar(-3.0))[0], 0.0);
}

TEST(ActivationTest, TanhMatchesLongDoubleReference) {
  Rng rng(21);
  const Tensor x = uniform_tensor({64}, rng, -4.0, 4.0);
  const Tensor y = tanh(x);
  for (Index i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(y[i], static_cast<double>(std::tanh(static_cast<long double>(x[i]))), 1e-12);
  }
}

TEST(ActivationTest, RangesHoldForExtremeInputs) {
  const Tensor x({1, 1, 4}, 0.0);
  Tensor big = x;
  big[0] = -800.0;
  big[1] = 800.0;
  big[2] = -30.0;
  big[3] = 30.0;
  const Tensor s = sigmoid(big);
  const Tensor t = tanh(big);
  EXPECT_TRUE(s.all_finite());
  for (Index i = 0; i < 4; ++i) {
    EXPECT_GE(s[i], 0.0);
    EXPECT_LE(s[i], 1.0);
    EXPECT_GE(t[i], -1.0);
    EXPECT_LE(t[i], 1.0);
  }
}

// ---- elementwise / reductions -------------------------------------------------

TEST(ElementwiseTest, GradOfConstantIsZero) {
  const Tensor c({3, 5, 4}, 0.3);
  EXPECT_EQ(grad_h(c).array().abs().maxCoeff(), 0.0);
  EXPECT_EQ(grad_w(c).array().abs().maxCoeff(), 0.0);
}

TEST(ElementwiseTest, ForwardDifferencesZeroAtLastRowAndColumn) {
  Rng rng(31);
  const Tensor a = uniform_tensor({2, 4, 5}, rng);
  const Tensor gh = grad_h(a);
  const Tensor gw = grad_w(a);
  for (Index c = 0; c < 2; ++c) {
    for (Index x = 0; x < 5; ++x) EXPECT_EQ(gh.at(c, 3, x), 0.0);
    for (Index y = 0; y < 4; ++y) EXPECT_EQ(gw.at(c, y, 4), 0.0);
    EXPECT_DOUBLE_EQ(gh.at(c, 1, 2), a.at(c, 2, 2) - a.at(c, 1, 2));
    EXPECT_DOUBLE_EQ(gw.at(c, 1, 2), a.at(c, 1, 3) - a.at(c, 1, 2));
  }
}

TEST(ElementwiseTest, DivGuardedClampsDenominator) {
  EXPECT_DOUBLE_EQ(div_guarded(Tensor::scalar(1.0), Tensor::scalar(0.0), 1e-4)[0], 1e4);
  EXPECT_DOUBLE_EQ(div_guarded(Tensor::scalar(1.0), Tensor::scalar(-1e-6), 1e-4)[0], -1e4);
  EXPECT_DOUBLE_EQ(div_guarded(Tensor::scalar(1.0), Tensor::scalar(0.5), 1e-4)[0], 2.0);
  EXPECT_THROW(div_guarded(Tensor::scalar(1.0), Tensor::scalar(1.0), 0.0), std::invalid_argument);
}

TEST(ElementwiseTest, BroadcastRules) {
  const Tensor a({3, 2, 2}, 1.0);
  const Tensor b({1, 2, 2}, 2.0);
  EXPECT_EQ(mul(a, b).shape(), (Shape{3, 2, 2}));
  EXPECT_EQ(add(Tensor::scalar(1.0), a).shape(), (Shape{3, 2, 2}));
  EXPECT_THROW(add(a, Tensor({2, 2, 2})), ShapeError);
}

TEST(ElementwiseTest, GaussianBlurOfImpulseIsKernel) {
  Tensor impulse({1, 9, 9}, 0.0);
  impulse.at(0, 4, 4) = 1.0;
  const Tensor out = gaussian_blur(impulse, 5, 1.0);
  double s = 0.0;
  for (int i = -2; i <= 2; ++i) {
    for (int j = -2; j <= 2; ++j) s += std::exp(-(i * i + j * j) / 2.0);
  }
  for (Index y = 0; y < 9; ++y) {
    for (Index x = 0; x < 9; ++x) {
      const Index dy = y - 4, dx = x - 4;
      const double want =
          (std::abs(dy) <= 2 && std::abs(dx) <= 2) ? std::exp(-static_cast<double>(dy * dy + dx * dx) / 2.0) / s : 0.0;
      EXPECT_NEAR(out.at(0, y, x), want, 1e-15);
    }
  }
  EXPECT_NEAR(gaussian_kernel(5, 1.0).array().sum(), 1.0, 1e-15);
}

TEST(ElementwiseTest, MinMaxNormalizeRange) {
  Rng rng(41);
  const double tau = 1e-4;
  const Tensor out = min_max_normalize(uniform_tensor({1, 5, 5}, rng, -3, 2), tau);
  EXPECT_NEAR(out.array().minCoeff(), tau, 1e-15);
  EXPECT_LE(out.array().maxCoeff(), 1.0);
  EXPECT_GE(out.array().maxCoeff(), 1.0 - 2 * tau);
  const Tensor flat = min_max_normalize(Tensor({1, 3, 3}, 0.8), tau);
  for (Index i = 0; i < flat.size(); ++i) EXPECT_DOUBLE_EQ(flat[i], tau);
}

TEST(ElementwiseTest, ChannelMaxAndConcat) {
  Rng rng(42);
  const Tensor a = uniform_tensor({3, 2, 3}, rng);
  const Tensor m = channel_max(a);
  for (Index y = 0; y < 2; ++y) {
    for (Index x = 0; x < 3; ++x) {
      EXPECT_EQ(m.at(0, y, x), std::max({a.at(0, y, x), a.at(1, y, x), a.at(2, y, x)}));
    }
  }
  const Tensor c = concat_channels(std::vector<Tensor>{a, m});
  EXPECT_EQ(c.shape(), (Shape{4, 2, 3}));
  EXPECT_EQ(c.at(3, 1, 2), m.at(0, 1, 2));
  EXPECT_EQ(c.at(1, 0, 1), a.at(1, 0, 1));
}

TEST(ElementwiseTest, Reductions) {
  const Tensor t(Shape{4}, Eigen::ArrayXd::LinSpaced(4, -1.0, 2.0));
  EXPECT_DOUBLE_EQ(sum(t)[0], 2.0);
  EXPECT_DOUBLE_EQ(mean(t)[0], 0.5);
  EXPECT_DOUBLE_EQ(abs_sum(t)[0], 1.0 + 0.0 + 1.0 + 2.0);
  EXPECT_DOUBLE_EQ(sq_sum(t)[0], 1.0 + 0.0 + 1.0 + 4.0);
}

// ---- backward -----------------------------------------------------------------

TEST(BackwardTest, SumGivesOnes) {
  Parameter p(Tensor({2, 3}, 0.7));
  Tape tape;
  tape.backward(sum(tape.parameter(p)));
  for (Index i = 0; i < p.grad.size(); ++i) EXPECT_DOUBLE_EQ(p.grad[i], 1.0);
  EXPECT_EQ(tape.size(), 0U);
}

TEST(BackwardTest, SquareSum) {
  Parameter p(Tensor({1}, 3.0));
  Tape tape;
  tape.backward(sq_sum(tape.parameter(p)));
  EXPECT_DOUBLE_EQ(p.grad[0], 6.0);
}

TEST(BackwardTest, NonScalarLossThrows) {
  Parameter p(Tensor({2}, 1.0));
  Tape tape;
  EXPECT_THROW(tape.backward(tape.parameter(p)), ShapeError);
}

TEST(BackwardTest, ConstantsGetNoGradient) {
  Parameter p(Tensor({1, 2, 2}, 0.5));
  Tape tape;
  const Var c = tape.constant(Tensor({1, 2, 2}, 2.0));
  EXPECT_FALSE(c.requires_grad());
  tape.backward(sum(c * tape.parameter(p)));
  for (Index i = 0; i < p.grad.size(); ++i) EXPECT_DOUBLE_EQ(p.grad[i], 2.0);
}

TEST(BackwardTest, SharedSubexpressionAccumulates) {
  Parameter p(Tensor({1}, 2.0));
  Tape tape;
  const Var x = tape.parameter(p);
  const Var y = x * x;
  tape.backward(sum(y + y * x));  // 2x^2... d/dx (x^2 + x^3) = 2x + 3x^2
  EXPECT_DOUBLE_EQ(p.grad[0], 2 * 2.0 + 3 * 4.0);
}

TEST(BackwardTest, ReverseOrderVisitsEachNodeOnce) {
  Parameter p(Tensor({1}, 1.0));
  Tape tape;
  std::vector<int> order;
  const Var x = tape.parameter(p);
  const Var a = tape.record(x.value(), {x}, [&order, x](const Tensor& g, Tape& t) {
    order.push_back(1);
    t.accumulate(x, g);
  });
  const Var b = tape.record(a.value(), {a}, [&order, a](const Tensor& g, Tape& t) {
    order.push_back(2);
    t.accumulate(a, g);
  });
  tape.backward(b);
  EXPECT_EQ(order, (std::vector<int>{2, 1}));
  EXPECT_DOUBLE_EQ(p.grad[0], 1.0);
}

TEST(BackwardTest, CompositeMatchesFiniteDifferences) {
  Rng rng(51);
  const testing::OpFn op = [](std::vector<Var>& v) { return abs_sum(sigmoid(conv2d(v[0], v[1], v[2], 1, 1))); };
  const std::vector<Tensor> inputs{uniform_tensor({1, 4, 4}, rng), uniform_tensor({1, 1, 3, 3}, rng),
                                   uniform_tensor({1}, rng)};
  EXPECT_LT(testing::gradient_error(op, inputs, rng), 1e-4);
}

class GradientSuite : public ::testing::TestWithParam<std::size_t> {};

TEST_P(GradientSuite, MatchesFiniteDifferences) {
  const testing::GradCase c = testing::gradient_cases()[GetParam()];
  Rng rng(1000 + GetParam());
  for (int i = 0; i < testing::kGradInstances; ++i) {
    const double err = testing::gradient_error(c.op, c.inputs(rng), rng);
    ASSERT_LT(err, testing::kGradTolerance) << c.name << " instance " << i;
  }
}

INSTANTIATE_TEST_SUITE_P(AllOps, GradientSuite, ::testing::Range<std::size_t>(0, testing::gradient_cases().size()),
                         [](const ::testing::TestParamInfo<std::size_t>& info) {
                           std::string name = testing::gradient_cases()[info.param].name;
                           for (char& ch : name) {
                             if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
                           }
                           return name;
                         });

// ---- Adam ---------------------------------------------------------------------

TEST(AdamTest, FirstStepMovesByLearningRate) {
  Parameter p(Tensor({1}, 1.0));
  p.grad[0] = 1.0;
  std::vector<Parameter*> ps{&p};
  adam_step(ps, {.lr = 0.01});
  // m_hat = v_hat = 1, update = 0.01 * 1 / (1 + 1e-8)
  EXPECT_NEAR(p.value[0], 1.0 - 0.01 / (1.0 + 1e-8), 1e-15);
  EXPECT_EQ(p.step_count, 1);
  EXPECT_EQ(p.grad[0], 0.0);
}

TEST(AdamTest, ZeroGradientLeavesValue) {
  Parameter p(Tensor({3}, 0.25));
  std::vector<Parameter*> ps{&p};
  adam_step(ps, {.lr = 0.01});
  for (Index i = 0; i < 3; ++i) EXPECT_EQ(p.value[i], 0.25);
}

TEST(AdamTest, TwoStepsOnConstantGradient) {
  Parameter p(Tensor({1}, 1.0));
  std::vector<Parameter*> ps{&p};
  for (int i = 0; i < 2; ++i) {
    p.grad[0] = 1.0;
    adam_step(ps, {.lr = 0.01});
  }
  EXPECT_NEAR(p.value[0], 1.0 - 0.01 - 0.01, 1e-6);
}

TEST(AdamTest, MomentsStartAtZero) {
  Parameter p(Tensor({2, 2}, 1.0));
  EXPECT_EQ(p.m.shape(), p.value.shape());
  EXPECT_EQ(p.v.shape(), p.value.shape());
  EXPECT_EQ(p.m.array().abs().maxCoeff(), 0.0);
  EXPECT_EQ(p.v.array().abs().maxCoeff(), 0.0);
}

}  // namespace
}  // namespace lowlight
