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

#include "lowlight/denoiser.hpp"
#include "lowlight/metrics.hpp"
#include "lowlight/ops.hpp"
#include "lowlight/rng.hpp"
#include "support/oracles.hpp"

namespace lowlight {
namespace {

double max_abs_diff(const Tensor& a, const Tensor& b) { return (a.array() - b.array()).abs().maxCoeff(); }

double sr_value(const Tensor& y1, const Tensor& y2, const Tensor& fy1, const Tensor& fy2) {
  Tape tape;
  return loss_sr(tape.constant(y1), tape.constant(y2), tape.constant(fy1), tape.constant(fy2)).value()[0];
}

double sc_value(const Tensor& y1, const Tensor& y2, const Tensor& img, const Tensor& fy1, const Tensor& fy2,
                const Tensor& fimg) {
  Tape tape;
  return loss_sc(tape.constant(y1), tape.constant(y2), tape.constant(img), tape.constant(fy1), tape.constant(fy2),
                 tape.constant(fimg))
      .value()[0];
}

// Sets a NoiseNet to f(x) = k * x for x >= 0 using centre taps only, so the
// zero padding never reaches the output.
void make_scaled_identity(NoiseNet& f, double k) {
  for (Parameter* p : f.parameters()) p->value.array().setZero();
  for (Index c = 0; c < 3; ++c) {
    f.layers[0].weight.value[((c * 3 + c) * 3 + 1) * 3 + 1] = k;
    f.layers[1].weight.value[((c * NoiseNet::kWidth + c) * 3 + 1) * 3 + 1] = 1.0;
    f.layers[2].weight.value[((c * NoiseNet::kWidth + c) * 3 + 1) * 3 + 1] = 1.0;
  }
}

// ---- pair downsampling ------------------------------------------------------

TEST(PairDownsample, TwoByTwo) {
  Tensor img({1, 2, 2});
  img[0] = 0.1;  // a
  img[1] = 0.2;  // b
  img[2] = 0.4;  // c
  img[3] = 0.8;  // d
  const DownsamplePair p = pair_downsample(img);
  ASSERT_EQ(p.y1.shape(), (Shape{1, 1, 1}));
  EXPECT_DOUBLE_EQ(p.y1[0], (0.2 + 0.4) / 2);
  EXPECT_DOUBLE_EQ(p.y2[0], (0.1 + 0.8) / 2);
}

TEST(PairDownsample, ConstantImage) {
  const DownsamplePair p = pair_downsample(Tensor({3, 6, 8}, 0.3));
  for (Index i = 0; i < p.y1.size(); ++i) {
    EXPECT_DOUBLE_EQ(p.y1[i], 0.3);
    EXPECT_DOUBLE_EQ(p.y2[i], 0.3);
  }
}

TEST(PairDownsample, OddSizeCropsAndMatchesLoop) {
  Rng rng(1);
  const Tensor img = uniform_tensor({3, 6, 7}, rng, 0.0, 1.0);
  const DownsamplePair p = pair_downsample(img);
  ASSERT_EQ(p.y1.shape(), (Shape{3, 3, 3}));
  const oracle::Pair ref = oracle::pair_downsample(img);
  EXPECT_EQ(max_abs_diff(p.y1, ref.y1), 0.0);
  EXPECT_EQ(max_abs_diff(p.y2, ref.y2), 0.0);
}

TEST(PairDownsample, SumIsAveragePool) {
  Rng rng(2);
  const Tensor img = uniform_tensor({3, 8, 10}, rng, 0.0, 1.0);
  const DownsamplePair p = pair_downsample(img);
  for (Index c = 0; c < 3; ++c) {
    for (Index i = 0; i < 4; ++i) {
      for (Index j = 0; j < 5; ++j) {
        const double avg = (img.at(c, 2 * i, 2 * j) + img.at(c, 2 * i, 2 * j + 1) + img.at(c, 2 * i + 1, 2 * j) +
                            img.at(c, 2 * i + 1, 2 * j + 1)) /
                           4.0;
        EXPECT_NEAR(0.5 * (p.y1.at(c, i, j) + p.y2.at(c, i, j)), avg, 1e-15);
      }
    }
  }
}

TEST(PairDownsample, TooSmallThrows) {
  EXPECT_THROW(pair_downsample(Tensor({3, 1, 5})), ShapeError);
  EXPECT_THROW(pair_downsample(Tensor({3, 5, 1})), ShapeError);
}

// ---- losses -----------------------------------------------------------------

TEST(LossSr, ZeroWhenSiblingsEqual) {
  Rng rng(3);
  const Tensor y = uniform_tensor({3, 4, 4}, rng, 0.0, 1.0);
  EXPECT_EQ(sr_value(y, y, Tensor({3, 4, 4}), Tensor({3, 4, 4})), 0.0);
}

TEST(LossSr, ConstantOffset) {
  Rng rng(4);
  const double delta = 0.15;
  const Tensor y2 = uniform_tensor({3, 5, 5}, rng, 0.0, 0.8);
  Tensor y1 = y2;
  y1.array() += delta;
  EXPECT_NEAR(sr_value(y1, y2, Tensor({3, 5, 5}), Tensor({3, 5, 5})), delta * delta, 1e-15);
}

TEST(LossSr, SymmetricInSiblings) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(10 + seed);
    const Tensor y1 = uniform_tensor({3, 4, 5}, rng, 0.0, 1.0);
    const Tensor y2 = uniform_tensor({3, 4, 5}, rng, 0.0, 1.0);
    const Tensor f1 = uniform_tensor({3, 4, 5}, rng, -0.1, 0.1);
    const Tensor f2 = uniform_tensor({3, 4, 5}, rng, -0.1, 0.1);
    EXPECT_NEAR(sr_value(y1, y2, f1, f2), sr_value(y2, y1, f2, f1), 1e-15);
  }
}

TEST(LossSr, MatchesLoopOracle) {
  Rng rng(5);
  const Tensor y1 = uniform_tensor({3, 6, 4}, rng, 0.0, 1.0);
  const Tensor y2 = uniform_tensor({3, 6, 4}, rng, 0.0, 1.0);
  const Tensor f1 = uniform_tensor({3, 6, 4}, rng, -0.2, 0.2);
  const Tensor f2 = uniform_tensor({3, 6, 4}, rng, -0.2, 0.2);
  EXPECT_NEAR(sr_value(y1, y2, f1, f2), oracle::loss_sr(y1, y2, f1, f2), 1e-12);
}

TEST(LossSc, ZeroNetworkGivesSiblingDistance) {
  Rng rng(6);
  const Tensor img = uniform_tensor({3, 6, 8}, rng, 0.0, 1.0);
  const DownsamplePair p = pair_downsample(img);
  const Tensor z({3, 3, 4});
  const double expected = (p.y1.array() - p.y2.array()).square().mean();
  EXPECT_NEAR(sc_value(p.y1, p.y2, img, z, z, Tensor({3, 6, 8})), expected, 1e-15);
}

TEST(LossSc, ConstantFieldsClosedForm) {
  const double v = 0.6, a = 0.05, b = -0.02, c = 0.03;
  const DownsamplePair p = pair_downsample(Tensor({3, 4, 4}, v));
  const double value = sc_value(p.y1, p.y2, Tensor({3, 4, 4}, v), Tensor({3, 2, 2}, a), Tensor({3, 2, 2}, b),
                                Tensor({3, 4, 4}, c));
  // Residuals are (v - a) - (v - c) and (v - b) - (v - c).
  EXPECT_NEAR(value, 0.5 * ((c - a) * (c - a) + (c - b) * (c - b)), 1e-15);
}

TEST(LossSc, ScaledIdentityNetOnConstantImage) {
  Rng rng(7);
  NoiseNet f(rng);
  make_scaled_identity(f, 0.3);
  const Tensor img({3, 6, 6}, 0.5);
  const DownsamplePair p = pair_downsample(img);
  const Tensor fy1 = f(p.y1);
  EXPECT_NEAR(fy1.array().maxCoeff(), 0.15, 1e-15);
  EXPECT_NEAR(fy1.array().minCoeff(), 0.15, 1e-15);
  EXPECT_NEAR(sc_value(p.y1, p.y2, img, fy1, f(p.y2), f(img)), 0.0, 1e-15);
}

TEST(LossSc, MatchesLoopOracle) {
  Rng rng(8);
  const Tensor img = uniform_tensor({3, 8, 6}, rng, 0.0, 1.0);
  const DownsamplePair p = pair_downsample(img);
  const Tensor f1 = uniform_tensor({3, 4, 3}, rng, -0.2, 0.2);
  const Tensor f2 = uniform_tensor({3, 4, 3}, rng, -0.2, 0.2);
  const Tensor fi = uniform_tensor({3, 8, 6}, rng, -0.2, 0.2);
  EXPECT_NEAR(sc_value(p.y1, p.y2, img, f1, f2, fi), oracle::loss_sc(p.y1, p.y2, img, f1, f2, fi), 1e-12);
}

TEST(LossPlainMse, MatchesLoopOracle) {
  Rng rng(9);
  const Tensor y2 = uniform_tensor({3, 4, 4}, rng, 0.0, 1.0);
  const Tensor f1 = uniform_tensor({3, 4, 4}, rng, -0.2, 0.2);
  Tape tape;
  EXPECT_NEAR(loss_plain_mse(tape.constant(y2), tape.constant(f1)).value()[0], oracle::loss_plain_mse(y2, f1),
              1e-14);
}

// ---- network and restore ----------------------------------------------------

TEST(NoiseNet, ShapePreservedAndSignedOutput) {
  Rng rng(10);
  NoiseNet f(rng);
  ASSERT_EQ(f.layers.size(), 3u);
  EXPECT_EQ(f.parameters().size(), 6u);
  Rng data(11);
  const Tensor x = uniform_tensor({3, 7, 9}, data, 0.0, 1.0);
  const Tensor y = f(x);
  EXPECT_EQ(y.shape(), x.shape());
  // Linear head: the output is not confined to a positive range.
  EXPECT_LT(y.array().minCoeff(), 0.0);
  Tape tape;
  EXPECT_LT(max_abs_diff(f(tape.constant(x)).value(), y), 1e-15);
}

TEST(FinalRestore, ZeroNetIsIdentity) {
  Rng rng(12);
  NoiseNet f(rng);
  for (Parameter* p : f.parameters()) p->value.array().setZero();
  const Tensor img = uniform_tensor({3, 5, 5}, rng, 0.0, 1.0);
  EXPECT_EQ(max_abs_diff(final_restore(img, f), img), 0.0);
}

TEST(FinalRestore, IdentityNetGivesZeros) {
  Rng rng(13);
  NoiseNet f(rng);
  make_scaled_identity(f, 1.0);
  const Tensor img = uniform_tensor({3, 5, 6}, rng, 0.0, 1.0);
  const Tensor out = final_restore(img, f);
  EXPECT_LT(out.array().abs().maxCoeff(), 1e-15);
}

TEST(FinalRestore, MatchesSubtractThenClamp) {
  Rng rng(14);
  NoiseNet f(rng);
  const Tensor img = uniform_tensor({3, 6, 5}, rng, 0.0, 1.0);
  const Tensor noise = f(img);
  const Tensor out = final_restore(img, f);
  for (Index i = 0; i < img.size(); ++i) EXPECT_EQ(out[i], std::clamp(img[i] - noise[i], 0.0, 1.0));
}

// ---- optimization -----------------------------------------------------------

TEST(OptimizeDenoiser, ZeroIterationsKeepsInitialNet) {
  PipelineConfig cfg;
  cfg.denoise_iters = 0;
  cfg.seed = 3;
  Rng data(15);
  const Tensor img = uniform_tensor({3, 6, 6}, data, 0.0, 1.0);
  const DenoiserResult r = optimize_denoiser(img, cfg);
  EXPECT_TRUE(r.curve.empty());
  EXPECT_TRUE(final_restore(img, r.net).all_finite());
}

TEST(OptimizeDenoiser, DeterministicAndOddSizes) {
  PipelineConfig cfg;
  cfg.denoise_iters = 15;
  cfg.seed = 4;
  Rng data(16);
  const Tensor img = uniform_tensor({3, 9, 7}, data, 0.0, 1.0);
  const DenoiserResult a = optimize_denoiser(img, cfg);
  const DenoiserResult b = optimize_denoiser(img, cfg);
  EXPECT_EQ(max_abs_diff(final_restore(img, a.net), final_restore(img, b.net)), 0.0);
  ASSERT_EQ(a.curve.size(), b.curve.size());
  EXPECT_EQ(a.curve.back().total, b.curve.back().total);
  EXPECT_EQ(final_restore(img, a.net).shape(), img.shape());
}

TEST(OptimizeDenoiser, SwitchesGateTerms) {
  PipelineConfig cfg;
  cfg.denoise_iters = 3;
  cfg.log_every = 1;
  cfg.use_sc = false;
  cfg.use_plain_mse = true;
  Rng data(17);
  const DenoiserResult r = optimize_denoiser(uniform_tensor({3, 6, 6}, data, 0.0, 1.0), cfg);
  ASSERT_EQ(r.curve.size(), 3u);
  for (const DenoiseLoss& l : r.curve) {
    EXPECT_EQ(l.sc, 0.0);
    EXPECT_GT(l.plain, 0.0);
    EXPECT_DOUBLE_EQ(l.total, l.sr + l.plain);
  }
}

TEST(OptimizeDenoiser, ConstantImageLearnsZeroNoise) {
  PipelineConfig cfg;
  cfg.seed = 5;
  const Tensor img({3, 16, 16}, 0.5);
  const DenoiserResult r = optimize_denoiser(img, cfg);
  EXPECT_LT(r.net(img).array().abs().maxCoeff(), 0.01);
}

// Below about 48x48 the net has enough weights to memorise the sibling
// images and the restored result gets noisier instead.
TEST(OptimizeDenoiser, ReducesSyntheticNoise) {
  PipelineConfig cfg;
  cfg.seed = 6;
  const Tensor clean({3, 64, 64}, 0.5);
  Rng rng(18);
  Tensor noisy = clean;
  noisy.array() += normal_tensor({3, 64, 64}, rng, 25.0 / 255.0).array();
  const DenoiserResult r = optimize_denoiser(noisy, cfg);
  EXPECT_LT(mse(final_restore(noisy, r.net), clean), mse(noisy, clean));
}

}  // namespace
}  // namespace lowlight
