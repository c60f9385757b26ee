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

#ifndef LOWLIGHT_DENOISER_HPP
#define LOWLIGHT_DENOISER_HPP

#include <vector>

#include "lowlight/config.hpp"
#include "lowlight/layers.hpp"

// Self-supervised residual denoiser trained on two half-resolution views of
// the image built from the two diagonals of every 2x2 block.

namespace lowlight {

/// conv 3->32 ReLU, conv 32->32 ReLU, conv 32->3. Predicts the noise.
struct NoiseNet {
  static constexpr Index kWidth = 32;

  explicit NoiseNet(Rng& rng);

  Var operator()(const Var& x) const;
  Tensor operator()(const Tensor& x) const;
  std::vector<Parameter*> parameters();

  std::vector<ConvLayer> layers;
};

struct DownsamplePair {
  Tensor y1;  // anti-diagonal average
  Tensor y2;  // main-diagonal average
};

/// Crops to even size, then y1 = (x[2i][2j+1] + x[2i+1][2j]) / 2 and
/// y2 = (x[2i][2j] + x[2i+1][2j+1]) / 2 per channel.
DownsamplePair pair_downsample(const Tensor& img);

/// 0.5 (mean((y1 - f(y1) - y2)^2) + mean((y2 - f(y2) - y1)^2)).
Var loss_sr(const Var& y1, const Var& y2, const Var& f_y1, const Var& f_y2);

/// Same as loss_sr with the siblings replaced by the downsampled full
/// resolution estimate r = img - f(img): y1 is compared with the main
/// diagonal of r and y2 with the anti diagonal.
Var loss_sc(const Var& y1, const Var& y2, const Var& img, const Var& f_y1, const Var& f_y2, const Var& f_img);

/// mean((f(y1) - y2)^2).
Var loss_plain_mse(const Var& y2, const Var& f_y1);

struct DenoiseLoss {
  long iteration = 0;
  double total = 0.0;
  double sr = 0.0;
  double sc = 0.0;
  double plain = 0.0;
};

struct DenoiserResult {
  NoiseNet net;
  std::vector<DenoiseLoss> curve;
};

/// Trains a freshly seeded NoiseNet on img for cfg.denoise_iters Adam steps.
DenoiserResult optimize_denoiser(const Tensor& img, const PipelineConfig& cfg);

/// clamp(img - f(img), 0, 1) at full resolution.
Tensor final_restore(const Tensor& img, const NoiseNet& f);

}  // namespace lowlight

#endif  // LOWLIGHT_DENOISER_HPP
