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

#ifndef LOWLIGHT_DECOMPOSITION_HPP
#define LOWLIGHT_DECOMPOSITION_HPP

#include <vector>

#include "lowlight/config.hpp"
#include "lowlight/layers.hpp"

// Retinex decomposition I = L1 * CR + N by per-image optimization of two
// small networks, followed by gamma correction of the illumination and the
// coarse enhancement L2 * (I - N) / L1.

namespace lowlight {

/// Illumination branch and reflection-noise branch.
///
/// Both take the 4-channel stack (I, L0). The illumination branch is five
/// convolutions (ReLU x4, Sigmoid). The reflection-noise branch is a
/// six-layer LeakyReLU trunk feeding a Sigmoid reflectance head and a
/// three-layer dense block with a Tanh noise head.
struct DecompositionNets {
  static constexpr Index kWidth = 32;

  explicit DecompositionNets(Rng& rng);

  std::vector<Parameter*> parameters();

  std::vector<ConvLayer> illum;  // 4->32->32->32->32->1
  std::vector<ConvLayer> trunk;  // 4->32, then 32->32 x5
  std::vector<ConvLayer> dense;  // 32->32, 64->32, 96->32
  std::vector<ConvLayer> heads;  // reflectance 32->3, noise 32->3
};

struct BranchOutputs {
  Var L1;  // (1, H, W) in [0, 1]
  Var CR;  // (3, H, W) in [0, 1]
  Var N;   // (3, H, W) in [-1, 1]
};

/// Records both branches on the tape. `input` is concat(I, L0).
BranchOutputs forward_decompose(Tape& tape, const Tensor& input, DecompositionNets& nets);

/// Per-pixel channel maximum; a 1-channel image is returned unchanged.
Tensor initial_illumination(const Tensor& image);

/// Repeats a 1-channel image to 3 channels; 3-channel input passes through.
Tensor to_rgb(const Tensor& image);

Tensor gamma_correct(const Tensor& L1, double gamma);

/// clamp(L2 * (I - N) / max(L1, eps), 0, 1).
Tensor coarse_enhance(const Tensor& I, const Tensor& N, const Tensor& L1, const Tensor& L2, double eps);

// Losses. All norms are mean-reduced.

/// mean|I - (L1 CR + N)| + mean|L1 - L0| + mean|clamp(I / L0, 0, 1) - CR|.
Var loss_recon(const Var& I, const Var& L0, const Var& L1, const Var& CR, const Var& N, double eps);

/// Edge-aware total variation with detached weights, averaged over the
/// vertical and horizontal directions:
///   w_ref = 1 / max(G * (dL1)^2, eps)          on |dCR|
///   w_ill = 1 / max(norm(L1 * (dCR)^2 + tau), eps)  on |dL1|
/// (dCR)^2 is averaged over channels and norm() is min-max normalization.
Var loss_tv(const Var& L1, const Var& CR, double eps, double tau);

/// Guidance weights of loss_tv for one direction, exposed for testing.
struct TvWeights {
  Tensor ref;  // (1, H, W)
  Tensor ill;  // (1, H, W)
};
TvWeights tv_weights(const Tensor& dL1, const Tensor& dCR, const Tensor& L1, double eps, double tau);

/// sqrt(mean((L1 N)^2)).
Var loss_noise(const Var& L1, const Var& N);

struct DecompositionLoss {
  long iteration = 0;
  double total = 0.0;
  double recon = 0.0;
  double tv = 0.0;
  double noise = 0.0;
};

struct DecompositionOutput {
  Tensor I;  // (3, H, W) input
  Tensor L0;
  Tensor L1;
  Tensor CR;
  Tensor N;
  Tensor L2;
  Tensor coarse;
  std::vector<DecompositionLoss> curve;
};

/// Trains freshly seeded nets on one image for cfg.decom_iters Adam steps,
/// then packages the final forward pass. Throws NumericalError when a loss
/// term stops being finite.
DecompositionOutput optimize_decomposition(const Tensor& image, const PipelineConfig& cfg);

/// Recomputes L2 and the coarse result for another gamma. The decomposition
/// itself does not depend on gamma.
void apply_gamma(DecompositionOutput& out, double gamma, double eps);

}  // namespace lowlight

#endif  // LOWLIGHT_DECOMPOSITION_HPP
