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

#include "lowlight/decomposition.hpp"

#include <cmath>

#include "lowlight/adam.hpp"

namespace lowlight {

namespace {

constexpr Index kGaussianSize = 5;
constexpr double kGaussianSigma = 1.0;

Tensor channel_mean(const Tensor& a) {
  Tensor out(Shape{1, a.height(), a.width()});
  out.array() = a.matrix().colwise().mean().transpose().array();
  return out;
}

void check_finite(double v, const char* term, long iteration) {
  if (!std::isfinite(v)) throw NumericalError("decomposition", term, iteration);
}

}  // namespace

DecompositionNets::DecompositionNets(Rng& rng) {
  const Index w = kWidth;
  illum.emplace_back(4, w, rng);
  for (int i = 0; i < 3; ++i) illum.emplace_back(w, w, rng);
  illum.emplace_back(w, 1, rng);
  trunk.emplace_back(4, w, rng);
  for (int i = 0; i < 5; ++i) trunk.emplace_back(w, w, rng);
  heads.emplace_back(w, 3, rng);
  dense.emplace_back(w, w, rng);
  dense.emplace_back(2 * w, w, rng);
  dense.emplace_back(3 * w, w, rng);
  heads.emplace_back(w, 3, rng);
}

std::vector<Parameter*> DecompositionNets::parameters() {
  std::vector<Parameter*> out;
  collect_parameters(illum, out);
  collect_parameters(trunk, out);
  collect_parameters(dense, out);
  collect_parameters(heads, out);
  return out;
}

BranchOutputs forward_decompose(Tape& tape, const Tensor& input, DecompositionNets& nets) {
  if (input.rank() != 3 || input.channels() != 4) {
    throw ShapeError("decomposition input must be (4, H, W), got " + shape_string(input.shape()));
  }
  const Var x = tape.constant(input);

  Var h = x;
  for (std::size_t i = 0; i + 1 < nets.illum.size(); ++i) h = relu(nets.illum[i](h));
  const Var L1 = sigmoid(nets.illum.back()(h));

  Var t = x;
  for (const ConvLayer& layer : nets.trunk) t = leaky_relu(layer(t));
  const Var CR = sigmoid(nets.heads[0](t));

  const Var d1 = leaky_relu(nets.dense[0](t));
  const Var d2 = leaky_relu(nets.dense[1](concat_channels({t, d1})));
  const Var d3 = leaky_relu(nets.dense[2](concat_channels({t, d1, d2})));
  const Var N = tanh(nets.heads[1](d3));
  return {L1, CR, N};
}

Tensor to_rgb(const Tensor& image) {
  if (image.rank() != 3 || (image.channels() != 1 && image.channels() != 3)) {
    throw ShapeError("image must be (1 or 3, H, W), got " + shape_string(image.shape()));
  }
  if (image.channels() == 3) return image;
  Tensor out(Shape{3, image.height(), image.width()});
  for (Index c = 0; c < 3; ++c) out.plane(c) = image.plane(0);
  return out;
}

Tensor initial_illumination(const Tensor& image) {
  if (image.rank() != 3) throw ShapeError("image must be (C, H, W), got " + shape_string(image.shape()));
  return channel_max(image);
}

Tensor gamma_correct(const Tensor& L1, double gamma) { return pow_elem(L1, gamma); }

Tensor coarse_enhance(const Tensor& I, const Tensor& N, const Tensor& L1, const Tensor& L2, double eps) {
  return clamp(mul(L2, div_guarded(sub(I, N), L1, eps)), 0.0, 1.0);
}

Var loss_recon(const Var& I, const Var& L0, const Var& L1, const Var& CR, const Var& N, double eps) {
  const Var res = mean(abs(I - (L1 * CR + N)));
  const Var ill = mean(abs(L1 - L0));
  const Var ref = mean(abs(clamp(div_guarded(I, L0, eps), 0.0, 1.0) - CR));
  return res + ill + ref;
}

TvWeights tv_weights(const Tensor& dL1, const Tensor& dCR, const Tensor& L1, double eps, double tau) {
  const Tensor lambda_ref = gaussian_blur(square(dL1), kGaussianSize, kGaussianSigma);
  const Tensor lambda_ill = min_max_normalize(shift(mul(L1, channel_mean(square(dCR))), tau), tau);
  const Tensor one = Tensor::scalar(1.0);
  return {div_guarded(one, lambda_ref, eps), div_guarded(one, lambda_ill, eps)};
}

Var loss_tv(const Var& L1, const Var& CR, double eps, double tau) {
  Tape& tape = L1.tape();
  Var total;
  for (int dir = 0; dir < 2; ++dir) {
    const Var dL = dir == 0 ? grad_h(L1) : grad_w(L1);
    const Var dR = dir == 0 ? grad_h(CR) : grad_w(CR);
    const TvWeights w = tv_weights(dL.value(), dR.value(), L1.value(), eps, tau);
    const Var term = mean(tape.constant(w.ref) * abs(dR)) + mean(tape.constant(w.ill) * abs(dL));
    total = total.valid() ? total + term : term;
  }
  return 0.5 * total;
}

Var loss_noise(const Var& L1, const Var& N) { return sqrt(mean(square(L1 * N))); }

namespace {

struct LossTerms {
  Var total;
  double recon = 0.0;
  double tv = 0.0;
  double noise = 0.0;
};

LossTerms decomposition_loss(Tape& tape, const Tensor& I, const Tensor& L0, const BranchOutputs& b,
                             const PipelineConfig& cfg, long iteration) {
  LossTerms t;
  const Var recon = loss_recon(tape.constant(I), tape.constant(L0), b.L1, b.CR, b.N, cfg.epsilon);
  t.recon = recon.value()[0];
  check_finite(t.recon, "reconstruction loss", iteration);
  t.total = recon;
  if (cfg.use_tv) {
    const Var tv = loss_tv(b.L1, b.CR, cfg.epsilon, cfg.tau);
    t.tv = tv.value()[0];
    check_finite(t.tv, "total variation loss", iteration);
    t.total = t.total + tv;
  }
  if (cfg.use_noise_loss) {
    const Var noise = loss_noise(b.L1, b.N);
    t.noise = noise.value()[0];
    check_finite(t.noise, "noise loss", iteration);
    t.total = t.total + cfg.lambda_n * noise;
  }
  check_finite(t.total.value()[0], "total loss", iteration);
  return t;
}

}  // namespace

DecompositionOutput optimize_decomposition(const Tensor& image, const PipelineConfig& cfg) {
  cfg.validate();
  DecompositionOutput out;
  out.I = to_rgb(image);
  out.L0 = initial_illumination(out.I);
  const Tensor input = concat_channels(std::vector<Tensor>{out.I, out.L0});

  Rng rng(cfg.seed);
  DecompositionNets nets(rng);
  const std::vector<Parameter*> params = nets.parameters();
  const AdamOptions adam{.lr = cfg.decom_lr};

  Tape tape;
  for (long it = 0; it < cfg.decom_iters; ++it) {
    const BranchOutputs b = forward_decompose(tape, input, nets);
    const LossTerms terms = decomposition_loss(tape, out.I, out.L0, b, cfg, it);
    if (it % cfg.log_every == 0 || it + 1 == cfg.decom_iters) {
      out.curve.push_back({it, terms.total.value()[0], terms.recon, terms.tv, terms.noise});
    }
    tape.backward(terms.total);
    adam_step(params, adam);
  }

  const BranchOutputs b = forward_decompose(tape, input, nets);
  out.L1 = b.L1.value();
  out.CR = b.CR.value();
  out.N = b.N.value();
  tape.clear();
  if (!out.L1.all_finite() || !out.CR.all_finite() || !out.N.all_finite()) {
    throw NumericalError("decomposition", "network output", cfg.decom_iters);
  }
  apply_gamma(out, cfg.gamma, cfg.epsilon);
  return out;
}

void apply_gamma(DecompositionOutput& out, double gamma, double eps) {
  out.L2 = gamma_correct(out.L1, gamma);
  out.coarse = coarse_enhance(out.I, out.N, out.L1, out.L2, eps);
}

}  // namespace lowlight
