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

#include "lowlight/denoiser.hpp"

#include <cmath>

#include "lowlight/adam.hpp"

namespace lowlight {

namespace {

// Keeps the denoiser's weights independent of the decomposition nets built
// from the same seed.
constexpr std::uint64_t kStreamSalt = 0x9e3779b97f4a7c15ULL;

void check_finite(double v, const char* term, long iteration) {
  if (!std::isfinite(v)) throw NumericalError("denoiser", term, iteration);
}

}  // namespace

NoiseNet::NoiseNet(Rng& rng) {
  layers.emplace_back(3, kWidth, rng);
  layers.emplace_back(kWidth, kWidth, rng);
  layers.emplace_back(kWidth, 3, rng);
}

Var NoiseNet::operator()(const Var& x) const { return layers[2](relu(layers[1](relu(layers[0](x))))); }

Tensor NoiseNet::operator()(const Tensor& x) const { return layers[2](relu(layers[1](relu(layers[0](x))))); }

std::vector<Parameter*> NoiseNet::parameters() {
  std::vector<Parameter*> out;
  collect_parameters(layers, out);
  return out;
}

DownsamplePair pair_downsample(const Tensor& img) {
  if (img.rank() != 3) throw ShapeError("pair_downsample expects (C, H, W), got " + shape_string(img.shape()));
  if (img.height() < 2 || img.width() < 2) {
    throw ShapeError("pair_downsample needs at least 2x2, got " + shape_string(img.shape()));
  }
  return {diagonal_pool(img, Diagonal::anti), diagonal_pool(img, Diagonal::main)};
}

Var loss_sr(const Var& y1, const Var& y2, const Var& f_y1, const Var& f_y2) {
  return 0.5 * (mean(square(y1 - f_y1 - y2)) + mean(square(y2 - f_y2 - y1)));
}

Var loss_sc(const Var& y1, const Var& y2, const Var& img, const Var& f_y1, const Var& f_y2, const Var& f_img) {
  const Var r = img - f_img;
  return 0.5 * (mean(square(y1 - f_y1 - diagonal_pool(r, Diagonal::main))) +
                mean(square(y2 - f_y2 - diagonal_pool(r, Diagonal::anti))));
}

Var loss_plain_mse(const Var& y2, const Var& f_y1) { return mean(square(f_y1 - y2)); }

DenoiserResult optimize_denoiser(const Tensor& img, const PipelineConfig& cfg) {
  cfg.validate();
  if (img.rank() != 3 || img.channels() != 3) {
    throw ShapeError("denoiser input must be (3, H, W), got " + shape_string(img.shape()));
  }
  Rng rng(cfg.seed ^ kStreamSalt);
  DenoiserResult result{NoiseNet(rng), {}};
  NoiseNet& f = result.net;
  const std::vector<Parameter*> params = f.parameters();
  const AdamOptions adam{.lr = cfg.lr};

  const Tensor even = crop_even(img);
  const DownsamplePair pair = pair_downsample(even);
  const bool any_term = cfg.use_sr || cfg.use_sc || cfg.use_plain_mse;

  Tape tape;
  for (long it = 0; any_term && it < cfg.denoise_iters; ++it) {
    const Var y1 = tape.constant(pair.y1);
    const Var y2 = tape.constant(pair.y2);
    const Var f_y1 = f(y1);
    const Var f_y2 = f(y2);
    DenoiseLoss rec{it};
    Var total;
    auto add = [&total](const Var& term) { total = total.valid() ? total + term : term; };
    if (cfg.use_sr) {
      const Var sr = loss_sr(y1, y2, f_y1, f_y2);
      rec.sr = sr.value()[0];
      check_finite(rec.sr, "residual loss", it);
      add(sr);
    }
    if (cfg.use_sc) {
      const Var x = tape.constant(even);
      const Var sc = loss_sc(y1, y2, x, f_y1, f_y2, f(x));
      rec.sc = sc.value()[0];
      check_finite(rec.sc, "consistency loss", it);
      add(sc);
    }
    if (cfg.use_plain_mse) {
      const Var plain = loss_plain_mse(y2, f_y1);
      rec.plain = plain.value()[0];
      check_finite(rec.plain, "plain MSE loss", it);
      add(plain);
    }
    rec.total = total.value()[0];
    check_finite(rec.total, "total loss", it);
    if (it % cfg.log_every == 0 || it + 1 == cfg.denoise_iters) result.curve.push_back(rec);
    tape.backward(total);
    adam_step(params, adam);
  }
  return result;
}

Tensor final_restore(const Tensor& img, const NoiseNet& f) {
  Tensor out = clamp(sub(img, f(img)), 0.0, 1.0);
  if (!out.all_finite()) throw NumericalError("denoiser", "restored image", 0);
  return out;
}

}  // namespace lowlight
