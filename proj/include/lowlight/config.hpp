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

#ifndef LOWLIGHT_CONFIG_HPP
#define LOWLIGHT_CONFIG_HPP

#include <cstdint>
#include <stdexcept>

namespace lowlight {

/// Every knob of one enhancement run. Defaults are the reference settings.
struct PipelineConfig {
  double gamma = 0.4;
  double lambda_n = 5000.0;
  long decom_iters = 1000;
  long denoise_iters = 2000;
  double lr = 0.01;        // denoiser learning rate
  double decom_lr = 0.003; // decomposition learning rate
  std::uint64_t seed = 0;
  double epsilon = 1e-4;
  double tau = 1e-4;

  bool use_tv = true;
  bool use_noise_loss = true;
  bool use_igpacm = true;
  bool use_denoiser = true;
  bool use_sr = true;
  bool use_sc = true;
  bool use_plain_mse = false;
  bool igpacm_literal = false;

  /// Loss curves keep every n-th iteration (plus the last one).
  long log_every = 10;

  void validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in (0, 1]");
    if (!(lambda_n >= 0.0)) throw std::invalid_argument("lambda_n must be >= 0");
    if (decom_iters < 0 || denoise_iters < 0) throw std::invalid_argument("iteration counts must be >= 0");
    if (!(lr > 0.0) || !(decom_lr > 0.0)) throw std::invalid_argument("learning rates must be > 0");
    if (!(epsilon > 0.0) || !(tau > 0.0)) throw std::invalid_argument("epsilon and tau must be > 0");
    if (log_every < 1) throw std::invalid_argument("log_every must be >= 1");
  }
};

}  // namespace lowlight

#endif  // LOWLIGHT_CONFIG_HPP
