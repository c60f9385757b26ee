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

#ifndef LOWLIGHT_ADAM_HPP
#define LOWLIGHT_ADAM_HPP

#include <span>

#include "lowlight/autodiff.hpp"

namespace lowlight {

struct AdamOptions {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update per parameter. Increments step_count and
/// zeroes the gradients afterwards.
void adam_step(std::span<Parameter* const> params, const AdamOptions& opts);

}  // namespace lowlight

#endif  // LOWLIGHT_ADAM_HPP
