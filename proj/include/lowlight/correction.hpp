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

#ifndef LOWLIGHT_CORRECTION_HPP
#define LOWLIGHT_CORRECTION_HPP

#include "lowlight/tensor.hpp"

namespace lowlight {

/// Correction exponent for a normalized illumination value p (clamped to
/// [0, 1]): 0.5 for p <= 0.5, otherwise 0.5 + 2^(p - 0.5) - 1.
double correction_exponent(double p);

/// Per-pixel exponents for a (1, H, W) guide.
Tensor correction_field(const Tensor& guide);

/// out_c = coarse_c ^ sigma(guide) for every channel c. The exponent is at
/// most 1, so no value gets darker.
Tensor pixel_adaptive_correct(const Tensor& coarse, const Tensor& guide);

/// Literal form: every channel becomes guide ^ sigma(guide), dropping the
/// colour of the coarse image.
Tensor pixel_adaptive_correct_literal(const Tensor& coarse, const Tensor& guide);

}  // namespace lowlight

#endif  // LOWLIGHT_CORRECTION_HPP
