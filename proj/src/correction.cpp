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

#include "lowlight/correction.hpp"

#include <algorithm>
#include <cmath>

namespace lowlight {

namespace {
void check_guide(const Tensor& coarse, const Tensor& guide) {
  if (coarse.rank() != 3 || guide.rank() != 3 || guide.channels() != 1 || guide.height() != coarse.height() ||
      guide.width() != coarse.width()) {
    throw ShapeError("guide " + shape_string(guide.shape()) + " does not fit image " + shape_string(coarse.shape()));
  }
}
}  // namespace

double correction_exponent(double p) {
  p = std::clamp(p, 0.0, 1.0);
  return p <= 0.5 ? 0.5 : 0.5 + std::exp2(p - 0.5) - 1.0;
}

Tensor correction_field(const Tensor& guide) {
  Tensor out(guide.shape());
  for (Index i = 0; i < guide.size(); ++i) out[i] = correction_exponent(guide[i]);
  return out;
}

Tensor pixel_adaptive_correct(const Tensor& coarse, const Tensor& guide) {
  check_guide(coarse, guide);
  const Tensor e = correction_field(guide);
  Tensor out(coarse.shape());
  const Index plane = coarse.plane_size();
  for (Index c = 0; c < coarse.channels(); ++c) {
    for (Index p = 0; p < plane; ++p) {
      const double base = std::clamp(coarse[c * plane + p], 0.0, 1.0);
      out[c * plane + p] = std::pow(base, e[p]);
    }
  }
  return out;
}

Tensor pixel_adaptive_correct_literal(const Tensor& coarse, const Tensor& guide) {
  check_guide(coarse, guide);
  Tensor out(coarse.shape());
  const Index plane = coarse.plane_size();
  for (Index p = 0; p < plane; ++p) {
    const double g = std::clamp(guide[p], 0.0, 1.0);
    const double v = std::pow(g, correction_exponent(g));
    for (Index c = 0; c < coarse.channels(); ++c) out[c * plane + p] = v;
  }
  return out;
}

}  // namespace lowlight
