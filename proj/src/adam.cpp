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

#include "lowlight/adam.hpp"

#include <cmath>

namespace lowlight {

void adam_step(std::span<Parameter* const> params, const AdamOptions& opts) {
  for (Parameter* p : params) {
    ++p->step_count;
    const double t = static_cast<double>(p->step_count);
    const double c1 = 1.0 - std::pow(opts.beta1, t);
    const double c2 = 1.0 - std::pow(opts.beta2, t);
    auto g = p->grad.array();
    p->m.array() = opts.beta1 * p->m.array() + (1.0 - opts.beta1) * g;
    p->v.array() = opts.beta2 * p->v.array() + (1.0 - opts.beta2) * g.square();
    p->value.array() -= opts.lr * (p->m.array() / c1) / ((p->v.array() / c2).sqrt() + opts.eps);
    p->zero_grad();
  }
}

}  // namespace lowlight
