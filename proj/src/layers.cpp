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

#include "lowlight/layers.hpp"

#include <cmath>

namespace lowlight {

Tensor ConvLayer::kaiming_uniform(Index cin, Index cout, Index ksize, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cin * ksize * ksize));
  return uniform_tensor(Shape{cout, cin, ksize, ksize}, rng, -bound, bound);
}

ConvLayer::ConvLayer(Index cin, Index cout, Rng& rng, Index ksize)
    : weight(kaiming_uniform(cin, cout, ksize, rng)), bias(Tensor(Shape{cout})) {}

Var ConvLayer::operator()(const Var& x) const {
  Tape& tape = x.tape();
  return conv2d(x, tape.parameter(weight), tape.parameter(bias), 1, padding());
}

Tensor ConvLayer::operator()(const Tensor& x) const { return conv2d(x, weight.value, bias.value, 1, padding()); }

}  // namespace lowlight
