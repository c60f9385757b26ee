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

#ifndef LOWLIGHT_LAYERS_HPP
#define LOWLIGHT_LAYERS_HPP

#include <vector>

#include "lowlight/autodiff.hpp"
#include "lowlight/ops.hpp"
#include "lowlight/rng.hpp"

namespace lowlight {

/// 3x3 "same" convolution with its own weight and bias parameters.
struct ConvLayer {
  ConvLayer(Index cin, Index cout, Rng& rng, Index ksize = 3);

  /// Kaiming-uniform fan-in weights with negative slope sqrt(5) (the usual
  /// convolution default): U(-b, b) with b = 1 / sqrt(cin * k * k).
  static Tensor kaiming_uniform(Index cin, Index cout, Index ksize, Rng& rng);

  Var operator()(const Var& x) const;
  Tensor operator()(const Tensor& x) const;

  Index padding() const { return weight.value.dim(2) / 2; }

  // Parameters are mutable so a const layer can still be put on a tape.
  mutable Parameter weight;
  mutable Parameter bias;
};

/// Appends pointers to every parameter of the given layers.
inline void collect_parameters(std::vector<ConvLayer>& layers, std::vector<Parameter*>& out) {
  for (ConvLayer& l : layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
}

}  // namespace lowlight

#endif  // LOWLIGHT_LAYERS_HPP
