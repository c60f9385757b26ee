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

#ifndef LOWLIGHT_OPS_HPP
#define LOWLIGHT_OPS_HPP

#include <span>
#include <vector>

#include "lowlight/autodiff.hpp"
#include "lowlight/tensor.hpp"

// Every op comes in two flavours: a plain Tensor function for inference and
// guidance maps, and a Var overload that records itself on the operand's tape.
//
// Binary elementwise ops broadcast in two cases: a {1} scalar against
// anything, and a 1-channel (1, H, W) map against a (C, H, W) map.

namespace lowlight {

inline constexpr double kLeakySlope = 0.2;

enum class Activation { relu, leaky_relu, sigmoid, tanh };

enum class Diagonal {
  anti,  // (x[2i][2j+1] + x[2i+1][2j]) / 2
  main,  // (x[2i][2j] + x[2i+1][2j+1]) / 2
};

// ---- convolution ----------------------------------------------------------

/// Zero-padded cross-correlation. x: (Cin, H, W), weight: (Cout, Cin, K, K), bias: (Cout).
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, Index stride = 1, Index padding = 0);
Var conv2d(const Var& x, const Var& weight, const Var& bias, Index stride = 1, Index padding = 0);

// ---- activations ----------------------------------------------------------

Tensor activation(const Tensor& x, Activation kind);
Var activation(const Var& x, Activation kind);

inline Tensor relu(const Tensor& x) { return activation(x, Activation::relu); }
inline Tensor leaky_relu(const Tensor& x) { return activation(x, Activation::leaky_relu); }
inline Tensor sigmoid(const Tensor& x) { return activation(x, Activation::sigmoid); }
inline Tensor tanh(const Tensor& x) { return activation(x, Activation::tanh); }
inline Var relu(const Var& x) { return activation(x, Activation::relu); }
inline Var leaky_relu(const Var& x) { return activation(x, Activation::leaky_relu); }
inline Var sigmoid(const Var& x) { return activation(x, Activation::sigmoid); }
inline Var tanh(const Var& x) { return activation(x, Activation::tanh); }

// ---- elementwise ----------------------------------------------------------

Shape broadcast_shape(const Shape& a, const Shape& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
/// a / b with |b| raised to at least eps (sign kept, 0 treated as positive).
Tensor div_guarded(const Tensor& a, const Tensor& b, double eps);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div_guarded(const Var& a, const Var& b, double eps);

/// a^e for a >= 0. Negative bases are clamped to 0.
Tensor pow_elem(const Tensor& a, double e);
Var pow_elem(const Var& a, double e);

Tensor scale(const Tensor& a, double s);
Var scale(const Var& a, double s);
Tensor shift(const Tensor& a, double s);
Var shift(const Var& a, double s);

Tensor abs(const Tensor& a);
Var abs(const Var& a);
Tensor square(const Tensor& a);
Var square(const Var& a);
/// Square root; the gradient at exactly 0 is taken as 0.
Tensor sqrt(const Tensor& a);
Var sqrt(const Var& a);
Tensor clamp(const Tensor& a, double lo, double hi);
Var clamp(const Var& a, double lo, double hi);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator*(double s, const Var& a) { return scale(a, s); }
inline Var operator-(const Var& a) { return scale(a, -1.0); }

// ---- reductions (all return shape {1}) ------------------------------------

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor abs_sum(const Tensor& a);
Tensor sq_sum(const Tensor& a);
Var sum(const Var& a);
Var mean(const Var& a);
Var abs_sum(const Var& a);
Var sq_sum(const Var& a);

// ---- channel ops ----------------------------------------------------------

Tensor concat_channels(std::span<const Tensor> parts);
Var concat_channels(std::span<const Var> parts);
inline Var concat_channels(std::initializer_list<Var> parts) {
  return concat_channels(std::span<const Var>(parts.begin(), parts.size()));
}
/// Per-pixel maximum over channels, (C, H, W) -> (1, H, W).
Tensor channel_max(const Tensor& a);
Var channel_max(const Var& a);

// ---- spatial filters ------------------------------------------------------

/// Forward differences along rows (h) or columns (w); the last row/column is 0.
Tensor grad_h(const Tensor& a);
Tensor grad_w(const Tensor& a);
Var grad_h(const Var& a);
Var grad_w(const Var& a);

/// Normalized ksize x ksize Gaussian, shape (ksize, ksize).
Tensor gaussian_kernel(Index ksize, double sigma);
/// Per-channel zero-padded Gaussian filter with odd ksize.
Tensor gaussian_blur(const Tensor& a, Index ksize, double sigma);
Var gaussian_blur(const Var& a, Index ksize, double sigma);

/// (x - min) / (max - min + tau) * (1 - tau) + tau over the whole tensor.
Tensor min_max_normalize(const Tensor& a, double tau);
Var min_max_normalize(const Var& a, double tau);

/// One half of the pair downsampler: average of one diagonal of every 2x2
/// block. Odd trailing rows/columns are dropped.
Tensor diagonal_pool(const Tensor& a, Diagonal which);
Var diagonal_pool(const Var& a, Diagonal which);

/// Drops a trailing odd row/column of a (C, H, W) tensor.
Tensor crop_even(const Tensor& a);

}  // namespace lowlight

#endif  // LOWLIGHT_OPS_HPP
