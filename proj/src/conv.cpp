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

// Convolution as a sequence of GEMMs over row tiles of the output. Each tile
// gets its own im2col buffer so the working set stays in cache.

#include <algorithm>
#include <cstring>

#include "lowlight/ops.hpp"

namespace lowlight {
namespace {

constexpr Index kTilePixels = 2048;

using StridedBlock = Eigen::Map<RowMatrix, 0, Eigen::OuterStride<>>;
using ConstStridedBlock = Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>>;

struct ConvGeometry {
  Index cin, h, w;
  Index cout, k;
  Index stride, pad;
  Index hout, wout;

  Index patch() const { return cin * k * k; }
  Index pixels() const { return hout * wout; }
  Index rows_per_tile() const { return std::max<Index>(1, kTilePixels / wout); }
};

ConvGeometry geometry(const Tensor& x, const Tensor& weight, const Tensor& bias, Index stride, Index padding) {
  if (x.rank() != 3) throw ShapeError("conv2d input must be (C, H, W), got " + shape_string(x.shape()));
  if (weight.rank() != 4 || weight.dim(2) != weight.dim(3)) {
    throw ShapeError("conv2d weight must be (Cout, Cin, K, K), got " + shape_string(weight.shape()));
  }
  if (weight.dim(1) != x.dim(0)) {
    throw ShapeError("conv2d channel mismatch: input " + shape_string(x.shape()) + " vs weight " +
                     shape_string(weight.shape()));
  }
  if (bias.size() != weight.dim(0)) {
    throw ShapeError("conv2d bias " + shape_string(bias.shape()) + " does not match weight " +
                     shape_string(weight.shape()));
  }
  if (stride < 1 || padding < 0) throw ShapeError("conv2d needs stride >= 1 and padding >= 0");
  ConvGeometry g{x.dim(0), x.dim(1), x.dim(2), weight.dim(0), weight.dim(2), stride, padding, 0, 0};
  g.hout = (g.h + 2 * padding - g.k) / stride + 1;
  g.wout = (g.w + 2 * padding - g.k) / stride + 1;
  if (g.h + 2 * padding < g.k || g.w + 2 * padding < g.k) {
    throw ShapeError("conv2d kernel " + shape_string(weight.shape()) + " larger than padded input " +
                     shape_string(x.shape()));
  }
  return g;
}

// Valid output columns [lo, hi) for kernel column kx: those whose input column is in range.
inline void column_range(const ConvGeometry& g, Index kx, Index& lo, Index& hi) {
  // ix = ox * stride - pad + kx must satisfy 0 <= ix < w
  const Index first = g.pad - kx;  // smallest ox*stride allowed
  lo = first <= 0 ? 0 : (first + g.stride - 1) / g.stride;
  const Index last = g.w - 1 + g.pad - kx;  // largest ox*stride allowed
  hi = last < 0 ? 0 : std::min(g.wout, last / g.stride + 1);
  if (hi < lo) hi = lo;
}

// col has patch() rows and (rows * wout) columns, row-major with leading dimension ld.
void im2col(const double* in, const ConvGeometry& g, Index oy0, Index rows, double* col, Index ld) {
  for (Index c = 0; c < g.cin; ++c) {
    const double* plane = in + c * g.h * g.w;
    for (Index ky = 0; ky < g.k; ++ky) {
      for (Index kx = 0; kx < g.k; ++kx) {
        double* dst = col + ((c * g.k + ky) * g.k + kx) * ld;
        Index lo, hi;
        column_range(g, kx, lo, hi);
        for (Index r = 0; r < rows; ++r) {
          double* out = dst + r * g.wout;
          const Index iy = (oy0 + r) * g.stride - g.pad + ky;
          if (iy < 0 || iy >= g.h) {
            std::fill(out, out + g.wout, 0.0);
            continue;
          }
          const double* src = plane + iy * g.w;
          std::fill(out, out + lo, 0.0);
          if (g.stride == 1) {
            std::memcpy(out + lo, src + lo - g.pad + kx, static_cast<std::size_t>(hi - lo) * sizeof(double));
          } else {
            for (Index ox = lo; ox < hi; ++ox) out[ox] = src[ox * g.stride - g.pad + kx];
          }
          std::fill(out + hi, out + g.wout, 0.0);
        }
      }
    }
  }
}

void col2im_add(const double* col, Index ld, const ConvGeometry& g, Index oy0, Index rows, double* in) {
  for (Index c = 0; c < g.cin; ++c) {
    double* plane = in + c * g.h * g.w;
    for (Index ky = 0; ky < g.k; ++ky) {
      for (Index kx = 0; kx < g.k; ++kx) {
        const double* src = col + ((c * g.k + ky) * g.k + kx) * ld;
        Index lo, hi;
        column_range(g, kx, lo, hi);
        for (Index r = 0; r < rows; ++r) {
          const Index iy = (oy0 + r) * g.stride - g.pad + ky;
          if (iy < 0 || iy >= g.h) continue;
          const double* s = src + r * g.wout;
          double* dst = plane + iy * g.w;
          for (Index ox = lo; ox < hi; ++ox) dst[ox * g.stride - g.pad + kx] += s[ox];
        }
      }
    }
  }
}

Tensor conv_forward(const Tensor& x, const Tensor& weight, const Tensor& bias, const ConvGeometry& g) {
  Tensor out(Shape{g.cout, g.hout, g.wout});
  const Index P = g.pixels();
  const Index rows_per_tile = g.rows_per_tile();
  RowMatrix col(g.patch(), rows_per_tile * g.wout);
  ConstRowMatrixMap wmat(weight.data(), g.cout, g.patch());
  for (Index oy = 0; oy < g.hout; oy += rows_per_tile) {
    const Index rows = std::min(rows_per_tile, g.hout - oy);
    const Index n = rows * g.wout;
    im2col(x.data(), g, oy, rows, col.data(), col.cols());
    StridedBlock block(out.data() + oy * g.wout, g.cout, n, Eigen::OuterStride<>(P));
    block.noalias() = wmat * col.leftCols(n);
  }
  RowMatrixMap om(out.data(), g.cout, P);
  for (Index co = 0; co < g.cout; ++co) om.row(co).array() += bias[co];
  return out;
}

struct ConvGrads {
  Tensor input;
  Tensor weight;
  Tensor bias;
};

ConvGrads conv_backward(const Tensor& x, const Tensor& weight, const Tensor& grad_out, const ConvGeometry& g,
                        bool need_input, bool need_params) {
  ConvGrads grads;
  const Index P = g.pixels();
  const Index rows_per_tile = g.rows_per_tile();
  RowMatrix col(g.patch(), rows_per_tile * g.wout);
  ConstRowMatrixMap wmat(weight.data(), g.cout, g.patch());
  RowMatrix gw;
  if (need_params) {
    gw = RowMatrix::Zero(g.cout, g.patch());
    grads.bias = Tensor(Shape{g.cout});
    ConstRowMatrixMap gm(grad_out.data(), g.cout, P);
    grads.bias.array() = gm.rowwise().sum().array();
  }
  if (need_input) grads.input = Tensor(x.shape());
  for (Index oy = 0; oy < g.hout; oy += rows_per_tile) {
    const Index rows = std::min(rows_per_tile, g.hout - oy);
    const Index n = rows * g.wout;
    ConstStridedBlock gblock(grad_out.data() + oy * g.wout, g.cout, n, Eigen::OuterStride<>(P));
    if (need_params) {
      im2col(x.data(), g, oy, rows, col.data(), col.cols());
      gw.noalias() += gblock * col.leftCols(n).transpose();
    }
    if (need_input) {
      col.leftCols(n).noalias() = wmat.transpose() * gblock;
      col2im_add(col.data(), col.cols(), g, oy, rows, grads.input.data());
    }
  }
  if (need_params) grads.weight = Tensor(weight.shape(), Eigen::Map<Eigen::ArrayXd>(gw.data(), gw.size()));
  return grads;
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, Index stride, Index padding) {
  return conv_forward(x, weight, bias, geometry(x, weight, bias, stride, padding));
}

Var conv2d(const Var& x, const Var& weight, const Var& bias, Index stride, Index padding) {
  const ConvGeometry g = geometry(x.value(), weight.value(), bias.value(), stride, padding);
  Tensor out = conv_forward(x.value(), weight.value(), bias.value(), g);
  return x.tape().record(std::move(out), {x, weight, bias}, [x, weight, bias, g](const Tensor& gout, Tape& tape) {
    const bool need_params = weight.requires_grad() || bias.requires_grad();
    ConvGrads grads = conv_backward(x.value(), weight.value(), gout, g, x.requires_grad(), need_params);
    if (x.requires_grad()) tape.accumulate(x, std::move(grads.input));
    if (need_params) {
      tape.accumulate(weight, std::move(grads.weight));
      tape.accumulate(bias, grads.bias.reshaped(bias.value().shape()));
    }
  });
}

}  // namespace lowlight
