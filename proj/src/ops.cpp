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

#include "lowlight/ops.hpp"

#include <algorithm>
#include <cmath>

namespace lowlight {
namespace {

bool is_scalar(const Shape& s) { return s.size() == 1 && s[0] == 1; }

Eigen::ArrayXd expand(const Tensor& t, const Shape& out) {
  if (t.shape() == out) return t.array();
  const Index n = shape_size(out);
  if (is_scalar(t.shape())) return Eigen::ArrayXd::Constant(n, t[0]);
  // (1, H, W) -> (C, H, W)
  const Index plane = t.size();
  Eigen::ArrayXd r(n);
  for (Index c = 0; c < out[0]; ++c) r.segment(c * plane, plane) = t.array();
  return r;
}

// Sums a gradient of the broadcast shape back down to an operand's shape.
Tensor reduce_to(const Tensor& g, const Shape& target) {
  if (g.shape() == target) return g;
  if (is_scalar(target)) return Tensor(target, Eigen::ArrayXd::Constant(1, g.array().sum()));
  const Index plane = shape_size(target);
  Eigen::ArrayXd r = Eigen::ArrayXd::Zero(plane);
  for (Index c = 0; c < g.dim(0); ++c) r += g.array().segment(c * plane, plane);
  return Tensor(target, std::move(r));
}

void require_rank3(const Tensor& t, const char* op) {
  if (t.rank() != 3) throw ShapeError(std::string(op) + " expects (C, H, W), got " + shape_string(t.shape()));
}

// Records a unary op whose local derivative is an elementwise array.
Var record_unary(const Var& a, Tensor out, Eigen::ArrayXd dydx) {
  return a.tape().record(std::move(out), {a}, [a, d = std::move(dydx)](const Tensor& g, Tape& tape) {
    tape.accumulate(a, Tensor(a.shape(), g.array() * d));
  });
}

}  // namespace

Shape broadcast_shape(const Shape& a, const Shape& b) {
  if (a == b) return a;
  if (is_scalar(a)) return b;
  if (is_scalar(b)) return a;
  if (a.size() == 3 && b.size() == 3 && a[1] == b[1] && a[2] == b[2] && (a[0] == 1 || b[0] == 1)) {
    return a[0] == 1 ? b : a;
  }
  throw ShapeError("cannot broadcast " + shape_string(a) + " with " + shape_string(b));
}

// ---- activations ----------------------------------------------------------

Tensor activation(const Tensor& x, Activation kind) {
  const Eigen::ArrayXd& v = x.array();
  switch (kind) {
    case Activation::relu:
      return Tensor(x.shape(), v.max(0.0));
    case Activation::leaky_relu:
      return Tensor(x.shape(), (v > 0.0).select(v, kLeakySlope * v));
    case Activation::sigmoid:
      return Tensor(x.shape(), 1.0 / (1.0 + (-v).exp()));
    case Activation::tanh:
      return Tensor(x.shape(), v.tanh());
  }
  throw std::logic_error("unknown activation");
}

Var activation(const Var& x, Activation kind) {
  Tensor out = activation(x.value(), kind);
  const Eigen::ArrayXd& v = x.value().array();
  const Eigen::ArrayXd& y = out.array();
  Eigen::ArrayXd d;
  switch (kind) {
    case Activation::relu:
      d = (v > 0.0).cast<double>();
      break;
    case Activation::leaky_relu:
      d = (v > 0.0).select(Eigen::ArrayXd::Ones(v.size()), kLeakySlope);
      break;
    case Activation::sigmoid:
      d = y * (1.0 - y);
      break;
    case Activation::tanh:
      d = 1.0 - y.square();
      break;
  }
  return record_unary(x, std::move(out), std::move(d));
}

// ---- binary elementwise ---------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  const Shape s = broadcast_shape(a.shape(), b.shape());
  return Tensor(s, expand(a, s) + expand(b, s));
}

Tensor sub(const Tensor& a, const Tensor& b) {
  const Shape s = broadcast_shape(a.shape(), b.shape());
  return Tensor(s, expand(a, s) - expand(b, s));
}

Tensor mul(const Tensor& a, const Tensor& b) {
  const Shape s = broadcast_shape(a.shape(), b.shape());
  return Tensor(s, expand(a, s) * expand(b, s));
}

namespace {
Eigen::ArrayXd guard_denominator(const Eigen::ArrayXd& b, double eps) {
  return (b >= 0.0).select(b.max(eps), b.min(-eps));
}
}  // namespace

Tensor div_guarded(const Tensor& a, const Tensor& b, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("div_guarded needs eps > 0");
  const Shape s = broadcast_shape(a.shape(), b.shape());
  return Tensor(s, expand(a, s) / guard_denominator(expand(b, s), eps));
}

Var add(const Var& a, const Var& b) {
  Tensor out = add(a.value(), b.value());
  return a.tape().record(std::move(out), {a, b}, [a, b](const Tensor& g, Tape& tape) {
    if (a.requires_grad()) tape.accumulate(a, reduce_to(g, a.shape()));
    if (b.requires_grad()) tape.accumulate(b, reduce_to(g, b.shape()));
  });
}

Var sub(const Var& a, const Var& b) {
  Tensor out = sub(a.value(), b.value());
  return a.tape().record(std::move(out), {a, b}, [a, b](const Tensor& g, Tape& tape) {
    if (a.requires_grad()) tape.accumulate(a, reduce_to(g, a.shape()));
    if (b.requires_grad()) tape.accumulate(b, reduce_to(Tensor(g.shape(), -g.array()), b.shape()));
  });
}

Var mul(const Var& a, const Var& b) {
  Tensor out = mul(a.value(), b.value());
  return a.tape().record(std::move(out), {a, b}, [a, b](const Tensor& g, Tape& tape) {
    const Shape& s = g.shape();
    if (a.requires_grad()) tape.accumulate(a, reduce_to(Tensor(s, g.array() * expand(b.value(), s)), a.shape()));
    if (b.requires_grad()) tape.accumulate(b, reduce_to(Tensor(s, g.array() * expand(a.value(), s)), b.shape()));
  });
}

Var div_guarded(const Var& a, const Var& b, double eps) {
  Tensor out = div_guarded(a.value(), b.value(), eps);
  return a.tape().record(std::move(out), {a, b}, [a, b, eps](const Tensor& g, Tape& tape) {
    const Shape& s = g.shape();
    const Eigen::ArrayXd bv = expand(b.value(), s);
    const Eigen::ArrayXd d = guard_denominator(bv, eps);
    if (a.requires_grad()) tape.accumulate(a, reduce_to(Tensor(s, g.array() / d), a.shape()));
    if (b.requires_grad()) {
      const Eigen::ArrayXd av = expand(a.value(), s);
      Eigen::ArrayXd gb = (bv.abs() >= eps).select(-g.array() * av / d.square(), 0.0);
      tape.accumulate(b, reduce_to(Tensor(s, std::move(gb)), b.shape()));
    }
  });
}

// ---- unary elementwise ----------------------------------------------------

Tensor pow_elem(const Tensor& a, double e) { return Tensor(a.shape(), a.array().max(0.0).pow(e)); }

Var pow_elem(const Var& a, double e) {
  const Eigen::ArrayXd& v = a.value().array();
  Eigen::ArrayXd d = (v > 0.0).select(e * v.max(0.0).pow(e - 1.0), 0.0);
  return record_unary(a, pow_elem(a.value(), e), std::move(d));
}

Tensor scale(const Tensor& a, double s) { return Tensor(a.shape(), a.array() * s); }

Var scale(const Var& a, double s) {
  return a.tape().record(scale(a.value(), s), {a},
                         [a, s](const Tensor& g, Tape& tape) { tape.accumulate(a, scale(g, s)); });
}

Tensor shift(const Tensor& a, double s) { return Tensor(a.shape(), a.array() + s); }

Var shift(const Var& a, double s) {
  return a.tape().record(shift(a.value(), s), {a}, [a](const Tensor& g, Tape& tape) { tape.accumulate(a, g); });
}

Tensor abs(const Tensor& a) { return Tensor(a.shape(), a.array().abs()); }

Var abs(const Var& a) {
  const Eigen::ArrayXd& v = a.value().array();
  Eigen::ArrayXd d = (v > 0.0).cast<double>() - (v < 0.0).cast<double>();
  return record_unary(a, abs(a.value()), std::move(d));
}

Tensor square(const Tensor& a) { return Tensor(a.shape(), a.array().square()); }

Var square(const Var& a) { return record_unary(a, square(a.value()), 2.0 * a.value().array()); }

Tensor sqrt(const Tensor& a) { return Tensor(a.shape(), a.array().max(0.0).sqrt()); }

Var sqrt(const Var& a) {
  Tensor out = sqrt(a.value());
  Eigen::ArrayXd d = (out.array() > 0.0).select(0.5 / out.array(), 0.0);
  return record_unary(a, std::move(out), std::move(d));
}

Tensor clamp(const Tensor& a, double lo, double hi) { return Tensor(a.shape(), a.array().max(lo).min(hi)); }

Var clamp(const Var& a, double lo, double hi) {
  const Eigen::ArrayXd& v = a.value().array();
  Eigen::ArrayXd d = ((v > lo) && (v < hi)).cast<double>();
  return record_unary(a, clamp(a.value(), lo, hi), std::move(d));
}

// ---- reductions -----------------------------------------------------------

Tensor sum(const Tensor& a) { return Tensor::scalar(a.array().sum()); }
Tensor mean(const Tensor& a) { return Tensor::scalar(a.array().mean()); }
Tensor abs_sum(const Tensor& a) { return Tensor::scalar(a.array().abs().sum()); }
Tensor sq_sum(const Tensor& a) { return Tensor::scalar(a.array().square().sum()); }

Var sum(const Var& a) {
  return a.tape().record(sum(a.value()), {a}, [a](const Tensor& g, Tape& tape) {
    tape.accumulate(a, Tensor(a.shape(), g[0]));
  });
}

Var mean(const Var& a) {
  return a.tape().record(mean(a.value()), {a}, [a](const Tensor& g, Tape& tape) {
    tape.accumulate(a, Tensor(a.shape(), g[0] / static_cast<double>(a.value().size())));
  });
}

Var abs_sum(const Var& a) {
  return a.tape().record(abs_sum(a.value()), {a}, [a](const Tensor& g, Tape& tape) {
    const Eigen::ArrayXd& v = a.value().array();
    tape.accumulate(a, Tensor(a.shape(), g[0] * ((v > 0.0).cast<double>() - (v < 0.0).cast<double>())));
  });
}

Var sq_sum(const Var& a) {
  return a.tape().record(sq_sum(a.value()), {a}, [a](const Tensor& g, Tape& tape) {
    tape.accumulate(a, Tensor(a.shape(), 2.0 * g[0] * a.value().array()));
  });
}

// ---- channel ops ----------------------------------------------------------

Tensor concat_channels(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_channels of nothing");
  Index channels = 0;
  for (const Tensor& p : parts) {
    require_rank3(p, "concat_channels");
    if (p.height() != parts[0].height() || p.width() != parts[0].width()) {
      throw ShapeError("concat_channels spatial mismatch: " + shape_string(parts[0].shape()) + " vs " +
                       shape_string(p.shape()));
    }
    channels += p.channels();
  }
  Tensor out(Shape{channels, parts[0].height(), parts[0].width()});
  Index offset = 0;
  for (const Tensor& p : parts) {
    out.array().segment(offset, p.size()) = p.array();
    offset += p.size();
  }
  return out;
}

Var concat_channels(std::span<const Var> parts) {
  std::vector<Tensor> values;
  values.reserve(parts.size());
  for (const Var& p : parts) values.push_back(p.value());
  Tensor out = concat_channels(std::span<const Tensor>(values));
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].tape().record(std::move(out), inputs, [inputs](const Tensor& g, Tape& tape) {
    Index offset = 0;
    for (const Var& p : inputs) {
      const Index n = p.value().size();
      if (p.requires_grad()) tape.accumulate(p, Tensor(p.shape(), g.array().segment(offset, n)));
      offset += n;
    }
  });
}

namespace {
// Channel holding the maximum for each pixel (first one on ties).
std::vector<Index> argmax_channel(const Tensor& a) {
  const Index plane = a.plane_size();
  std::vector<Index> idx(static_cast<std::size_t>(plane), 0);
  for (Index p = 0; p < plane; ++p) {
    double best = a[p];
    for (Index c = 1; c < a.channels(); ++c) {
      if (a[c * plane + p] > best) {
        best = a[c * plane + p];
        idx[static_cast<std::size_t>(p)] = c;
      }
    }
  }
  return idx;
}
}  // namespace

Tensor channel_max(const Tensor& a) {
  require_rank3(a, "channel_max");
  Tensor out(Shape{1, a.height(), a.width()});
  RowMatrix m = a.matrix();
  out.array() = m.colwise().maxCoeff().transpose().array();
  return out;
}

Var channel_max(const Var& a) {
  Tensor out = channel_max(a.value());
  return a.tape().record(std::move(out), {a}, [a](const Tensor& g, Tape& tape) {
    const std::vector<Index> idx = argmax_channel(a.value());
    const Index plane = a.value().plane_size();
    Tensor ga(a.shape());
    for (Index p = 0; p < plane; ++p) ga[idx[static_cast<std::size_t>(p)] * plane + p] = g[p];
    tape.accumulate(a, std::move(ga));
  });
}

// ---- spatial filters ------------------------------------------------------

Tensor grad_h(const Tensor& a) {
  require_rank3(a, "grad_h");
  Tensor out(a.shape());
  const Index H = a.height();
  for (Index c = 0; c < a.channels(); ++c) {
    if (H > 1) out.plane(c).topRows(H - 1) = a.plane(c).bottomRows(H - 1) - a.plane(c).topRows(H - 1);
  }
  return out;
}

Tensor grad_w(const Tensor& a) {
  require_rank3(a, "grad_w");
  Tensor out(a.shape());
  const Index W = a.width();
  for (Index c = 0; c < a.channels(); ++c) {
    if (W > 1) out.plane(c).leftCols(W - 1) = a.plane(c).rightCols(W - 1) - a.plane(c).leftCols(W - 1);
  }
  return out;
}

Var grad_h(const Var& a) {
  return a.tape().record(grad_h(a.value()), {a}, [a](const Tensor& g, Tape& tape) {
    Tensor ga(a.shape());
    const Index H = g.height();
    for (Index c = 0; c < g.channels(); ++c) {
      if (H < 2) continue;
      ga.plane(c).bottomRows(H - 1) += g.plane(c).topRows(H - 1);
      ga.plane(c).topRows(H - 1) -= g.plane(c).topRows(H - 1);
    }
    tape.accumulate(a, std::move(ga));
  });
}

Var grad_w(const Var& a) {
  return a.tape().record(grad_w(a.value()), {a}, [a](const Tensor& g, Tape& tape) {
    Tensor ga(a.shape());
    const Index W = g.width();
    for (Index c = 0; c < g.channels(); ++c) {
      if (W < 2) continue;
      ga.plane(c).rightCols(W - 1) += g.plane(c).leftCols(W - 1);
      ga.plane(c).leftCols(W - 1) -= g.plane(c).leftCols(W - 1);
    }
    tape.accumulate(a, std::move(ga));
  });
}

Tensor gaussian_kernel(Index ksize, double sigma) {
  if (ksize < 1 || ksize % 2 == 0) throw std::invalid_argument("gaussian kernel size must be odd");
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian sigma must be positive");
  Tensor k(Shape{ksize, ksize});
  const Index r = ksize / 2;
  for (Index i = 0; i < ksize; ++i) {
    for (Index j = 0; j < ksize; ++j) {
      const double d2 = static_cast<double>((i - r) * (i - r) + (j - r) * (j - r));
      k[i * ksize + j] = std::exp(-d2 / (2.0 * sigma * sigma));
    }
  }
  k.array() /= k.array().sum();
  return k;
}

namespace {
// out[y][x] = sum k[i][j] * in[y + i - r][x + j - r], zero outside.
void correlate_plane(const double* in, Index H, Index W, const Tensor& k, double* out) {
  const Index ks = k.dim(0);
  const Index r = ks / 2;
  for (Index y = 0; y < H; ++y) {
    for (Index x = 0; x < W; ++x) {
      double acc = 0.0;
      for (Index i = 0; i < ks; ++i) {
        const Index iy = y + i - r;
        if (iy < 0 || iy >= H) continue;
        for (Index j = 0; j < ks; ++j) {
          const Index ix = x + j - r;
          if (ix < 0 || ix >= W) continue;
          acc += k[i * ks + j] * in[iy * W + ix];
        }
      }
      out[y * W + x] = acc;
    }
  }
}

// Adjoint of correlate_plane: scatters g back onto the input grid.
void correlate_plane_adjoint(const double* g, Index H, Index W, const Tensor& k, double* in) {
  const Index ks = k.dim(0);
  const Index r = ks / 2;
  for (Index y = 0; y < H; ++y) {
    for (Index x = 0; x < W; ++x) {
      const double gv = g[y * W + x];
      for (Index i = 0; i < ks; ++i) {
        const Index iy = y + i - r;
        if (iy < 0 || iy >= H) continue;
        for (Index j = 0; j < ks; ++j) {
          const Index ix = x + j - r;
          if (ix < 0 || ix >= W) continue;
          in[iy * W + ix] += k[i * ks + j] * gv;
        }
      }
    }
  }
}
}  // namespace

Tensor gaussian_blur(const Tensor& a, Index ksize, double sigma) {
  require_rank3(a, "gaussian_blur");
  const Tensor k = gaussian_kernel(ksize, sigma);
  Tensor out(a.shape());
  for (Index c = 0; c < a.channels(); ++c) {
    correlate_plane(a.data() + c * a.plane_size(), a.height(), a.width(), k, out.data() + c * a.plane_size());
  }
  return out;
}

Var gaussian_blur(const Var& a, Index ksize, double sigma) {
  return a.tape().record(gaussian_blur(a.value(), ksize, sigma), {a}, [a, ksize, sigma](const Tensor& g, Tape& tape) {
    const Tensor k = gaussian_kernel(ksize, sigma);
    Tensor ga(a.shape());
    for (Index c = 0; c < g.channels(); ++c) {
      correlate_plane_adjoint(g.data() + c * g.plane_size(), g.height(), g.width(), k,
                              ga.data() + c * g.plane_size());
    }
    tape.accumulate(a, std::move(ga));
  });
}

Tensor min_max_normalize(const Tensor& a, double tau) {
  const double mn = a.array().minCoeff();
  const double mx = a.array().maxCoeff();
  return Tensor(a.shape(), (a.array() - mn) / (mx - mn + tau) * (1.0 - tau) + tau);
}

Var min_max_normalize(const Var& a, double tau) {
  return a.tape().record(min_max_normalize(a.value(), tau), {a}, [a, tau](const Tensor& g, Tape& tape) {
    const Eigen::ArrayXd& x = a.value().array();
    Index imin = 0, imax = 0;
    const double mn = x.minCoeff(&imin);
    const double mx = x.maxCoeff(&imax);
    const double D = mx - mn + tau;
    const double s = (1.0 - tau) / D;
    const double G = g.array().sum();
    const double Hs = (g.array() * (x - mn)).sum();
    Tensor ga(a.shape(), s * g.array());
    ga[imin] += -s * G + (1.0 - tau) / (D * D) * Hs;
    ga[imax] += -(1.0 - tau) / (D * D) * Hs;
    tape.accumulate(a, std::move(ga));
  });
}

Tensor diagonal_pool(const Tensor& a, Diagonal which) {
  require_rank3(a, "diagonal_pool");
  const Index H = a.height() / 2, W = a.width() / 2;
  if (H < 1 || W < 1) throw ShapeError("diagonal_pool needs at least 2x2, got " + shape_string(a.shape()));
  Tensor out(Shape{a.channels(), H, W});
  const Index off0 = which == Diagonal::anti ? 1 : 0;  // column offset in the top row
  for (Index c = 0; c < a.channels(); ++c) {
    for (Index i = 0; i < H; ++i) {
      for (Index j = 0; j < W; ++j) {
        out.at(c, i, j) = 0.5 * (a.at(c, 2 * i, 2 * j + off0) + a.at(c, 2 * i + 1, 2 * j + 1 - off0));
      }
    }
  }
  return out;
}

Var diagonal_pool(const Var& a, Diagonal which) {
  return a.tape().record(diagonal_pool(a.value(), which), {a}, [a, which](const Tensor& g, Tape& tape) {
    Tensor ga(a.shape());
    const Index off0 = which == Diagonal::anti ? 1 : 0;
    for (Index c = 0; c < g.channels(); ++c) {
      for (Index i = 0; i < g.height(); ++i) {
        for (Index j = 0; j < g.width(); ++j) {
          const double v = 0.5 * g.at(c, i, j);
          ga.at(c, 2 * i, 2 * j + off0) += v;
          ga.at(c, 2 * i + 1, 2 * j + 1 - off0) += v;
        }
      }
    }
    tape.accumulate(a, std::move(ga));
  });
}

Tensor crop_even(const Tensor& a) {
  require_rank3(a, "crop_even");
  const Index H = a.height() / 2 * 2, W = a.width() / 2 * 2;
  if (H == a.height() && W == a.width()) return a;
  Tensor out(Shape{a.channels(), H, W});
  for (Index c = 0; c < a.channels(); ++c) out.plane(c) = a.plane(c).topLeftCorner(H, W);
  return out;
}

}  // namespace lowlight
