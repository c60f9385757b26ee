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

#include "lowlight/metrics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lowlight/ops.hpp"

namespace lowlight {

namespace {

constexpr Index kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimC1 = 0.01 * 0.01;
constexpr double kSsimC2 = 0.03 * 0.03;
constexpr Index kLoeGrid = 50;
constexpr Index kNesPatch = 7;
constexpr Index kNesStride = 3;
constexpr double kNesGap = 0.1;

void require_same(const Tensor& a, const Tensor& b, const char* what) {
  if (!same_shape(a, b)) {
    throw ShapeError(std::string(what) + ": shapes " + shape_string(a.shape()) + " and " + shape_string(b.shape()) +
                     " differ");
  }
}

Eigen::VectorXd gaussian_1d(Index size, double sigma) {
  Eigen::VectorXd g(size);
  const double r = static_cast<double>(size / 2);
  for (Index i = 0; i < size; ++i) {
    const double d = static_cast<double>(i) - r;
    g[i] = std::exp(-d * d / (2.0 * sigma * sigma));
  }
  return g / g.sum();
}

// Valid-region separable filter of an H x W plane.
RowMatrix filter_valid(const RowMatrix& x, const Eigen::VectorXd& g) {
  const Index k = g.size();
  const Index h = x.rows() - k + 1;
  const Index w = x.cols() - k + 1;
  RowMatrix rows(h, x.cols());
  for (Index y = 0; y < h; ++y) rows.row(y) = g.transpose() * x.middleRows(y, k);
  RowMatrix out(h, w);
  for (Index c = 0; c < w; ++c) out.col(c) = rows.middleCols(c, k) * g;
  return out;
}

}  // namespace

double mse(const Tensor& a, const Tensor& b) {
  require_same(a, b, "mse");
  return (a.array() - b.array()).square().mean();
}

double psnr(const Tensor& a, const Tensor& b) {
  const double m = mse(a, b);
  if (m == 0.0) return kPsnrIdentical;
  return -10.0 * std::log10(m);
}

double mae(const Tensor& a, const Tensor& b) {
  require_same(a, b, "mae");
  return (a.array() - b.array()).abs().mean();
}

double ssim(const Tensor& a, const Tensor& b) {
  require_same(a, b, "ssim");
  if (a.rank() != 3) throw ShapeError("ssim expects (C, H, W), got " + shape_string(a.shape()));
  Index k = std::min({kSsimWindow, a.height(), a.width()});
  if (k % 2 == 0) --k;
  if (k < 1) throw ShapeError("ssim needs a non-empty image");
  const Eigen::VectorXd g = gaussian_1d(k, kSsimSigma);
  double total = 0.0;
  for (Index c = 0; c < a.channels(); ++c) {
    const RowMatrix x = a.plane(c);
    const RowMatrix y = b.plane(c);
    const Eigen::ArrayXXd mx = filter_valid(x, g).array();
    const Eigen::ArrayXXd my = filter_valid(y, g).array();
    const Eigen::ArrayXXd sxx = filter_valid(x.cwiseProduct(x), g).array() - mx.square();
    const Eigen::ArrayXXd syy = filter_valid(y.cwiseProduct(y), g).array() - my.square();
    const Eigen::ArrayXXd sxy = filter_valid(x.cwiseProduct(y), g).array() - mx * my;
    const Eigen::ArrayXXd map = ((2.0 * mx * my + kSsimC1) * (2.0 * sxy + kSsimC2)) /
                                ((mx.square() + my.square() + kSsimC1) * (sxx + syy + kSsimC2));
    total += map.mean();
  }
  return total / static_cast<double>(a.channels());
}

Tensor resample_nearest(const Tensor& map, Index h, Index w) {
  Tensor out(Shape{1, h, w});
  for (Index y = 0; y < h; ++y) {
    const Index sy = std::min(map.height() - 1, (2 * y + 1) * map.height() / (2 * h));
    for (Index x = 0; x < w; ++x) {
      const Index sx = std::min(map.width() - 1, (2 * x + 1) * map.width() / (2 * w));
      out.at(0, y, x) = map.at(0, sy, sx);
    }
  }
  return out;
}

double loe(const Tensor& enhanced, const Tensor& original) {
  if (enhanced.rank() != 3 || original.rank() != 3 || enhanced.height() != original.height() ||
      enhanced.width() != original.width()) {
    throw ShapeError("loe: shapes " + shape_string(enhanced.shape()) + " and " + shape_string(original.shape()) +
                     " differ");
  }
  const Index H = original.height(), W = original.width();
  const Index longest = std::max(H, W);
  Index h = H, w = W;
  if (longest > kLoeGrid) {
    h = std::max<Index>(1, (H * kLoeGrid + longest / 2) / longest);
    w = std::max<Index>(1, (W * kLoeGrid + longest / 2) / longest);
  }
  const Tensor lo = resample_nearest(channel_max(original), h, w);
  const Tensor le = resample_nearest(channel_max(enhanced), h, w);
  const Index m = h * w;
  long long flips = 0;
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) flips += (lo[i] >= lo[j]) != (le[i] >= le[j]);
  }
  return static_cast<double>(flips) / (static_cast<double>(m) * static_cast<double>(m));
}

Tensor to_gray(const Tensor& img) {
  if (img.rank() != 3 || (img.channels() != 1 && img.channels() != 3)) {
    throw ShapeError("expected a 1- or 3-channel image, got " + shape_string(img.shape()));
  }
  if (img.channels() == 1) return img;
  Tensor out(Shape{1, img.height(), img.width()});
  out.plane(0) = 0.299 * img.plane(0) + 0.587 * img.plane(1) + 0.114 * img.plane(2);
  return out;
}

double nes(const Tensor& img) {
  const Tensor gray = to_gray(img);
  const Index H = gray.height(), W = gray.width();
  if (H < kNesPatch || W < kNesPatch) {
    throw ShapeError("nes needs at least a 7x7 image, got " + shape_string(img.shape()));
  }
  const Index ny = (H - kNesPatch) / kNesStride + 1;
  const Index nx = (W - kNesPatch) / kNesStride + 1;
  const Index d = kNesPatch * kNesPatch;
  Eigen::MatrixXd patches(d, ny * nx);
  const auto plane = gray.plane(0);
  for (Index py = 0; py < ny; ++py) {
    for (Index px = 0; px < nx; ++px) {
      const auto block = plane.block(py * kNesStride, px * kNesStride, kNesPatch, kNesPatch);
      Eigen::Map<Eigen::Matrix<double, kNesPatch, kNesPatch, Eigen::RowMajor>>(patches.col(py * nx + px).data()) =
          block;
    }
  }
  const Eigen::VectorXd mu = patches.rowwise().mean();
  patches.colwise() -= mu;
  const Eigen::MatrixXd cov = patches * patches.transpose() / static_cast<double>(patches.cols());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov, Eigen::EigenvaluesOnly);
  std::vector<double> eig(solver.eigenvalues().data(), solver.eigenvalues().data() + d);
  for (double& e : eig) e = std::max(e, 0.0);
  std::sort(eig.begin(), eig.end());

  double variance = eig.front();
  for (std::size_t k = eig.size(); k >= 1; --k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += eig[i];
    const double m = sum / static_cast<double>(k);
    const double median = k % 2 == 1 ? eig[k / 2] : 0.5 * (eig[k / 2 - 1] + eig[k / 2]);
    const double gap = std::abs(m - median);
    if (gap == 0.0 || gap < kNesGap * median) {
      variance = m;
      break;
    }
  }
  return std::sqrt(variance) * 255.0;
}

MetricReport compute_metrics(const Tensor& pred, const Tensor& reference, const Tensor& original) {
  return {psnr(pred, reference), ssim(pred, reference), mae(pred, reference), loe(pred, original), nes(pred)};
}

}  // namespace lowlight
