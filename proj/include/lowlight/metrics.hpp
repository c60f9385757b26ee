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

#ifndef LOWLIGHT_METRICS_HPP
#define LOWLIGHT_METRICS_HPP

#include <limits>

#include "lowlight/tensor.hpp"

namespace lowlight {

inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

/// -10 log10(MSE) for images in [0, 1]; +inf when the images are equal.
double psnr(const Tensor& a, const Tensor& b);

/// Mean squared difference.
double mse(const Tensor& a, const Tensor& b);

/// Single-scale SSIM with an 11x11 Gaussian window (sigma 1.5), C1 = 0.01^2,
/// C2 = 0.03^2, valid-region filtering, averaged over channels. Images
/// smaller than the window use the largest odd window that fits.
double ssim(const Tensor& a, const Tensor& b);

/// Mean absolute difference.
double mae(const Tensor& a, const Tensor& b);

/// Lightness order error in [0, 1]. Lightness is the channel maximum; both
/// maps are nearest-neighbour downsampled so the longer side is at most 50,
/// then the fraction of ordered pixel pairs whose order differs is returned.
double loe(const Tensor& enhanced, const Tensor& original);

/// Noise standard deviation on the 0-255 scale from the small eigenvalues of
/// the 7x7 patch covariance (stride 3) of the luma image.
double nes(const Tensor& img);

/// Luma (0.299, 0.587, 0.114) of a 3-channel image; 1-channel input is copied.
Tensor to_gray(const Tensor& img);

/// Nearest-neighbour resample of a (1, H, W) map to (1, h, w).
Tensor resample_nearest(const Tensor& map, Index h, Index w);

struct MetricReport {
  double psnr = 0.0;
  double ssim = 0.0;
  double mae = 0.0;
  double loe = 0.0;
  double nes = 0.0;
};

/// PSNR, SSIM and MAE against `reference`, LOE against `original`, NES of `pred`.
MetricReport compute_metrics(const Tensor& pred, const Tensor& reference, const Tensor& original);

}  // namespace lowlight

#endif  // LOWLIGHT_METRICS_HPP
