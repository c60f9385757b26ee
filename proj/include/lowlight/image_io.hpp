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

#ifndef LOWLIGHT_IMAGE_IO_HPP
#define LOWLIGHT_IMAGE_IO_HPP

#include <filesystem>

#include "lowlight/tensor.hpp"

namespace lowlight {

/// Reads an 8-bit PNG or a binary PPM (P6, maxval 255) into a (3, H, W)
/// tensor with values v / 255. Grayscale and palette images are expanded to
/// RGB and alpha is dropped. Throws InputError for other formats, 16-bit
/// data and truncated files.
Tensor load_image(const std::filesystem::path& path);

/// Writes a (1 or 3, H, W) tensor as an 8-bit PNG. Values are clamped to
/// [0, 1] and rounded half away from zero.
void save_png(const std::filesystem::path& path, const Tensor& img);

/// Writes a (3, H, W) tensor as a binary PPM with maxval 255.
void save_ppm(const std::filesystem::path& path, const Tensor& img);

/// Round-half-away-from-zero 8-bit value of clamp(v, 0, 1) * 255.
unsigned char quantize8(double v);

/// clamp, scale by 255, round, then divide by 255 again.
Tensor quantize(const Tensor& img);

/// Bilinear resample with pixel-centre alignment and edge clamping.
Tensor resize_bilinear(const Tensor& img, Index height, Index width);

/// Shrinks an image so that its longer side is at most max_side, keeping the
/// aspect ratio. Images already small enough are returned unchanged.
Tensor fit_max_side(const Tensor& img, Index max_side);

/// True for file names this tool can read (.png, .ppm, any case).
bool is_image_file(const std::filesystem::path& path);

}  // namespace lowlight

#endif  // LOWLIGHT_IMAGE_IO_HPP
