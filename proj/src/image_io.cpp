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

#include "lowlight/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

namespace lowlight {

namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

Tensor from_interleaved(const std::vector<unsigned char>& px, Index h, Index w, Index stride_channels) {
  Tensor out(Shape{3, h, w});
  for (Index y = 0; y < h; ++y) {
    for (Index x = 0; x < w; ++x) {
      const unsigned char* p = px.data() + (y * w + x) * stride_channels;
      for (Index c = 0; c < 3; ++c) out.at(c, y, x) = static_cast<double>(p[c]) / 255.0;
    }
  }
  return out;
}

std::vector<unsigned char> to_interleaved(const Tensor& img) {
  const Index C = img.channels(), H = img.height(), W = img.width();
  std::vector<unsigned char> px(static_cast<std::size_t>(C * H * W));
  for (Index y = 0; y < H; ++y) {
    for (Index x = 0; x < W; ++x) {
      for (Index c = 0; c < C; ++c) px[static_cast<std::size_t>((y * W + x) * C + c)] = quantize8(img.at(c, y, x));
    }
  }
  return px;
}

void require_image(const Tensor& img, bool allow_gray) {
  if (img.rank() != 3 || !(img.channels() == 3 || (allow_gray && img.channels() == 1)) || img.empty()) {
    throw ShapeError("cannot write image of shape " + shape_string(img.shape()));
  }
}

Tensor load_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw InputError(path.string() + ": " + msg);
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw InputError(path.string() + ": only 8-bit PNG is supported");
  }
  image.format = PNG_FORMAT_RGBA;
  std::vector<unsigned char> px(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, px.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw InputError(path.string() + ": " + msg);
  }
  return from_interleaved(px, image.height, image.width, 4);
}

// Skips whitespace and '#' comments, then reads one decimal header field.
long read_ppm_field(std::istream& in, const std::filesystem::path& path) {
  int ch = in.peek();
  while (ch != EOF && (std::isspace(ch) || ch == '#')) {
    if (ch == '#') {
      std::string skip;
      std::getline(in, skip);
    } else {
      in.get();
    }
    ch = in.peek();
  }
  long v = -1;
  if (!(in >> v) || v < 0) throw InputError(path.string() + ": malformed PPM header");
  return v;
}

Tensor load_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string() + ": cannot open");
  char magic[2] = {};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '6') throw InputError(path.string() + ": not a binary PPM (P6)");
  const long w = read_ppm_field(in, path);
  const long h = read_ppm_field(in, path);
  const long maxval = read_ppm_field(in, path);
  if (maxval != 255) throw InputError(path.string() + ": only PPM with maxval 255 is supported");
  if (w == 0 || h == 0) throw InputError(path.string() + ": empty image");
  if (!std::isspace(in.get())) throw InputError(path.string() + ": malformed PPM header");
  std::vector<unsigned char> px(static_cast<std::size_t>(w * h * 3));
  in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (in.gcount() != static_cast<std::streamsize>(px.size())) throw InputError(path.string() + ": truncated PPM");
  return from_interleaved(px, h, w, 3);
}

}  // namespace

unsigned char quantize8(double v) {
  const double c = std::clamp(std::isnan(v) ? 0.0 : v, 0.0, 1.0);
  return static_cast<unsigned char>(std::lround(c * 255.0));
}

Tensor quantize(const Tensor& img) {
  Tensor out(img.shape());
  for (Index i = 0; i < img.size(); ++i) out[i] = static_cast<double>(quantize8(img[i])) / 255.0;
  return out;
}

bool is_image_file(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  return ext == ".png" || ext == ".ppm";
}

Tensor load_image(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw InputError(path.string() + ": cannot open");
  unsigned char sig[8] = {};
  probe.read(reinterpret_cast<char*>(sig), 8);
  const std::streamsize got = probe.gcount();
  probe.close();
  if (got == 8 && png_sig_cmp(sig, 0, 8) == 0) return load_png(path);
  if (got >= 2 && sig[0] == 'P' && sig[1] == '6') return load_ppm(path);
  throw InputError(path.string() + ": unsupported image format (expected PNG or P6 PPM)");
}

void save_png(const std::filesystem::path& path, const Tensor& img) {
  require_image(img, true);
  const std::vector<unsigned char> px = to_interleaved(img);
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, px.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw InputError(path.string() + ": " + msg);
  }
}

void save_ppm(const std::filesystem::path& path, const Tensor& img) {
  require_image(img, false);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path.string() + ": cannot write");
  out << "P6\n" << img.width() << " " << img.height() << "\n255\n";
  const std::vector<unsigned char> px = to_interleaved(img);
  out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!out) throw InputError(path.string() + ": write failed");
}

Tensor resize_bilinear(const Tensor& img, Index height, Index width) {
  if (img.rank() != 3 || height < 1 || width < 1) {
    throw ShapeError("cannot resize " + shape_string(img.shape()) + " to " + std::to_string(height) + "x" +
                     std::to_string(width));
  }
  const Index H = img.height(), W = img.width();
  Tensor out(Shape{img.channels(), height, width});
  const double sy = static_cast<double>(H) / static_cast<double>(height);
  const double sx = static_cast<double>(W) / static_cast<double>(width);
  for (Index y = 0; y < height; ++y) {
    const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0, static_cast<double>(H - 1));
    const Index y0 = static_cast<Index>(fy);
    const Index y1 = std::min(y0 + 1, H - 1);
    const double ay = fy - static_cast<double>(y0);
    for (Index x = 0; x < width; ++x) {
      const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0, static_cast<double>(W - 1));
      const Index x0 = static_cast<Index>(fx);
      const Index x1 = std::min(x0 + 1, W - 1);
      const double ax = fx - static_cast<double>(x0);
      for (Index c = 0; c < img.channels(); ++c) {
        const double top = (1.0 - ax) * img.at(c, y0, x0) + ax * img.at(c, y0, x1);
        const double bottom = (1.0 - ax) * img.at(c, y1, x0) + ax * img.at(c, y1, x1);
        out.at(c, y, x) = (1.0 - ay) * top + ay * bottom;
      }
    }
  }
  return out;
}

Tensor fit_max_side(const Tensor& img, Index max_side) {
  if (max_side < 1) throw std::invalid_argument("max_side must be >= 1");
  const Index H = img.height(), W = img.width();
  const Index longest = std::max(H, W);
  if (longest <= max_side) return img;
  const Index h = std::max<Index>(1, (H * max_side + longest / 2) / longest);
  const Index w = std::max<Index>(1, (W * max_side + longest / 2) / longest);
  return resize_bilinear(img, h, w);
}

}  // namespace lowlight
