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

#ifndef LOWLIGHT_TENSOR_HPP
#define LOWLIGHT_TENSOR_HPP

#include <Eigen/Core>

#include <initializer_list>
#include <string>
#include <vector>

#include "lowlight/errors.hpp"

namespace lowlight {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixMap = Eigen::Map<RowMatrix>;
using ConstRowMatrixMap = Eigen::Map<const RowMatrix>;

Index shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles. Feature maps use (channels, height, width);
/// convolution weights use (out, in, k, k); scalars use shape {1}.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, Eigen::ArrayXd data);
  Tensor(std::initializer_list<Index> shape, double fill = 0.0) : Tensor(Shape(shape), fill) {}

  static Tensor scalar(double v) { return Tensor(Shape{1}, v); }
  static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape(), 0.0); }

  const Shape& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index dim(Index i) const { return shape_[static_cast<std::size_t>(i)]; }
  Index size() const { return data_.size(); }
  bool empty() const { return data_.size() == 0; }

  // (C, H, W) accessors; only meaningful for rank-3 tensors.
  Index channels() const { return shape_[0]; }
  Index height() const { return shape_[1]; }
  Index width() const { return shape_[2]; }
  Index plane_size() const { return shape_[1] * shape_[2]; }

  double& at(Index c, Index y, Index x) { return data_[(c * shape_[1] + y) * shape_[2] + x]; }
  double at(Index c, Index y, Index x) const { return data_[(c * shape_[1] + y) * shape_[2] + x]; }

  double& operator[](Index i) { return data_[i]; }
  double operator[](Index i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  Eigen::ArrayXd& array() { return data_; }
  const Eigen::ArrayXd& array() const { return data_; }

  /// First axis as rows, everything else flattened into columns.
  RowMatrixMap matrix() { return RowMatrixMap(data_.data(), shape_[0], data_.size() / shape_[0]); }
  ConstRowMatrixMap matrix() const {
    return ConstRowMatrixMap(data_.data(), shape_[0], data_.size() / shape_[0]);
  }

  /// View of one channel plane of a (C, H, W) tensor as an H x W matrix.
  Eigen::Map<RowMatrix> plane(Index c) { return {data_.data() + c * plane_size(), shape_[1], shape_[2]}; }
  Eigen::Map<const RowMatrix> plane(Index c) const {
    return {data_.data() + c * plane_size(), shape_[1], shape_[2]};
  }

  double item() const;
  bool all_finite() const { return data_.allFinite(); }

  Tensor reshaped(Shape shape) const;

 private:
  Shape shape_;
  Eigen::ArrayXd data_;
};

bool same_shape(const Tensor& a, const Tensor& b);

}  // namespace lowlight

#endif  // LOWLIGHT_TENSOR_HPP
