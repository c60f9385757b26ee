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

#ifndef LOWLIGHT_AUTODIFF_HPP
#define LOWLIGHT_AUTODIFF_HPP

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>

#include "lowlight/tensor.hpp"

namespace lowlight {

/// Trainable tensor with its gradient and Adam moment buffers.
struct Parameter {
  explicit Parameter(Tensor init)
      : value(std::move(init)),
        grad(Tensor::zeros_like(value)),
        m(Tensor::zeros_like(value)),
        v(Tensor::zeros_like(value)) {}

  void zero_grad() { grad.array().setZero(); }

  Tensor value;
  Tensor grad;
  Tensor m;
  Tensor v;
  long step_count = 0;
};

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid until the tape is cleared.
class Var {
 public:
  Var() = default;

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Linear record of executed differentiable operations.
///
/// Nodes are appended in execution order, so a node's inputs always have
/// smaller ids. backward() walks the ids downward from the loss, which
/// visits every node exactly once, after all of its consumers.
class Tape {
 public:
  /// Receives the accumulated gradient of the node's output. Must call
  /// accumulate() for every input that requires a gradient.
  using BackwardFn = std::function<void(const Tensor& grad_out, Tape& tape)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var parameter(Parameter& p);

  /// Records an op output. The backward function is dropped when no input
  /// requires a gradient.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var record(Tensor value, const std::vector<Var>& inputs, BackwardFn backward);

  void accumulate(const Var& v, Tensor grad);

  /// Propagates d(loss)/d(node) to every reachable node, adds the result into
  /// Parameter::grad, then clears the tape.
  void backward(const Var& loss);

  void clear() { nodes_.clear(); }
  std::size_t size() const { return nodes_.size(); }

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    Parameter* param = nullptr;
    BackwardFn backward;
  };

  Var push(Node node);

  std::deque<Node> nodes_;
};

inline const Tensor& Var::value() const { return tape_->value(id_); }
inline bool Var::requires_grad() const { return tape_->requires_grad(id_); }

}  // namespace lowlight

#endif  // LOWLIGHT_AUTODIFF_HPP
