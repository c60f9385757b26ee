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

#include "lowlight/autodiff.hpp"

#include <stdexcept>

namespace lowlight {

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::parameter(Parameter& p) {
  Node n;
  n.value = p.value;
  n.requires_grad = true;
  n.param = &p;
  return push(std::move(n));
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  return record(std::move(value), std::vector<Var>(inputs), std::move(backward));
}

Var Tape::record(Tensor value, const std::vector<Var>& inputs, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  for (const Var& in : inputs) {
    if (&in.tape() != this) throw std::logic_error("operand recorded on a different tape");
    n.requires_grad = n.requires_grad || nodes_[in.id()].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

void Tape::accumulate(const Var& v, Tensor grad) {
  Node& n = nodes_[v.id()];
  if (!n.requires_grad) return;
  if (!same_shape(grad, n.value)) {
    throw ShapeError("gradient shape " + shape_string(grad.shape()) + " does not match node shape " +
                     shape_string(n.value.shape()));
  }
  if (n.has_grad) {
    n.grad.array() += grad.array();
  } else {
    n.grad = std::move(grad);
    n.has_grad = true;
  }
}

void Tape::backward(const Var& loss) {
  if (&loss.tape() != this) throw std::logic_error("loss recorded on a different tape");
  if (loss.value().size() != 1) {
    throw ShapeError("backward() needs a scalar loss, got shape " + shape_string(loss.shape()));
  }
  Node& root = nodes_[loss.id()];
  if (root.requires_grad) {
    root.grad = Tensor(root.value.shape(), 1.0);
    root.has_grad = true;
  }
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad) continue;
    if (n.param != nullptr) {
      n.param->grad.array() += n.grad.array();
    } else if (n.backward) {
      n.backward(n.grad, *this);
    }
    n.grad = Tensor();
    n.has_grad = false;
  }
  clear();
}

}  // namespace lowlight
