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

#ifndef LOWLIGHT_ERRORS_HPP
#define LOWLIGHT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lowlight {

/// Operand shapes that cannot be combined.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Unreadable, malformed or mismatched input data (files, directories, images).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A loss or intermediate value stopped being finite during optimization.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string stage, std::string term, long iteration)
      : std::runtime_error(stage + ": non-finite " + term + " at iteration " + std::to_string(iteration)),
        stage_(std::move(stage)),
        term_(std::move(term)),
        iteration_(iteration) {}

  const std::string& stage() const { return stage_; }
  const std::string& term() const { return term_; }
  long iteration() const { return iteration_; }

 private:
  std::string stage_;
  std::string term_;
  long iteration_;
};

}  // namespace lowlight

#endif  // LOWLIGHT_ERRORS_HPP
