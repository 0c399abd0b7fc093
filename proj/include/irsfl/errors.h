/*
 * Copyright 2026 The irsfl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef IRSFL_ERRORS_H_
#define IRSFL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace irsfl {

// Argument outside the mathematical domain of an operation (non-positive
// distance, gamma <= 0, empty gradient, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Inputs are valid but carry no information to normalize, e.g. all local
// gradients have zero variance.
class DegenerateInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The effective scalar channel of a device is exactly zero.
class DegenerateChannelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Scenario configuration failed to parse or validate.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched vector/matrix shapes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace irsfl

#endif  // IRSFL_ERRORS_H_
