/**
 * Copyright 2026 The dfscil Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DFSCIL_ERRORS_HPP
#define DFSCIL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dfscil {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, non-SPD systems, zero-norm vectors.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Hyper-parameters or inputs outside their documented domain.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Operation not permitted in the object's current state (frozen, empty...).
class StateError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. The message carries the file and line/offset.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed data that violates a dataset contract (disjointness, shots).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dfscil

#endif  // DFSCIL_ERRORS_HPP
