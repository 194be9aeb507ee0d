// Copyright 2026 The ProbeWeight Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PROBEWEIGHT_ERRORS_HPP_
#define PROBEWEIGHT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace probeweight {

// Every failure raised by the library derives from Error so callers can catch
// one type at the tool boundary.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor dimensions do not compose.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// An argument lies outside its valid range (label id, layer index, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf encountered in weights, activations or gradients.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Invalid or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed file on disk.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure or missing artifact.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace probeweight

#endif  // PROBEWEIGHT_ERRORS_HPP_
