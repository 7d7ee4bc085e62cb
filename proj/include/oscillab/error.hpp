// Copyright 2026 The Oscillab Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace oscillab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimension : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NonHermitian : public Error {
 public:
  using Error::Error;
};

class NoUniqueSteadyState : public Error {
 public:
  using Error::Error;
};

/// The truncated Fock space cannot represent the requested state.
class TruncationInadequate : public Error {
 public:
  using Error::Error;
};

class TraceDrift : public Error {
 public:
  using Error::Error;
};

/// Raised when an integrated quantity leaves the overflow guard.
class Divergence : public Error {
 public:
  Divergence(const std::string& what, double time)
      : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class NoStableCycle : public Error {
 public:
  using Error::Error;
};

class TooFewCycles : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace oscillab
