// Copyright 2026 The AirComp Toolkit Authors
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

namespace aircomp {

// Bad argument: shape mismatch, out-of-range config, non-Hermitian input.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or version-mismatched binary/text input.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FeasibilityError : public SolverError {
 public:
  using SolverError::SolverError;
};

class IterationLimitError : public SolverError {
 public:
  using SolverError::SolverError;
};

class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(const std::string& what, long sample_id)
      : std::runtime_error(what), sample_id_(sample_id) {}
  long sample_id() const noexcept { return sample_id_; }

 private:
  long sample_id_;
};

}  // namespace aircomp
