// Copyright 2026 The dcsmvnmf Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dcsmvnmf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Label value marking a sample whose class is not revealed to the solver.
inline constexpr int kUnlabeled = -1;

/// Malformed or inconsistent input data (files, labels, shapes).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a basis column collapses to zero and cannot be normalized.
class DegenerateBasisError : public std::runtime_error {
 public:
  DegenerateBasisError(int view, Index column)
      : std::runtime_error("degenerate basis: view " + std::to_string(view) +
                           " column " + std::to_string(column) +
                           " has zero norm"),
        view_(view),
        column_(column) {}

  int view() const { return view_; }
  Index column() const { return column_; }

 private:
  int view_;
  Index column_;
};

/// A non-finite value appeared during optimization.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int iteration, const std::string& what)
      : std::runtime_error("divergence at iteration " +
                           std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}

  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

/// Invalid experiment configuration. `path` names the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace dcsmvnmf
