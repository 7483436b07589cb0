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

#include "dcsmvnmf/types.hpp"

#include <vector>

namespace dcsmvnmf {

/// Heat-kernel bandwidth choice: a fixed value, or the median Euclidean
/// length of the k-NN edges.
struct DeltaPolicy {
  enum class Kind { kFixed, kMedian };
  Kind kind = Kind::kMedian;
  double value = 0.0;

  static DeltaPolicy fixed(double delta) { return {Kind::kFixed, delta}; }
  static DeltaPolicy median() { return {Kind::kMedian, 0.0}; }
};

// k-NN heat-kernel graph of one view: S (symmetric, zero diagonal), its
// degree vector D and combinatorial Laplacian L = D - S.
struct ViewGraph {
  Matrix similarity;
  Vector degree;
  Matrix laplacian;
  int k = 0;
  double delta = 0.0;
};

/// Builds the graph on the columns of `x`. Samples i and j are joined when
/// either is among the k nearest neighbours of the other (distance ties go
/// to the smaller index) with weight exp(-|x_i - x_j|^2 / (2 delta^2)).
ViewGraph build_view_graph(const Matrix& x, int k, DeltaPolicy policy);

/// Resolved bandwidth for a median policy: median edge length, falling back
/// to the median positive edge length and then to 1.
double median_edge_length(const std::vector<double>& edge_lengths);

}  // namespace dcsmvnmf
