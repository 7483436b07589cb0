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

#include "dcsmvnmf/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace dcsmvnmf {
namespace {

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

double median_edge_length(const std::vector<double>& edge_lengths) {
  if (edge_lengths.empty()) return 1.0;
  const double med = median_of(edge_lengths);
  if (med > 0.0) return med;
  std::vector<double> positive;
  std::copy_if(edge_lengths.begin(), edge_lengths.end(),
               std::back_inserter(positive), [](double d) { return d > 0.0; });
  return positive.empty() ? 1.0 : median_of(std::move(positive));
}

ViewGraph build_view_graph(const Matrix& x, int k, DeltaPolicy policy) {
  const Index n = x.cols();
  if (k < 1) throw DataError("k must be positive");
  if (k >= n) {
    throw DataError("k = " + std::to_string(k) + " needs at least " +
                    std::to_string(k + 1) + " samples, have " + std::to_string(n));
  }
  if (policy.kind == DeltaPolicy::Kind::kFixed && !(policy.value > 0.0)) {
    throw DataError("heat-kernel delta must be positive");
  }

  Matrix dist2 = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double d = (x.col(i) - x.col(j)).squaredNorm();
      dist2(i, j) = d;
      dist2(j, i) = d;
    }
  }

  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> edge =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false);
  std::vector<Index> others(static_cast<std::size_t>(n - 1));
  for (Index i = 0; i < n; ++i) {
    others.clear();
    for (Index j = 0; j < n; ++j) {
      if (j != i) others.push_back(j);
    }
    std::partial_sort(others.begin(), others.begin() + k, others.end(),
                      [&](Index a, Index b) {
                        if (dist2(i, a) != dist2(i, b)) return dist2(i, a) < dist2(i, b);
                        return a < b;
                      });
    for (int t = 0; t < k; ++t) {
      edge(i, others[t]) = true;
      edge(others[t], i) = true;
    }
  }

  double delta = policy.value;
  if (policy.kind == DeltaPolicy::Kind::kMedian) {
    std::vector<double> lengths;
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        if (edge(i, j)) lengths.push_back(std::sqrt(dist2(i, j)));
      }
    }
    delta = median_edge_length(lengths);
  }

  ViewGraph g;
  g.k = k;
  g.delta = delta;
  g.similarity = Matrix::Zero(n, n);
  const double scale = 1.0 / (2.0 * delta * delta);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (!edge(i, j)) continue;
      const double w = std::exp(-dist2(i, j) * scale);
      g.similarity(i, j) = w;
      g.similarity(j, i) = w;
    }
  }
  g.degree = g.similarity.rowwise().sum();
  g.laplacian = -g.similarity;
  g.laplacian.diagonal() += g.degree;
  return g;
}

}  // namespace dcsmvnmf
