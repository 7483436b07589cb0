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

#include "dcsmvnmf/constraints.hpp"
#include "dcsmvnmf/factorization.hpp"
#include "dcsmvnmf/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dcsmvnmf {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

struct ClusteringResult {
  std::vector<int> assignments;
  std::vector<int> matched_permutation;  // cluster id -> class id
  double accuracy = 0.0;
  double nmi = 0.0;
};

struct KMeansResult {
  std::vector<int> assignments;
  Matrix centers;  // c x d
  double sse = 0.0;
  int iterations = 0;
  int restart = 0;                  // index of the winning restart
  std::vector<double> sse_history;  // winning restart, one entry per Lloyd pass
};

struct Assignment {
  std::vector<int> permutation;  // row -> column
  std::int64_t matched = 0;
};

enum class ClusterMethod { kKMeans, kArgmax };

struct EvalOptions {
  int repeats = 10;
  int restarts = 20;
  std::uint64_t seed = 0;
  ClusterMethod method = ClusterMethod::kKMeans;
};

struct MetricSummary {
  std::vector<double> accuracy;
  std::vector<double> nmi;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  double nmi_mean = 0.0;
  double nmi_std = 0.0;
};

/// Consensus representation A_lc Z_c, one row per sample.
Matrix extract_representation(const FactorizationState& state,
                              const LabelConstraint& constraint);

/// Best of `restarts` Lloyd runs (rows of `points` are the samples), each
/// seeded with a random first centre and greedy farthest-point picks.
KMeansResult kmeans(const Matrix& points, int n_clusters, std::uint64_t seed,
                    int restarts = 20, int max_iters = 300);

/// Cluster index of the largest entry of each row, grouped by subspace.
std::vector<int> argmax_assignments(const Matrix& points, int subspace_dim = 1);

/// Maximum-weight perfect matching on a square nonnegative count matrix.
Assignment hungarian_match(const CountMatrix& weights);

CountMatrix confusion_matrix(const std::vector<int>& pred,
                             const std::vector<int>& truth, int n_classes);

/// Fraction of samples correct after the best cluster-to-class matching.
double accuracy(const std::vector<int>& pred, const std::vector<int>& truth,
                int n_classes);

/// Mutual information normalized by the geometric mean of the entropies.
double nmi(const std::vector<int>& pred, const std::vector<int>& truth);

ClusteringResult score(const std::vector<int>& pred,
                       const std::vector<int>& truth, int n_classes);

/// Mean and sample standard deviation (0 for a single value).
std::pair<double, double> mean_std(const std::vector<double>& values);

/// Clusters `representation` `repeats` times with derived seeds and scores
/// every run against `truth`.
MetricSummary evaluate_representation(const Matrix& representation,
                                      const std::vector<int>& truth,
                                      int n_classes, int subspace_dim,
                                      const EvalOptions& options);

MetricSummary evaluate_run(const FactorizationState& state,
                           const MultiViewDataset& dataset,
                           const LabelConstraint& constraint,
                           const EvalOptions& options);

/// "61.03±3.57" style, values scaled by 100.
std::string format_percent(double mean, double std_dev);

}  // namespace dcsmvnmf
