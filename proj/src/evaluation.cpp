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

#include "dcsmvnmf/evaluation.hpp"

#include "dcsmvnmf/seeds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <random>

namespace dcsmvnmf {
namespace {

double squared_distance(const Matrix& points, Index i, const Matrix& centers, Index k) {
  return (points.row(i) - centers.row(k)).squaredNorm();
}

struct LloydRun {
  std::vector<int> assignments;
  Matrix centers;
  double sse = 0.0;
  int iterations = 0;
  std::vector<double> sse_history;
};

Matrix farthest_point_seeds(const Matrix& points, int c, std::mt19937_64& rng) {
  const Index n = points.rows();
  std::uniform_int_distribution<Index> pick(0, n - 1);
  Matrix centers(c, points.cols());
  centers.row(0) = points.row(pick(rng));
  Vector nearest(n);
  for (Index i = 0; i < n; ++i) nearest(i) = squared_distance(points, i, centers, 0);
  for (int k = 1; k < c; ++k) {
    Index far = 0;
    for (Index i = 1; i < n; ++i) {
      if (nearest(i) > nearest(far)) far = i;
    }
    centers.row(k) = points.row(far);
    for (Index i = 0; i < n; ++i) {
      nearest(i) = std::min(nearest(i), squared_distance(points, i, centers, k));
    }
  }
  return centers;
}

double total_sse(const Matrix& points, const std::vector<int>& assign,
                 const Matrix& centers) {
  double sse = 0.0;
  for (Index i = 0; i < points.rows(); ++i) {
    sse += squared_distance(points, i, centers, assign[i]);
  }
  return sse;
}

LloydRun lloyd(const Matrix& points, Matrix centers, int max_iters) {
  const Index n = points.rows();
  const int c = static_cast<int>(centers.rows());
  LloydRun run;
  run.assignments.assign(static_cast<std::size_t>(n), -1);

  for (int it = 0; it < max_iters; ++it) {
    bool changed = false;
    std::vector<int> sizes(static_cast<std::size_t>(c), 0);
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(points, i, centers, 0);
      for (int k = 1; k < c; ++k) {
        const double d = squared_distance(points, i, centers, k);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      if (run.assignments[i] != best) changed = true;
      run.assignments[i] = best;
      ++sizes[best];
    }

    // An empty cluster takes the point farthest from its centre in the
    // currently largest cluster.
    for (int k = 0; k < c; ++k) {
      if (sizes[k] > 0) continue;
      const int largest = static_cast<int>(
          std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
      Index far = -1;
      double far_d = -1.0;
      for (Index i = 0; i < n; ++i) {
        if (run.assignments[i] != largest) continue;
        const double d = squared_distance(points, i, centers, largest);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      run.assignments[far] = k;
      centers.row(k) = points.row(far);
      --sizes[largest];
      ++sizes[k];
      changed = true;
    }

    Matrix sums = Matrix::Zero(c, points.cols());
    for (Index i = 0; i < n; ++i) sums.row(run.assignments[i]) += points.row(i);
    for (int k = 0; k < c; ++k) centers.row(k) = sums.row(k) / static_cast<double>(sizes[k]);

    run.iterations = it + 1;
    run.sse_history.push_back(total_sse(points, run.assignments, centers));
    if (!changed) break;
  }
  run.centers = std::move(centers);
  run.sse = run.sse_history.back();
  return run;
}

}  // namespace

Matrix extract_representation(const FactorizationState& state,
                              const LabelConstraint& constraint) {
  return merge_rows(constraint, state.Zc);
}

KMeansResult kmeans(const Matrix& points, int n_clusters, std::uint64_t seed,
                    int restarts, int max_iters) {
  if (n_clusters < 1 || points.rows() < n_clusters) {
    throw std::invalid_argument("kmeans needs 1 <= clusters <= points");
  }
  if (restarts < 1) throw std::invalid_argument("kmeans needs at least one restart");

  KMeansResult best;
  best.sse = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    LloydRun run = lloyd(points, farthest_point_seeds(points, n_clusters, rng), max_iters);
    if (run.sse < best.sse) {
      best.assignments = std::move(run.assignments);
      best.centers = std::move(run.centers);
      best.sse = run.sse;
      best.iterations = run.iterations;
      best.sse_history = std::move(run.sse_history);
      best.restart = r;
    }
  }
  return best;
}

std::vector<int> argmax_assignments(const Matrix& points, int subspace_dim) {
  std::vector<int> out(static_cast<std::size_t>(points.rows()));
  for (Index i = 0; i < points.rows(); ++i) {
    Index j = 0;
    points.row(i).maxCoeff(&j);
    out[i] = static_cast<int>(j / subspace_dim);
  }
  return out;
}

Assignment hungarian_match(const CountMatrix& weights) {
  const Index n = weights.rows();
  if (weights.cols() != n) throw std::invalid_argument("hungarian_match needs a square matrix");
  if (n == 0) return {};
  if ((weights.array() < 0).any()) {
    throw std::invalid_argument("hungarian_match needs nonnegative weights");
  }

  // Shortest augmenting path on costs max - w, 1-based with a virtual column 0.
  const std::int64_t top = weights.maxCoeff();
  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
  std::vector<std::int64_t> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
  std::vector<Index> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const Index i0 = p[j0];
      std::int64_t delta = kInf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const std::int64_t cur = (top - weights(i0 - 1, j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const Index j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment out;
  out.permutation.assign(static_cast<std::size_t>(n), 0);
  for (Index j = 1; j <= n; ++j) out.permutation[p[j] - 1] = static_cast<int>(j - 1);
  for (Index i = 0; i < n; ++i) out.matched += weights(i, out.permutation[i]);
  return out;
}

CountMatrix confusion_matrix(const std::vector<int>& pred,
                             const std::vector<int>& truth, int n_classes) {
  if (pred.size() != truth.size()) {
    throw std::invalid_argument("prediction and truth lengths differ");
  }
  CountMatrix m = CountMatrix::Zero(n_classes, n_classes);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || pred[i] >= n_classes || truth[i] < 0 || truth[i] >= n_classes) {
      throw std::invalid_argument("cluster or class id out of range");
    }
    ++m(pred[i], truth[i]);
  }
  return m;
}

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth,
                int n_classes) {
  const CountMatrix m = confusion_matrix(pred, truth, n_classes);
  if (pred.empty()) return 0.0;
  return static_cast<double>(hungarian_match(m).matched) / static_cast<double>(pred.size());
}

double nmi(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size()) {
    throw std::invalid_argument("prediction and truth lengths differ");
  }
  if (pred.empty()) return 1.0;
  std::map<int, std::int64_t> count_a, count_b;
  std::map<std::pair<int, int>, std::int64_t> joint;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ++count_a[pred[i]];
    ++count_b[truth[i]];
    ++joint[{pred[i], truth[i]}];
  }
  // One cell per row and per column: the partitions agree up to relabeling.
  if (joint.size() == count_a.size() && joint.size() == count_b.size()) return 1.0;

  const double total = static_cast<double>(pred.size());
  // Terms are summed in sorted order so that swapping the arguments gives a
  // bit-identical result.
  auto sorted_sum = [](std::vector<double> terms) {
    std::sort(terms.begin(), terms.end());
    return std::accumulate(terms.begin(), terms.end(), 0.0);
  };
  auto entropy = [&](const std::map<int, std::int64_t>& counts) {
    std::vector<double> terms;
    for (const auto& [id, cnt] : counts) {
      const double p = static_cast<double>(cnt) / total;
      terms.push_back(-p * std::log(p));
    }
    return sorted_sum(std::move(terms));
  };
  const double ha = entropy(count_a);
  const double hb = entropy(count_b);
  if (ha <= 0.0 || hb <= 0.0) return 0.0;

  std::vector<double> terms;
  for (const auto& [cell, cnt] : joint) {
    const double na = static_cast<double>(count_a[cell.first]);
    const double nb = static_cast<double>(count_b[cell.second]);
    const double nab = static_cast<double>(cnt);
    terms.push_back(nab / total * std::log(total * nab / (na * nb)));
  }
  const double mi = sorted_sum(std::move(terms));
  return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

ClusteringResult score(const std::vector<int>& pred,
                       const std::vector<int>& truth, int n_classes) {
  ClusteringResult out;
  out.assignments = pred;
  const Assignment match = hungarian_match(confusion_matrix(pred, truth, n_classes));
  out.matched_permutation = match.permutation;
  out.accuracy = pred.empty() ? 0.0
                              : static_cast<double>(match.matched) /
                                    static_cast<double>(pred.size());
  out.nmi = nmi(pred, truth);
  return out;
}

std::pair<double, double> mean_std(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double x : values) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

MetricSummary evaluate_representation(const Matrix& representation,
                                      const std::vector<int>& truth,
                                      int n_classes, int subspace_dim,
                                      const EvalOptions& options) {
  if (static_cast<Index>(truth.size()) != representation.rows()) {
    throw std::invalid_argument("truth length differs from representation rows");
  }
  if (options.repeats < 1) throw std::invalid_argument("repeats must be positive");
  MetricSummary out;
  for (int r = 0; r < options.repeats; ++r) {
    std::vector<int> pred;
    if (options.method == ClusterMethod::kArgmax) {
      pred = argmax_assignments(representation, subspace_dim);
    } else {
      pred = kmeans(representation, n_classes,
                    derive_seed(options.seed, static_cast<std::uint64_t>(r)),
                    options.restarts)
                 .assignments;
    }
    const ClusteringResult s = score(pred, truth, n_classes);
    out.accuracy.push_back(s.accuracy);
    out.nmi.push_back(s.nmi);
  }
  std::tie(out.accuracy_mean, out.accuracy_std) = mean_std(out.accuracy);
  std::tie(out.nmi_mean, out.nmi_std) = mean_std(out.nmi);
  return out;
}

MetricSummary evaluate_run(const FactorizationState& state,
                           const MultiViewDataset& dataset,
                           const LabelConstraint& constraint,
                           const EvalOptions& options) {
  if (!dataset.has_complete_truth()) {
    throw DataError("evaluation needs ground truth for every sample");
  }
  return evaluate_representation(extract_representation(state, constraint),
                                 dataset.truth, dataset.n_classes,
                                 constraint.subspace_dim, options);
}

std::string format_percent(double mean, double std_dev) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f±%.2f", 100.0 * mean, 100.0 * std_dev);
  return buf;
}

}  // namespace dcsmvnmf
