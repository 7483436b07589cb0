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

#include "dcsmvnmf/dataset.hpp"

#include "dcsmvnmf/csv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace dcsmvnmf {
namespace {

// Stable partition of the current column order: labeled samples first.
MultiViewDataset reorder_labeled_first(const MultiViewDataset& in) {
  const Index n = in.n_samples();
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    if (in.labels[i] != kUnlabeled) order.push_back(i);
  }
  for (Index i = 0; i < n; ++i) {
    if (in.labels[i] == kUnlabeled) order.push_back(i);
  }

  MultiViewDataset out;
  out.n_classes = in.n_classes;
  out.labels.resize(in.labels.size());
  out.truth.resize(in.truth.size());
  out.permutation.resize(in.permutation.size());
  for (Index i = 0; i < n; ++i) {
    out.labels[i] = in.labels[order[i]];
    out.truth[i] = in.truth[order[i]];
    out.permutation[i] = in.permutation[order[i]];
  }
  out.views.reserve(in.views.size());
  for (const Matrix& x : in.views) {
    Matrix reordered(x.rows(), x.cols());
    for (Index i = 0; i < n; ++i) reordered.col(i) = x.col(order[i]);
    out.views.push_back(std::move(reordered));
  }
  return out;
}

void check_class_coverage(const std::vector<int>& ids, int n_classes,
                          const char* what) {
  std::vector<int> seen(static_cast<std::size_t>(n_classes), 0);
  bool any = false;
  for (int id : ids) {
    if (id == kUnlabeled) continue;
    any = true;
    ++seen[id];
  }
  if (!any) return;
  for (int k = 0; k < n_classes; ++k) {
    if (seen[k] == 0) {
      throw DataError(std::string("empty class ") + std::to_string(k) +
                      " in " + what);
    }
  }
}

}  // namespace

Index MultiViewDataset::n_labeled() const {
  return std::count_if(labels.begin(), labels.end(),
                       [](int y) { return y != kUnlabeled; });
}

bool MultiViewDataset::has_complete_truth() const {
  return !truth.empty() && std::none_of(truth.begin(), truth.end(), [](int y) {
    return y == kUnlabeled;
  });
}

void MultiViewDataset::validate() const {
  if (views.empty()) throw DataError("dataset has no views");
  const Index n = n_samples();
  if (n == 0) throw DataError("dataset has no samples");
  if (static_cast<Index>(truth.size()) != n ||
      static_cast<Index>(permutation.size()) != n) {
    throw DataError("labels, truth and permutation lengths disagree");
  }
  for (std::size_t v = 0; v < views.size(); ++v) {
    const Matrix& x = views[v];
    if (x.cols() != n) {
      throw DataError("view " + std::to_string(v) + " has " +
                      std::to_string(x.cols()) + " columns, expected " +
                      std::to_string(n));
    }
    if (x.rows() == 0) throw DataError("view " + std::to_string(v) + " is empty");
    if (!x.allFinite()) {
      throw DataError("view " + std::to_string(v) + " has a non-finite entry");
    }
    if ((x.array() < 0.0).any()) {
      throw DataError("view " + std::to_string(v) + " has a negative entry");
    }
  }

  bool seen_unlabeled = false;
  for (Index i = 0; i < n; ++i) {
    const int y = labels[i];
    if (y < kUnlabeled || y >= n_classes) {
      throw DataError("label " + std::to_string(y) + " at sample " +
                      std::to_string(i) + " outside [0, " +
                      std::to_string(n_classes) + ")");
    }
    if (y == kUnlabeled) {
      seen_unlabeled = true;
    } else if (seen_unlabeled) {
      throw DataError("labeled sample after an unlabeled one at column " +
                      std::to_string(i));
    }
    if (truth[i] < kUnlabeled || truth[i] >= n_classes) {
      throw DataError("ground-truth label out of range at sample " +
                      std::to_string(i));
    }
    if (y != kUnlabeled && truth[i] != y) {
      throw DataError("visible label disagrees with ground truth at sample " +
                      std::to_string(i));
    }
  }
  check_class_coverage(labels, n_classes, "labels");
  check_class_coverage(truth, n_classes, "ground truth");

  std::vector<char> hit(static_cast<std::size_t>(n), 0);
  for (Index p : permutation) {
    if (p < 0 || p >= n || hit[p]) throw DataError("permutation is not a bijection");
    hit[p] = 1;
  }
}

MultiViewDataset make_dataset(std::vector<Matrix> views, std::vector<int> labels,
                              std::optional<int> n_classes) {
  if (views.empty()) throw DataError("at least one view is required");
  const Index n = views.front().cols();
  for (std::size_t v = 0; v < views.size(); ++v) {
    if (views[v].cols() != n) {
      throw DataError("dimension mismatch: view 0 has " + std::to_string(n) +
                      " samples, view " + std::to_string(v) + " has " +
                      std::to_string(views[v].cols()));
    }
  }
  if (static_cast<Index>(labels.size()) != n) {
    throw DataError("label count " + std::to_string(labels.size()) +
                    " does not match sample count " + std::to_string(n));
  }
  const int max_label = labels.empty() ? kUnlabeled
                                       : *std::max_element(labels.begin(), labels.end());
  const int inferred = max_label + 1;
  if (n_classes && max_label >= *n_classes) {
    throw DataError("label id " + std::to_string(max_label) +
                    " exceeds declared class count " + std::to_string(*n_classes));
  }

  MultiViewDataset ds;
  ds.views = std::move(views);
  ds.truth = labels;
  ds.labels = std::move(labels);
  ds.n_classes = n_classes.value_or(inferred);
  ds.permutation.resize(static_cast<std::size_t>(n));
  std::iota(ds.permutation.begin(), ds.permutation.end(), Index{0});
  MultiViewDataset ordered = reorder_labeled_first(ds);
  ordered.validate();
  return ordered;
}

MultiViewDataset load_dataset(
    const std::vector<std::filesystem::path>& view_paths,
    const std::filesystem::path& label_path, std::optional<int> n_classes) {
  std::vector<Matrix> views;
  views.reserve(view_paths.size());
  for (const auto& path : view_paths) views.push_back(csv::read_matrix(path));
  return make_dataset(std::move(views), csv::read_labels(label_path), n_classes);
}

void write_dataset(const MultiViewDataset& dataset,
                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const Index n = dataset.n_samples();
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) labels[dataset.permutation[i]] = dataset.labels[i];
  for (int v = 0; v < dataset.n_views(); ++v) {
    const Matrix& x = dataset.views[v];
    Matrix original(x.rows(), x.cols());
    for (Index i = 0; i < n; ++i) original.col(dataset.permutation[i]) = x.col(i);
    csv::write_matrix(dir / ("view_" + std::to_string(v) + ".csv"), original);
  }
  csv::write_labels(dir / "labels.txt", labels);
}

std::vector<int> stratified_quota(const std::vector<int>& class_sizes,
                                  double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw DataError("label ratio must lie in (0, 1], got " + std::to_string(ratio));
  }
  const int total_pool = std::accumulate(class_sizes.begin(), class_sizes.end(), 0);
  const int nonempty = static_cast<int>(std::count_if(
      class_sizes.begin(), class_sizes.end(), [](int s) { return s > 0; }));
  const int target = static_cast<int>(std::llround(ratio * total_pool));
  if (nonempty < static_cast<int>(class_sizes.size()) || target < nonempty) {
    throw DataError("label ratio " + std::to_string(ratio) + " yields " +
                    std::to_string(target) + " labels, too few to cover " +
                    std::to_string(class_sizes.size()) + " classes");
  }

  const std::size_t c = class_sizes.size();
  std::vector<double> exact(c);
  std::vector<int> quota(c);
  int assigned = 0;
  for (std::size_t k = 0; k < c; ++k) {
    exact[k] = static_cast<double>(target) * class_sizes[k] / total_pool;
    quota[k] = std::min(class_sizes[k], std::max(1, static_cast<int>(std::floor(exact[k]))));
    assigned += quota[k];
  }
  // Largest remainder, ties to the lower class index.
  while (assigned < target) {
    std::size_t best = c;
    for (std::size_t k = 0; k < c; ++k) {
      if (quota[k] >= class_sizes[k]) continue;
      if (best == c || exact[k] - quota[k] > exact[best] - quota[best]) best = k;
    }
    ++quota[best];
    ++assigned;
  }
  while (assigned > target) {
    std::size_t best = c;
    for (std::size_t k = 0; k < c; ++k) {
      if (quota[k] <= 1) continue;
      if (best == c || exact[k] - quota[k] < exact[best] - quota[best]) best = k;
    }
    if (best == c) break;
    --quota[best];
    --assigned;
  }
  return quota;
}

MultiViewDataset mask_labels(const MultiViewDataset& dataset, double ratio,
                             std::uint64_t seed) {
  const int c = dataset.n_classes;
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(c));
  for (Index i = 0; i < dataset.n_samples(); ++i) {
    if (dataset.truth[i] != kUnlabeled) members[dataset.truth[i]].push_back(i);
  }
  std::vector<int> sizes;
  for (const auto& m : members) sizes.push_back(static_cast<int>(m.size()));
  const std::vector<int> quota = stratified_quota(sizes, ratio);

  std::mt19937_64 rng(seed);
  MultiViewDataset masked = dataset;
  std::fill(masked.labels.begin(), masked.labels.end(), kUnlabeled);
  for (int k = 0; k < c; ++k) {
    auto& pool = members[k];
    std::shuffle(pool.begin(), pool.end(), rng);
    for (int j = 0; j < quota[k]; ++j) masked.labels[pool[j]] = k;
  }
  MultiViewDataset ordered = reorder_labeled_first(masked);
  ordered.validate();
  return ordered;
}

MultiViewDataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n_classes < 1 || spec.samples_per_class < 1 || spec.view_dims.empty()) {
    throw DataError("synthetic spec needs at least one class, sample and view");
  }
  if (std::any_of(spec.view_dims.begin(), spec.view_dims.end(),
                  [](int m) { return m < 1; })) {
    throw DataError("synthetic view dimensions must be positive");
  }
  if (!(spec.noise >= 0.0) || !(spec.separation >= 0.0)) {
    throw DataError("synthetic noise and separation must be nonnegative");
  }

  const int c = spec.n_classes;
  const Index n = static_cast<Index>(c) * spec.samples_per_class;
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) labels[i] = static_cast<int>(i / spec.samples_per_class);

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<Matrix> views;
  for (int m : spec.view_dims) {
    Matrix centers(m, c);
    for (Index k = 0; k < c; ++k) {
      for (Index f = 0; f < m; ++f) centers(f, k) = spec.separation * uniform(rng);
    }
    Matrix x(m, n);
    for (Index i = 0; i < n; ++i) {
      for (Index f = 0; f < m; ++f) {
        const double noise = spec.noise > 0.0 ? spec.noise * gauss(rng) : 0.0;
        x(f, i) = std::max(0.0, centers(f, labels[i]) + noise);
      }
    }
    views.push_back(std::move(x));
  }
  return make_dataset(std::move(views), std::move(labels), c);
}

}  // namespace dcsmvnmf
