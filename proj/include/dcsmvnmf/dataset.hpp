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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace dcsmvnmf {

// n samples observed in several views. Every view is stored features x
// samples, and columns are kept in labeled-first order: columns [0, l) carry
// a visible label, columns [l, n) do not. `permutation[i]` is the original
// index of internal column i.
struct MultiViewDataset {
  std::vector<Matrix> views;
  std::vector<int> labels;  // visible labels, kUnlabeled when hidden
  std::vector<int> truth;   // ground truth in internal order, kUnlabeled if unknown
  std::vector<Index> permutation;
  int n_classes = 0;

  Index n_samples() const { return static_cast<Index>(labels.size()); }
  int n_views() const { return static_cast<int>(views.size()); }
  Index n_labeled() const;
  bool has_complete_truth() const;

  /// Throws DataError if any dataset invariant is violated.
  void validate() const;
};

struct SyntheticSpec {
  int n_classes = 3;
  int samples_per_class = 50;
  std::vector<int> view_dims{20, 30};
  double separation = 1.0;
  double noise = 0.1;
  std::uint64_t seed = 0;
};

/// Reads CSV views and a label file. Samples are reordered labeled-first.
/// When `n_classes` is absent it is inferred as 1 + the largest label.
MultiViewDataset load_dataset(
    const std::vector<std::filesystem::path>& view_paths,
    const std::filesystem::path& label_path,
    std::optional<int> n_classes = std::nullopt);

/// Builds a dataset from in-memory parts (original sample order). Visible
/// labels double as ground truth.
MultiViewDataset make_dataset(std::vector<Matrix> views, std::vector<int> labels,
                              std::optional<int> n_classes = std::nullopt);

/// Writes view_<v>.csv and labels.txt in original sample order.
void write_dataset(const MultiViewDataset& dataset,
                   const std::filesystem::path& dir);

/// Reveals about `ratio` of the known ground-truth labels, stratified by class
/// with at least one label per class. The remaining labels are hidden but kept
/// in `truth`. The result is reordered labeled-first.
MultiViewDataset mask_labels(const MultiViewDataset& dataset, double ratio,
                             std::uint64_t seed);

/// Per-class number of labels mask_labels reveals for the given class sizes.
std::vector<int> stratified_quota(const std::vector<int>& class_sizes,
                                  double ratio);

MultiViewDataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace dcsmvnmf
