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

// Label-constraint structure shared by all views.
//
// The per-sample representation is H = A Z, where Z has one row per class
// (for the labeled samples) followed by one row per unlabeled sample. A is the
// n x (c + n - l) block matrix [C 0; 0 I]: every labeled sample selects its
// class row, every unlabeled sample its own row. Same-label samples therefore
// share a representation.
//
// The discriminative mask has shape (c + n - l) x (c * m_s). Class row r is
// zero on its own block of m_s latent columns and one elsewhere; rows of
// unlabeled samples are all zero. With no labels at all, A is the n x n
// identity and the mask vanishes.
struct LabelConstraint {
  Matrix assignment;       // A_lc, n x (c + n - l)
  Matrix class_indicator;  // C, l x c one-hot rows
  Matrix disc_mask;        // (c + n - l) x d
  std::vector<Index> row_of;  // row of Z that sample i reads
  int n_classes = 0;
  int subspace_dim = 1;
  Index n_labeled = 0;

  Index n_samples() const { return static_cast<Index>(row_of.size()); }
  Index aux_rows() const { return assignment.cols(); }
  Index latent_dim() const { return static_cast<Index>(n_classes) * subspace_dim; }
};

/// Builds A_lc, C and the discriminative mask from labeled-first labels.
/// Throws DataError on out-of-range ids, a labeled sample after an unlabeled
/// one, or (when l > 0) a class without labeled samples.
LabelConstraint build_label_constraint(const std::vector<int>& labels,
                                       int n_classes, int subspace_dim = 1);

/// H = A_lc Z, computed as an exact row gather.
Matrix merge_rows(const LabelConstraint& constraint, const Matrix& z);

/// A_lcᵀ M: sums the rows of an n x d matrix into the rows of Z they came from.
Matrix collapse_rows(const LabelConstraint& constraint, const Matrix& m);

}  // namespace dcsmvnmf
