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

#include "dcsmvnmf/constraints.hpp"

#include <string>

namespace dcsmvnmf {

LabelConstraint build_label_constraint(const std::vector<int>& labels,
                                       int n_classes, int subspace_dim) {
  if (n_classes < 1) throw DataError("class count must be positive");
  if (subspace_dim < 1) throw DataError("subspace dimension must be positive");

  const Index n = static_cast<Index>(labels.size());
  Index l = 0;
  std::vector<int> per_class(static_cast<std::size_t>(n_classes), 0);
  for (Index i = 0; i < n; ++i) {
    const int y = labels[i];
    if (y == kUnlabeled) continue;
    if (y < 0 || y >= n_classes) {
      throw DataError("label " + std::to_string(y) + " at sample " +
                      std::to_string(i) + " outside [0, " +
                      std::to_string(n_classes) + ")");
    }
    if (i != l) {
      throw DataError("labeled sample " + std::to_string(i) +
                      " follows an unlabeled one");
    }
    ++per_class[y];
    ++l;
  }
  if (l > 0) {
    for (int k = 0; k < n_classes; ++k) {
      if (per_class[k] == 0) {
        throw DataError("class " + std::to_string(k) + " has no labeled sample");
      }
    }
  }

  const Index class_rows = l > 0 ? n_classes : 0;
  const Index rows = class_rows + (n - l);
  const Index d = static_cast<Index>(n_classes) * subspace_dim;

  LabelConstraint out;
  out.n_classes = n_classes;
  out.subspace_dim = subspace_dim;
  out.n_labeled = l;
  out.row_of.resize(static_cast<std::size_t>(n));
  out.assignment = Matrix::Zero(n, rows);
  out.class_indicator = Matrix::Zero(l, n_classes);
  for (Index i = 0; i < n; ++i) {
    const Index r = i < l ? labels[i] : class_rows + (i - l);
    out.row_of[i] = r;
    out.assignment(i, r) = 1.0;
    if (i < l) out.class_indicator(i, labels[i]) = 1.0;
  }

  out.disc_mask = Matrix::Zero(rows, d);
  for (Index r = 0; r < class_rows; ++r) {
    out.disc_mask.row(r).setOnes();
    out.disc_mask.block(r, r * subspace_dim, 1, subspace_dim).setZero();
  }
  return out;
}

Matrix merge_rows(const LabelConstraint& constraint, const Matrix& z) {
  if (z.rows() != constraint.aux_rows()) {
    throw DataError("merge_rows: Z has " + std::to_string(z.rows()) +
                    " rows, expected " + std::to_string(constraint.aux_rows()));
  }
  const Index n = constraint.n_samples();
  Matrix h(n, z.cols());
  for (Index i = 0; i < n; ++i) h.row(i) = z.row(constraint.row_of[i]);
  return h;
}

Matrix collapse_rows(const LabelConstraint& constraint, const Matrix& m) {
  if (m.rows() != constraint.n_samples()) {
    throw DataError("collapse_rows: expected " +
                    std::to_string(constraint.n_samples()) + " rows, got " +
                    std::to_string(m.rows()));
  }
  Matrix out = Matrix::Zero(constraint.aux_rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i) out.row(constraint.row_of[i]) += m.row(i);
  return out;
}

}  // namespace dcsmvnmf
