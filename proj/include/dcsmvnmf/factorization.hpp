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
#include "dcsmvnmf/dataset.hpp"
#include "dcsmvnmf/graph.hpp"
#include "dcsmvnmf/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dcsmvnmf {

// Which terms of the objective are active. The baselines drop the
// discriminative (alpha) and/or graph (beta) terms; kNoNormalization keeps
// every term but never rescales the basis, so the column-norm matrix Q stays
// explicit throughout.
enum class Variant {
  kFull,
  kBaseline,
  kBaselineAlpha,
  kBaselineBeta,
  kNoNormalization,
};

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);
const std::vector<Variant>& all_variants();

struct SolverConfig {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  int subspace_dim = 1;
  int max_iters = 300;
  double tol = 1e-6;
  double epsilon = 1e-12;  // denominator floor of the multiplicative rules
  std::uint64_t seed = 0;
  Variant variant = Variant::kFull;
  bool parallel = false;  // update views concurrently

  /// Copy with the weights the variant switches off set to exactly zero.
  SolverConfig effective() const;
  bool normalizes() const { return variant != Variant::kNoNormalization; }
  void validate() const;
};

struct ViewTerms {
  double reconstruction = 0.0;
  double discriminative = 0.0;  // already weighted by alpha
  double graph = 0.0;           // already weighted by beta
  double consensus = 0.0;       // already weighted by gamma

  double total() const { return reconstruction + discriminative + graph + consensus; }
};

struct ObjectiveValue {
  double total = 0.0;
  std::vector<ViewTerms> views;
};

struct TraceEntry {
  int iteration = 0;
  ObjectiveValue objective;
};

struct FactorizationState {
  std::vector<Matrix> W;  // m^v x d basis per view
  std::vector<Matrix> Z;  // (c + n - l) x d auxiliary matrix per view
  std::vector<Vector> Q;  // diagonal of the column-norm matrix per view
  Matrix Zc;              // consensus auxiliary matrix
  std::vector<TraceEntry> trace;
  ObjectiveValue initial;  // objective at the random start
  int iterations = 0;
  bool converged = false;

  int n_views() const { return static_cast<int>(W.size()); }
  double final_objective() const {
    return trace.empty() ? initial.total : trace.back().objective.total;
  }
};

// Diagonals of the d x d matrices entering the basis update.
struct DiagonalTerms {
  Vector y1;        // diag((I_disc ⊙ Z)ᵀ (I_disc ⊙ Z))
  Vector y2_plus;   // diag(Hᵀ D H), H = A_lc Z
  Vector y2_minus;  // diag(Hᵀ S H)
  Vector y3;        // diag(Zᵀ Z)
  Vector y4;        // diag(Z_cᵀ Z)
};

struct Gradient {
  Matrix dW;
  Matrix dZ;
};

/// Euclidean norm of each column.
Vector column_norms(const Matrix& w);

/// Random strictly positive start, uniform in (0.01, 1.01). Z_c is the mean
/// of the Z^v and Q holds the column norms of each W^v.
FactorizationState initialize(const MultiViewDataset& dataset,
                              const LabelConstraint& constraint,
                              const SolverConfig& config);

/// Full objective with explicit Q, summed over views. Requires state.Q to
/// match the current bases. Throws DivergenceError on a non-finite value.
ObjectiveValue objective(const FactorizationState& state,
                         const MultiViewDataset& dataset,
                         const LabelConstraint& constraint,
                         const std::vector<ViewGraph>& graphs,
                         const SolverConfig& config);

DiagonalTerms compute_diagonal_terms(const FactorizationState& state, int view,
                                     const LabelConstraint& constraint,
                                     const ViewGraph& graph);

/// Multiplicative basis update. Uses state.Q[view] for the consensus term.
void update_basis(FactorizationState& state, int view,
                  const DiagonalTerms& terms, const MultiViewDataset& dataset,
                  const LabelConstraint& constraint, const SolverConfig& config);

/// Moves the basis column norms into Z: W <- W Q^-1, Z <- Z Q, Q <- I.
/// Throws DegenerateBasisError if a basis column is zero.
void normalize_basis(FactorizationState& state, int view);

/// Multiplicative update of Z^v with the current state.Q[view] retained
/// (Q = I right after normalize_basis).
void update_auxiliary(FactorizationState& state, int view,
                      const MultiViewDataset& dataset,
                      const LabelConstraint& constraint, const ViewGraph& graph,
                      const SolverConfig& config);

/// Closed-form consensus: mean over views of Z^v Q^v, in view order.
void update_consensus(FactorizationState& state);

/// Analytic gradient of the objective with respect to W^v and Z^v, including
/// the dependence of Q^v on W^v. Q is recomputed from the current W.
Gradient gradient(const FactorizationState& state, int view,
                  const MultiViewDataset& dataset,
                  const LabelConstraint& constraint, const ViewGraph& graph,
                  const SolverConfig& config);

/// One sweep: per view {terms, basis, normalize, auxiliary}, then consensus.
void step(FactorizationState& state, const MultiViewDataset& dataset,
          const LabelConstraint& constraint,
          const std::vector<ViewGraph>& graphs, const SolverConfig& config);

/// Alternates `step` until the relative objective change drops below tol or
/// max_iters is reached. Every iteration is appended to state.trace.
FactorizationState fit(const MultiViewDataset& dataset,
                       const LabelConstraint& constraint,
                       const std::vector<ViewGraph>& graphs,
                       const SolverConfig& config);

}  // namespace dcsmvnmf
