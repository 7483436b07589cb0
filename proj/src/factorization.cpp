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

#include "dcsmvnmf/factorization.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <random>

namespace dcsmvnmf {
namespace {

constexpr std::array<std::pair<Variant, std::string_view>, 5> kVariantNames{{
    {Variant::kBaseline, "baseline"},
    {Variant::kBaselineAlpha, "baseline_alpha"},
    {Variant::kBaselineBeta, "baseline_beta"},
    {Variant::kNoNormalization, "no_normalization"},
    {Variant::kFull, "full"},
}};

void check_shapes(const FactorizationState& state,
                  const MultiViewDataset& dataset,
                  const LabelConstraint& constraint) {
  if (state.n_views() != dataset.n_views()) {
    throw DataError("state has " + std::to_string(state.n_views()) +
                    " views, dataset " + std::to_string(dataset.n_views()));
  }
  if (constraint.n_samples() != dataset.n_samples()) {
    throw DataError("constraint and dataset disagree on the sample count");
  }
}

void require_finite(const Matrix& m, int iteration, const std::string& what) {
  if (!m.allFinite()) throw DivergenceError(iteration, what + " is not finite");
}

// Mean over views of Z^v Q^v, written as z0 + sum (z_v - z0) / n_v so that
// identical inputs reproduce exactly.
Matrix consensus_mean(const FactorizationState& state) {
  const int nv = static_cast<int>(state.Z.size());
  const Matrix first = state.Z[0] * state.Q[0].asDiagonal();
  Matrix acc = Matrix::Zero(first.rows(), first.cols());
  for (int v = 1; v < nv; ++v) acc += state.Z[v] * state.Q[v].asDiagonal() - first;
  return (first + acc / static_cast<double>(nv)).cwiseMax(0.0);
}

void view_step(FactorizationState& state, int v, const MultiViewDataset& dataset,
               const LabelConstraint& constraint, const ViewGraph& graph,
               const SolverConfig& config) {
  state.Q[v] = column_norms(state.W[v]);
  const DiagonalTerms terms = compute_diagonal_terms(state, v, constraint, graph);
  update_basis(state, v, terms, dataset, constraint, config);
  if (config.normalizes()) {
    normalize_basis(state, v);
  } else {
    state.Q[v] = column_norms(state.W[v]);
  }
  update_auxiliary(state, v, dataset, constraint, graph, config);
}

}  // namespace

std::string_view variant_name(Variant v) {
  for (const auto& [variant, name] : kVariantNames) {
    if (variant == v) return name;
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (const auto& [variant, known] : kVariantNames) {
    if (known == name) return variant;
  }
  throw std::invalid_argument("unknown variant: " + std::string(name));
}

const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> variants = [] {
    std::vector<Variant> out;
    for (const auto& entry : kVariantNames) out.push_back(entry.first);
    return out;
  }();
  return variants;
}

SolverConfig SolverConfig::effective() const {
  SolverConfig out = *this;
  switch (variant) {
    case Variant::kBaseline:
      out.alpha = 0.0;
      out.beta = 0.0;
      break;
    case Variant::kBaselineAlpha:
      out.beta = 0.0;
      break;
    case Variant::kBaselineBeta:
      out.alpha = 0.0;
      break;
    case Variant::kFull:
    case Variant::kNoNormalization:
      break;
  }
  return out;
}

void SolverConfig::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !(gamma >= 0.0)) {
    throw std::invalid_argument("alpha, beta and gamma must be nonnegative");
  }
  if (subspace_dim < 1) throw std::invalid_argument("subspace_dim must be positive");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be positive");
  if (!(tol >= 0.0)) throw std::invalid_argument("tol must be nonnegative");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
}

Vector column_norms(const Matrix& w) { return w.colwise().norm().transpose(); }

FactorizationState initialize(const MultiViewDataset& dataset,
                              const LabelConstraint& constraint,
                              const SolverConfig& config) {
  if (constraint.n_samples() != dataset.n_samples()) {
    throw DataError("constraint and dataset disagree on the sample count");
  }
  if (constraint.subspace_dim != config.subspace_dim) {
    throw DataError("constraint subspace_dim differs from solver config");
  }
  const Index d = constraint.latent_dim();
  const Index rows = constraint.aux_rows();

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> uniform(0.01, 1.01);
  auto random_matrix = [&](Index r, Index c) {
    Matrix m(r, c);
    for (Index j = 0; j < c; ++j) {
      for (Index i = 0; i < r; ++i) m(i, j) = uniform(rng);
    }
    return m;
  };

  FactorizationState state;
  for (int v = 0; v < dataset.n_views(); ++v) {
    state.W.push_back(random_matrix(dataset.views[v].rows(), d));
    state.Z.push_back(random_matrix(rows, d));
    state.Q.push_back(Vector::Ones(d));
  }
  state.Zc = consensus_mean(state);
  for (int v = 0; v < dataset.n_views(); ++v) state.Q[v] = column_norms(state.W[v]);
  return state;
}

ObjectiveValue objective(const FactorizationState& state,
                         const MultiViewDataset& dataset,
                         const LabelConstraint& constraint,
                         const std::vector<ViewGraph>& graphs,
                         const SolverConfig& config) {
  check_shapes(state, dataset, constraint);
  const SolverConfig cfg = config.effective();
  ObjectiveValue out;
  for (int v = 0; v < state.n_views(); ++v) {
    const Matrix& w = state.W[v];
    const Matrix& z = state.Z[v];
    const Vector& q = state.Q[v];
    const Matrix h = merge_rows(constraint, z);
    const Matrix zq = z * q.asDiagonal();

    ViewTerms t;
    t.reconstruction = (dataset.views[v] - w * h.transpose()).squaredNorm();
    if (cfg.alpha != 0.0) {
      t.discriminative = cfg.alpha * constraint.disc_mask.cwiseProduct(zq).squaredNorm();
    }
    if (cfg.beta != 0.0) {
      const Vector hlh =
          h.cwiseProduct(graphs[v].laplacian * h).colwise().sum().transpose();
      t.graph = cfg.beta * hlh.dot(q.cwiseAbs2());
    }
    if (cfg.gamma != 0.0) t.consensus = cfg.gamma * (zq - state.Zc).squaredNorm();
    if (!std::isfinite(t.total())) {
      throw DivergenceError(state.iterations,
                            "objective of view " + std::to_string(v) + " is not finite");
    }
    out.total += t.total();
    out.views.push_back(t);
  }
  return out;
}

DiagonalTerms compute_diagonal_terms(const FactorizationState& state, int view,
                                     const LabelConstraint& constraint,
                                     const ViewGraph& graph) {
  const Matrix& z = state.Z[view];
  if (z.rows() != constraint.aux_rows() || state.Zc.rows() != z.rows() ||
      state.Zc.cols() != z.cols() || graph.similarity.rows() != constraint.n_samples()) {
    throw DataError("compute_diagonal_terms: shape mismatch");
  }
  const Matrix h = merge_rows(constraint, z);

  DiagonalTerms t;
  t.y1 = constraint.disc_mask.cwiseProduct(z).colwise().squaredNorm().transpose();
  t.y2_plus = (h.array().square().colwise() * graph.degree.array())
                  .colwise()
                  .sum()
                  .transpose();
  t.y2_minus = h.cwiseProduct(graph.similarity * h).colwise().sum().transpose();
  t.y3 = z.colwise().squaredNorm().transpose();
  t.y4 = state.Zc.cwiseProduct(z).colwise().sum().transpose();
  return t;
}

void update_basis(FactorizationState& state, int view,
                  const DiagonalTerms& terms, const MultiViewDataset& dataset,
                  const LabelConstraint& constraint, const SolverConfig& config) {
  const SolverConfig cfg = config.effective();
  Matrix& w = state.W[view];
  const Matrix h = merge_rows(constraint, state.Z[view]);
  const Vector q_inv =
      state.Q[view].unaryExpr([&](double q) { return 1.0 / std::max(q, cfg.epsilon); });

  const Vector num_diag = cfg.beta * terms.y2_minus + cfg.gamma * q_inv.cwiseProduct(terms.y4);
  const Vector den_diag =
      cfg.alpha * terms.y1 + cfg.beta * terms.y2_plus + cfg.gamma * terms.y3;
  const Matrix hth = h.transpose() * h;

  const Matrix numer = dataset.views[view] * h + w * num_diag.asDiagonal();
  const Matrix denom = w * hth + w * den_diag.asDiagonal();
  w = w.cwiseProduct(numer).cwiseQuotient(denom.cwiseMax(cfg.epsilon));
  require_finite(w, state.iterations, "basis of view " + std::to_string(view));
}

void normalize_basis(FactorizationState& state, int view) {
  Matrix& w = state.W[view];
  Matrix& z = state.Z[view];
  const Vector q = column_norms(w);
  for (Index j = 0; j < w.cols(); ++j) {
    if (!(q(j) > 0.0)) throw DegenerateBasisError(view, j);
  }
  for (Index j = 0; j < w.cols(); ++j) {
    w.col(j) /= q(j);
    z.col(j) *= q(j);
  }
  state.Q[view] = Vector::Ones(w.cols());
}

void update_auxiliary(FactorizationState& state, int view,
                      const MultiViewDataset& dataset,
                      const LabelConstraint& constraint, const ViewGraph& graph,
                      const SolverConfig& config) {
  const SolverConfig cfg = config.effective();
  Matrix& z = state.Z[view];
  const Matrix& w = state.W[view];
  const Vector& q = state.Q[view];
  const Vector q2 = q.cwiseAbs2();
  const Matrix h = merge_rows(constraint, z);

  Matrix numer = collapse_rows(constraint, dataset.views[view].transpose() * w);
  Matrix denom = collapse_rows(constraint, h) * (w.transpose() * w);
  if (cfg.alpha != 0.0) {
    denom += cfg.alpha * constraint.disc_mask.cwiseProduct(z) * q2.asDiagonal();
  }
  if (cfg.beta != 0.0) {
    numer += cfg.beta * collapse_rows(constraint, graph.similarity * h) * q2.asDiagonal();
    denom += cfg.beta *
             collapse_rows(constraint, graph.degree.asDiagonal() * h) * q2.asDiagonal();
  }
  if (cfg.gamma != 0.0) {
    numer += cfg.gamma * state.Zc * q.asDiagonal();
    denom += cfg.gamma * z * q2.asDiagonal();
  }
  z = z.cwiseProduct(numer).cwiseQuotient(denom.cwiseMax(cfg.epsilon));
  require_finite(z, state.iterations, "auxiliary matrix of view " + std::to_string(view));
}

void update_consensus(FactorizationState& state) { state.Zc = consensus_mean(state); }

Gradient gradient(const FactorizationState& state, int view,
                  const MultiViewDataset& dataset,
                  const LabelConstraint& constraint, const ViewGraph& graph,
                  const SolverConfig& config) {
  const SolverConfig cfg = config.effective();
  const Matrix& w = state.W[view];
  const Matrix& z = state.Z[view];
  const Matrix& x = dataset.views[view];
  const Vector q = column_norms(w);
  const Vector q2 = q.cwiseAbs2();
  const Matrix h = merge_rows(constraint, z);
  const DiagonalTerms t = compute_diagonal_terms(state, view, constraint, graph);

  Gradient g;
  // d/dW of sum_j Q_j^2 c_j is 2 W diag(c); d/dW of Q_j is W_.j / Q_j.
  const Vector quad = cfg.alpha * t.y1 + cfg.beta * (t.y2_plus - t.y2_minus) + cfg.gamma * t.y3;
  const Vector lin = cfg.gamma * t.y4.cwiseQuotient(q);
  g.dW = 2.0 * (w * (h.transpose() * h) - x * h) +
         2.0 * w * quad.asDiagonal() - 2.0 * w * lin.asDiagonal();

  g.dZ = 2.0 * (collapse_rows(constraint, h) * (w.transpose() * w) -
                collapse_rows(constraint, x.transpose() * w)) +
         2.0 * cfg.alpha * constraint.disc_mask.cwiseProduct(z) * q2.asDiagonal() +
         2.0 * cfg.beta * collapse_rows(constraint, graph.laplacian * h) * q2.asDiagonal() +
         2.0 * cfg.gamma * (z * q.asDiagonal() - state.Zc) * q.asDiagonal();
  return g;
}

void step(FactorizationState& state, const MultiViewDataset& dataset,
          const LabelConstraint& constraint,
          const std::vector<ViewGraph>& graphs, const SolverConfig& config) {
  check_shapes(state, dataset, constraint);
  if (static_cast<int>(graphs.size()) != dataset.n_views()) {
    throw DataError("one graph per view is required");
  }
  const int nv = state.n_views();
  if (config.parallel && nv > 1) {
    std::vector<std::future<void>> jobs;
    for (int v = 0; v < nv; ++v) {
      jobs.push_back(std::async(std::launch::async, [&, v] {
        view_step(state, v, dataset, constraint, graphs[v], config);
      }));
    }
    for (auto& job : jobs) job.get();
  } else {
    for (int v = 0; v < nv; ++v) view_step(state, v, dataset, constraint, graphs[v], config);
  }
  update_consensus(state);
}

FactorizationState fit(const MultiViewDataset& dataset,
                       const LabelConstraint& constraint,
                       const std::vector<ViewGraph>& graphs,
                       const SolverConfig& config) {
  config.validate();
  FactorizationState state = initialize(dataset, constraint, config);
  state.initial = objective(state, dataset, constraint, graphs, config);

  double previous = state.initial.total;
  for (int it = 1; it <= config.max_iters; ++it) {
    state.iterations = it;
    step(state, dataset, constraint, graphs, config);
    ObjectiveValue value = objective(state, dataset, constraint, graphs, config);
    const double change =
        std::abs(previous - value.total) / std::max(std::abs(previous), 1e-300);
    previous = value.total;
    state.trace.push_back({it, std::move(value)});
    if (change < config.tol) {
      state.converged = true;
      break;
    }
  }
  return state;
}

}  // namespace dcsmvnmf
