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

#include "support/reference.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

using namespace dcsmvnmf;
using dcsmvnmf::testing::Problem;
using dcsmvnmf::testing::max_relative_diff;
using dcsmvnmf::testing::random_problem;
using dcsmvnmf::testing::uniform_matrix;

namespace {

ViewGraph empty_graph(Index n) {
  ViewGraph g;
  g.similarity = Matrix::Zero(n, n);
  g.degree = Vector::Zero(n);
  g.laplacian = Matrix::Zero(n, n);
  return g;
}

// Single-sample, single-view problem with X = [[x]].
Problem scalar_problem(double x) {
  Problem p;
  p.dataset = make_dataset({Matrix::Constant(1, 1, x)}, {kUnlabeled}, 1);
  p.constraint = build_label_constraint(p.dataset.labels, 1, 1);
  p.graphs.push_back(empty_graph(1));
  return p;
}

FactorizationState scalar_state(double w, double z, double zc) {
  FactorizationState s;
  s.W = {Matrix::Constant(1, 1, w)};
  s.Z = {Matrix::Constant(1, 1, z)};
  s.Q = {Vector::Constant(1, std::abs(w))};
  s.Zc = Matrix::Constant(1, 1, zc);
  return s;
}

// Replace the data of every view with an exact product W (A Z)^T.
FactorizationState make_exact(Problem& p, std::uint64_t seed) {
  SolverConfig cfg;
  cfg.seed = seed;
  FactorizationState s = initialize(p.dataset, p.constraint, cfg);
  for (int v = 0; v < s.n_views(); ++v) {
    normalize_basis(s, v);
    p.dataset.views[v] = s.W[v] * merge_rows(p.constraint, s.Z[v]).transpose();
  }
  update_consensus(s);
  return s;
}

SolverConfig weights(double a, double b, double g) {
  SolverConfig cfg;
  cfg.alpha = a;
  cfg.beta = b;
  cfg.gamma = g;
  return cfg;
}

}  // namespace

TEST_CASE("variant names round-trip") {
  CHECK(all_variants().size() == 5);
  for (Variant v : all_variants()) CHECK(parse_variant(variant_name(v)) == v);
  CHECK(variant_name(all_variants().front()) == "baseline");
  CHECK(variant_name(all_variants().back()) == "full");
  CHECK_THROWS(parse_variant("bogus"));
}

TEST_CASE("variant switches") {
  SolverConfig cfg = weights(2, 3, 4);
  cfg.variant = Variant::kBaseline;
  CHECK(cfg.effective().alpha == 0.0);
  CHECK(cfg.effective().beta == 0.0);
  CHECK(cfg.effective().gamma == 4.0);
  cfg.variant = Variant::kBaselineAlpha;
  CHECK(cfg.effective().alpha == 2.0);
  CHECK(cfg.effective().beta == 0.0);
  cfg.variant = Variant::kBaselineBeta;
  CHECK(cfg.effective().alpha == 0.0);
  CHECK(cfg.effective().beta == 3.0);
  cfg.variant = Variant::kNoNormalization;
  CHECK_FALSE(cfg.normalizes());
  CHECK(cfg.effective().alpha == 2.0);
}

TEST_CASE("config validation") {
  CHECK_THROWS(weights(-1, 0, 0).validate());
  SolverConfig cfg;
  cfg.max_iters = 0;
  CHECK_THROWS(cfg.validate());
  cfg = SolverConfig{};
  cfg.epsilon = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg = SolverConfig{};
  cfg.gamma = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("initialization") {
  std::mt19937_64 rng(1);
  const Problem p = random_problem(rng, 12, 3, {5, 7}, 4);
  SolverConfig cfg;
  cfg.seed = 99;
  const FactorizationState a = initialize(p.dataset, p.constraint, cfg);
  const FactorizationState b = initialize(p.dataset, p.constraint, cfg);
  REQUIRE(a.n_views() == 2);
  for (int v = 0; v < 2; ++v) {
    CHECK(a.W[v] == b.W[v]);
    CHECK(a.Z[v] == b.Z[v]);
    CHECK(a.W[v].rows() == p.dataset.views[v].rows());
    CHECK(a.W[v].cols() == 3);
    CHECK(a.Z[v].rows() == 3 + 12 - 4);
    CHECK(a.W[v].minCoeff() > 0.0);
    CHECK(a.Z[v].minCoeff() > 0.0);
    CHECK(a.Q[v].isApprox(column_norms(a.W[v]), 0.0));
  }
  CHECK(a.Zc.minCoeff() > 0.0);
  CHECK(max_relative_diff(a.Zc, 0.5 * (a.Z[0] + a.Z[1])) <= 1e-15);
  cfg.seed = 100;
  CHECK(initialize(p.dataset, p.constraint, cfg).W[0] != a.W[0]);
}

TEST_CASE("objective examples") {
  SUBCASE("scalar instance") {
    const Problem p = scalar_problem(1.0);
    const FactorizationState s = scalar_state(1.0, 1.0, 0.0);
    const ObjectiveValue obj = objective(s, p.dataset, p.constraint, p.graphs, weights(0, 0, 1));
    CHECK(obj.total == 1.0);
    CHECK(obj.views[0].reconstruction == 0.0);
    CHECK(obj.views[0].consensus == 1.0);
  }
  SUBCASE("exact factorization without regularizers") {
    std::mt19937_64 rng(2);
    Problem p = random_problem(rng, 10, 2, {4, 6}, 4);
    const FactorizationState s = make_exact(p, 5);
    CHECK(objective(s, p.dataset, p.constraint, p.graphs, weights(0, 0, 0)).total <= 1e-24);
  }
  SUBCASE("single view consensus vanishes") {
    std::mt19937_64 rng(3);
    const Problem p = random_problem(rng, 10, 2, {4}, 4);
    SolverConfig cfg = weights(1, 1, 1);
    FactorizationState s = initialize(p.dataset, p.constraint, cfg);
    s.Zc = s.Z[0] * s.Q[0].asDiagonal();
    CHECK(objective(s, p.dataset, p.constraint, p.graphs, cfg).views[0].consensus == 0.0);
  }
}

TEST_CASE("objective agrees with the dense reference") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Problem p = random_problem(rng, 14, 3, {6, 4}, 5);
    const SolverConfig cfg = weights(2.5, 0.7, 1.3);
    SolverConfig init = cfg;
    init.seed = static_cast<std::uint64_t>(trial);
    const FactorizationState s = initialize(p.dataset, p.constraint, init);
    const ObjectiveValue obj = objective(s, p.dataset, p.constraint, p.graphs, cfg);
    double expected = 0.0;
    for (int v = 0; v < 2; ++v) {
      expected += testing::reference_objective(p.dataset.views[v], s.W[v], s.Z[v], s.Zc,
                                               p.constraint, p.graphs[v], 2.5, 0.7, 1.3);
    }
    CHECK(std::abs(obj.total - expected) <= 1e-12 * expected);
  }
}

TEST_CASE("diagonal terms") {
  SUBCASE("scalar instance") {
    const Problem p = scalar_problem(1.0);
    const FactorizationState s = scalar_state(1.0, 2.0, 3.0);
    const DiagonalTerms t = compute_diagonal_terms(s, 0, p.constraint, p.graphs[0]);
    CHECK(t.y1(0) == 0.0);
    CHECK(t.y2_plus(0) == 0.0);
    CHECK(t.y2_minus(0) == 0.0);
    CHECK(t.y3(0) == 4.0);
    CHECK(t.y4(0) == 6.0);
  }
  std::mt19937_64 rng(5);
  SUBCASE("zero auxiliary matrix") {
    const Problem p = random_problem(rng, 9, 3, {4}, 3);
    FactorizationState s = initialize(p.dataset, p.constraint, SolverConfig{});
    s.Z[0].setZero();
    const DiagonalTerms t = compute_diagonal_terms(s, 0, p.constraint, p.graphs[0]);
    CHECK(t.y1.isZero(0.0));
    CHECK(t.y2_plus.isZero(0.0));
    CHECK(t.y2_minus.isZero(0.0));
    CHECK(t.y3.isZero(0.0));
    CHECK(t.y4.isZero(0.0));
  }
  SUBCASE("no labels annihilates the discriminative term") {
    const Problem p = random_problem(rng, 9, 3, {4}, 0);
    const FactorizationState s = initialize(p.dataset, p.constraint, SolverConfig{});
    CHECK(compute_diagonal_terms(s, 0, p.constraint, p.graphs[0]).y1.isZero(0.0));
  }
  SUBCASE("graph pieces combine into the Laplacian form") {
    const Problem p = random_problem(rng, 15, 3, {4}, 6);
    const FactorizationState s = initialize(p.dataset, p.constraint, SolverConfig{});
    const DiagonalTerms t = compute_diagonal_terms(s, 0, p.constraint, p.graphs[0]);
    const Matrix h = p.constraint.assignment * s.Z[0];
    const Vector direct = (h.transpose() * p.graphs[0].laplacian * h).diagonal();
    CHECK(max_relative_diff(t.y2_plus - t.y2_minus, direct) <= 1e-10);
  }
}

TEST_CASE("basis update") {
  std::mt19937_64 rng(6);
  SUBCASE("fixed point of an exact factorization") {
    Problem p = random_problem(rng, 10, 3, {5, 4}, 4);
    FactorizationState s = make_exact(p, 11);
    const SolverConfig cfg = weights(0, 0, 0);
    for (int v = 0; v < 2; ++v) {
      const Matrix before = s.W[v];
      update_basis(s, v, compute_diagonal_terms(s, v, p.constraint, p.graphs[v]), p.dataset,
                   p.constraint, cfg);
      CHECK(max_relative_diff(s.W[v], before) <= 1e-12);
    }
  }
  SUBCASE("reduces to the classic rule without labels or regularizers") {
    const Problem p = random_problem(rng, 10, 3, {6}, 0);
    SolverConfig cfg = weights(0, 0, 0);
    cfg.seed = 12;
    FactorizationState s = initialize(p.dataset, p.constraint, cfg);
    const Matrix h = s.Z[0];
    Matrix expected = s.W[0];
    const Matrix num = p.dataset.views[0] * h;
    const Matrix den = s.W[0] * h.transpose() * h;
    for (Index i = 0; i < expected.size(); ++i) {
      expected(i) = expected(i) * num(i) / std::max(den(i), cfg.epsilon);
    }
    update_basis(s, 0, compute_diagonal_terms(s, 0, p.constraint, p.graphs[0]), p.dataset,
                 p.constraint, cfg);
    CHECK(max_relative_diff(s.W[0], expected) <= 1e-12);
  }
  SUBCASE("matches the dense reference on a 3x4 instance") {
    const Problem p = random_problem(rng, 4, 2, {3}, 2, 1);
    SolverConfig cfg = weights(1, 1, 1);
    cfg.seed = 13;
    FactorizationState s = initialize(p.dataset, p.constraint, cfg);
    const Matrix expected = testing::reference_basis_update(
        p.dataset.views[0], s.W[0], s.Z[0], s.Zc, p.constraint, p.graphs[0], 1, 1, 1,
        cfg.epsilon);
    update_basis(s, 0, compute_diagonal_terms(s, 0, p.constraint, p.graphs[0]), p.dataset,
                 p.constraint, cfg);
    CHECK(max_relative_diff(s.W[0], expected) <= 1e-12);
  }
  SUBCASE("matches the dense reference on larger instances") {
    for (int trial = 0; trial < 10; ++trial) {
      const Problem p = random_problem(rng, 20, 3, {7, 5}, 6, 3, 2);
      SolverConfig cfg = weights(3, 0.5, 2);
      cfg.subspace_dim = 2;
      cfg.seed = static_cast<std::uint64_t>(trial);
      FactorizationState s = initialize(p.dataset, p.constraint, cfg);
      for (int v = 0; v < 2; ++v) {
        const Matrix expected = testing::reference_basis_update(
            p.dataset.views[v], s.W[v], s.Z[v], s.Zc, p.constraint, p.graphs[v], 3, 0.5, 2,
            cfg.epsilon);
        update_basis(s, v, compute_diagonal_terms(s, v, p.constraint, p.graphs[v]), p.dataset,
                     p.constraint, cfg);
        CHECK(max_relative_diff(s.W[v], expected) <= 1e-12);
      }
    }
  }
}

TEST_CASE("normalization") {
  SUBCASE("pythagorean column") {
    FactorizationState s;
    s.W = {(Matrix(2, 1) << 3.0, 4.0).finished()};
    s.Z = {(Matrix(2, 1) << 1.0, 2.0).finished()};
    s.Q = {Vector::Ones(1)};
    normalize_basis(s, 0);
    CHECK(s.W[0](0, 0) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(s.W[0](1, 0) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(s.Z[0](0, 0) == 5.0);
    CHECK(s.Z[0](1, 0) == 10.0);
    CHECK(s.Q[0](0) == 1.0);
    CHECK(column_norms((Matrix(2, 1) << 3.0, 4.0).finished())(0) == 5.0);
  }
  SUBCASE("unit columns are left alone") {
    FactorizationState s;
    s.W = {Matrix::Identity(3, 2)};
    s.Z = {Matrix::Constant(4, 2, 0.5)};
    s.Q = {Vector::Ones(2)};
    normalize_basis(s, 0);
    CHECK(s.W[0] == Matrix::Identity(3, 2));
    CHECK(s.Z[0] == Matrix::Constant(4, 2, 0.5));
  }
  SUBCASE("zero column is reported") {
    FactorizationState s;
    s.W = {Matrix::Ones(3, 2)};
    s.W[0].col(1).setZero();
    s.Z = {Matrix::Ones(4, 2)};
    s.Q = {Vector::Ones(2)};
    try {
      normalize_basis(s, 0);
      FAIL("expected DegenerateBasisError");
    } catch (const DegenerateBasisError& e) {
      CHECK(e.view() == 0);
      CHECK(e.column() == 1);
    }
  }
  SUBCASE("objective is invariant") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
      const Problem p = random_problem(rng, 12, 3, {5, 6}, 4);
      SolverConfig cfg = weights(4, 2, 1.5);
      cfg.seed = static_cast<std::uint64_t>(trial);
      FactorizationState s = initialize(p.dataset, p.constraint, cfg);
      const double before = objective(s, p.dataset, p.constraint, p.graphs, cfg).total;
      for (int v = 0; v < 2; ++v) normalize_basis(s, v);
      const double after = objective(s, p.dataset, p.constraint, p.graphs, cfg).total;
      CHECK(std::abs(after - before) <= 1e-10 * before);
    }
  }
}

TEST_CASE("auxiliary update") {
  std::mt19937_64 rng(8);
  SUBCASE("fixed point of an exact unlabeled factorization") {
    Problem p = random_problem(rng, 10, 3, {6}, 0);
    FactorizationState s = make_exact(p, 21);
    const Matrix before = s.Z[0];
    update_auxiliary(s, 0, p.dataset, p.constraint, p.graphs[0], weights(0, 0, 0));
    CHECK(max_relative_diff(s.Z[0], before) <= 1e-12);
  }
  SUBCASE("a dominant consensus weight pulls towards the consensus") {
    for (int trial = 0; trial < 10; ++trial) {
      const Problem p = random_problem(rng, 10, 3, {6}, 3);
      SolverConfig cfg = weights(0, 0, 1e9);
      cfg.seed = static_cast<std::uint64_t>(trial);
      FactorizationState s = initialize(p.dataset, p.constraint, cfg);
      normalize_basis(s, 0);
      s.Zc = uniform_matrix(rng, s.Z[0].rows(), s.Z[0].cols(), 0.1, 1.0);
      const double before = (s.Z[0] - s.Zc).norm();
      update_auxiliary(s, 0, p.dataset, p.constraint, p.graphs[0], cfg);
      CHECK((s.Z[0] - s.Zc).norm() < before);
    }
  }
  SUBCASE("matches the dense reference") {
    for (int trial = 0; trial < 10; ++trial) {
      const Problem p = random_problem(rng, 16, 3, {5, 7}, 6);
      SolverConfig cfg = weights(2, 0.8, 1.7);
      cfg.seed = static_cast<std::uint64_t>(trial);
      FactorizationState s = initialize(p.dataset, p.constraint, cfg);
      for (int v = 0; v < 2; ++v) {
        // Unnormalized state so the scale matrix is exercised.
        const Matrix q = testing::q_matrix(s.W[v]);
        const Matrix expected = testing::reference_aux_update(
            p.dataset.views[v], s.W[v], s.Z[v], q, s.Zc, p.constraint, p.graphs[v], 2, 0.8,
            1.7, cfg.epsilon);
        update_auxiliary(s, v, p.dataset, p.constraint, p.graphs[v], cfg);
        CHECK(max_relative_diff(s.Z[v], expected) <= 1e-12);
      }
    }
  }
}

TEST_CASE("consensus") {
  FactorizationState s;
  s.Z = {Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 3.0)};
  s.Q = {Vector::Ones(1), Vector::Ones(1)};
  update_consensus(s);
  CHECK(s.Zc(0, 0) == 2.0);

  s.Z = {Matrix::Constant(2, 2, 0.7)};
  s.Q = {Vector::Ones(2)};
  update_consensus(s);
  CHECK(s.Zc == s.Z[0]);

  std::mt19937_64 rng(9);
  const Matrix z = uniform_matrix(rng, 5, 3);
  s.Z = {z, z, z};
  s.Q = {Vector::Ones(3), Vector::Ones(3), Vector::Ones(3)};
  update_consensus(s);
  CHECK(s.Zc == z);

  // Scaled views enter as Z Q.
  s.Z = {Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0)};
  s.Q = {Vector::Constant(1, 2.0), Vector::Constant(1, 4.0)};
  update_consensus(s);
  CHECK(s.Zc(0, 0) == 3.0);
}

TEST_CASE("analytic gradient matches central differences") {
  std::mt19937_64 rng(10);
  const double h = 1e-5;
  for (int trial = 0; trial < 5; ++trial) {
    const Problem p = random_problem(rng, 8, 2, {4, 3}, 3);
    SolverConfig cfg = weights(0.8, 0.6, 0.9);
    cfg.seed = static_cast<std::uint64_t>(trial);
    FactorizationState s = initialize(p.dataset, p.constraint, cfg);
    const Gradient g = gradient(s, 0, p.dataset, p.constraint, p.graphs[0], cfg);
    auto f = [&](FactorizationState& st) {
      st.Q[0] = column_norms(st.W[0]);
      return objective(st, p.dataset, p.constraint, p.graphs, cfg).total;
    };
    Matrix fd_w(g.dW.rows(), g.dW.cols());
    for (Index i = 0; i < s.W[0].size(); ++i) {
      FactorizationState up = s, down = s;
      up.W[0](i) += h;
      down.W[0](i) -= h;
      fd_w(i) = (f(up) - f(down)) / (2 * h);
    }
    Matrix fd_z(g.dZ.rows(), g.dZ.cols());
    for (Index i = 0; i < s.Z[0].size(); ++i) {
      FactorizationState up = s, down = s;
      up.Z[0](i) += h;
      down.Z[0](i) -= h;
      fd_z(i) = (f(up) - f(down)) / (2 * h);
    }
    CHECK((g.dW - fd_w).norm() <= 1e-5 * fd_w.norm());
    CHECK((g.dZ - fd_z).norm() <= 1e-5 * fd_z.norm());
  }
}

TEST_CASE("fit stopping and bookkeeping") {
  std::mt19937_64 rng(11);
  const Problem p = random_problem(rng, 15, 3, {6, 5}, 5);
  SolverConfig cfg = weights(1, 1, 1);
  cfg.seed = 3;
  SUBCASE("infinite tolerance stops after one iteration") {
    cfg.tol = std::numeric_limits<double>::infinity();
    const FactorizationState s = fit(p.dataset, p.constraint, p.graphs, cfg);
    CHECK(s.iterations == 1);
    CHECK(s.trace.size() == 1);
    CHECK(s.converged);
  }
  SUBCASE("iteration cap") {
    cfg.tol = 0.0;
    cfg.max_iters = 7;
    const FactorizationState s = fit(p.dataset, p.constraint, p.graphs, cfg);
    CHECK(s.iterations == 7);
    CHECK(s.trace.size() == 7);
    CHECK_FALSE(s.converged);
  }
  SUBCASE("baseline trace carries exact zeros for the switched-off terms") {
    cfg.variant = Variant::kBaseline;
    cfg.max_iters = 20;
    const FactorizationState s = fit(p.dataset, p.constraint, p.graphs, cfg);
    for (const TraceEntry& e : s.trace) {
      for (const ViewTerms& t : e.objective.views) {
        CHECK(t.discriminative == 0.0);
        CHECK(t.graph == 0.0);
      }
    }
  }
  SUBCASE("iterates stay nonnegative for every variant") {
    cfg.max_iters = 40;
    for (Variant v : all_variants()) {
      cfg.variant = v;
      const FactorizationState s = fit(p.dataset, p.constraint, p.graphs, cfg);
      for (int view = 0; view < 2; ++view) {
        CHECK(s.W[view].minCoeff() >= 0.0);
        CHECK(s.Z[view].minCoeff() >= 0.0);
      }
      CHECK(s.Zc.minCoeff() >= 0.0);
      CHECK(s.final_objective() < s.initial.total);
    }
  }
  SUBCASE("parallel views give identical iterates") {
    cfg.max_iters = 25;
    const FactorizationState seq = fit(p.dataset, p.constraint, p.graphs, cfg);
    cfg.parallel = true;
    const FactorizationState par = fit(p.dataset, p.constraint, p.graphs, cfg);
    CHECK(seq.W[0] == par.W[0]);
    CHECK(seq.Z[1] == par.Z[1]);
    CHECK(seq.Zc == par.Zc);
    CHECK(seq.final_objective() == par.final_objective());
  }
  SUBCASE("shape mismatches are rejected") {
    Problem bad = p;
    bad.graphs.pop_back();
    CHECK_THROWS_AS(fit(bad.dataset, bad.constraint, bad.graphs, cfg), DataError);
  }
}

TEST_CASE("objective descends on a well-separated synthetic problem") {
  SyntheticSpec spec;
  spec.noise = 0.05;
  spec.seed = 1;
  const MultiViewDataset ds = mask_labels(generate_synthetic(spec), 0.1, 1);
  const LabelConstraint lc = build_label_constraint(ds.labels, ds.n_classes, 1);
  std::vector<ViewGraph> graphs;
  for (const Matrix& x : ds.views) graphs.push_back(build_view_graph(x, 5, DeltaPolicy::median()));
  SolverConfig cfg = weights(10, 1, 0.1);
  cfg.seed = 1;
  const FactorizationState s = fit(ds, lc, graphs, cfg);
  int rises = 0;
  double prev = s.initial.total;
  for (const TraceEntry& e : s.trace) {
    if (e.objective.total > prev * (1 + 1e-12)) ++rises;
    prev = e.objective.total;
  }
  CHECK(rises == 0);
  CHECK(s.final_objective() < 0.01 * s.initial.total);
}
