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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>

using namespace dcsmvnmf;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("dcsmvnmf_test_dataset_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

void check_invariants(const MultiViewDataset& ds) {
  CHECK_NOTHROW(ds.validate());
  for (const Matrix& x : ds.views) {
    CHECK(x.cols() == ds.n_samples());
    CHECK((x.array() >= 0.0).all());
  }
  const Index l = ds.n_labeled();
  for (Index i = 0; i < ds.n_samples(); ++i) {
    CHECK((ds.labels[i] != kUnlabeled) == (i < l));
  }
}

}  // namespace

TEST_CASE("load_dataset orders labeled samples first") {
  const fs::path dir = scratch_dir("load");
  write_file(dir / "a.csv", "1,2,3,4\n5,6,7,8\n9,10,11,12\n");
  write_file(dir / "b.csv", "0,1,0,1\n2,2,2,2\n");
  write_file(dir / "labels.txt", "1\n-1\n0\n-1\n");

  const MultiViewDataset ds = load_dataset({dir / "a.csv", dir / "b.csv"}, dir / "labels.txt");
  CHECK(ds.n_samples() == 4);
  CHECK(ds.n_labeled() == 2);
  CHECK(ds.n_classes == 2);
  CHECK(ds.permutation == std::vector<Index>{0, 2, 1, 3});
  CHECK(ds.labels == std::vector<int>{1, 0, kUnlabeled, kUnlabeled});
  CHECK(ds.views[0](0, 1) == 3.0);
  CHECK(ds.views[1](0, 3) == 1.0);
  check_invariants(ds);
}

TEST_CASE("load_dataset rejects inconsistent inputs") {
  const fs::path dir = scratch_dir("errors");
  write_file(dir / "four.csv", "1,2,3,4\n");
  write_file(dir / "five.csv", "1,2,3,4,5\n");
  write_file(dir / "neg.csv", "1,-2,3,4\n");
  write_file(dir / "nan.csv", "1,nan,3,4\n");
  write_file(dir / "labels.txt", "0\n1\n0\n1\n");
  write_file(dir / "gap.txt", "0\n2\n0\n2\n");

  CHECK_THROWS_AS(load_dataset({dir / "four.csv", dir / "five.csv"}, dir / "labels.txt"), DataError);
  CHECK_THROWS_AS(load_dataset({dir / "neg.csv"}, dir / "labels.txt"), DataError);
  CHECK_THROWS_AS(load_dataset({dir / "nan.csv"}, dir / "labels.txt"), DataError);
  // declared class count too small
  CHECK_THROWS_AS(load_dataset({dir / "four.csv"}, dir / "labels.txt", 1), DataError);
  // class 1 never appears
  CHECK_THROWS_AS(load_dataset({dir / "four.csv"}, dir / "gap.txt"), DataError);
  CHECK_THROWS_AS(load_dataset({dir / "missing.csv"}, dir / "labels.txt"), DataError);
}

TEST_CASE("all-unlabeled file keeps identity permutation") {
  const fs::path dir = scratch_dir("unlabeled");
  write_file(dir / "a.csv", "1,2,3\n");
  write_file(dir / "labels.txt", "-1\n-1\n-1\n");
  const MultiViewDataset ds = load_dataset({dir / "a.csv"}, dir / "labels.txt");
  CHECK(ds.n_labeled() == 0);
  CHECK(ds.permutation == std::vector<Index>{0, 1, 2});
}

TEST_CASE("stratified masking on a balanced 4-class set") {
  SyntheticSpec spec;
  spec.n_classes = 4;
  spec.samples_per_class = 25;
  spec.view_dims = {3};
  spec.seed = 1;
  const MultiViewDataset full = generate_synthetic(spec);
  const MultiViewDataset masked = mask_labels(full, 0.10, 7);
  CHECK(masked.n_labeled() == 10);
  std::map<int, int> per_class;
  for (Index i = 0; i < masked.n_labeled(); ++i) ++per_class[masked.labels[i]];
  REQUIRE(per_class.size() == 4);
  for (const auto& [k, count] : per_class) {
    CHECK(count >= 2);
    CHECK(count <= 3);
  }
  CHECK(masked.has_complete_truth());
  check_invariants(masked);

  // Moving columns must keep each sample's data and truth together.
  for (Index i = 0; i < masked.n_samples(); ++i) {
    const Index orig = masked.permutation[i];
    CHECK(masked.truth[i] == full.truth[orig]);
    CHECK(masked.views[0].col(i) == full.views[0].col(orig));
  }
}

TEST_CASE("ratio 1 reveals every label") {
  SyntheticSpec spec;
  spec.view_dims = {4};
  const MultiViewDataset full = generate_synthetic(spec);
  const MultiViewDataset masked = mask_labels(full, 1.0, 3);
  CHECK(masked.n_labeled() == masked.n_samples());
  CHECK(masked.labels == masked.truth);
}

TEST_CASE("ratio too small for the class count is an error") {
  SyntheticSpec spec;
  spec.n_classes = 10;
  spec.samples_per_class = 2;
  spec.view_dims = {2};
  const MultiViewDataset full = generate_synthetic(spec);
  CHECK_THROWS_AS(mask_labels(full, 0.05, 1), DataError);
  CHECK_THROWS_AS(mask_labels(full, 0.0, 1), DataError);
  CHECK_THROWS_AS(mask_labels(full, 1.5, 1), DataError);
}

TEST_CASE("stratified quota arithmetic") {
  CHECK(stratified_quota({25, 25, 25, 25}, 0.1) == std::vector<int>{3, 3, 2, 2});
  CHECK(stratified_quota({90, 10}, 0.1) == std::vector<int>{9, 1});
  // the small class still gets one label
  CHECK(stratified_quota({98, 2}, 0.02) == std::vector<int>{1, 1});
  CHECK(stratified_quota({5, 7}, 1.0) == std::vector<int>{5, 7});
}

TEST_CASE("re-masking known labels at ratio 1 changes nothing") {
  SyntheticSpec spec;
  spec.view_dims = {5, 6};
  const MultiViewDataset masked = mask_labels(generate_synthetic(spec), 0.2, 99);
  MultiViewDataset known = masked;
  known.truth = masked.labels;
  const MultiViewDataset again = mask_labels(known, 1.0, 12345);
  CHECK(again.n_labeled() == masked.n_labeled());
  CHECK(again.labels == masked.labels);
  CHECK(again.permutation == masked.permutation);
  CHECK(again.views[1] == masked.views[1]);
}

TEST_CASE("masking with different seeds reveals different samples") {
  SyntheticSpec spec;
  spec.view_dims = {3};
  const MultiViewDataset full = generate_synthetic(spec);
  CHECK(mask_labels(full, 0.1, 1).permutation != mask_labels(full, 0.1, 2).permutation);
  CHECK(mask_labels(full, 0.1, 1).permutation == mask_labels(full, 0.1, 1).permutation);
}

TEST_CASE("synthetic generator") {
  SyntheticSpec spec;
  spec.n_classes = 3;
  spec.samples_per_class = 50;
  spec.view_dims = {8, 4};
  spec.noise = 0.3;
  spec.seed = 5;

  SUBCASE("counts") {
    const MultiViewDataset ds = generate_synthetic(spec);
    CHECK(ds.n_samples() == 150);
    CHECK(ds.n_views() == 2);
    std::vector<int> sizes(3, 0);
    for (int y : ds.truth) ++sizes[y];
    CHECK(sizes == std::vector<int>{50, 50, 50});
    check_invariants(ds);
  }
  SUBCASE("deterministic") {
    const MultiViewDataset a = generate_synthetic(spec);
    const MultiViewDataset b = generate_synthetic(spec);
    CHECK(a.views[0] == b.views[0]);
    CHECK(a.views[1] == b.views[1]);
    CHECK(a.labels == b.labels);
  }
  SUBCASE("zero noise puts every sample on its class centre") {
    spec.noise = 0.0;
    const MultiViewDataset ds = generate_synthetic(spec);
    for (const Matrix& x : ds.views) {
      for (Index i = 0; i < ds.n_samples(); ++i) {
        const Index first_of_class = static_cast<Index>(ds.truth[i]) * spec.samples_per_class;
        CHECK(x.col(i) == x.col(first_of_class));
      }
    }
  }
  SUBCASE("bad specs") {
    spec.noise = -1.0;
    CHECK_THROWS_AS(generate_synthetic(spec), DataError);
    spec.noise = 0.1;
    spec.view_dims = {};
    CHECK_THROWS_AS(generate_synthetic(spec), DataError);
  }
}

TEST_CASE("write_dataset then load reproduces the dataset exactly") {
  SyntheticSpec spec;
  spec.view_dims = {6, 9};
  spec.noise = 0.37;
  const MultiViewDataset masked = mask_labels(generate_synthetic(spec), 0.3, 4);
  const fs::path dir = scratch_dir("roundtrip");
  write_dataset(masked, dir);
  const MultiViewDataset back =
      load_dataset({dir / "view_0.csv", dir / "view_1.csv"}, dir / "labels.txt", masked.n_classes);
  CHECK(back.labels == masked.labels);
  CHECK(back.permutation == masked.permutation);
  CHECK(back.views[0] == masked.views[0]);
  CHECK(back.views[1] == masked.views[1]);
}
