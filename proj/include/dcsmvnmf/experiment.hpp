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

#include "dcsmvnmf/dataset.hpp"
#include "dcsmvnmf/evaluation.hpp"
#include "dcsmvnmf/factorization.hpp"
#include "dcsmvnmf/graph.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dcsmvnmf {

struct HyperParams {
  double alpha = 10.0;
  double beta = 1.0;
  double gamma = 0.1;
  int k = 5;
};

/// Tuned settings of a named benchmark at 10%, 20% and 30% labels.
struct Preset {
  std::string name;
  std::array<double, 3> ratios{0.1, 0.2, 0.3};
  std::array<HyperParams, 3> params;

  /// Entry for the tabulated ratio closest to `ratio`.
  const HyperParams& at(double ratio) const;
};

/// Known names: yale, orl, ecg, webkb. Throws ConfigError otherwise.
Preset preset(std::string_view name);

struct DatasetSource {
  std::optional<SyntheticSpec> synthetic;
  std::vector<std::string> views;
  std::string labels;
  std::optional<int> n_classes;
};

struct SweepGrid {
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> gamma;
  std::vector<int> k;
};

// Everything a run needs. Hyperparameters left unset fall back to the preset
// (per label ratio) and then to the built-in HyperParams defaults.
struct ExperimentConfig {
  DatasetSource dataset;
  std::vector<double> ratios{0.1, 0.2, 0.3};
  int redraws = 5;
  int repeats = 10;
  int restarts = 20;
  ClusterMethod method = ClusterMethod::kKMeans;

  std::optional<std::string> preset_name;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> gamma;
  std::optional<int> k;
  DeltaPolicy delta = DeltaPolicy::median();

  int subspace_dim = 1;
  int max_iters = 300;
  double tol = 1e-6;
  double epsilon = 1e-12;

  std::vector<Variant> variants{Variant::kFull};
  SweepGrid sweep;

  std::string output_dir = "out";
  std::uint64_t seed = 0;
  bool parallel = false;
  bool save_factors = false;
  bool dump_graphs = false;

  /// Hyperparameters for one label ratio after preset/default resolution.
  HyperParams resolve(double ratio) const;
  void validate(bool sweep_mode) const;
};

/// Parses a config document (or a manifest, which embeds one under "config").
/// Throws ConfigError naming the offending field.
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ExperimentConfig& config);

enum class RunMode { kRun, kAblate, kSweep };

struct CellResult {
  std::string name;
  int ratio_index = 0;
  int redraw = 0;
  int grid_index = 0;
  Variant variant = Variant::kFull;
  double ratio = 0.0;
  HyperParams params;
  std::uint64_t mask_seed = 0;
  std::uint64_t init_seed = 0;
  std::uint64_t eval_seed = 0;
  Index n_labeled = 0;
  int iterations = 0;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  MetricSummary metrics;
};

// Metrics for one (variant, ratio, grid point), aggregated over label redraws.
struct AggregateRecord {
  std::string label;
  Variant variant = Variant::kFull;
  double ratio = 0.0;
  HyperParams params;
  double ac_mean = 0.0;
  double ac_std = 0.0;         // across redraws
  double nmi_mean = 0.0;
  double nmi_std = 0.0;
  double ac_std_within = 0.0;  // mean k-means spread inside a redraw
  double nmi_std_within = 0.0;
  std::vector<std::size_t> cells;  // indices into ExperimentReport::cells
};

struct ExperimentReport {
  std::vector<CellResult> cells;
  std::vector<AggregateRecord> records;
  nlohmann::json metrics;
  nlohmann::json manifest;
};

/// Runs every (ratio, redraw, variant[, grid point]) cell: mask labels, build
/// constraints and graphs, fit, evaluate. Writes metrics.json, metrics.csv,
/// trace_<cell>.csv, manifest.json (and sweep.csv in sweep mode) to the
/// output directory unless `write_files` is false.
ExperimentReport run_experiment(const ExperimentConfig& config, RunMode mode,
                                bool write_files = true);

/// Dataset named by the config source (synthetic or files).
MultiViewDataset materialize_dataset(const DatasetSource& source);

}  // namespace dcsmvnmf
