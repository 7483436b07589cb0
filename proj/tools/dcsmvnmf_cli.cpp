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

// Experiment runner: run / ablate / sweep / synth / eval.

#include "dcsmvnmf/csv.hpp"
#include "dcsmvnmf/dataset.hpp"
#include "dcsmvnmf/evaluation.hpp"
#include "dcsmvnmf/experiment.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace dcsmvnmf;

struct Overrides {
  std::string config_path;
  std::optional<std::string> preset;
  std::vector<double> ratios;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::vector<std::string> variants;
  std::optional<int> max_iters;
  std::optional<double> tol;
  std::optional<bool> parallel;
  std::optional<double> alpha, beta, gamma;
  std::optional<int> k;
  std::optional<int> redraws;
  std::optional<int> repeats;
  bool save_factors = false;
  bool dump_graphs = false;
};

void add_experiment_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON config or a manifest.json to replay");
  cmd->add_option("--preset", o.preset, "yale, orl, ecg or webkb hyperparameters");
  cmd->add_option("--ratio", o.ratios, "label ratio(s) in (0,1]");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--variant", o.variants,
                  "full, baseline, baseline_alpha, baseline_beta, no_normalization");
  cmd->add_option("--max-iters", o.max_iters);
  cmd->add_option("--tol", o.tol, "relative objective change to stop at");
  cmd->add_option("--parallel", o.parallel, "run independent cells concurrently");
  cmd->add_option("--alpha", o.alpha);
  cmd->add_option("--beta", o.beta);
  cmd->add_option("--gamma", o.gamma);
  cmd->add_option("--k", o.k, "neighbours per sample in the view graphs");
  cmd->add_option("--redraws", o.redraws, "label redraws per ratio");
  cmd->add_option("--repeats", o.repeats, "k-means repeats per fitted model");
  cmd->add_flag("--save-factors", o.save_factors, "write W, Z, Zc and H CSVs");
  cmd->add_flag("--dump-graphs", o.dump_graphs, "write each view's similarity matrix");
}

ExperimentConfig resolve_config(const Overrides& o) {
  ExperimentConfig cfg;
  if (!o.config_path.empty()) {
    cfg = load_config(o.config_path);
  } else {
    cfg.dataset.synthetic = SyntheticSpec{};
  }
  if (o.preset) cfg.preset_name = *o.preset;
  if (!o.ratios.empty()) cfg.ratios = o.ratios;
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.output_dir = *o.out;
  if (!o.variants.empty()) {
    cfg.variants.clear();
    for (const auto& v : o.variants) {
      try {
        cfg.variants.push_back(parse_variant(v));
      } catch (const std::invalid_argument& e) {
        throw ConfigError("--variant", e.what());
      }
    }
  }
  if (o.max_iters) cfg.max_iters = *o.max_iters;
  if (o.tol) cfg.tol = *o.tol;
  if (o.parallel) cfg.parallel = *o.parallel;
  if (o.alpha) cfg.alpha = *o.alpha;
  if (o.beta) cfg.beta = *o.beta;
  if (o.gamma) cfg.gamma = *o.gamma;
  if (o.k) cfg.k = *o.k;
  if (o.redraws) cfg.redraws = *o.redraws;
  if (o.repeats) cfg.repeats = *o.repeats;
  if (o.save_factors) cfg.save_factors = true;
  if (o.dump_graphs) cfg.dump_graphs = true;
  return cfg;
}

void print_summary(const ExperimentReport& report, const ExperimentConfig& cfg) {
  for (const auto& rec : report.records) {
    std::cout << rec.label << " @ " << csv::format_double(rec.ratio)
              << "  AC " << format_percent(rec.ac_mean, rec.ac_std)
              << "  NMI " << format_percent(rec.nmi_mean, rec.nmi_std) << '\n';
  }
  std::cout << "wrote " << cfg.output_dir << "/metrics.json\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-supervised multi-view NMF with discriminative and graph priors"};
  app.require_subcommand(1);

  Overrides run_opts, ablate_opts, sweep_opts;
  auto* run = app.add_subcommand("run", "fit and evaluate the configured variants");
  add_experiment_flags(run, run_opts);
  auto* ablate = app.add_subcommand("ablate", "evaluate every ablation variant");
  add_experiment_flags(ablate, ablate_opts);
  auto* sweep = app.add_subcommand("sweep", "hyperparameter grid sweep");
  add_experiment_flags(sweep, sweep_opts);
  std::vector<double> grid_alpha, grid_beta, grid_gamma;
  std::vector<int> grid_k;
  sweep->add_option("--grid-alpha", grid_alpha);
  sweep->add_option("--grid-beta", grid_beta);
  sweep->add_option("--grid-gamma", grid_gamma);
  sweep->add_option("--grid-k", grid_k);

  auto* synth = app.add_subcommand("synth", "write a synthetic dataset to CSV files");
  SyntheticSpec spec;
  std::string synth_config;
  std::string synth_out = "synthetic";
  synth->add_option("--config", synth_config, "config whose dataset.synthetic is used");
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--classes", spec.n_classes);
  synth->add_option("--per-class", spec.samples_per_class);
  synth->add_option("--view-dims", spec.view_dims);
  synth->add_option("--separation", spec.separation);
  synth->add_option("--noise", spec.noise);
  synth->add_option("--seed", spec.seed);

  auto* eval = app.add_subcommand("eval", "score a saved representation");
  std::string rep_path, truth_path;
  std::optional<int> eval_classes;
  EvalOptions eval_opts;
  std::string eval_method = "kmeans";
  int subspace_dim = 1;
  eval->add_option("--representation", rep_path, "n x d CSV (H_<cell>.csv)")->required();
  eval->add_option("--truth", truth_path, "ground-truth label file")->required();
  eval->add_option("--classes", eval_classes);
  eval->add_option("--repeats", eval_opts.repeats);
  eval->add_option("--restarts", eval_opts.restarts);
  eval->add_option("--seed", eval_opts.seed);
  eval->add_option("--method", eval_method)->check(CLI::IsMember({"kmeans", "argmax"}));
  eval->add_option("--subspace-dim", subspace_dim);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed() || ablate->parsed() || sweep->parsed()) {
      const Overrides& o = run->parsed() ? run_opts : ablate->parsed() ? ablate_opts : sweep_opts;
      ExperimentConfig cfg = resolve_config(o);
      RunMode mode = RunMode::kRun;
      if (ablate->parsed()) mode = RunMode::kAblate;
      if (sweep->parsed()) {
        mode = RunMode::kSweep;
        if (!grid_alpha.empty()) cfg.sweep.alpha = grid_alpha;
        if (!grid_beta.empty()) cfg.sweep.beta = grid_beta;
        if (!grid_gamma.empty()) cfg.sweep.gamma = grid_gamma;
        if (!grid_k.empty()) cfg.sweep.k = grid_k;
      }
      const ExperimentReport report = run_experiment(cfg, mode);
      print_summary(report, cfg);
    } else if (synth->parsed()) {
      if (!synth_config.empty()) {
        const ExperimentConfig cfg = load_config(synth_config);
        if (!cfg.dataset.synthetic) {
          throw ConfigError("dataset.synthetic", "config has no synthetic dataset");
        }
        spec = *cfg.dataset.synthetic;
      }
      write_dataset(generate_synthetic(spec), synth_out);
      std::cout << "wrote " << spec.view_dims.size() << " views and labels.txt to "
                << synth_out << '\n';
    } else if (eval->parsed()) {
      const Matrix rep = csv::read_matrix(rep_path);
      const std::vector<int> truth = csv::read_labels(truth_path);
      int c = eval_classes.value_or(0);
      if (!eval_classes) {
        for (int y : truth) c = std::max(c, y + 1);
      }
      eval_opts.method = eval_method == "argmax" ? ClusterMethod::kArgmax : ClusterMethod::kKMeans;
      const MetricSummary m = evaluate_representation(rep, truth, c, subspace_dim, eval_opts);
      const nlohmann::json out = {{"AC_mean", m.accuracy_mean}, {"AC_std", m.accuracy_std},
                                  {"NMI_mean", m.nmi_mean},     {"NMI_std", m.nmi_std},
                                  {"AC", m.accuracy},           {"NMI", m.nmi}};
      std::cout << out.dump(2) << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
