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

#include "dcsmvnmf/experiment.hpp"

#include "dcsmvnmf/constraints.hpp"
#include "dcsmvnmf/csv.hpp"
#include "dcsmvnmf/seeds.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <thread>

namespace dcsmvnmf {

using nlohmann::json;

namespace {

// Hyperparameters per benchmark at 10/20/30% labels.
Preset make_preset(std::string name, std::array<double, 3> alpha,
                   std::array<double, 3> beta, std::array<double, 3> gamma,
                   int k) {
  Preset p;
  p.name = std::move(name);
  for (std::size_t i = 0; i < 3; ++i) p.params[i] = {alpha[i], beta[i], gamma[i], k};
  return p;
}

// ---------------------------------------------------------------------------
// JSON helpers
// ---------------------------------------------------------------------------

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<const char*> known) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& item : obj.items()) {
    const bool ok = std::any_of(known.begin(), known.end(),
                                [&](const char* k) { return item.key() == k; });
    if (!ok) throw ConfigError(join(path, item.key()), "unknown field");
  }
}

template <typename T>
T read_value(const json& value, const std::string& path) {
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!value.is_number()) throw ConfigError(path, "expected a number");
    } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!value.is_number_integer()) throw ConfigError(path, "expected an integer");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!value.is_boolean()) throw ConfigError(path, "expected true or false");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!value.is_string()) throw ConfigError(path, "expected a string");
    }
    return value.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path, e.what());
  }
}

template <typename T>
void read_if(const json& obj, const std::string& path, const char* key, T& out) {
  if (obj.contains(key)) out = read_value<T>(obj.at(key), join(path, key));
}

template <typename T>
void read_if(const json& obj, const std::string& path, const char* key,
             std::optional<T>& out) {
  if (obj.contains(key)) out = read_value<T>(obj.at(key), join(path, key));
}

template <typename T>
std::vector<T> read_list(const json& value, const std::string& path) {
  if (!value.is_array()) throw ConfigError(path, "expected a list");
  std::vector<T> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    out.push_back(read_value<T>(value[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

DeltaPolicy read_delta(const json& value, const std::string& path) {
  if (value.is_string()) {
    if (value.get<std::string>() == "median") return DeltaPolicy::median();
    throw ConfigError(path, "expected \"median\" or a positive number");
  }
  const double d = read_value<double>(value, path);
  if (!(d > 0.0)) throw ConfigError(path, "delta must be positive");
  return DeltaPolicy::fixed(d);
}

SyntheticSpec read_synthetic(const json& obj, const std::string& path) {
  reject_unknown(obj, path,
                 {"classes", "samples_per_class", "view_dims", "separation", "noise", "seed"});
  SyntheticSpec spec;
  read_if(obj, path, "classes", spec.n_classes);
  read_if(obj, path, "samples_per_class", spec.samples_per_class);
  if (obj.contains("view_dims")) {
    spec.view_dims = read_list<int>(obj.at("view_dims"), join(path, "view_dims"));
  }
  read_if(obj, path, "separation", spec.separation);
  read_if(obj, path, "noise", spec.noise);
  read_if(obj, path, "seed", spec.seed);
  return spec;
}

json synthetic_to_json(const SyntheticSpec& spec) {
  return {{"classes", spec.n_classes},
          {"samples_per_class", spec.samples_per_class},
          {"view_dims", spec.view_dims},
          {"separation", spec.separation},
          {"noise", spec.noise},
          {"seed", spec.seed}};
}

// ---------------------------------------------------------------------------
// Cells
// ---------------------------------------------------------------------------

struct CellSpec {
  int ratio_index = 0;
  int redraw = 0;
  int grid_index = 0;
  Variant variant = Variant::kFull;
  double ratio = 0.0;
  HyperParams params;
  std::string label;
};

std::string short_double(double x) { return csv::format_double(x); }

std::string cell_name(const CellSpec& c, bool sweep) {
  std::string name = "r" + std::to_string(c.ratio_index) + "_d" + std::to_string(c.redraw) +
                     "_" + std::string(variant_name(c.variant));
  if (sweep) name += "_g" + std::to_string(c.grid_index);
  return name;
}

void write_trace(const std::filesystem::path& path, const FactorizationState& state) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "iteration,total";
  for (int v = 0; v < state.n_views(); ++v) {
    out << ",recon_" << v << ",disc_" << v << ",graph_" << v << ",consensus_" << v;
  }
  out << '\n';
  auto row = [&](int it, const ObjectiveValue& value) {
    out << it << ',' << csv::format_double(value.total);
    for (const ViewTerms& t : value.views) {
      out << ',' << csv::format_double(t.reconstruction) << ','
          << csv::format_double(t.discriminative) << ',' << csv::format_double(t.graph)
          << ',' << csv::format_double(t.consensus);
    }
    out << '\n';
  };
  row(0, state.initial);
  for (const TraceEntry& e : state.trace) row(e.iteration, e.objective);
}

CellResult run_cell(const MultiViewDataset& full, const CellSpec& spec,
                    const ExperimentConfig& config, bool sweep, bool write_files) {
  CellResult r;
  r.name = cell_name(spec, sweep);
  r.ratio_index = spec.ratio_index;
  r.redraw = spec.redraw;
  r.grid_index = spec.grid_index;
  r.variant = spec.variant;
  r.ratio = spec.ratio;
  r.params = spec.params;
  const auto ri = static_cast<std::uint64_t>(spec.ratio_index);
  const auto di = static_cast<std::uint64_t>(spec.redraw);
  // Label draws and starting points are shared by every variant and grid
  // point of a (ratio, redraw) pair so that comparisons are paired.
  r.mask_seed = derive_seed(config.seed, hash_string("mask"), ri, di);
  r.init_seed = derive_seed(config.seed, hash_string("init"), ri, di);
  r.eval_seed = derive_seed(config.seed, hash_string("kmeans"), ri, di,
                            hash_string(variant_name(spec.variant)),
                            static_cast<std::uint64_t>(spec.grid_index));

  const MultiViewDataset masked = mask_labels(full, spec.ratio, r.mask_seed);
  const LabelConstraint constraint =
      build_label_constraint(masked.labels, masked.n_classes, config.subspace_dim);
  std::vector<ViewGraph> graphs;
  for (const Matrix& x : masked.views) {
    graphs.push_back(build_view_graph(x, spec.params.k, config.delta));
  }

  SolverConfig solver;
  solver.alpha = spec.params.alpha;
  solver.beta = spec.params.beta;
  solver.gamma = spec.params.gamma;
  solver.subspace_dim = config.subspace_dim;
  solver.max_iters = config.max_iters;
  solver.tol = config.tol;
  solver.epsilon = config.epsilon;
  solver.seed = r.init_seed;
  solver.variant = spec.variant;

  const FactorizationState state = fit(masked, constraint, graphs, solver);
  r.n_labeled = masked.n_labeled();
  r.iterations = state.iterations;
  r.initial_objective = state.initial.total;
  r.final_objective = state.final_objective();

  EvalOptions eval;
  eval.repeats = config.repeats;
  eval.restarts = config.restarts;
  eval.seed = r.eval_seed;
  eval.method = config.method;
  r.metrics = evaluate_run(state, masked, constraint, eval);

  if (write_files) {
    const std::filesystem::path dir(config.output_dir);
    write_trace(dir / ("trace_" + r.name + ".csv"), state);
    if (config.save_factors) {
      for (int v = 0; v < state.n_views(); ++v) {
        const std::string suffix = r.name + "_v" + std::to_string(v) + ".csv";
        csv::write_matrix(dir / ("W_" + suffix), state.W[v]);
        csv::write_matrix(dir / ("Z_" + suffix), state.Z[v]);
      }
      csv::write_matrix(dir / ("Zc_" + r.name + ".csv"), state.Zc);
      csv::write_matrix(dir / ("H_" + r.name + ".csv"),
                        extract_representation(state, constraint));
      csv::write_labels(dir / ("truth_" + r.name + ".txt"), masked.truth);
    }
    if (config.dump_graphs) {
      for (std::size_t v = 0; v < graphs.size(); ++v) {
        csv::write_matrix(dir / ("S_" + r.name + "_v" + std::to_string(v) + ".csv"),
                          graphs[v].similarity);
      }
    }
  }
  return r;
}

std::vector<CellResult> run_cells(const MultiViewDataset& full,
                                  const std::vector<CellSpec>& specs,
                                  const ExperimentConfig& config, bool sweep,
                                  bool write_files) {
  std::vector<CellResult> results(specs.size());
  if (!config.parallel || specs.size() < 2) {
    for (std::size_t i = 0; i < specs.size(); ++i) {
      results[i] = run_cell(full, specs[i], config, sweep, write_files);
    }
    return results;
  }

  const std::size_t workers = std::min<std::size_t>(
      specs.size(), std::max(1u, std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(specs.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < specs.size(); i = next++) {
        try {
          results[i] = run_cell(full, specs[i], config, sweep, write_files);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

std::string grid_label(Variant v, const HyperParams& p) {
  return std::string(variant_name(v)) + "[alpha=" + short_double(p.alpha) +
         " beta=" + short_double(p.beta) + " gamma=" + short_double(p.gamma) +
         " k=" + std::to_string(p.k) + "]";
}

json params_json(const HyperParams& p) {
  return {{"alpha", p.alpha}, {"beta", p.beta}, {"gamma", p.gamma}, {"k", p.k}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

std::string_view mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::kRun: return "run";
    case RunMode::kAblate: return "ablate";
    case RunMode::kSweep: return "sweep";
  }
  return "run";
}

}  // namespace

const HyperParams& Preset::at(double ratio) const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < ratios.size(); ++i) {
    if (std::abs(ratios[i] - ratio) < std::abs(ratios[best] - ratio)) best = i;
  }
  return params[best];
}

Preset preset(std::string_view name) {
  if (name == "yale") return make_preset("yale", {1e3, 1e4, 1e2}, {0.1, 0.1, 1}, {0.1, 0.1, 0.1}, 2);
  if (name == "orl") return make_preset("orl", {1e2, 1e3, 1e3}, {1, 1, 0.1}, {0.01, 0.01, 0.01}, 2);
  if (name == "ecg") return make_preset("ecg", {1e5, 1e4, 1e3}, {10, 1, 10}, {0.1, 0.1, 0.1}, 4);
  if (name == "webkb") return make_preset("webkb", {1e3, 1e3, 1e3}, {1, 1, 1}, {1, 1, 1}, 3);
  throw ConfigError("preset", "unknown preset '" + std::string(name) +
                                  "' (expected yale, orl, ecg or webkb)");
}

HyperParams ExperimentConfig::resolve(double ratio) const {
  HyperParams p;
  if (preset_name) p = preset(*preset_name).at(ratio);
  if (alpha) p.alpha = *alpha;
  if (beta) p.beta = *beta;
  if (gamma) p.gamma = *gamma;
  if (k) p.k = *k;
  return p;
}

void ExperimentConfig::validate(bool sweep_mode) const {
  if (!dataset.synthetic && dataset.views.empty()) {
    throw ConfigError("dataset", "needs either \"synthetic\" or \"views\"");
  }
  if (dataset.synthetic && !dataset.views.empty()) {
    throw ConfigError("dataset", "\"synthetic\" and \"views\" are exclusive");
  }
  if (!dataset.synthetic && dataset.labels.empty()) {
    throw ConfigError("dataset.labels", "label file is required with \"views\"");
  }
  if (ratios.empty()) throw ConfigError("label_ratios", "must not be empty");
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (!(ratios[i] > 0.0 && ratios[i] <= 1.0)) {
      throw ConfigError("label_ratios[" + std::to_string(i) + "]", "must lie in (0, 1]");
    }
  }
  if (redraws < 1) throw ConfigError("label_redraws", "must be at least 1");
  if (repeats < 1) throw ConfigError("kmeans.repeats", "must be at least 1");
  if (restarts < 1) throw ConfigError("kmeans.restarts", "must be at least 1");
  if (preset_name) preset(*preset_name);
  auto nonneg = [](const std::optional<double>& x, const char* path) {
    if (x && !(*x >= 0.0)) throw ConfigError(path, "must be nonnegative");
  };
  nonneg(alpha, "solver.alpha");
  nonneg(beta, "solver.beta");
  nonneg(gamma, "solver.gamma");
  if (k && *k < 1) throw ConfigError("graph.k", "must be positive");
  if (subspace_dim < 1) throw ConfigError("solver.subspace_dim", "must be positive");
  if (max_iters < 1) throw ConfigError("solver.max_iters", "must be positive");
  if (!(tol >= 0.0)) throw ConfigError("solver.tol", "must be nonnegative");
  if (!(epsilon > 0.0)) throw ConfigError("solver.epsilon", "must be positive");
  if (variants.empty()) throw ConfigError("variants", "must not be empty");
  if (sweep_mode && sweep.alpha.empty() && sweep.beta.empty() && sweep.gamma.empty() &&
      sweep.k.empty()) {
    throw ConfigError("sweep", "at least one grid must be non-empty in sweep mode");
  }
  for (double a : sweep.alpha) if (!(a >= 0.0)) throw ConfigError("sweep.alpha", "must be nonnegative");
  for (double b : sweep.beta) if (!(b >= 0.0)) throw ConfigError("sweep.beta", "must be nonnegative");
  for (double g : sweep.gamma) if (!(g >= 0.0)) throw ConfigError("sweep.gamma", "must be nonnegative");
  for (int kk : sweep.k) if (kk < 1) throw ConfigError("sweep.k", "must be positive");
}

ExperimentConfig config_from_json(const json& input) {
  const json& doc = input.contains("config") ? input.at("config") : input;
  reject_unknown(doc, "",
                 {"dataset", "label_ratios", "label_redraws", "kmeans", "preset", "solver",
                  "graph", "variants", "sweep", "output_dir", "seed", "parallel",
                  "save_factors", "dump_graphs"});
  ExperimentConfig cfg;

  if (doc.contains("dataset")) {
    const json& ds = doc.at("dataset");
    reject_unknown(ds, "dataset", {"synthetic", "views", "labels", "classes"});
    if (ds.contains("synthetic")) {
      cfg.dataset.synthetic = read_synthetic(ds.at("synthetic"), "dataset.synthetic");
    }
    if (ds.contains("views")) {
      cfg.dataset.views = read_list<std::string>(ds.at("views"), "dataset.views");
    }
    read_if(ds, "dataset", "labels", cfg.dataset.labels);
    read_if(ds, "dataset", "classes", cfg.dataset.n_classes);
  }
  if (doc.contains("label_ratios")) {
    cfg.ratios = read_list<double>(doc.at("label_ratios"), "label_ratios");
  }
  read_if(doc, "", "label_redraws", cfg.redraws);
  if (doc.contains("kmeans")) {
    const json& km = doc.at("kmeans");
    reject_unknown(km, "kmeans", {"repeats", "restarts", "method"});
    read_if(km, "kmeans", "repeats", cfg.repeats);
    read_if(km, "kmeans", "restarts", cfg.restarts);
    if (km.contains("method")) {
      const auto m = read_value<std::string>(km.at("method"), "kmeans.method");
      if (m == "kmeans") {
        cfg.method = ClusterMethod::kKMeans;
      } else if (m == "argmax") {
        cfg.method = ClusterMethod::kArgmax;
      } else {
        throw ConfigError("kmeans.method", "expected \"kmeans\" or \"argmax\"");
      }
    }
  }
  read_if(doc, "", "preset", cfg.preset_name);
  if (doc.contains("solver")) {
    const json& s = doc.at("solver");
    reject_unknown(s, "solver",
                   {"alpha", "beta", "gamma", "subspace_dim", "max_iters", "tol", "epsilon"});
    read_if(s, "solver", "alpha", cfg.alpha);
    read_if(s, "solver", "beta", cfg.beta);
    read_if(s, "solver", "gamma", cfg.gamma);
    read_if(s, "solver", "subspace_dim", cfg.subspace_dim);
    read_if(s, "solver", "max_iters", cfg.max_iters);
    read_if(s, "solver", "tol", cfg.tol);
    read_if(s, "solver", "epsilon", cfg.epsilon);
  }
  if (doc.contains("graph")) {
    const json& g = doc.at("graph");
    reject_unknown(g, "graph", {"k", "delta"});
    read_if(g, "graph", "k", cfg.k);
    if (g.contains("delta")) cfg.delta = read_delta(g.at("delta"), "graph.delta");
  }
  if (doc.contains("variants")) {
    const json& v = doc.at("variants");
    if (v.is_string() && v.get<std::string>() == "all") {
      cfg.variants = all_variants();
    } else {
      cfg.variants.clear();
      const auto names = read_list<std::string>(v, "variants");
      for (std::size_t i = 0; i < names.size(); ++i) {
        try {
          cfg.variants.push_back(parse_variant(names[i]));
        } catch (const std::invalid_argument& e) {
          throw ConfigError("variants[" + std::to_string(i) + "]", e.what());
        }
      }
    }
  }
  if (doc.contains("sweep")) {
    const json& s = doc.at("sweep");
    reject_unknown(s, "sweep", {"alpha", "beta", "gamma", "k"});
    if (s.contains("alpha")) cfg.sweep.alpha = read_list<double>(s.at("alpha"), "sweep.alpha");
    if (s.contains("beta")) cfg.sweep.beta = read_list<double>(s.at("beta"), "sweep.beta");
    if (s.contains("gamma")) cfg.sweep.gamma = read_list<double>(s.at("gamma"), "sweep.gamma");
    if (s.contains("k")) cfg.sweep.k = read_list<int>(s.at("k"), "sweep.k");
  }
  read_if(doc, "", "output_dir", cfg.output_dir);
  read_if(doc, "", "seed", cfg.seed);
  read_if(doc, "", "parallel", cfg.parallel);
  read_if(doc, "", "save_factors", cfg.save_factors);
  read_if(doc, "", "dump_graphs", cfg.dump_graphs);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", e.what());
  }
  return config_from_json(doc);
}

json config_to_json(const ExperimentConfig& cfg) {
  json doc;
  json ds = json::object();
  if (cfg.dataset.synthetic) ds["synthetic"] = synthetic_to_json(*cfg.dataset.synthetic);
  if (!cfg.dataset.views.empty()) ds["views"] = cfg.dataset.views;
  if (!cfg.dataset.labels.empty()) ds["labels"] = cfg.dataset.labels;
  if (cfg.dataset.n_classes) ds["classes"] = *cfg.dataset.n_classes;
  doc["dataset"] = ds;
  doc["label_ratios"] = cfg.ratios;
  doc["label_redraws"] = cfg.redraws;
  doc["kmeans"] = {{"repeats", cfg.repeats},
                   {"restarts", cfg.restarts},
                   {"method", cfg.method == ClusterMethod::kArgmax ? "argmax" : "kmeans"}};
  if (cfg.preset_name) doc["preset"] = *cfg.preset_name;
  json solver = {{"subspace_dim", cfg.subspace_dim},
                 {"max_iters", cfg.max_iters},
                 {"tol", cfg.tol},
                 {"epsilon", cfg.epsilon}};
  if (cfg.alpha) solver["alpha"] = *cfg.alpha;
  if (cfg.beta) solver["beta"] = *cfg.beta;
  if (cfg.gamma) solver["gamma"] = *cfg.gamma;
  doc["solver"] = solver;
  json graph = json::object();
  if (cfg.k) graph["k"] = *cfg.k;
  if (cfg.delta.kind == DeltaPolicy::Kind::kFixed) {
    graph["delta"] = cfg.delta.value;
  } else {
    graph["delta"] = "median";
  }
  doc["graph"] = graph;
  json variants = json::array();
  for (Variant v : cfg.variants) variants.push_back(std::string(variant_name(v)));
  doc["variants"] = variants;
  json sweep = json::object();
  if (!cfg.sweep.alpha.empty()) sweep["alpha"] = cfg.sweep.alpha;
  if (!cfg.sweep.beta.empty()) sweep["beta"] = cfg.sweep.beta;
  if (!cfg.sweep.gamma.empty()) sweep["gamma"] = cfg.sweep.gamma;
  if (!cfg.sweep.k.empty()) sweep["k"] = cfg.sweep.k;
  doc["sweep"] = sweep;
  doc["output_dir"] = cfg.output_dir;
  doc["seed"] = cfg.seed;
  doc["parallel"] = cfg.parallel;
  doc["save_factors"] = cfg.save_factors;
  doc["dump_graphs"] = cfg.dump_graphs;
  return doc;
}

MultiViewDataset materialize_dataset(const DatasetSource& source) {
  if (source.synthetic) return generate_synthetic(*source.synthetic);
  std::vector<std::filesystem::path> paths(source.views.begin(), source.views.end());
  return load_dataset(paths, source.labels, source.n_classes);
}

ExperimentReport run_experiment(const ExperimentConfig& input, RunMode mode,
                                bool write_files) {
  ExperimentConfig config = input;
  if (mode == RunMode::kAblate) config.variants = all_variants();
  config.validate(mode == RunMode::kSweep);
  const bool sweep = mode == RunMode::kSweep;

  const MultiViewDataset full = materialize_dataset(config.dataset);
  if (!full.has_complete_truth()) {
    throw DataError("experiments need a ground-truth label for every sample");
  }
  if (write_files) std::filesystem::create_directories(config.output_dir);

  std::vector<CellSpec> specs;
  for (std::size_t ri = 0; ri < config.ratios.size(); ++ri) {
    const double ratio = config.ratios[ri];
    const HyperParams base = config.resolve(ratio);
    std::vector<HyperParams> grid;
    if (sweep) {
      auto or_base = [](auto values, auto fallback) {
        return values.empty() ? decltype(values){fallback} : values;
      };
      for (double a : or_base(config.sweep.alpha, base.alpha)) {
        for (double b : or_base(config.sweep.beta, base.beta)) {
          for (double g : or_base(config.sweep.gamma, base.gamma)) {
            for (int kk : or_base(config.sweep.k, base.k)) grid.push_back({a, b, g, kk});
          }
        }
      }
    } else {
      grid.push_back(base);
    }
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      for (Variant variant : config.variants) {
        for (int d = 0; d < config.redraws; ++d) {
          CellSpec spec;
          spec.ratio_index = static_cast<int>(ri);
          spec.redraw = d;
          spec.grid_index = static_cast<int>(gi);
          spec.variant = variant;
          spec.ratio = ratio;
          spec.params = grid[gi];
          spec.label = sweep ? grid_label(variant, grid[gi]) : std::string(variant_name(variant));
          specs.push_back(spec);
        }
      }
    }
  }

  ExperimentReport report;
  report.cells = run_cells(full, specs, config, sweep, write_files);

  // Cells are laid out as consecutive runs of `redraws` per aggregate.
  json records = json::array();
  for (std::size_t start = 0; start < specs.size(); start += config.redraws) {
    AggregateRecord rec;
    const CellSpec& spec = specs[start];
    rec.label = spec.label;
    rec.variant = spec.variant;
    rec.ratio = spec.ratio;
    rec.params = spec.params;
    std::vector<double> ac, nm, ac_within, nmi_within;
    json draws = json::array();
    for (int d = 0; d < config.redraws; ++d) {
      const std::size_t idx = start + static_cast<std::size_t>(d);
      const CellResult& cell = report.cells[idx];
      rec.cells.push_back(idx);
      ac.push_back(cell.metrics.accuracy_mean);
      nm.push_back(cell.metrics.nmi_mean);
      ac_within.push_back(cell.metrics.accuracy_std);
      nmi_within.push_back(cell.metrics.nmi_std);
      draws.push_back({{"cell", cell.name},
                       {"redraw", cell.redraw},
                       {"labeled", cell.n_labeled},
                       {"mask_seed", cell.mask_seed},
                       {"init_seed", cell.init_seed},
                       {"eval_seed", cell.eval_seed},
                       {"iterations", cell.iterations},
                       {"initial_objective", cell.initial_objective},
                       {"final_objective", cell.final_objective},
                       {"AC_mean", cell.metrics.accuracy_mean},
                       {"AC_std", cell.metrics.accuracy_std},
                       {"NMI_mean", cell.metrics.nmi_mean},
                       {"NMI_std", cell.metrics.nmi_std}});
    }
    std::tie(rec.ac_mean, rec.ac_std) = mean_std(ac);
    std::tie(rec.nmi_mean, rec.nmi_std) = mean_std(nm);
    rec.ac_std_within = mean_std(ac_within).first;
    rec.nmi_std_within = mean_std(nmi_within).first;

    json row = {{"variant", std::string(variant_name(rec.variant))},
                {"ratio", rec.ratio},
                {"AC_mean", rec.ac_mean},
                {"AC_std", rec.ac_std},
                {"NMI_mean", rec.nmi_mean},
                {"NMI_std", rec.nmi_std},
                {"AC_std_within", rec.ac_std_within},
                {"NMI_std_within", rec.nmi_std_within},
                {"params", params_json(rec.params)},
                {"master_seed", config.seed},
                {"redraws", draws}};
    if (sweep) row["label"] = rec.label;
    records.push_back(row);
    report.records.push_back(std::move(rec));
  }
  report.metrics = {{"mode", std::string(mode_name(mode))}, {"records", records}};

  json cells = json::array();
  for (const CellResult& c : report.cells) {
    cells.push_back({{"cell", c.name},
                     {"ratio", c.ratio},
                     {"redraw", c.redraw},
                     {"variant", std::string(variant_name(c.variant))},
                     {"grid_index", c.grid_index},
                     {"params", params_json(c.params)},
                     {"mask_seed", c.mask_seed},
                     {"init_seed", c.init_seed},
                     {"eval_seed", c.eval_seed}});
  }
  report.manifest = {{"mode", std::string(mode_name(mode))},
                     {"config", config_to_json(config)},
                     {"cells", cells}};

  if (write_files) {
    const std::filesystem::path dir(config.output_dir);
    write_text(dir / "metrics.json", report.metrics.dump(2) + "\n");
    write_text(dir / "manifest.json", report.manifest.dump(2) + "\n");

    // Table layout: one row per label ratio, AC and NMI columns per method.
    std::vector<std::string> columns;
    for (const auto& rec : report.records) {
      if (std::find(columns.begin(), columns.end(), rec.label) == columns.end()) {
        columns.push_back(rec.label);
      }
    }
    std::string table = "ratio";
    for (const auto& col : columns) table += ",\"" + col + " AC\",\"" + col + " NMI\"";
    table += "\n";
    for (double ratio : config.ratios) {
      table += short_double(ratio);
      for (const auto& col : columns) {
        const auto it = std::find_if(report.records.begin(), report.records.end(),
                                     [&](const AggregateRecord& r) {
                                       return r.label == col && r.ratio == ratio;
                                     });
        if (it == report.records.end()) {
          table += ",,";
        } else {
          table += "," + format_percent(it->ac_mean, it->ac_std) + "," +
                   format_percent(it->nmi_mean, it->nmi_std);
        }
      }
      table += "\n";
    }
    write_text(dir / "metrics.csv", table);

    if (sweep) {
      std::string rows = "ratio,variant,alpha,beta,gamma,k,AC_mean,AC_std,NMI_mean,NMI_std\n";
      for (const auto& rec : report.records) {
        rows += short_double(rec.ratio) + "," + std::string(variant_name(rec.variant)) + "," +
                short_double(rec.params.alpha) + "," + short_double(rec.params.beta) + "," +
                short_double(rec.params.gamma) + "," + std::to_string(rec.params.k) + "," +
                short_double(rec.ac_mean) + "," + short_double(rec.ac_std) + "," +
                short_double(rec.nmi_mean) + "," + short_double(rec.nmi_std) + "\n";
      }
      write_text(dir / "sweep.csv", rows);
    }
  }
  return report;
}

}  // namespace dcsmvnmf
