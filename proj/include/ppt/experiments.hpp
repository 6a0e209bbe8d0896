// Copyright 2026 The ppt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ppt/dataset.hpp"
#include "ppt/inference.hpp"

namespace ppt {

enum class ExperimentKind { kPriorSimulation, kFit, kFitRegression };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view text);

struct PriorSimulationSettings {
  int paths = 20;
  std::vector<std::vector<double>> mus{{0.0, 0.0, 0.0}};
  // Joint grids are written for the first `joint_paths` paths only.
  int joint_paths = 1;
};

struct OutputSettings {
  int grid_resolution = 100;
  // Evaluate posterior grids on every grid_stride-th retained state.
  int grid_stride = 1;
  bool rotate_periodic = false;
  int threads = 0;
};

// Everything needed to reproduce one run.
struct RunManifest {
  ExperimentKind kind = ExperimentKind::kFit;
  TreeShape shape;
  PriorHyperparams hyper;
  ChainConfig chain;
  std::optional<DatasetSpec> dataset;
  std::string dataset_preset;
  std::filesystem::path output_dir = "ppt-out";
  PriorSimulationSettings prior_sim;
  OutputSettings output;

  void validate() const;
};

// Parses the JSON manifest; unknown keys and bad values raise ConfigError.
RunManifest parse_manifest(std::string_view json_text);
RunManifest load_manifest(const std::filesystem::path& path);
std::string manifest_to_json(const RunManifest& manifest);

// Sets a value addressed by a dotted path ("chain.seed") to a JSON literal,
// falling back to a JSON string when `value` does not parse.
void apply_override(RunManifest& manifest, const std::string& dotted_key,
                    const std::string& value);

struct RunOptions {
  ProgressFn progress;
};

// Each driver writes its files under manifest.output_dir and returns the
// JSON summary that it also stores as summary.json.
std::string run_prior_simulation(const RunManifest& manifest);
std::string run_fit(const RunManifest& manifest, const RunOptions& opts = {});
std::string run_fit_regression(const RunManifest& manifest,
                               const RunOptions& opts = {});
std::string run_experiment(const RunManifest& manifest,
                           const RunOptions& opts = {});

// LPML and CPO from a stored likelihood.csv; writes cpo.csv next to
// `cpo_out` when it is non-empty.
LpmlResult lpml_from_csv(const std::filesystem::path& likelihood_csv,
                         const std::filesystem::path& cpo_out = {});

// Re-evaluates posterior density grids from a stored states.csv.
std::string regrid(const RunManifest& manifest,
                   const std::filesystem::path& states_csv,
                   const std::filesystem::path& out_dir);

void write_states_csv(const std::filesystem::path& path,
                      const std::vector<RetainedState>& states);
std::vector<RetainedState> read_states_csv(const std::filesystem::path& path,
                                           const TreeShape& shape, int p);

}  // namespace ppt
