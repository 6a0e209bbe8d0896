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

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ppt/inference.hpp"
#include "ppt/numerics.hpp"

namespace ppt {

enum class AngleUnit { kDegrees, kRadians };

// theta = (value + offset) * scale, then converted from `unit` to radians.
struct AngleTransform {
  AngleUnit unit = AngleUnit::kRadians;
  double offset = 0.0;
  double scale = 1.0;

  double apply(double value) const;
};

struct DatasetSpec {
  std::filesystem::path path;
  // Zero-based column positions, one per angle theta_1..theta_{k-1}.
  std::vector<int> angle_columns{0, 1};
  std::vector<AngleTransform> transforms;  // empty = radians, identity
  std::vector<int> covariate_columns;
  // Header handling; nullopt detects a non-numeric first row.
  std::optional<bool> header;

  int k() const { return static_cast<int>(angle_columns.size()) + 1; }
  void validate() const;
};

// Named transform presets for the retina (B15), fold (B19) and
// palaeomagnetic (B23) tables.
DatasetSpec dataset_preset(const std::string& name);

struct DataTable {
  Observations obs;
  std::vector<std::size_t> source_lines;
  std::size_t rows_read = 0;
};

// Comma- or whitespace-delimited text. Throws IngestionError listing every
// malformed row, or any angle that leaves the support after transforming.
DataTable load_dataset(const DatasetSpec& spec);

// Radians, columns theta1..theta{k-1} then z1..zp.
void write_dataset(const std::filesystem::path& path, const Observations& obs);

// Angles of X / |X| for X ~ N_k(mu, I).
Observations synthesize_projected_normal(std::span<const double> mu,
                                         std::size_t n, Rng& rng);

// Median regression X_i = Gamma z_i + eps_i, eps_i ~ N_k(0, I), with one
// indicator covariate per group (p = group_sizes.size(), no intercept).
Observations synthesize_group_regression(
    int k, const std::vector<double>& gamma,
    const std::vector<std::size_t>& group_sizes, Rng& rng);

// Equal-weight mixture of projected normals, one component per mean.
Observations synthesize_projected_mixture(
    const std::vector<std::vector<double>>& means, std::size_t n, Rng& rng);

}  // namespace ppt
