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
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ppt/polya_tree.hpp"

namespace ppt {

// Radial rule on 0 = r_0 < r_1 < ... < r_T = r_max, equally spaced.
// kRightRiemann evaluates the integrand at r_t with weight r_t - r_{t-1};
// kTrapezoid is offered for accuracy studies.
struct QuadratureRule {
  enum class Mode { kRightRiemann, kTrapezoid };

  int nodes = 100;
  double r_max = 4.0;
  Mode mode = Mode::kRightRiemann;

  void validate() const;
  double step() const { return r_max / nodes; }
  double node(int t) const { return r_max * t / nodes; }

  // r_max = |mu| + 4
  static QuadratureRule for_center(std::span<const double> mu, int nodes = 100);
  // r_max = max_i |shift_i| + 4
  static QuadratureRule for_shifts(const std::vector<std::vector<double>>& shifts,
                                   int nodes = 100);
};

// Tree, its branching probabilities and the centring measure.
struct TreeModel {
  TreeShape shape;
  BranchingProbabilities probs;
  CenteringMeasure center;

  int k() const { return shape.k; }
};

// Linear predictor Gamma z for the median-regression model; Gamma is k x p
// row-major. An inactive context shifts by zero.
struct RegressionContext {
  std::vector<double> gamma;
  std::vector<double> z;
  bool active = false;

  std::vector<double> shift(int k) const;
};

// f(theta) with the latent resultant integrated out by `quad`. The point
// x(theta, r) - shift is fed to the tree; pass an empty shift for the
// no-covariate model.
class ProjectedDensity {
 public:
  ProjectedDensity(const TreeModel& model, QuadratureRule quad);

  double operator()(std::span<const double> theta,
                    std::span<const double> shift = {}) const;

  const QuadratureRule& quadrature() const { return quad_; }

 private:
  const TreeModel& model_;
  QuadratureRule quad_;
  double log_norm_;
};

double projected_density_at(const TreeModel& model, const QuadratureRule& quad,
                            std::span<const double> theta,
                            const RegressionContext& reg = {});

struct GridAxis {
  int coord = 1;  // one-based angle index
  double lower = 0.0;
  double upper = 0.0;
  int count = 0;
  bool periodic = false;

  double step() const { return (upper - lower) / count; }
  double mid(int i) const { return lower + (i + 0.5) * step(); }
  std::string name() const { return "theta" + std::to_string(coord); }
  // Nearest cell to `value`.
  int snap(double value) const;
};

// Density values on the tensor grid of cell midpoints; the last axis varies
// fastest.
struct DensityGrid {
  int k = 0;
  std::vector<GridAxis> axes;
  std::vector<double> values;
  bool full_support = true;
  std::vector<std::pair<int, double>> conditioned;

  std::size_t size() const { return values.size(); }
  double cell_volume() const;
  double mass() const;
  const GridAxis& axis_for(int coord) const;
  std::size_t axis_position(int coord) const;
};

// Full-support axis for angle `coord` of a k-dimensional model.
GridAxis support_axis(int k, int coord, int count);

DensityGrid joint_grid(const TreeModel& model, const QuadratureRule& quad,
                       int resolution, const RegressionContext& reg = {},
                       int threads = 0);

DensityGrid marginal_density(const DensityGrid& grid, int coord);

DensityGrid conditional_density(
    const DensityGrid& grid, const std::vector<std::pair<int, double>>& given);

enum class MeanKind { kAutomatic, kCircular, kArithmetic };

struct CurvePoint {
  double given;
  double mean;
  double concentration;  // resultant length of the conditional
  bool defined;          // false when the circular mean is undefined
};

// E(response | conditioning) for every conditioning cell of a 2-D grid.
// kAutomatic uses the circular mean for the periodic angle and the
// arithmetic mean for colatitudes.
std::vector<CurvePoint> regression_curve(const DensityGrid& grid, int response,
                                         int conditioning,
                                         MeanKind kind = MeanKind::kAutomatic);

// CSV with one column per axis plus `density`. With rotate_periodic the
// periodic axis is written on [-pi, pi).
void write_grid_csv(std::ostream& out, const DensityGrid& grid,
                    bool rotate_periodic = false);
void write_grid_csv(const std::filesystem::path& path, const DensityGrid& grid,
                    bool rotate_periodic = false);
DensityGrid read_grid_csv(const std::filesystem::path& path, int k);

void write_curve_csv(const std::filesystem::path& path,
                     const std::vector<CurvePoint>& curve,
                     const std::string& given_name,
                     const std::string& mean_name);

}  // namespace ppt
