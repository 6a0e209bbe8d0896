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

#include <span>
#include <vector>

namespace ppt {

// Angles (theta_1, ..., theta_{k-1}) of a point on S^{k-1}: colatitudes in
// [0, pi] followed by one periodic angle in [0, 2 pi).
struct AngleVector {
  std::vector<double> theta;

  int dim() const { return static_cast<int>(theta.size()) + 1; }
  // True when theta lies in the support H.
  bool in_support() const;
};

struct PolarPoint {
  AngleVector angles;
  double r = 1.0;
};

struct CartesianPoint {
  std::vector<double> x;
};

inline constexpr double kOriginEpsilon = 1e-12;

// Unit vector x(theta, 1) written into `out` (size k = theta.size() + 1).
void unit_direction(std::span<const double> theta, std::span<double> out);

CartesianPoint polar_to_cartesian(const PolarPoint& p);

// Throws DomainError for |x| <= kOriginEpsilon. At a pole all downstream
// angles are 0.
PolarPoint cartesian_to_polar(const CartesianPoint& c);

// r^{k-1} prod_{l=1}^{k-2} sin(theta_l)^{k-l-1}
double jacobian_abs(const PolarPoint& p, int k);

// The angular factor prod_{l=1}^{k-2} sin(theta_l)^{k-l-1} alone.
double angular_jacobian(std::span<const double> theta);

// Maps any real angle into [0, 2 pi).
double wrap_two_pi(double angle);

}  // namespace ppt
