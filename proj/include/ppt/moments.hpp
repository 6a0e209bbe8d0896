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

#include "ppt/projected_density.hpp"

namespace ppt {

// q-th trigonometric moment E exp(i q Theta) = a + i b.
struct TrigMoment {
  int order = 1;
  double a = 0.0;
  double b = 0.0;
};

// Mean direction nu in [0, 2 pi) and concentration rho_conc in [0, 1].
// `defined` is false when a = b = 0, in which case nu is NaN.
struct DirectionalSummary {
  double nu = 0.0;
  double rho_conc = 0.0;
  bool defined = true;
};

// Throws DomainError unless the grid is one-dimensional with mass within
// 5% of one.
TrigMoment trig_moment_from_grid(const DensityGrid& marginal, int q);

TrigMoment trig_moment_from_samples(std::span<const double> theta, int q);

DirectionalSummary mean_direction(const TrigMoment& moment);

// Jammalamadaka-Sarma sine correlation. Throws NumericalError when either
// coordinate has zero sine variance about its mean direction.
double circular_correlation_from_samples(std::span<const double> theta_l,
                                         std::span<const double> theta_h);

double circular_correlation_from_grid(const DensityGrid& joint);

}  // namespace ppt
