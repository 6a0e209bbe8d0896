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

#include "ppt/geometry.hpp"

#include <cmath>

#include "ppt/error.hpp"
#include "ppt/numerics.hpp"

namespace ppt {

bool AngleVector::in_support() const {
  if (theta.empty()) return false;
  for (std::size_t l = 0; l + 1 < theta.size(); ++l) {
    if (!(theta[l] >= 0.0 && theta[l] <= kPi)) return false;
  }
  const double last = theta.back();
  return last >= 0.0 && last < kTwoPi;
}

double wrap_two_pi(double angle) {
  double w = std::fmod(angle, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

void unit_direction(std::span<const double> theta, std::span<double> out) {
  const std::size_t km1 = theta.size();
  double sin_prod = 1.0;
  for (std::size_t i = 0; i < km1; ++i) {
    out[i] = sin_prod * std::cos(theta[i]);
    sin_prod *= std::sin(theta[i]);
  }
  out[km1] = sin_prod;
}

CartesianPoint polar_to_cartesian(const PolarPoint& p) {
  if (p.angles.theta.empty()) {
    throw DomainError("polar point needs at least one angle");
  }
  CartesianPoint c{std::vector<double>(p.angles.theta.size() + 1)};
  unit_direction(p.angles.theta, c.x);
  for (double& v : c.x) v *= p.r;
  return c;
}

PolarPoint cartesian_to_polar(const CartesianPoint& c) {
  const std::size_t k = c.x.size();
  if (k < 2) throw DomainError("polar coordinates need k >= 2");
  double norm2 = 0.0;
  for (double v : c.x) {
    if (!std::isfinite(v)) throw DomainError("non-finite Cartesian point");
    norm2 += v * v;
  }
  const double r = std::sqrt(norm2);
  if (r <= kOriginEpsilon) {
    throw DomainError("cannot take polar coordinates of the origin");
  }
  PolarPoint p{AngleVector{std::vector<double>(k - 1, 0.0)}, r};
  // tail[i] = |(x_i, ..., x_k)|
  std::vector<double> tail(k + 1, 0.0);
  for (std::size_t i = k; i-- > 0;) {
    tail[i] = std::hypot(tail[i + 1], c.x[i]);
  }
  for (std::size_t l = 0; l + 2 < k; ++l) {
    if (tail[l] == 0.0) return p;  // pole: downstream angles stay 0
    p.angles.theta[l] = std::atan2(tail[l + 1], c.x[l]);
  }
  if (tail[k - 2] == 0.0) return p;
  p.angles.theta[k - 2] = wrap_two_pi(std::atan2(c.x[k - 1], c.x[k - 2]));
  return p;
}

double angular_jacobian(std::span<const double> theta) {
  const int k = static_cast<int>(theta.size()) + 1;
  double j = 1.0;
  for (int l = 1; l <= k - 2; ++l) {
    j *= std::pow(std::sin(theta[static_cast<std::size_t>(l - 1)]), k - l - 1);
  }
  return j;
}

double jacobian_abs(const PolarPoint& p, int k) {
  if (static_cast<int>(p.angles.theta.size()) != k - 1) {
    throw DomainError("angle count does not match dimension");
  }
  return std::pow(p.r, k - 1) * angular_jacobian(p.angles.theta);
}

}  // namespace ppt
