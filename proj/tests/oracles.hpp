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

// Reference computations that do not call into the library.

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

inline double phi_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Bisection on the normal CDF.
inline double quantile_bisect(double p) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (phi_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Stirling series after shifting the argument above 20.
inline double log_gamma_stirling(double x) {
  double shift = 0.0;
  while (x < 20.0) {
    shift -= std::log(x);
    x += 1.0;
  }
  const double x2 = x * x;
  const double series = 1.0 / (12.0 * x) - 1.0 / (360.0 * x * x2) +
                        1.0 / (1260.0 * x * x2 * x2) -
                        1.0 / (1680.0 * x * x2 * x2 * x2);
  return shift + (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * kPi) + series;
}

inline double normal_pdf(double x, double mu) {
  return std::exp(-0.5 * (x - mu) * (x - mu)) / std::sqrt(2.0 * kPi);
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace oracle
