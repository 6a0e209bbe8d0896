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

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace ppt {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Seeded generator owned by exactly one chain. All variates are produced by
// the samplers below from 53-bit uniforms so that a (seed, call order) pair
// reproduces the same draws on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t next_u64() { return engine_(); }

  // Standard normal via the Marsaglia polar method; the spare is cached.
  double standard_normal();

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct GammaShapeRate {
  double shape;
  double rate;

  GammaShapeRate(double shape_, double rate_);
  double mean() const { return shape / rate; }
  double log_density(double x) const;
};

double log_gamma(double x);

double normal_cdf(double z);

double normal_quantile(double p);

// Log of N(x | mean, precision).
double log_normal_density(double x, double mean, double precision);

double sample_gamma(const GammaShapeRate& params, Rng& rng);

// log of a Gamma(shape, 1) variate, stable for very small shapes where the
// variate itself underflows.
double sample_log_gamma_unit(double shape, Rng& rng);

double sample_normal(double mean, double precision, Rng& rng);

std::vector<double> sample_dirichlet(std::span<const double> alphas, Rng& rng);

// Writes the draw into `out` (same length as alphas) without allocating.
void sample_dirichlet_into(std::span<const double> alphas, Rng& rng,
                           std::span<double> out);

// log sum_i exp(v_i); -inf for an empty span or all -inf inputs.
double log_sum_exp(std::span<const double> values);

}  // namespace ppt
