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

#include "ppt/numerics.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <string>

#include "ppt/error.hpp"

namespace ppt {

double Rng::standard_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * scale;
  has_spare_ = true;
  return u * scale;
}

GammaShapeRate::GammaShapeRate(double shape_, double rate_)
    : shape(shape_), rate(rate_) {
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) ||
      !std::isfinite(rate)) {
    throw DomainError("gamma parameters must be positive and finite (shape=" +
                      std::to_string(shape) + ", rate=" + std::to_string(rate) +
                      ")");
  }
}

double GammaShapeRate::log_density(double x) const {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) - log_gamma(shape) +
         (shape - 1.0) * std::log(x) - rate * x;
}

// glibc's lgamma is accurate to a few ulp over the whole positive axis, well
// inside the 1e-10 absolute target.
double log_gamma(double x) {
  if (!(x > 0.0) || std::isnan(x)) {
    throw DomainError("log_gamma requires x > 0, got " + std::to_string(x));
  }
  return std::lgamma(x);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

template <std::size_t N>
double horner(const double (&c)[N], double x) {
  double acc = c[N - 1];
  for (std::size_t i = N - 1; i-- > 0;) acc = acc * x + c[i];
  return acc;
}

}  // namespace

// Wichura's AS241 (PPND16), relative accuracy about 1e-16.
double normal_quantile(double p) {
  if (std::isnan(p) || p < 0.0 || p > 1.0) {
    throw DomainError("normal_quantile requires p in [0,1], got " +
                      std::to_string(p));
  }
  if (p == 0.0) return -std::numeric_limits<double>::infinity();
  if (p == 1.0) return std::numeric_limits<double>::infinity();

  static constexpr double a[] = {
      3.387132872796366608,   133.14166789178437745, 1971.5909503065514427,
      13731.693765509461125,  45921.953931549871457, 67265.770927008700853,
      33430.575583588128105,  2509.0809287301226727};
  static constexpr double b[] = {
      1.0,                   42.313330701600911252, 687.1870074920579083,
      5394.1960214247511077, 21213.794301586595867, 39307.89580009271061,
      28729.085735721942674, 5226.495278852545925};
  static constexpr double c[] = {
      1.42343711074968357734,  4.6303378461565452959,
      5.7694972214606914055,   3.64784832476320460504,
      1.27045825245236838258,  0.24178072517745061177,
      0.0227238449892691845833, 7.7454501427834140764e-4};
  static constexpr double d[] = {
      1.0,                     2.05319162663775882187,
      1.6763848301838038494,   0.68976733498510000455,
      0.14810397642748007459,  0.0151986665636164571966,
      5.475938084995344946e-4, 1.05075007164441684324e-9};
  static constexpr double e[] = {
      6.6579046435011037772,    5.4637849111641143699,
      1.7848265399172913358,    0.29656057182850489123,
      0.026532189526576123093,  0.0012426609473880784386,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double f[] = {
      1.0,                      0.59983220655588793769,
      0.13692988092273580531,   0.0148753612908506148525,
      7.868691311456132591e-4,  1.8463183175100546818e-5,
      1.4215117583164458887e-7, 2.04426310338993978564e-15};

  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * horner(a, r) / horner(b, r);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = horner(c, r) / horner(d, r);
  } else {
    r -= 5.0;
    value = horner(e, r) / horner(f, r);
  }
  return q < 0.0 ? -value : value;
}

double log_normal_density(double x, double mean, double precision) {
  const double z = x - mean;
  return 0.5 * std::log(precision / kTwoPi) - 0.5 * precision * z * z;
}

namespace {

// Marsaglia & Tsang for shape >= 1, returned on the log scale.
double log_gamma_variate_ge1(double shape, Rng& rng) {
  const double dd = shape - 1.0 / 3.0;
  const double cc = 1.0 / std::sqrt(9.0 * dd);
  for (;;) {
    double x, v;
    do {
      x = rng.standard_normal();
      v = 1.0 + cc * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 ||
        std::log(u) < 0.5 * x2 + dd * (1.0 - v + std::log(v))) {
      return std::log(dd) + std::log(v);
    }
  }
}

}  // namespace

double sample_log_gamma_unit(double shape, Rng& rng) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw DomainError("gamma shape must be positive, got " +
                      std::to_string(shape));
  }
  if (shape >= 1.0) return log_gamma_variate_ge1(shape, rng);
  // G(a) = G(a + 1) * U^(1/a)
  return log_gamma_variate_ge1(shape + 1.0, rng) +
         std::log(rng.uniform()) / shape;
}

double sample_gamma(const GammaShapeRate& params, Rng& rng) {
  const double g = std::exp(sample_log_gamma_unit(params.shape, rng));
  return std::max(g, DBL_MIN) / params.rate;
}

double sample_normal(double mean, double precision, Rng& rng) {
  if (!(precision > 0.0) || std::isinf(precision)) {
    throw DomainError("normal precision must be positive and finite, got " +
                      std::to_string(precision));
  }
  return mean + rng.standard_normal() / std::sqrt(precision);
}

void sample_dirichlet_into(std::span<const double> alphas, Rng& rng,
                           std::span<double> out) {
  if (alphas.size() < 2) {
    throw DomainError("Dirichlet needs at least two parameters");
  }
  if (out.size() != alphas.size()) {
    throw DomainError("Dirichlet output size mismatch");
  }
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0)) {
      throw DomainError("Dirichlet parameters must be positive, got " +
                        std::to_string(alphas[i]));
    }
    out[i] = sample_log_gamma_unit(alphas[i], rng);
    max_log = std::max(max_log, out[i]);
  }
  double total = 0.0;
  for (double& v : out) {
    v = std::max(std::exp(v - max_log), DBL_MIN);
    total += v;
  }
  for (double& v : out) v /= total;
}

std::vector<double> sample_dirichlet(std::span<const double> alphas,
                                     Rng& rng) {
  std::vector<double> out(alphas.size());
  sample_dirichlet_into(alphas, rng, out);
  return out;
}

double log_sum_exp(std::span<const double> values) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : values) hi = std::max(hi, v);
  if (std::isinf(hi)) return hi;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

}  // namespace ppt
