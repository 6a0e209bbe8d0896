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

#include "ppt/moments.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ppt/error.hpp"
#include "ppt/geometry.hpp"

namespace ppt {

TrigMoment trig_moment_from_grid(const DensityGrid& marginal, int q) {
  if (marginal.axes.size() != 1) {
    throw DomainError("trigonometric moments need a one-dimensional grid");
  }
  const double mass = marginal.mass();
  if (std::fabs(mass - 1.0) > 0.05) {
    throw DomainError("grid is not normalised (mass " + std::to_string(mass) +
                      ")");
  }
  const GridAxis& ax = marginal.axes[0];
  TrigMoment m{q, 0.0, 0.0};
  for (int i = 0; i < ax.count; ++i) {
    const double th = ax.mid(i);
    const double f = marginal.values[static_cast<std::size_t>(i)];
    m.a += std::cos(q * th) * f;
    m.b += std::sin(q * th) * f;
  }
  m.a *= ax.step();
  m.b *= ax.step();
  return m;
}

TrigMoment trig_moment_from_samples(std::span<const double> theta, int q) {
  if (theta.empty()) throw DomainError("no samples");
  TrigMoment m{q, 0.0, 0.0};
  for (double th : theta) {
    m.a += std::cos(q * th);
    m.b += std::sin(q * th);
  }
  m.a /= static_cast<double>(theta.size());
  m.b /= static_cast<double>(theta.size());
  return m;
}

DirectionalSummary mean_direction(const TrigMoment& moment) {
  if (moment.order != 1) {
    throw DomainError("mean direction uses the first trigonometric moment");
  }
  DirectionalSummary s;
  s.rho_conc = std::min(1.0, std::hypot(moment.a, moment.b));
  if (moment.a == 0.0 && moment.b == 0.0) {
    s.defined = false;
    s.nu = std::nan("");
    return s;
  }
  s.nu = wrap_two_pi(std::atan2(moment.b, moment.a));
  return s;
}

namespace {

double clamp_unit(double r) { return std::clamp(r, -1.0, 1.0); }

}  // namespace

double circular_correlation_from_samples(std::span<const double> theta_l,
                                         std::span<const double> theta_h) {
  if (theta_l.size() != theta_h.size()) {
    throw DomainError("correlation samples differ in length");
  }
  if (theta_l.size() < 3) throw DomainError("correlation needs n >= 3");
  const auto nl = mean_direction(trig_moment_from_samples(theta_l, 1));
  const auto nh = mean_direction(trig_moment_from_samples(theta_h, 1));
  const double vl = nl.defined ? nl.nu : 0.0;
  const double vh = nh.defined ? nh.nu : 0.0;
  double num = 0.0, sl = 0.0, sh = 0.0;
  for (std::size_t i = 0; i < theta_l.size(); ++i) {
    const double a = std::sin(theta_l[i] - vl);
    const double b = std::sin(theta_h[i] - vh);
    num += a * b;
    sl += a * a;
    sh += b * b;
  }
  // Rounding in nu leaves ~1e-32 per term for constant samples.
  const double floor = 1e-24 * static_cast<double>(theta_l.size());
  if (!(sl > floor) || !(sh > floor)) {
    throw NumericalError("undefined circular correlation: zero sine variance");
  }
  return clamp_unit(num / std::sqrt(sl * sh));
}

double circular_correlation_from_grid(const DensityGrid& joint) {
  if (joint.axes.size() != 2) {
    throw DomainError("correlation needs a two-dimensional grid");
  }
  const GridAxis& ax0 = joint.axes[0];
  const GridAxis& ax1 = joint.axes[1];
  const double vol = joint.cell_volume();
  double c0 = 0, s0 = 0, c1 = 0, s1 = 0, mass = 0;
  for (int i = 0; i < ax0.count; ++i) {
    for (int j = 0; j < ax1.count; ++j) {
      const double f =
          joint.values[static_cast<std::size_t>(i) * ax1.count + j] * vol;
      mass += f;
      c0 += f * std::cos(ax0.mid(i));
      s0 += f * std::sin(ax0.mid(i));
      c1 += f * std::cos(ax1.mid(j));
      s1 += f * std::sin(ax1.mid(j));
    }
  }
  if (!(mass > 0.0)) throw NumericalError("grid has no mass");
  const double nu0 = std::atan2(s0, c0);
  const double nu1 = std::atan2(s1, c1);
  double num = 0, v0 = 0, v1 = 0;
  for (int i = 0; i < ax0.count; ++i) {
    const double a = std::sin(ax0.mid(i) - nu0);
    for (int j = 0; j < ax1.count; ++j) {
      const double f =
          joint.values[static_cast<std::size_t>(i) * ax1.count + j] * vol;
      const double b = std::sin(ax1.mid(j) - nu1);
      num += f * a * b;
      v0 += f * a * a;
      v1 += f * b * b;
    }
  }
  if (!(v0 > 1e-300) || !(v1 > 1e-300)) {
    throw NumericalError("undefined circular correlation: zero sine variance");
  }
  return clamp_unit(num / std::sqrt(v0 * v1));
}

}  // namespace ppt
