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

#include "ppt/projected_density.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include "ppt/csv.hpp"
#include "ppt/error.hpp"
#include "ppt/geometry.hpp"

namespace ppt {

void QuadratureRule::validate() const {
  if (nodes < 2) throw DomainError("quadrature needs at least 2 nodes");
  if (!(r_max > 0.0) || !std::isfinite(r_max)) {
    throw DomainError("quadrature upper limit must be positive");
  }
}

QuadratureRule QuadratureRule::for_center(std::span<const double> mu,
                                          int nodes) {
  double n2 = 0.0;
  for (double v : mu) n2 += v * v;
  return QuadratureRule{nodes, std::sqrt(n2) + 4.0, Mode::kRightRiemann};
}

QuadratureRule QuadratureRule::for_shifts(
    const std::vector<std::vector<double>>& shifts, int nodes) {
  double largest = 0.0;
  for (const auto& s : shifts) {
    double n2 = 0.0;
    for (double v : s) n2 += v * v;
    largest = std::max(largest, std::sqrt(n2));
  }
  return QuadratureRule{nodes, largest + 4.0, Mode::kRightRiemann};
}

std::vector<double> RegressionContext::shift(int k) const {
  std::vector<double> out(static_cast<std::size_t>(k), 0.0);
  if (!active) return out;
  const std::size_t p = z.size();
  if (gamma.size() != static_cast<std::size_t>(k) * p) {
    throw DomainError("coefficient matrix is not k x p");
  }
  for (std::size_t l = 0; l < out.size(); ++l) {
    for (std::size_t h = 0; h < p; ++h) out[l] += gamma[l * p + h] * z[h];
  }
  return out;
}

ProjectedDensity::ProjectedDensity(const TreeModel& model, QuadratureRule quad)
    : model_(model), quad_(quad) {
  quad_.validate();
  model_.shape.validate();
  if (model_.center.dim() != model_.shape.k ||
      model_.probs.k() != model_.shape.k ||
      model_.probs.depth() != model_.shape.depth) {
    throw DomainError("tree model components disagree on k or M");
  }
  const int k = model_.shape.k;
  log_norm_ = std::log(2.0) * k * model_.shape.depth -
              0.5 * k * std::log(kTwoPi);
}

double ProjectedDensity::operator()(std::span<const double> theta,
                                    std::span<const double> shift) const {
  const TreeShape& shape = model_.shape;
  const int k = shape.k;
  const std::size_t ku = static_cast<std::size_t>(k);
  if (theta.size() + 1 != ku) {
    throw DomainError("angle vector has the wrong dimension");
  }
  for (std::size_t l = 0; l < theta.size(); ++l) {
    const bool last = l + 1 == theta.size();
    const double hi = last ? kTwoPi : kPi;
    if (!(theta[l] >= 0.0) || theta[l] > hi || (last && theta[l] == hi)) {
      throw DomainError("angle outside the support H");
    }
  }
  if (!shift.empty() && shift.size() != ku) {
    throw DomainError("shift has the wrong dimension");
  }

  double u[32], x[32];
  std::uint32_t leaf[32];
  unit_direction(theta, std::span<double>(u, ku));
  const auto& mu = model_.center.mu;
  const double h = quad_.step();
  double sum = 0.0;
  for (int t = 1; t <= quad_.nodes; ++t) {
    const double r = h * t;
    double q = 0.0;
    for (std::size_t l = 0; l < ku; ++l) {
      x[l] = r * u[l] - (shift.empty() ? 0.0 : shift[l]);
      const double z = x[l] - mu[l];
      q += z * z;
    }
    leaf_coords(shape, mu, std::span<const double>(x, ku),
                std::span<std::uint32_t>(leaf, ku));
    const double p = path_probability(
        shape, model_.probs, std::span<const std::uint32_t>(leaf, ku));
    double term = p * std::exp(-0.5 * q) * std::pow(r, k - 1);
    if (quad_.mode == QuadratureRule::Mode::kTrapezoid && t == quad_.nodes) {
      term *= 0.5;
    }
    sum += term;
  }
  return sum * h * std::exp(log_norm_) * angular_jacobian(theta);
}

double projected_density_at(const TreeModel& model, const QuadratureRule& quad,
                            std::span<const double> theta,
                            const RegressionContext& reg) {
  ProjectedDensity f(model, quad);
  if (!reg.active) return f(theta);
  const auto s = reg.shift(model.shape.k);
  return f(theta, s);
}

int GridAxis::snap(double value) const {
  const int i = static_cast<int>(std::floor((value - lower) / step()));
  return std::clamp(i, 0, count - 1);
}

double DensityGrid::cell_volume() const {
  double v = 1.0;
  for (const auto& a : axes) v *= a.step();
  return v;
}

double DensityGrid::mass() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * cell_volume();
}

std::size_t DensityGrid::axis_position(int coord) const {
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (axes[i].coord == coord) return i;
  }
  throw DomainError("grid has no axis theta" + std::to_string(coord));
}

const GridAxis& DensityGrid::axis_for(int coord) const {
  return axes[axis_position(coord)];
}

GridAxis support_axis(int k, int coord, int count) {
  if (coord < 1 || coord > k - 1) {
    throw DomainError("angle index outside [1, k-1]");
  }
  const bool periodic = coord == k - 1;
  return GridAxis{coord, 0.0, periodic ? kTwoPi : kPi, count, periodic};
}

namespace {

std::vector<std::size_t> strides_of(const std::vector<GridAxis>& axes) {
  std::vector<std::size_t> strides(axes.size(), 1);
  for (std::size_t i = axes.size(); i-- > 1;) {
    strides[i - 1] = strides[i] * static_cast<std::size_t>(axes[i].count);
  }
  return strides;
}

}  // namespace

DensityGrid joint_grid(const TreeModel& model, const QuadratureRule& quad,
                       int resolution, const RegressionContext& reg,
                       int threads) {
  if (resolution < 16) {
    throw DomainError("grid resolution must be at least 16 per axis");
  }
  const int k = model.shape.k;
  if (k < 2) throw DomainError("projected densities need k >= 2");
  DensityGrid grid;
  grid.k = k;
  for (int c = 1; c <= k - 1; ++c) {
    grid.axes.push_back(support_axis(k, c, resolution));
  }
  std::size_t total = 1;
  for (const auto& a : grid.axes) total *= static_cast<std::size_t>(a.count);
  grid.values.assign(total, 0.0);

  const ProjectedDensity f(model, quad);
  const std::vector<double> shift =
      reg.active ? reg.shift(k) : std::vector<double>{};
  const auto strides = strides_of(grid.axes);

  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<double> theta(grid.axes.size());
    for (std::size_t cell = begin; cell < end; ++cell) {
      for (std::size_t a = 0; a < grid.axes.size(); ++a) {
        const int i = static_cast<int>((cell / strides[a]) %
                                       static_cast<std::size_t>(grid.axes[a].count));
        theta[a] = grid.axes[a].mid(i);
      }
      grid.values[cell] = f(theta, shift);
    }
  };

  unsigned n_threads =
      threads > 0 ? static_cast<unsigned>(threads)
                  : std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  n_threads = static_cast<unsigned>(
      std::min<std::size_t>(n_threads, std::max<std::size_t>(1, total / 256)));
  if (n_threads <= 1) {
    work(0, total);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (total + n_threads - 1) / n_threads;
    for (unsigned t = 0; t < n_threads; ++t) {
      const std::size_t b = t * chunk;
      const std::size_t e = std::min(total, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
  }
  return grid;
}

DensityGrid marginal_density(const DensityGrid& grid, int coord) {
  if (!grid.full_support) {
    throw DomainError("marginalisation needs a full-support grid");
  }
  const std::size_t keep = grid.axis_position(coord);
  const auto strides = strides_of(grid.axes);
  DensityGrid out;
  out.k = grid.k;
  out.axes = {grid.axes[keep]};
  out.values.assign(static_cast<std::size_t>(grid.axes[keep].count), 0.0);
  double other_volume = 1.0;
  for (std::size_t a = 0; a < grid.axes.size(); ++a) {
    if (a != keep) other_volume *= grid.axes[a].step();
  }
  const std::size_t n = static_cast<std::size_t>(grid.axes[keep].count);
  for (std::size_t cell = 0; cell < grid.values.size(); ++cell) {
    out.values[(cell / strides[keep]) % n] += grid.values[cell];
  }
  for (double& v : out.values) v *= other_volume;
  return out;
}

DensityGrid conditional_density(
    const DensityGrid& grid, const std::vector<std::pair<int, double>>& given) {
  std::vector<int> fixed(grid.axes.size(), -1);
  for (const auto& [coord, value] : given) {
    const std::size_t a = grid.axis_position(coord);
    fixed[a] = grid.axes[a].snap(value);
  }
  DensityGrid out;
  out.k = grid.k;
  out.full_support = false;
  out.conditioned = grid.conditioned;
  for (std::size_t a = 0; a < grid.axes.size(); ++a) {
    if (fixed[a] < 0) {
      out.axes.push_back(grid.axes[a]);
    } else {
      out.conditioned.emplace_back(grid.axes[a].coord,
                                   grid.axes[a].mid(fixed[a]));
    }
  }
  if (out.axes.empty()) {
    throw DomainError("conditioning on every axis leaves nothing free");
  }
  const auto strides = strides_of(grid.axes);
  for (std::size_t cell = 0; cell < grid.values.size(); ++cell) {
    bool match = true;
    for (std::size_t a = 0; a < grid.axes.size() && match; ++a) {
      if (fixed[a] >= 0) {
        const int i = static_cast<int>(
            (cell / strides[a]) % static_cast<std::size_t>(grid.axes[a].count));
        match = i == fixed[a];
      }
    }
    if (match) out.values.push_back(grid.values[cell]);
  }
  const double m = out.mass();
  if (!(m >= 1e-12)) {
    throw NumericalError("conditional slice has total mass " +
                         std::to_string(m) + " < 1e-12");
  }
  for (double& v : out.values) v /= m;
  return out;
}

std::vector<CurvePoint> regression_curve(const DensityGrid& grid, int response,
                                         int conditioning, MeanKind kind) {
  if (grid.axes.size() != 2) {
    throw DomainError("regression curves need a two-dimensional grid");
  }
  const std::size_t ra = grid.axis_position(response);
  const std::size_t ca = grid.axis_position(conditioning);
  if (ra == ca) throw DomainError("response and conditioning coincide");
  const GridAxis& rax = grid.axes[ra];
  const GridAxis& cax = grid.axes[ca];
  const bool circular = kind == MeanKind::kCircular ||
                        (kind == MeanKind::kAutomatic && rax.periodic);
  const auto strides = strides_of(grid.axes);

  std::vector<CurvePoint> curve;
  curve.reserve(static_cast<std::size_t>(cax.count));
  for (int c = 0; c < cax.count; ++c) {
    double mass = 0.0, s1 = 0.0, cs = 0.0, sn = 0.0;
    for (int r = 0; r < rax.count; ++r) {
      const std::size_t cell = static_cast<std::size_t>(c) * strides[ca] +
                               static_cast<std::size_t>(r) * strides[ra];
      const double w = grid.values[cell];
      const double th = rax.mid(r);
      mass += w;
      s1 += w * th;
      cs += w * std::cos(th);
      sn += w * std::sin(th);
    }
    if (!(mass * rax.step() >= 1e-12)) {
      throw NumericalError("degenerate conditional at " + cax.name() + " = " +
                           std::to_string(cax.mid(c)));
    }
    const double a = cs / mass, b = sn / mass;
    const double rho = std::sqrt(a * a + b * b);
    CurvePoint pt{cax.mid(c), 0.0, rho, true};
    if (circular) {
      pt.defined = rho > 1e-9;
      pt.mean = pt.defined ? wrap_two_pi(std::atan2(b, a)) : std::nan("");
    } else {
      pt.mean = s1 / mass;
    }
    curve.push_back(pt);
  }
  return curve;
}

void write_grid_csv(std::ostream& out, const DensityGrid& grid,
                    bool rotate_periodic) {
  std::vector<std::string> header;
  for (const auto& a : grid.axes) header.push_back(a.name());
  header.emplace_back("density");
  csv::write_row(out, header);
  const auto strides = strides_of(grid.axes);
  std::vector<double> row(grid.axes.size() + 1);
  for (std::size_t cell = 0; cell < grid.values.size(); ++cell) {
    for (std::size_t a = 0; a < grid.axes.size(); ++a) {
      const int i = static_cast<int>((cell / strides[a]) %
                                     static_cast<std::size_t>(grid.axes[a].count));
      double v = grid.axes[a].mid(i);
      if (rotate_periodic && grid.axes[a].periodic && v >= kPi) v -= kTwoPi;
      row[a] = v;
    }
    row.back() = grid.values[cell];
    csv::write_row(out, row);
  }
}

void write_grid_csv(const std::filesystem::path& path, const DensityGrid& grid,
                    bool rotate_periodic) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_grid_csv(out, grid, rotate_periodic);
}

DensityGrid read_grid_csv(const std::filesystem::path& path, int k) {
  const csv::Table table = csv::read_table(path);
  if (table.header.size() < 2 || table.header.back() != "density") {
    throw IngestionError(path.string() + ": not a density grid");
  }
  DensityGrid grid;
  grid.k = k;
  const std::size_t n_axes = table.header.size() - 1;
  std::vector<std::vector<double>> coords(n_axes);
  for (std::size_t a = 0; a < n_axes; ++a) {
    const std::string& name = table.header[a];
    if (name.rfind("theta", 0) != 0) {
      throw IngestionError(path.string() + ": bad axis column '" + name + "'");
    }
    const int coord = std::stoi(name.substr(5));
    const bool periodic = coord == k - 1;
    std::set<double> distinct;
    for (const auto& row : table.rows) {
      double v = row[a];
      if (periodic && v < 0.0) v += kTwoPi;
      distinct.insert(v);
    }
    if (distinct.size() < 2) {
      throw IngestionError(path.string() + ": axis " + name +
                           " needs at least two cells");
    }
    const double lo = *distinct.begin(), hi = *distinct.rbegin();
    const int count = static_cast<int>(distinct.size());
    const double step = (hi - lo) / (count - 1);
    grid.axes.push_back(
        GridAxis{coord, lo - 0.5 * step, hi + 0.5 * step, count, periodic});
  }
  const auto strides = strides_of(grid.axes);
  std::size_t total = 1;
  for (const auto& a : grid.axes) total *= static_cast<std::size_t>(a.count);
  if (total != table.rows.size()) {
    throw IngestionError(path.string() + ": grid is not a full tensor product");
  }
  grid.values.assign(total, 0.0);
  for (const auto& row : table.rows) {
    std::size_t cell = 0;
    for (std::size_t a = 0; a < n_axes; ++a) {
      double v = row[a];
      if (grid.axes[a].periodic && v < 0.0) v += kTwoPi;
      cell += static_cast<std::size_t>(grid.axes[a].snap(v)) * strides[a];
    }
    grid.values[cell] = row.back();
  }
  for (const auto& a : grid.axes) {
    const double top = a.periodic ? kTwoPi : kPi;
    if (std::fabs(a.lower) > 1e-9 || std::fabs(a.upper - top) > 1e-9) {
      grid.full_support = false;
    }
  }
  return grid;
}

void write_curve_csv(const std::filesystem::path& path,
                     const std::vector<CurvePoint>& curve,
                     const std::string& given_name,
                     const std::string& mean_name) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  csv::write_row(out, std::vector<std::string>{given_name, mean_name,
                                               "concentration", "defined"});
  for (const auto& p : curve) {
    csv::write_row(out, std::vector<double>{p.given, p.mean, p.concentration,
                                            p.defined ? 1.0 : 0.0});
  }
}

}  // namespace ppt
