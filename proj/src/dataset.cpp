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

#include "ppt/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ppt/csv.hpp"
#include "ppt/error.hpp"
#include "ppt/geometry.hpp"

namespace ppt {

double AngleTransform::apply(double value) const {
  const double v = (value + offset) * scale;
  return unit == AngleUnit::kDegrees ? v * kPi / 180.0 : v;
}

void DatasetSpec::validate() const {
  if (angle_columns.empty()) {
    throw ConfigError("dataset needs at least one angle column");
  }
  if (!transforms.empty() && transforms.size() != angle_columns.size()) {
    throw ConfigError("one transform per angle column is required");
  }
  for (int c : angle_columns) {
    if (c < 0) throw ConfigError("column positions are zero-based, got " + std::to_string(c));
  }
  for (int c : covariate_columns) {
    if (c < 0) throw ConfigError("column positions are zero-based, got " + std::to_string(c));
  }
}

DatasetSpec dataset_preset(const std::string& name) {
  DatasetSpec spec;
  spec.angle_columns = {0, 1};
  const AngleTransform deg{AngleUnit::kDegrees, 0.0, 1.0};
  if (name == "B15" || name == "B19") {
    spec.transforms = {deg, deg};
  } else if (name == "B23") {
    spec.transforms = {AngleTransform{AngleUnit::kDegrees, 90.0, 1.0}, deg};
    spec.covariate_columns = {2, 3};
  } else {
    throw ConfigError("unknown dataset preset '" + name + "'");
  }
  return spec;
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool pending = false;
  const bool has_comma = line.find(',') != std::string::npos;
  for (char ch : line) {
    const bool sep = has_comma ? ch == ',' : (ch == ' ' || ch == '\t');
    if (sep) {
      if (has_comma || pending) out.push_back(cur);
      cur.clear();
      pending = false;
    } else if (!(has_comma && (ch == ' ' || ch == '\t'))) {
      cur.push_back(ch);
      pending = true;
    }
  }
  if (has_comma || pending) out.push_back(cur);
  return out;
}

bool parse_number(const std::string& s, double& v) {
  if (s.empty()) return false;
  const char* b = s.data();
  const char* e = b + s.size();
  if (*b == '+') ++b;
  auto res = std::from_chars(b, e, v);
  return res.ec == std::errc() && res.ptr == e && std::isfinite(v);
}

}  // namespace

DataTable load_dataset(const DatasetSpec& spec) {
  spec.validate();
  std::ifstream in(spec.path);
  if (!in) throw IngestionError("cannot open dataset " + spec.path.string());

  const int k = spec.k();
  std::vector<int> needed = spec.angle_columns;
  needed.insert(needed.end(), spec.covariate_columns.begin(),
                spec.covariate_columns.end());
  const int max_col = *std::max_element(needed.begin(), needed.end());

  DataTable table;
  table.obs.k = k;
  table.obs.p = static_cast<int>(spec.covariate_columns.size());
  std::vector<std::size_t> malformed, off_support;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    const auto cells = tokenize(line);
    if (first) {
      first = false;
      bool numeric = true;
      double tmp;
      for (const auto& c : cells) numeric = numeric && parse_number(c, tmp);
      const bool is_header = spec.header.value_or(!numeric);
      if (is_header) continue;
    }
    ++table.rows_read;
    if (static_cast<int>(cells.size()) <= max_col) {
      malformed.push_back(lineno);
      continue;
    }
    std::vector<double> angles;
    std::vector<double> covs;
    bool ok = true;
    for (std::size_t a = 0; a < spec.angle_columns.size() && ok; ++a) {
      double v;
      ok = parse_number(cells[static_cast<std::size_t>(spec.angle_columns[a])], v);
      if (ok) {
        angles.push_back(spec.transforms.empty() ? v : spec.transforms[a].apply(v));
      }
    }
    for (int c : spec.covariate_columns) {
      if (!ok) break;
      double v;
      ok = parse_number(cells[static_cast<std::size_t>(c)], v);
      if (ok) covs.push_back(v);
    }
    if (!ok) {
      malformed.push_back(lineno);
      continue;
    }
    bool inside = true;
    for (std::size_t a = 0; a < angles.size(); ++a) {
      const bool periodic = a + 1 == angles.size();
      if (periodic) {
        angles[a] = wrap_two_pi(angles[a]);
      } else {
        if (angles[a] < 0.0 && angles[a] > -1e-12) angles[a] = 0.0;
        if (angles[a] > kPi && angles[a] < kPi + 1e-12) angles[a] = kPi;
        inside = inside && angles[a] >= 0.0 && angles[a] <= kPi;
      }
    }
    if (!inside) {
      off_support.push_back(lineno);
      continue;
    }
    table.obs.theta.insert(table.obs.theta.end(), angles.begin(), angles.end());
    table.obs.z.insert(table.obs.z.end(), covs.begin(), covs.end());
    table.source_lines.push_back(lineno);
  }

  auto list = [](const std::vector<std::size_t>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size() && i < 20; ++i) os << (i ? ", " : "") << v[i];
    if (v.size() > 20) os << ", ... (" << v.size() << " total)";
    return os.str();
  };
  if (!malformed.empty()) {
    throw IngestionError(spec.path.string() +
                         ": malformed or missing values on line(s) " +
                         list(malformed));
  }
  if (!off_support.empty()) {
    throw IngestionError(spec.path.string() +
                         ": colatitude outside [0, pi] after transform on "
                         "line(s) " + list(off_support));
  }
  if (table.obs.n() == 0) {
    throw IngestionError(spec.path.string() + ": no observations");
  }
  for (std::size_t h = 0; h < static_cast<std::size_t>(table.obs.p); ++h) {
    bool nonzero = false;
    for (std::size_t i = 0; i < table.obs.n(); ++i) {
      nonzero = nonzero || table.obs.covariates(i)[h] != 0.0;
    }
    if (!nonzero) {
      throw ConfigError("covariate column " +
                        std::to_string(spec.covariate_columns[h]) +
                        " is identically zero");
    }
  }
  return table;
}

void write_dataset(const std::filesystem::path& path, const Observations& obs) {
  csv::Table t;
  for (int l = 1; l < obs.k; ++l) t.header.push_back("theta" + std::to_string(l));
  for (int h = 1; h <= obs.p; ++h) t.header.push_back("z" + std::to_string(h));
  for (std::size_t i = 0; i < obs.n(); ++i) {
    std::vector<double> row(obs.angles(i).begin(), obs.angles(i).end());
    if (obs.p > 0) {
      const auto z = obs.covariates(i);
      row.insert(row.end(), z.begin(), z.end());
    }
    t.rows.push_back(std::move(row));
  }
  csv::write_table(path, t);
}

namespace {

void append_angles(Observations& obs, std::span<const double> x) {
  const PolarPoint p = cartesian_to_polar(CartesianPoint{{x.begin(), x.end()}});
  obs.theta.insert(obs.theta.end(), p.angles.theta.begin(),
                   p.angles.theta.end());
}

}  // namespace

Observations synthesize_projected_normal(std::span<const double> mu,
                                         std::size_t n, Rng& rng) {
  Observations obs;
  obs.k = static_cast<int>(mu.size());
  if (obs.k < 2) throw DomainError("projected normal needs k >= 2");
  std::vector<double> x(mu.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < x.size(); ++l) x[l] = mu[l] + rng.standard_normal();
    append_angles(obs, x);
  }
  return obs;
}

Observations synthesize_group_regression(
    int k, const std::vector<double>& gamma,
    const std::vector<std::size_t>& group_sizes, Rng& rng) {
  const std::size_t p = group_sizes.size();
  if (k < 2 || p == 0 || gamma.size() != static_cast<std::size_t>(k) * p) {
    throw DomainError("Gamma must be k x p with k >= 2 and p >= 1");
  }
  Observations obs;
  obs.k = k;
  obs.p = static_cast<int>(p);
  std::vector<double> x(static_cast<std::size_t>(k));
  for (std::size_t g = 0; g < p; ++g) {
    for (std::size_t i = 0; i < group_sizes[g]; ++i) {
      for (std::size_t l = 0; l < x.size(); ++l) {
        x[l] = gamma[l * p + g] + rng.standard_normal();
      }
      append_angles(obs, x);
      for (std::size_t h = 0; h < p; ++h) obs.z.push_back(h == g ? 1.0 : 0.0);
    }
  }
  return obs;
}

Observations synthesize_projected_mixture(
    const std::vector<std::vector<double>>& means, std::size_t n, Rng& rng) {
  if (means.empty()) throw DomainError("mixture needs at least one mean");
  Observations obs;
  obs.k = static_cast<int>(means.front().size());
  if (obs.k < 2) throw DomainError("projected normal needs k >= 2");
  std::vector<double> x(means.front().size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& mu = means[i % means.size()];
    for (std::size_t l = 0; l < x.size(); ++l) x[l] = mu[l] + rng.standard_normal();
    append_angles(obs, x);
  }
  return obs;
}

}  // namespace ppt
