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

#include "ppt/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ppt/csv.hpp"
#include "ppt/error.hpp"
#include "ppt/moments.hpp"
#include "ppt/projected_density.hpp"

namespace ppt {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kPriorSimulation:
      return "prior-sim";
    case ExperimentKind::kFit:
      return "fit";
    case ExperimentKind::kFitRegression:
      return "fit-regression";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(std::string_view text) {
  if (text == "prior-sim" || text == "simulate-prior") {
    return ExperimentKind::kPriorSimulation;
  }
  if (text == "fit") return ExperimentKind::kFit;
  if (text == "fit-regression") return ExperimentKind::kFitRegression;
  throw ConfigError("unknown experiment kind '" + std::string(text) + "'");
}

void RunManifest::validate() const {
  try {
    shape.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  hyper.validate();
  chain.validate();
  if (shape.k != 2 && shape.k != 3) {
    throw ConfigError("experiments support k = 2 (circular) or k = 3 (spherical)");
  }
  if (output.grid_resolution < 16) {
    throw ConfigError("output.grid_resolution must be >= 16");
  }
  if (output.grid_stride < 1) throw ConfigError("output.grid_stride must be >= 1");
  if (kind == ExperimentKind::kPriorSimulation) {
    if (prior_sim.paths < 1) throw ConfigError("prior_simulation.paths must be >= 1");
    if (prior_sim.mus.empty()) throw ConfigError("prior_simulation.mu is empty");
    for (const auto& mu : prior_sim.mus) {
      if (static_cast<int>(mu.size()) != shape.k) {
        throw ConfigError("every prior_simulation.mu entry needs k values");
      }
    }
  } else {
    if (!dataset) throw ConfigError("a dataset is required for " + to_string(kind));
    dataset->validate();
    if (dataset->k() != shape.k) {
      throw ConfigError("dataset has " + std::to_string(dataset->k() - 1) +
                        " angle columns but tree.k = " + std::to_string(shape.k));
    }
    const bool covs = !dataset->covariate_columns.empty();
    if (kind == ExperimentKind::kFit && covs) {
      throw ConfigError("covariates given: use fit-regression");
    }
    if (kind == ExperimentKind::kFitRegression && !covs) {
      throw ConfigError("fit-regression needs dataset.covariate_columns");
    }
  }
}

namespace {

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_opt(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

AngleUnit parse_unit(const std::string& s) {
  if (s == "degrees" || s == "deg") return AngleUnit::kDegrees;
  if (s == "radians" || s == "rad") return AngleUnit::kRadians;
  throw ConfigError("unknown angle unit '" + s + "'");
}

json dataset_to_json(const DatasetSpec& d, const std::string& preset) {
  json j;
  j["path"] = d.path.string();
  if (!preset.empty()) j["preset"] = preset;
  j["angle_columns"] = d.angle_columns;
  j["covariate_columns"] = d.covariate_columns;
  j["header"] = d.header ? json(*d.header) : json(nullptr);
  json ts = json::array();
  for (const auto& t : d.transforms) {
    ts.push_back({{"unit", t.unit == AngleUnit::kDegrees ? "degrees" : "radians"},
                  {"offset", t.offset},
                  {"scale", t.scale}});
  }
  j["transforms"] = ts;
  return j;
}

json manifest_json(const RunManifest& m) {
  json j;
  j["kind"] = to_string(m.kind);
  j["output_dir"] = m.output_dir.string();
  j["tree"] = {{"k", m.shape.k},
               {"depth", m.shape.depth},
               {"alpha", m.shape.alpha},
               {"delta", m.shape.delta}};
  j["prior"] = {{"a_alpha", m.hyper.a_alpha},
                {"b_alpha", m.hyper.b_alpha},
                {"mu_0", m.hyper.mu_0},
                {"tau_mu", m.hyper.tau_mu},
                {"tau_gamma", m.hyper.tau_gamma}};
  j["chain"] = {{"iterations", m.chain.iterations},
                {"burn_in", m.chain.burn_in},
                {"thin", m.chain.thin},
                {"kappa_r", m.chain.kappa_r},
                {"kappa_alpha", m.chain.kappa_alpha},
                {"kappa_gamma", m.chain.kappa_gamma},
                {"seed", m.chain.seed},
                {"quad_nodes", m.chain.quad_nodes}};
  if (m.dataset) j["dataset"] = dataset_to_json(*m.dataset, m.dataset_preset);
  j["prior_simulation"] = {{"paths", m.prior_sim.paths},
                           {"mu", m.prior_sim.mus},
                           {"joint_paths", m.prior_sim.joint_paths}};
  j["output"] = {{"grid_resolution", m.output.grid_resolution},
                 {"grid_stride", m.output.grid_stride},
                 {"rotate_periodic", m.output.rotate_periodic},
                 {"threads", m.output.threads}};
  return j;
}

RunManifest manifest_from(const json& j) {
  check_keys(j, "manifest",
             {"kind", "output_dir", "tree", "prior", "chain", "dataset",
              "prior_simulation", "output", "version"});
  RunManifest m;
  if (j.contains("kind")) m.kind = parse_experiment_kind(j.at("kind").get<std::string>());
  if (j.contains("output_dir")) m.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("tree")) {
    const json& t = j.at("tree");
    check_keys(t, "tree", {"k", "depth", "alpha", "delta"});
    read_opt(t, "k", m.shape.k);
    read_opt(t, "depth", m.shape.depth);
    read_opt(t, "alpha", m.shape.alpha);
    read_opt(t, "delta", m.shape.delta);
  }
  if (j.contains("prior")) {
    const json& p = j.at("prior");
    check_keys(p, "prior", {"a_alpha", "b_alpha", "mu_0", "tau_mu", "tau_gamma"});
    read_opt(p, "a_alpha", m.hyper.a_alpha);
    read_opt(p, "b_alpha", m.hyper.b_alpha);
    read_opt(p, "mu_0", m.hyper.mu_0);
    read_opt(p, "tau_mu", m.hyper.tau_mu);
    read_opt(p, "tau_gamma", m.hyper.tau_gamma);
  }
  if (m.kind == ExperimentKind::kFitRegression) {
    m.chain.kappa_r = 3.0;
    m.chain.kappa_alpha = 15.0;
    m.chain.iterations = 20000;
    m.chain.burn_in = 10000;
    m.chain.thin = 10;
  }
  if (j.contains("chain")) {
    const json& c = j.at("chain");
    check_keys(c, "chain",
               {"iterations", "burn_in", "thin", "kappa_r", "kappa_alpha",
                "kappa_gamma", "seed", "quad_nodes"});
    read_opt(c, "iterations", m.chain.iterations);
    read_opt(c, "burn_in", m.chain.burn_in);
    read_opt(c, "thin", m.chain.thin);
    read_opt(c, "kappa_r", m.chain.kappa_r);
    read_opt(c, "kappa_alpha", m.chain.kappa_alpha);
    read_opt(c, "kappa_gamma", m.chain.kappa_gamma);
    read_opt(c, "seed", m.chain.seed);
    read_opt(c, "quad_nodes", m.chain.quad_nodes);
  }
  if (j.contains("dataset") && !j.at("dataset").is_null()) {
    const json& d = j.at("dataset");
    check_keys(d, "dataset",
               {"path", "preset", "angle_columns", "covariate_columns", "header",
                "transforms"});
    DatasetSpec spec;
    if (d.contains("preset")) {
      m.dataset_preset = d.at("preset").get<std::string>();
      spec = dataset_preset(m.dataset_preset);
    } else {
      spec.angle_columns.assign(static_cast<std::size_t>(m.shape.k - 1), 0);
      for (int c = 0; c < m.shape.k - 1; ++c) spec.angle_columns[static_cast<std::size_t>(c)] = c;
    }
    if (!d.contains("path")) throw ConfigError("dataset.path is required");
    spec.path = d.at("path").get<std::string>();
    read_opt(d, "angle_columns", spec.angle_columns);
    read_opt(d, "covariate_columns", spec.covariate_columns);
    if (d.contains("header") && !d.at("header").is_null()) {
      spec.header = d.at("header").get<bool>();
    }
    if (d.contains("transforms")) {
      spec.transforms.clear();
      for (const json& t : d.at("transforms")) {
        check_keys(t, "dataset.transforms[]", {"unit", "offset", "scale"});
        AngleTransform tr;
        if (t.contains("unit")) tr.unit = parse_unit(t.at("unit").get<std::string>());
        read_opt(t, "offset", tr.offset);
        read_opt(t, "scale", tr.scale);
        spec.transforms.push_back(tr);
      }
    }
    m.dataset = spec;
  }
  if (j.contains("prior_simulation")) {
    const json& s = j.at("prior_simulation");
    check_keys(s, "prior_simulation", {"paths", "mu", "joint_paths"});
    read_opt(s, "paths", m.prior_sim.paths);
    read_opt(s, "mu", m.prior_sim.mus);
    read_opt(s, "joint_paths", m.prior_sim.joint_paths);
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    check_keys(o, "output", {"grid_resolution", "grid_stride", "rotate_periodic", "threads"});
    read_opt(o, "grid_resolution", m.output.grid_resolution);
    read_opt(o, "grid_stride", m.output.grid_stride);
    read_opt(o, "rotate_periodic", m.output.rotate_periodic);
    read_opt(o, "threads", m.output.threads);
  }
  m.validate();
  return m;
}

}  // namespace

RunManifest parse_manifest(std::string_view json_text) {
  try {
    return manifest_from(json::parse(json_text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
}

RunManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

std::string manifest_to_json(const RunManifest& manifest) {
  return manifest_json(manifest).dump(2);
}

void apply_override(RunManifest& manifest, const std::string& dotted_key,
                    const std::string& value) {
  json j = manifest_json(manifest);
  if (!manifest.dataset) j.erase("dataset");
  std::string pointer;
  std::stringstream ss(dotted_key);
  std::string part;
  while (std::getline(ss, part, '.')) pointer += "/" + part;
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::exception&) {
    parsed = value;
  }
  try {
    j[json::json_pointer(pointer)] = parsed;
    manifest = manifest_from(j);
  } catch (const json::exception& e) {
    throw ConfigError("override " + dotted_key + "=" + value + ": " + e.what());
  }
}

namespace {

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

json interval(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(std::max<std::size_t>(1, v.size()));
  return {{"mean", mean}, {"lower", quantile(v, 0.025)}, {"upper", quantile(v, 0.975)}};
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

std::string write_summary(const fs::path& dir, const json& summary) {
  const std::string text = summary.dump(2) + "\n";
  write_text(dir / "summary.json", text);
  return text;
}

void write_manifest_echo(const RunManifest& m, const fs::path& dir) {
  json j = manifest_json(m);
  j["version"] = PPT_VERSION;
  write_text(dir / "manifest.json", j.dump(2) + "\n");
}

struct MomentRow {
  std::vector<double> nu;
  std::vector<double> conc;
  double rho = std::nan("");
};

std::vector<std::string> moment_header(int k, const char* first) {
  std::vector<std::string> h{first};
  for (int l = 1; l < k; ++l) h.push_back("nu" + std::to_string(l));
  for (int l = 1; l < k; ++l) h.push_back("conc" + std::to_string(l));
  if (k == 3) h.emplace_back("rho");
  return h;
}

std::vector<double> moment_cells(double id, const MomentRow& m) {
  std::vector<double> row{id};
  row.insert(row.end(), m.nu.begin(), m.nu.end());
  row.insert(row.end(), m.conc.begin(), m.conc.end());
  if (!std::isnan(m.rho) || m.nu.size() == 2) row.push_back(m.rho);
  return row;
}

// Marginals and moment summaries of one full-support joint grid.
struct GridSummary {
  std::vector<DensityGrid> marginals;
  MomentRow moments;
};

GridSummary summarize_grid(const DensityGrid& joint) {
  GridSummary s;
  for (int l = 1; l < joint.k; ++l) {
    s.marginals.push_back(joint.axes.size() == 1 ? joint : marginal_density(joint, l));
    const DensityGrid& mg = s.marginals.back();
    DensityGrid normalized = mg;
    const double mass = mg.mass();
    if (mass > 0.0) {
      for (double& v : normalized.values) v /= mass;
    }
    const auto d = mean_direction(trig_moment_from_grid(normalized, 1));
    s.moments.nu.push_back(d.nu);
    s.moments.conc.push_back(d.rho_conc);
  }
  if (joint.k == 3) {
    try {
      s.moments.rho = circular_correlation_from_grid(joint);
    } catch (const NumericalError&) {
      s.moments.rho = std::nan("");
    }
  }
  return s;
}

void write_joint_outputs(const fs::path& dir, const std::string& stem,
                         const DensityGrid& joint, bool rotate) {
  write_grid_csv(dir / (stem + ".csv"), joint, rotate);
  if (joint.k == 3) {
    write_curve_csv(dir / (stem + "_curve_theta1_given_theta2.csv"),
                    regression_curve(joint, 1, 2), "theta2", "mean_theta1");
    write_curve_csv(dir / (stem + "_curve_theta2_given_theta1.csv"),
                    regression_curve(joint, 2, 1), "theta1", "mean_theta2");
  }
}

// Pointwise posterior mean and 95% band of marginal l across grids.
void write_marginal_band(const fs::path& path, const GridAxis& axis,
                         const std::vector<std::vector<double>>& draws,
                         bool rotate) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  csv::write_row(out, std::vector<std::string>{axis.name(), "mean", "lower", "upper"});
  std::vector<double> column(draws.size());
  for (int i = 0; i < axis.count; ++i) {
    double mean = 0.0;
    for (std::size_t d = 0; d < draws.size(); ++d) {
      column[d] = draws[d][static_cast<std::size_t>(i)];
      mean += column[d];
    }
    mean /= static_cast<double>(draws.size());
    double th = axis.mid(i);
    if (rotate && axis.periodic && th >= kPi) th -= kTwoPi;
    csv::write_row(out, std::vector<double>{th, mean, quantile(column, 0.025),
                                            quantile(column, 0.975)});
  }
}

double wall_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

json acceptance_json(const AcceptanceLog& log, bool regression) {
  json j = {{"r", log.r.rate()}, {"alpha", log.alpha.rate()}};
  if (regression) j["gamma"] = log.gamma.rate();
  return j;
}

void write_trace(const fs::path& path, const std::vector<RetainedState>& states,
                 int k, int p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  std::vector<std::string> header{"iteration", "alpha"};
  if (p == 0) {
    for (int l = 1; l <= k; ++l) header.push_back("mu" + std::to_string(l));
  } else {
    for (int l = 1; l <= k; ++l) {
      for (int h = 1; h <= p; ++h) {
        header.push_back("gamma_" + std::to_string(l) + "_" + std::to_string(h));
      }
    }
  }
  header.insert(header.end(), {"acc_r", "acc_alpha"});
  if (p > 0) header.emplace_back("acc_gamma");
  csv::write_row(out, header);
  for (const auto& rs : states) {
    std::vector<double> row{static_cast<double>(rs.iteration), rs.state.alpha};
    const auto& v = p == 0 ? rs.state.mu : rs.state.gamma;
    row.insert(row.end(), v.begin(), v.end());
    row.push_back(rs.acceptance.r.rate());
    row.push_back(rs.acceptance.alpha.rate());
    if (p > 0) row.push_back(rs.acceptance.gamma.rate());
    csv::write_row(out, row);
  }
}

void write_likelihood(const fs::path& path, const ChainResult& res) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  std::vector<std::string> header{"iteration"};
  for (std::size_t i = 1; i <= res.n_obs; ++i) header.push_back("obs" + std::to_string(i));
  csv::write_row(out, header);
  for (std::size_t t = 0; t < res.retained.size(); ++t) {
    std::vector<double> row{static_cast<double>(res.retained[t].iteration)};
    row.insert(row.end(), res.likelihood.begin() + static_cast<std::ptrdiff_t>(t * res.n_obs),
               res.likelihood.begin() + static_cast<std::ptrdiff_t>((t + 1) * res.n_obs));
    csv::write_row(out, row);
  }
}

void write_cpo(const fs::path& path, const LpmlResult& res) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  csv::write_row(out, std::vector<std::string>{"observation", "cpo", "log_cpo"});
  for (std::size_t i = 0; i < res.cpo.size(); ++i) {
    csv::write_row(out, std::vector<double>{static_cast<double>(i + 1), res.cpo[i],
                                            res.log_cpo[i]});
  }
}

json lpml_json(const LpmlResult& res) {
  json j;
  j["lpml"] = std::isfinite(res.lpml) ? json(res.lpml) : json("-inf");
  j["floored_values"] = res.floored;
  std::vector<std::size_t> zero;
  for (auto i : res.zero_observations) zero.push_back(i + 1);
  j["zero_likelihood_observations"] = zero;
  return j;
}

Observations load_observations(const RunManifest& m) {
  DataTable table = load_dataset(*m.dataset);
  return std::move(table.obs);
}

// Distinct covariate rows in order of first appearance.
std::vector<std::vector<double>> covariate_profiles(const Observations& obs) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < obs.n(); ++i) {
    std::vector<double> z(obs.covariates(i).begin(), obs.covariates(i).end());
    if (std::find(out.begin(), out.end(), z) == out.end()) out.push_back(z);
  }
  return out;
}

void check_covariates(const Observations& obs) {
  for (int h = 0; h < obs.p; ++h) {
    bool nonzero = false;
    for (std::size_t i = 0; i < obs.n(); ++i) {
      nonzero = nonzero || obs.covariates(i)[static_cast<std::size_t>(h)] != 0.0;
    }
    if (!nonzero) {
      throw ConfigError("covariate " + std::to_string(h + 1) +
                        " is identically zero (rank-deficient design)");
    }
  }
}

// Posterior grid products for the no-covariate model or one covariate
// profile of the regression model.
struct PosteriorGrids {
  DensityGrid mean_joint;
  std::vector<std::vector<std::vector<double>>> marginal_draws;  // [l][draw][cell]
  std::vector<std::pair<int, MomentRow>> moments;
};

PosteriorGrids posterior_grids(const RunManifest& m, const Observations& data,
                               const std::vector<RetainedState>& states,
                               const std::vector<double>* profile) {
  PosteriorGrids out;
  out.marginal_draws.resize(static_cast<std::size_t>(m.shape.k - 1));
  std::size_t used = 0;
  for (std::size_t s = 0; s < states.size();
       s += static_cast<std::size_t>(m.output.grid_stride)) {
    const McmcState& st = states[s].state;
    const TreeModel model = model_of(m.shape, st);
    RegressionContext reg;
    if (profile) reg = RegressionContext{st.gamma, *profile, true};
    const QuadratureRule quad = state_quadrature(data, st, m.chain.quad_nodes);
    const DensityGrid joint =
        joint_grid(model, quad, m.output.grid_resolution, reg, m.output.threads);
    if (used == 0) {
      out.mean_joint = joint;
    } else {
      for (std::size_t c = 0; c < joint.values.size(); ++c) {
        out.mean_joint.values[c] += joint.values[c];
      }
    }
    ++used;
    const GridSummary gs = summarize_grid(joint);
    for (std::size_t l = 0; l < gs.marginals.size(); ++l) {
      out.marginal_draws[l].push_back(gs.marginals[l].values);
    }
    out.moments.emplace_back(states[s].iteration, gs.moments);
  }
  if (used == 0) throw NumericalError("no retained states to summarise");
  for (double& v : out.mean_joint.values) v /= static_cast<double>(used);
  return out;
}

json write_posterior_grids(const RunManifest& m, const fs::path& dir,
                           const std::string& prefix, const PosteriorGrids& pg) {
  const bool rotate = m.output.rotate_periodic;
  const int k = m.shape.k;
  for (int l = 1; l < k; ++l) {
    write_marginal_band(dir / (prefix + "marginal_theta" + std::to_string(l) + ".csv"),
                        pg.mean_joint.axis_for(l),
                        pg.marginal_draws[static_cast<std::size_t>(l - 1)], rotate);
  }
  write_joint_outputs(dir, prefix + "joint_mean", pg.mean_joint, rotate);
  {
    std::ofstream out(dir / (prefix + "moments.csv"), std::ios::binary);
    if (!out) throw IoError("cannot write moments");
    csv::write_row(out, moment_header(k, "iteration"));
    for (const auto& [it, row] : pg.moments) csv::write_row(out, moment_cells(it, row));
  }
  json summary;
  const GridSummary mean_summary = summarize_grid(pg.mean_joint);
  for (int l = 1; l < k; ++l) {
    std::vector<double> conc;
    for (const auto& [it, row] : pg.moments) conc.push_back(row.conc[static_cast<std::size_t>(l - 1)]);
    const auto& mg = mean_summary.marginals[static_cast<std::size_t>(l - 1)];
    double mean_theta = 0.0, mass = 0.0;
    for (int i = 0; i < mg.axes[0].count; ++i) {
      mean_theta += mg.values[static_cast<std::size_t>(i)] * mg.axes[0].mid(i);
      mass += mg.values[static_cast<std::size_t>(i)];
    }
    json entry = {
        {"nu_of_mean_density", mean_summary.moments.nu[static_cast<std::size_t>(l - 1)]},
        {"conc", interval(conc)}};
    if (!mg.axes[0].periodic) {
      entry["mean_of_mean_density"] = mass > 0 ? mean_theta / mass : 0.0;
    }
    summary["theta" + std::to_string(l)] = entry;
  }
  if (k == 3) {
    std::vector<double> rho;
    for (const auto& [it, row] : pg.moments) {
      if (!std::isnan(row.rho)) rho.push_back(row.rho);
    }
    double neg = 0.0, pos = 0.0;
    for (double r : rho) {
      neg += r < 0.0;
      pos += r > 0.0;
    }
    const double n = static_cast<double>(std::max<std::size_t>(1, rho.size()));
    summary["rho"] = interval(rho);
    summary["rho"]["prob_negative"] = neg / n;
    summary["rho"]["prob_positive"] = pos / n;
  }
  return summary;
}

}  // namespace

void write_states_csv(const fs::path& path, const std::vector<RetainedState>& states) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  if (states.empty()) {
    csv::write_row(out, std::vector<std::string>{"iteration"});
    return;
  }
  const McmcState& s0 = states.front().state;
  std::vector<std::string> header{"iteration", "alpha"};
  for (std::size_t l = 1; l <= s0.mu.size(); ++l) header.push_back("mu" + std::to_string(l));
  for (std::size_t e = 0; e < s0.gamma.size(); ++e) header.push_back("gamma" + std::to_string(e));
  for (int m = 1; m <= s0.probs.depth(); ++m) {
    for (std::size_t f = 0; f < s0.probs.level(m).size(); ++f) {
      header.push_back("y" + std::to_string(m) + "_" + std::to_string(f));
    }
  }
  csv::write_row(out, header);
  for (const auto& rs : states) {
    std::vector<double> row{static_cast<double>(rs.iteration), rs.state.alpha};
    row.insert(row.end(), rs.state.mu.begin(), rs.state.mu.end());
    row.insert(row.end(), rs.state.gamma.begin(), rs.state.gamma.end());
    for (int m = 1; m <= rs.state.probs.depth(); ++m) {
      const auto lv = rs.state.probs.level(m);
      row.insert(row.end(), lv.begin(), lv.end());
    }
    csv::write_row(out, row);
  }
}

std::vector<RetainedState> read_states_csv(const fs::path& path,
                                           const TreeShape& shape, int p) {
  const csv::Table t = csv::read_table(path);
  const std::size_t k = static_cast<std::size_t>(shape.k);
  const std::size_t g = k * static_cast<std::size_t>(p);
  const BranchingProbabilities layout(shape, p > 0);
  const std::size_t expected = 2 + k + g + layout.total_size();
  if (t.header.size() != expected) {
    throw IngestionError(path.string() + ": expected " + std::to_string(expected) +
                         " columns for this tree, found " +
                         std::to_string(t.header.size()));
  }
  std::vector<RetainedState> out;
  for (const auto& row : t.rows) {
    RetainedState rs{static_cast<int>(row[0]), McmcState{}, AcceptanceLog{}};
    rs.state.alpha = row[1];
    rs.state.mu.assign(row.begin() + 2, row.begin() + 2 + static_cast<std::ptrdiff_t>(k));
    rs.state.gamma.assign(row.begin() + 2 + static_cast<std::ptrdiff_t>(k),
                          row.begin() + 2 + static_cast<std::ptrdiff_t>(k + g));
    rs.state.regression = p > 0;
    rs.state.probs = layout;
    std::size_t pos = 2 + k + g;
    for (int m = 1; m <= shape.depth; ++m) {
      for (double& y : rs.state.probs.level(m)) y = row[pos++];
    }
    out.push_back(std::move(rs));
  }
  return out;
}

std::string run_prior_simulation(const RunManifest& m) {
  m.validate();
  const auto start = std::chrono::steady_clock::now();
  ensure_dir(m.output_dir);
  write_manifest_echo(m, m.output_dir);
  Rng rng(m.chain.seed);
  const int k = m.shape.k;
  const bool rotate = m.output.rotate_periodic;
  json settings = json::array();
  for (std::size_t s = 0; s < m.prior_sim.mus.size(); ++s) {
    const auto& mu = m.prior_sim.mus[s];
    const fs::path dir = m.output_dir / ("mu_" + std::to_string(s + 1));
    ensure_dir(dir);
    const QuadratureRule quad = QuadratureRule::for_center(mu, m.chain.quad_nodes);
    std::vector<std::vector<std::vector<double>>> marginals(static_cast<std::size_t>(k - 1));
    std::vector<MomentRow> moments;
    std::vector<GridAxis> axes;
    for (int path = 1; path <= m.prior_sim.paths; ++path) {
      const TreeModel model{m.shape, sample_prior(m.shape, rng, false),
                            CenteringMeasure{mu}};
      const DensityGrid joint =
          joint_grid(model, quad, m.output.grid_resolution, {}, m.output.threads);
      if (path <= m.prior_sim.joint_paths) {
        write_joint_outputs(dir, "joint_path_" + std::to_string(path), joint, rotate);
      }
      const GridSummary gs = summarize_grid(joint);
      if (axes.empty()) {
        for (const auto& mg : gs.marginals) axes.push_back(mg.axes[0]);
      }
      for (std::size_t l = 0; l < gs.marginals.size(); ++l) {
        marginals[l].push_back(gs.marginals[l].values);
      }
      moments.push_back(gs.moments);
    }
    json per_coord = json::array();
    for (std::size_t l = 0; l < marginals.size(); ++l) {
      const GridAxis& ax = axes[l];
      std::ofstream out(dir / ("marginal_theta" + std::to_string(l + 1) + ".csv"),
                        std::ios::binary);
      std::vector<std::string> header{ax.name()};
      for (int p = 1; p <= m.prior_sim.paths; ++p) header.push_back("path_" + std::to_string(p));
      header.emplace_back("mean");
      csv::write_row(out, header);
      int argmax = 0;
      double best = -1.0;
      for (int i = 0; i < ax.count; ++i) {
        double th = ax.mid(i);
        if (rotate && ax.periodic && th >= kPi) th -= kTwoPi;
        std::vector<double> row{th};
        double mean = 0.0;
        for (const auto& draw : marginals[l]) {
          row.push_back(draw[static_cast<std::size_t>(i)]);
          mean += draw[static_cast<std::size_t>(i)];
        }
        mean /= static_cast<double>(marginals[l].size());
        row.push_back(mean);
        if (mean > best) {
          best = mean;
          argmax = i;
        }
        csv::write_row(out, row);
      }
      per_coord.push_back({{"coord", l + 1}, {"ensemble_mean_mode", ax.mid(argmax)}});
    }
    {
      std::ofstream out(dir / "moments.csv", std::ios::binary);
      csv::write_row(out, moment_header(k, "path"));
      for (std::size_t p = 0; p < moments.size(); ++p) {
        csv::write_row(out, moment_cells(static_cast<double>(p + 1), moments[p]));
      }
    }
    json entry = {{"mu", mu}, {"directory", dir.filename().string()}, {"marginals", per_coord}};
    if (k == 3) {
      std::vector<double> rho;
      for (const auto& mr : moments) {
        if (!std::isnan(mr.rho)) rho.push_back(mr.rho);
      }
      entry["rho"] = {{"q25", quantile(rho, 0.25)},
                      {"median", quantile(rho, 0.5)},
                      {"q75", quantile(rho, 0.75)},
                      {"iqr", quantile(rho, 0.75) - quantile(rho, 0.25)}};
    }
    settings.push_back(entry);
  }
  json summary = {{"kind", "prior-sim"},
                  {"paths", m.prior_sim.paths},
                  {"settings", settings},
                  {"wall_time_seconds", wall_seconds(start)}};
  return write_summary(m.output_dir, summary);
}

std::string run_fit(const RunManifest& m, const RunOptions& opts) {
  m.validate();
  if (m.kind != ExperimentKind::kFit) throw ConfigError("manifest kind is not fit");
  const auto start = std::chrono::steady_clock::now();
  const Observations data = load_observations(m);
  ensure_dir(m.output_dir);
  write_manifest_echo(m, m.output_dir);
  write_dataset(m.output_dir / "data_radians.csv", data);

  const ChainResult res = run_chain(data, m.chain, m.hyper, m.shape, opts.progress);
  write_trace(m.output_dir / "trace.csv", res.retained, m.shape.k, 0);
  write_states_csv(m.output_dir / "states.csv", res.retained);
  write_likelihood(m.output_dir / "likelihood.csv", res);
  const LpmlResult score = lpml(res.likelihood, res.n_obs);
  write_cpo(m.output_dir / "cpo.csv", score);

  const PosteriorGrids pg = posterior_grids(m, data, res.retained, nullptr);
  json summary = write_posterior_grids(m, m.output_dir, "", pg);

  std::vector<double> alpha;
  std::vector<std::vector<double>> mu(static_cast<std::size_t>(m.shape.k));
  for (const auto& rs : res.retained) {
    alpha.push_back(rs.state.alpha);
    for (std::size_t l = 0; l < mu.size(); ++l) mu[l].push_back(rs.state.mu[l]);
  }
  summary["kind"] = "fit";
  summary["n"] = data.n();
  summary["retained"] = res.retained.size();
  summary["lpml"] = lpml_json(score);
  summary["alpha"] = interval(alpha);
  for (std::size_t l = 0; l < mu.size(); ++l) {
    summary["mu" + std::to_string(l + 1)] = interval(mu[l]);
  }
  summary["acceptance"] = acceptance_json(res.acceptance, false);
  summary["wall_time_seconds"] = wall_seconds(start);
  return write_summary(m.output_dir, summary);
}

std::string run_fit_regression(const RunManifest& m, const RunOptions& opts) {
  m.validate();
  if (m.kind != ExperimentKind::kFitRegression) {
    throw ConfigError("manifest kind is not fit-regression");
  }
  const auto start = std::chrono::steady_clock::now();
  const Observations data = load_observations(m);
  check_covariates(data);
  ensure_dir(m.output_dir);
  write_manifest_echo(m, m.output_dir);
  write_dataset(m.output_dir / "data_radians.csv", data);

  const ChainResult res = run_chain(data, m.chain, m.hyper, m.shape, opts.progress);
  const int k = m.shape.k, p = data.p;
  write_trace(m.output_dir / "trace.csv", res.retained, k, p);
  write_states_csv(m.output_dir / "states.csv", res.retained);
  write_likelihood(m.output_dir / "likelihood.csv", res);
  const LpmlResult score = lpml(res.likelihood, res.n_obs);
  write_cpo(m.output_dir / "cpo.csv", score);

  std::vector<std::vector<double>> gamma(static_cast<std::size_t>(k * p));
  std::vector<double> alpha;
  {
    std::ofstream out(m.output_dir / "gamma.csv", std::ios::binary);
    std::vector<std::string> header{"iteration"};
    for (int l = 1; l <= k; ++l) {
      for (int h = 1; h <= p; ++h) {
        header.push_back("gamma_" + std::to_string(l) + "_" + std::to_string(h));
      }
    }
    csv::write_row(out, header);
    for (const auto& rs : res.retained) {
      std::vector<double> row{static_cast<double>(rs.iteration)};
      row.insert(row.end(), rs.state.gamma.begin(), rs.state.gamma.end());
      csv::write_row(out, row);
      for (std::size_t e = 0; e < gamma.size(); ++e) gamma[e].push_back(rs.state.gamma[e]);
      alpha.push_back(rs.state.alpha);
    }
  }

  json summary;
  summary["kind"] = "fit-regression";
  summary["n"] = data.n();
  summary["retained"] = res.retained.size();
  summary["lpml"] = lpml_json(score);
  summary["alpha"] = interval(alpha);
  json gj = json::object();
  for (int l = 0; l < k; ++l) {
    for (int h = 0; h < p; ++h) {
      const auto& v = gamma[static_cast<std::size_t>(l * p + h)];
      double pos = 0;
      for (double x : v) pos += x > 0.0;
      const double frac = pos / static_cast<double>(std::max<std::size_t>(1, v.size()));
      json e = interval(v);
      e["prob_positive"] = frac;
      e["prob_excludes_zero"] = std::max(frac, 1.0 - frac);
      gj["gamma_" + std::to_string(l + 1) + "_" + std::to_string(h + 1)] = e;
    }
  }
  summary["gamma"] = gj;

  json profiles = json::array();
  const auto zs = covariate_profiles(data);
  for (std::size_t g = 0; g < zs.size(); ++g) {
    const PosteriorGrids pg = posterior_grids(m, data, res.retained, &zs[g]);
    json pj = write_posterior_grids(m, m.output_dir,
                                    "profile" + std::to_string(g + 1) + "_", pg);
    pj["z"] = zs[g];
    profiles.push_back(pj);
  }
  summary["profiles"] = profiles;
  summary["acceptance"] = acceptance_json(res.acceptance, true);
  summary["wall_time_seconds"] = wall_seconds(start);
  return write_summary(m.output_dir, summary);
}

std::string run_experiment(const RunManifest& m, const RunOptions& opts) {
  switch (m.kind) {
    case ExperimentKind::kPriorSimulation:
      return run_prior_simulation(m);
    case ExperimentKind::kFit:
      return run_fit(m, opts);
    case ExperimentKind::kFitRegression:
      return run_fit_regression(m, opts);
  }
  throw ConfigError("unknown experiment kind");
}

LpmlResult lpml_from_csv(const fs::path& likelihood_csv, const fs::path& cpo_out) {
  const csv::Table t = csv::read_table(likelihood_csv);
  if (t.header.empty() || t.header.front() != "iteration") {
    throw IngestionError(likelihood_csv.string() + ": not a likelihood matrix");
  }
  const std::size_t n = t.header.size() - 1;
  std::vector<double> flat;
  flat.reserve(t.rows.size() * n);
  for (const auto& row : t.rows) flat.insert(flat.end(), row.begin() + 1, row.end());
  const LpmlResult res = lpml(flat, n);
  if (!cpo_out.empty()) write_cpo(cpo_out, res);
  return res;
}

std::string regrid(const RunManifest& m, const fs::path& states_csv,
                   const fs::path& out_dir) {
  m.validate();
  if (m.kind == ExperimentKind::kPriorSimulation) {
    throw ConfigError("regrid needs a fit or fit-regression manifest");
  }
  const Observations data = load_observations(m);
  const auto states = read_states_csv(states_csv, m.shape, data.p);
  ensure_dir(out_dir);
  json summary;
  if (data.p == 0) {
    summary = write_posterior_grids(m, out_dir, "", posterior_grids(m, data, states, nullptr));
  } else {
    json profiles = json::array();
    const auto zs = covariate_profiles(data);
    for (std::size_t g = 0; g < zs.size(); ++g) {
      json pj = write_posterior_grids(m, out_dir, "profile" + std::to_string(g + 1) + "_",
                                      posterior_grids(m, data, states, &zs[g]));
      pj["z"] = zs[g];
      profiles.push_back(pj);
    }
    summary["profiles"] = profiles;
  }
  summary["states"] = states.size();
  return write_summary(out_dir, summary);
}

}  // namespace ppt
