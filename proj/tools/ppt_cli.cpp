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

// Command line front end. Every subcommand builds a manifest from an
// optional JSON file plus flag overrides and hands it to the C library.

#include <cstdio>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ppt/ppt.h"

namespace {

using nlohmann::json;

enum Exit { kOk = 0, kInternal = 1, kConfig = 2, kIngestion = 3, kNumerical = 4, kIo = 5 };

int exit_code(ppt_status s) {
  switch (s) {
    case PPT_OK: return kOk;
    case PPT_ERR_ARGUMENT:
    case PPT_ERR_CONFIG:
    case PPT_ERR_DOMAIN: return kConfig;
    case PPT_ERR_INGESTION: return kIngestion;
    case PPT_ERR_NUMERICAL: return kNumerical;
    case PPT_ERR_IO: return kIo;
    case PPT_ERR_INTERNAL: return kInternal;
  }
  return kInternal;
}

int report(ppt_status s) {
  if (s != PPT_OK) {
    std::cerr << "ppt-cli: " << ppt_status_name(s) << " error: " << ppt_last_error() << "\n";
  }
  return exit_code(s);
}

struct ConfigFailure {
  std::string message;
};

json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return json(text);
  }
}

void set_dotted(json& doc, const std::string& key, const json& value) {
  std::string pointer;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ConfigFailure{"empty component in key '" + key + "'"};
    pointer += "/" + part;
  }
  try {
    doc[json::json_pointer(pointer)] = value;
  } catch (const json::exception& e) {
    throw ConfigFailure{"cannot set " + key + ": " + e.what()};
  }
}

struct RunFlags {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::string data;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<int> iterations, burn_in, thin, paths, resolution;
  std::optional<double> tau_mu;
  bool progress = false;
  bool print_manifest = false;
};

void add_common(CLI::App* sub, RunFlags& f, bool chain, bool data) {
  sub->add_option("-c,--config", f.config, "JSON run manifest");
  sub->add_option("-s,--set", f.sets, "Override a manifest entry, e.g. chain.seed=7")
      ->type_name("KEY=VALUE");
  sub->add_option("-o,--out", f.out, "Output directory");
  sub->add_option("--seed", f.seed, "Random seed");
  sub->add_option("--grid-resolution", f.resolution, "Grid cells per axis");
  sub->add_flag("--print-manifest", f.print_manifest,
                "Print the resolved manifest and exit");
  if (chain) {
    sub->add_option("--iterations", f.iterations, "MCMC iterations");
    sub->add_option("--burn-in", f.burn_in, "Burn-in iterations");
    sub->add_option("--thin", f.thin, "Thinning interval");
    sub->add_option("--tau-mu", f.tau_mu, "Prior precision of mu");
    sub->add_flag("-p,--progress", f.progress, "Report progress on stderr");
  }
  if (data) {
    sub->add_option("-d,--data", f.data, "Dataset file");
    sub->add_option("--preset", f.preset, "Dataset preset (B15, B19, B23)");
  }
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigFailure{"cannot read " + path};
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigFailure{path + ": " + e.what()};
  }
}

std::string build_manifest(const std::string& kind, const RunFlags& f) {
  json doc = f.config.empty() ? json::object() : load_json(f.config);
  if (!doc.is_object()) throw ConfigFailure{"manifest must be a JSON object"};
  if (doc.contains("kind") && doc["kind"] != kind &&
      !(kind == "prior-sim" && doc["kind"] == "simulate-prior")) {
    throw ConfigFailure{"manifest kind '" + doc["kind"].dump() +
                        "' does not match subcommand"};
  }
  doc["kind"] = kind;
  if (!f.preset.empty()) set_dotted(doc, "dataset.preset", f.preset);
  if (!f.data.empty()) set_dotted(doc, "dataset.path", f.data);
  if (!f.out.empty()) doc["output_dir"] = f.out;
  if (f.seed) set_dotted(doc, "chain.seed", *f.seed);
  if (f.iterations) set_dotted(doc, "chain.iterations", *f.iterations);
  if (f.burn_in) set_dotted(doc, "chain.burn_in", *f.burn_in);
  if (f.thin) set_dotted(doc, "chain.thin", *f.thin);
  if (f.tau_mu) set_dotted(doc, "prior.tau_mu", *f.tau_mu);
  if (f.paths) set_dotted(doc, "prior_simulation.paths", *f.paths);
  if (f.resolution) set_dotted(doc, "output.grid_resolution", *f.resolution);
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigFailure{"--set expects KEY=VALUE, got '" + s + "'"};
    }
    set_dotted(doc, s.substr(0, eq), parse_value(s.substr(eq + 1)));
  }
  return doc.dump();
}

struct ManifestHandle {
  ppt_manifest* m = nullptr;
  ~ManifestHandle() { ppt_manifest_free(m); }
};

int progress_cb(int iteration, int total, void*) {
  const int step = total >= 20 ? total / 20 : 1;
  if (iteration % step == 0 || iteration == total) {
    std::fprintf(stderr, "\riteration %d / %d", iteration, total);
    if (iteration == total) std::fputc('\n', stderr);
  }
  return 1;
}

int run_kind(const std::string& kind, const RunFlags& f) {
  ManifestHandle h;
  if (ppt_status s = ppt_manifest_parse(build_manifest(kind, f).c_str(), &h.m); s) {
    return report(s);
  }
  if (f.print_manifest) {
    char* text = nullptr;
    if (ppt_status s = ppt_manifest_to_json(h.m, &text); s) return report(s);
    std::cout << text << "\n";
    ppt_string_free(text);
    return kOk;
  }
  char* summary = nullptr;
  const ppt_status s = ppt_run(h.m, f.progress ? progress_cb : nullptr, nullptr, &summary);
  if (s) return report(s);
  std::cout << summary;
  ppt_string_free(summary);
  return kOk;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigFailure{"not a number: '" + item + "'"};
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projected Polya tree models for directional data"};
  app.set_version_flag("--version", std::string(ppt_version()));
  app.require_subcommand(1);

  RunFlags prior_flags, fit_flags, reg_flags, grid_flags;
  auto* prior = app.add_subcommand("simulate-prior", "Draw densities from the prior");
  add_common(prior, prior_flags, false, false);
  prior->add_option("--paths", prior_flags.paths, "Paths per mu setting");

  auto* fit = app.add_subcommand("fit", "Posterior analysis without covariates");
  add_common(fit, fit_flags, true, true);

  auto* reg = app.add_subcommand("fit-regression", "Directional-linear regression");
  add_common(reg, reg_flags, true, true);

  std::string likelihood, cpo_out;
  auto* lpml = app.add_subcommand("lpml", "Recompute LPML from likelihood.csv");
  lpml->add_option("likelihood", likelihood, "Likelihood matrix CSV")->required();
  lpml->add_option("--cpo-out", cpo_out, "Write CPO values here");

  std::string states;
  auto* grid = app.add_subcommand("grid", "Re-evaluate posterior grids from states.csv");
  add_common(grid, grid_flags, false, true);
  grid->add_option("--states", states, "states.csv from a fit run")->required();

  std::string synth_out, mu_text, gamma_text, groups_text;
  std::size_t synth_n = 100;
  std::uint64_t synth_seed = 1;
  auto* synth = app.add_subcommand("synthesize", "Write a synthetic dataset");
  synth->add_option("-o,--out", synth_out, "Output CSV")->required();
  auto* mu_opt = synth->add_option("--mu", mu_text, "Projected normal mean, comma separated");
  auto* gamma_opt = synth->add_option("--gamma", gamma_text,
                                      "Row-major k x p regression matrix");
  synth->add_option("--groups", groups_text, "Group sizes for --gamma");
  synth->add_option("-n,--count", synth_n, "Observations for --mu");
  synth->add_option("--seed", synth_seed, "Random seed");
  mu_opt->excludes(gamma_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*prior) return run_kind("prior-sim", prior_flags);
    if (*fit) return run_kind("fit", fit_flags);
    if (*reg) return run_kind("fit-regression", reg_flags);
    if (*lpml) {
      double value = 0.0;
      std::size_t floored = 0, zeros = 0;
      const ppt_status s = ppt_lpml(likelihood.c_str(),
                                    cpo_out.empty() ? nullptr : cpo_out.c_str(),
                                    &value, &floored, &zeros);
      if (s) return report(s);
      json out = {{"lpml", std::isfinite(value) ? json(value) : json("-inf")},
                  {"floored_values", floored},
                  {"zero_likelihood_observations", zeros}};
      std::cout << out.dump(2) << "\n";
      return kOk;
    }
    if (*grid) {
      ManifestHandle h;
      const std::string kind = grid_flags.config.empty()
                                   ? std::string("fit")
                                   : load_json(grid_flags.config).value("kind", "fit");
      if (ppt_status s = ppt_manifest_parse(build_manifest(kind, grid_flags).c_str(), &h.m);
          s) {
        return report(s);
      }
      const std::string out = grid_flags.out.empty() ? "ppt-grid" : grid_flags.out;
      char* summary = nullptr;
      if (ppt_status s = ppt_regrid(h.m, states.c_str(), out.c_str(), &summary); s) {
        return report(s);
      }
      std::cout << summary;
      ppt_string_free(summary);
      return kOk;
    }
    if (*synth) {
      if (!mu_text.empty()) {
        const auto mu = parse_list(mu_text);
        return report(ppt_synthesize_projected_normal(mu.data(), static_cast<int>(mu.size()),
                                                      synth_n, synth_seed,
                                                      synth_out.c_str()));
      }
      if (gamma_text.empty() || groups_text.empty()) {
        throw ConfigFailure{"synthesize needs --mu, or --gamma with --groups"};
      }
      const auto gamma = parse_list(gamma_text);
      std::vector<std::size_t> sizes;
      for (double g : parse_list(groups_text)) {
        if (g < 1 || g != static_cast<double>(static_cast<std::size_t>(g))) {
          throw ConfigFailure{"group sizes must be positive integers"};
        }
        sizes.push_back(static_cast<std::size_t>(g));
      }
      const int groups = static_cast<int>(sizes.size());
      if (gamma.size() % sizes.size() != 0) {
        throw ConfigFailure{"--gamma must have k x groups entries"};
      }
      const int k = static_cast<int>(gamma.size() / sizes.size());
      return report(ppt_synthesize_group_regression(k, gamma.data(), sizes.data(), groups,
                                                    synth_seed, synth_out.c_str()));
    }
  } catch (const ConfigFailure& e) {
    std::cerr << "ppt-cli: config error: " << e.message << "\n";
    return kConfig;
  }
  return kInternal;
}
