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

#include "ppt/ppt.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "ppt/dataset.hpp"
#include "ppt/error.hpp"
#include "ppt/experiments.hpp"
#include "ppt/polya_tree.hpp"
#include "ppt/projected_density.hpp"

struct ppt_manifest {
  ppt::RunManifest m;
};

struct ppt_rng {
  ppt::Rng rng;
};

struct ppt_tree {
  ppt::TreeModel model;
};

namespace {

thread_local std::string last_error;

struct Cancelled {};

ppt_status fail(ppt_status s, const char* what) {
  last_error = what;
  return s;
}

template <typename F>
ppt_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return PPT_OK;
  } catch (const Cancelled&) {
    return fail(PPT_ERR_INTERNAL, "cancelled by progress callback");
  } catch (const ppt::ConfigError& e) {
    return fail(PPT_ERR_CONFIG, e.what());
  } catch (const ppt::IngestionError& e) {
    return fail(PPT_ERR_INGESTION, e.what());
  } catch (const ppt::NumericalError& e) {
    return fail(PPT_ERR_NUMERICAL, e.what());
  } catch (const ppt::DomainError& e) {
    return fail(PPT_ERR_DOMAIN, e.what());
  } catch (const ppt::IoError& e) {
    return fail(PPT_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PPT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PPT_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PPT_ERR_INTERNAL, "unknown error");
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* ppt_version(void) { return PPT_VERSION; }

const char* ppt_status_name(ppt_status status) {
  switch (status) {
    case PPT_OK: return "ok";
    case PPT_ERR_ARGUMENT: return "argument";
    case PPT_ERR_CONFIG: return "config";
    case PPT_ERR_INGESTION: return "ingestion";
    case PPT_ERR_NUMERICAL: return "numerical";
    case PPT_ERR_DOMAIN: return "domain";
    case PPT_ERR_IO: return "io";
    case PPT_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* ppt_last_error(void) { return last_error.c_str(); }

void ppt_string_free(char* s) { std::free(s); }

ppt_status ppt_manifest_load(const char* path, ppt_manifest** out) {
  if (!path || !out) return fail(PPT_ERR_ARGUMENT, "NULL argument");
  return guarded([&] { *out = new ppt_manifest{ppt::load_manifest(path)}; });
}

ppt_status ppt_manifest_parse(const char* json, ppt_manifest** out) {
  if (!json || !out) return fail(PPT_ERR_ARGUMENT, "NULL argument");
  return guarded([&] { *out = new ppt_manifest{ppt::parse_manifest(json)}; });
}

ppt_status ppt_manifest_set(ppt_manifest* m, const char* key, const char* value) {
  if (!m || !key || !value) return fail(PPT_ERR_ARGUMENT, "NULL argument");
  return guarded([&] { ppt::apply_override(m->m, key, value); });
}

ppt_status ppt_manifest_to_json(const ppt_manifest* m, char** out) {
  if (!m || !out) return fail(PPT_ERR_ARGUMENT, "NULL argument");
  return guarded([&] { *out = dup(ppt::manifest_to_json(m->m)); });
}

void ppt_manifest_free(ppt_manifest* m) { delete m; }

ppt_status ppt_run(const ppt_manifest* m, ppt_progress_fn progress, void* user,
                   char** summary_json) {
  if (!m) return fail(PPT_ERR_ARGUMENT, "NULL manifest");
  return guarded([&] {
    ppt::RunOptions opts;
    if (progress) {
      const int total = m->m.chain.iterations;
      opts.progress = [=](int it, const ppt::McmcState&) {
        if (!progress(it, total, user)) throw Cancelled{};
      };
    }
    const std::string summary = ppt::run_experiment(m->m, opts);
    if (summary_json) *summary_json = dup(summary);
  });
}

ppt_status ppt_regrid(const ppt_manifest* m, const char* states_csv,
                      const char* out_dir, char** summary_json) {
  if (!m || !states_csv || !out_dir) return fail(PPT_ERR_ARGUMENT, "NULL argument");
  return guarded([&] {
    const std::string summary = ppt::regrid(m->m, states_csv, out_dir);
    if (summary_json) *summary_json = dup(summary);
  });
}

ppt_status ppt_lpml(const char* likelihood_csv, const char* cpo_out, double* lpml,
                    size_t* floored, size_t* zero_count) {
  if (!likelihood_csv || !lpml) return fail(PPT_ERR_ARGUMENT, "NULL argument");
  return guarded([&] {
    const auto res = ppt::lpml_from_csv(likelihood_csv,
                                        cpo_out ? std::filesystem::path(cpo_out)
                                                : std::filesystem::path());
    *lpml = res.lpml;
    if (floored) *floored = res.floored;
    if (zero_count) *zero_count = res.zero_observations.size();
  });
}

ppt_status ppt_synthesize_projected_normal(const double* mu, int k, size_t n,
                                           uint64_t seed, const char* path) {
  if (!mu || !path || k < 2) return fail(PPT_ERR_ARGUMENT, "bad argument");
  return guarded([&] {
    ppt::Rng rng(seed);
    const auto obs = ppt::synthesize_projected_normal(
        std::span<const double>(mu, static_cast<std::size_t>(k)), n, rng);
    ppt::write_dataset(path, obs);
  });
}

ppt_status ppt_synthesize_group_regression(int k, const double* gamma,
                                           const size_t* group_sizes, int groups,
                                           uint64_t seed, const char* path) {
  if (!gamma || !group_sizes || !path || k < 2 || groups < 1) {
    return fail(PPT_ERR_ARGUMENT, "bad argument");
  }
  return guarded([&] {
    ppt::Rng rng(seed);
    const std::vector<double> g(gamma, gamma + static_cast<std::size_t>(k) * groups);
    const std::vector<std::size_t> sizes(group_sizes, group_sizes + groups);
    ppt::write_dataset(path, ppt::synthesize_group_regression(k, g, sizes, rng));
  });
}

ppt_status ppt_rng_new(uint64_t seed, ppt_rng** out) {
  if (!out) return fail(PPT_ERR_ARGUMENT, "NULL argument");
  return guarded([&] { *out = new ppt_rng{ppt::Rng(seed)}; });
}

double ppt_rng_uniform(ppt_rng* rng) { return rng ? rng->rng.uniform() : 0.0; }

void ppt_rng_free(ppt_rng* rng) { delete rng; }

ppt_status ppt_tree_sample_prior(int k, int depth, double alpha, double delta,
                                 const double* mu, ppt_rng* rng, ppt_tree** out) {
  if (!mu || !rng || !out) return fail(PPT_ERR_ARGUMENT, "NULL argument");
  return guarded([&] {
    ppt::TreeShape shape{k, depth, alpha, delta};
    shape.validate();
    ppt::CenteringMeasure center{std::vector<double>(mu, mu + k)};
    *out = new ppt_tree{
        ppt::TreeModel{shape, ppt::sample_prior(shape, rng->rng, false), center}};
  });
}

ppt_status ppt_tree_density(const ppt_tree* tree, const double* x, double* out) {
  if (!tree || !x || !out) return fail(PPT_ERR_ARGUMENT, "NULL argument");
  return guarded([&] {
    const auto& m = tree->model;
    *out = ppt::tree_density(m.shape, m.probs, m.center,
                             std::span<const double>(x, static_cast<std::size_t>(m.shape.k)));
  });
}

ppt_status ppt_tree_projected_density(const ppt_tree* tree, const double* theta,
                                      int nodes, double* out) {
  if (!tree || !theta || !out) return fail(PPT_ERR_ARGUMENT, "NULL argument");
  return guarded([&] {
    const auto& m = tree->model;
    const auto quad = ppt::QuadratureRule::for_center(m.center.mu, nodes);
    ppt::ProjectedDensity f(m, quad);
    *out = f(std::span<const double>(theta, static_cast<std::size_t>(m.shape.k - 1)));
  });
}

void ppt_tree_free(ppt_tree* tree) { delete tree; }

}  // extern "C"
