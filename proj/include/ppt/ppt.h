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


// C interface to the projected Polya tree library. Every fallible call
// returns a ppt_status; on failure ppt_last_error() describes the cause on
// the calling thread. Strings returned through char** are owned by the
// caller and released with ppt_string_free.

#ifndef PPT_PPT_H_
#define PPT_PPT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(PPT_BUILDING_LIBRARY)
#define PPT_API __attribute__((visibility("default")))
#else
#define PPT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ppt_status {
  PPT_OK = 0,
  PPT_ERR_ARGUMENT = 1,
  PPT_ERR_CONFIG = 2,
  PPT_ERR_INGESTION = 3,
  PPT_ERR_NUMERICAL = 4,
  PPT_ERR_DOMAIN = 5,
  PPT_ERR_IO = 6,
  PPT_ERR_INTERNAL = 7
} ppt_status;

typedef struct ppt_manifest ppt_manifest;
typedef struct ppt_rng ppt_rng;
typedef struct ppt_tree ppt_tree;

// Called after every MCMC iteration; return nonzero to keep going.
typedef int (*ppt_progress_fn)(int iteration, int total, void* user);

PPT_API const char* ppt_version(void);
PPT_API const char* ppt_status_name(ppt_status status);
PPT_API const char* ppt_last_error(void);
PPT_API void ppt_string_free(char* s);

// Manifests.
PPT_API ppt_status ppt_manifest_load(const char* path, ppt_manifest** out);
PPT_API ppt_status ppt_manifest_parse(const char* json, ppt_manifest** out);
// Replace one setting; `key` is dotted ("chain.seed") and `value` is JSON
// or a bare string.
PPT_API ppt_status ppt_manifest_set(ppt_manifest* m, const char* key,
                                    const char* value);
PPT_API ppt_status ppt_manifest_to_json(const ppt_manifest* m, char** out);
PPT_API void ppt_manifest_free(ppt_manifest* m);

// Runs the experiment named by the manifest kind and writes its output
// directory. `summary_json` may be NULL.
PPT_API ppt_status ppt_run(const ppt_manifest* m, ppt_progress_fn progress,
                           void* user, char** summary_json);

// Recomputes posterior grids from a saved states.csv.
PPT_API ppt_status ppt_regrid(const ppt_manifest* m, const char* states_csv,
                              const char* out_dir, char** summary_json);

// LPML from a likelihood.csv matrix. `cpo_out` may be NULL. `zero_count`
// receives the number of observations with a zero likelihood draw.
PPT_API ppt_status ppt_lpml(const char* likelihood_csv, const char* cpo_out,
                            double* lpml, size_t* floored, size_t* zero_count);

// Synthetic data written as a radian angle CSV (with covariates for the
// group design).
PPT_API ppt_status ppt_synthesize_projected_normal(const double* mu, int k,
                                                   size_t n, uint64_t seed,
                                                   const char* path);
PPT_API ppt_status ppt_synthesize_group_regression(
    int k, const double* gamma, const size_t* group_sizes, int groups,
    uint64_t seed, const char* path);

// Random numbers.
PPT_API ppt_status ppt_rng_new(uint64_t seed, ppt_rng** out);
PPT_API double ppt_rng_uniform(ppt_rng* rng);
PPT_API void ppt_rng_free(ppt_rng* rng);

// Single trees drawn from the prior.
PPT_API ppt_status ppt_tree_sample_prior(int k, int depth, double alpha,
                                         double delta, const double* mu,
                                         ppt_rng* rng, ppt_tree** out);
PPT_API ppt_status ppt_tree_density(const ppt_tree* tree, const double* x,
                                    double* out);
// Projected density at angles theta (k-1 values) with a right Riemann rule
// on `nodes` radial nodes up to |mu| + 4.
PPT_API ppt_status ppt_tree_projected_density(const ppt_tree* tree,
                                              const double* theta, int nodes,
                                              double* out);
PPT_API void ppt_tree_free(ppt_tree* tree);

#ifdef __cplusplus
}
#endif

#endif  // PPT_PPT_H_
