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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ppt/numerics.hpp"
#include "ppt/polya_tree.hpp"
#include "ppt/projected_density.hpp"

namespace ppt {

// alpha ~ Ga(a_alpha, b_alpha), mu_l ~ N(mu_0, tau_mu) and
// gamma_{l,h} ~ N(0, tau_gamma); normal parameters are precisions.
struct PriorHyperparams {
  double a_alpha = 1.0;
  double b_alpha = 2.0;
  double mu_0 = 0.0;
  double tau_mu = 1.0;
  double tau_gamma = 0.1;

  void validate() const;
};

struct ChainConfig {
  int iterations = 5500;
  int burn_in = 500;
  int thin = 5;
  double kappa_r = 0.5;
  double kappa_alpha = 10.0;
  double kappa_gamma = 50.0;
  std::uint64_t seed = 1;
  int quad_nodes = 100;
  // Evaluate f(theta_i | state) on every retained iteration.
  bool record_likelihood = true;

  void validate() const;
  int retained_count() const { return (iterations - burn_in) / thin; }
  bool retains(int iteration) const {
    return iteration > burn_in && (iteration - burn_in) % thin == 0;
  }
};

// n angle vectors (row-major, k - 1 per row) and optional covariates
// (row-major, p per row).
struct Observations {
  int k = 3;
  int p = 0;
  std::vector<double> theta;
  std::vector<double> z;

  std::size_t n() const {
    return k > 1 ? theta.size() / static_cast<std::size_t>(k - 1) : 0;
  }
  std::span<const double> angles(std::size_t i) const {
    const std::size_t w = static_cast<std::size_t>(k - 1);
    return {theta.data() + i * w, w};
  }
  std::span<const double> covariates(std::size_t i) const {
    const std::size_t w = static_cast<std::size_t>(p);
    return {z.data() + i * w, w};
  }
  bool has_covariates() const { return p > 0; }
  void validate() const;
};

struct McmcState {
  BranchingProbabilities probs;
  std::vector<double> r;
  double alpha = 0.5;
  std::vector<double> mu;
  std::vector<double> gamma;  // k x p row-major, empty without covariates
  bool regression = false;

  // Gamma z_i; zero vector without covariates.
  std::vector<double> shift(const Observations& data, std::size_t i) const;
};

// N_{m,j} for levels 1..M, flat row-major per level.
struct CountTensor {
  int k = 0;
  int depth = 0;
  std::vector<std::vector<std::uint32_t>> levels;

  std::uint32_t at(int m, std::size_t flat) const { return levels[m - 1][flat]; }
  // Level sums equal n and child counts add up to the parent count.
  bool consistent(std::size_t n) const;
};

struct AcceptanceLog {
  struct Counter {
    std::uint64_t proposals = 0;
    std::uint64_t acceptances = 0;
    double rate() const {
      return proposals ? static_cast<double>(acceptances) / proposals : 0.0;
    }
    void record(bool accepted) {
      ++proposals;
      acceptances += accepted ? 1 : 0;
    }
  };
  Counter r, alpha, gamma;
};

struct MhStep {
  double value;
  bool accepted;
  double log_acceptance;  // min(0, log target ratio + log proposal ratio)
};

// Augmented point x_i(theta_i, r_i) - Gamma z_i written into `out`.
void augmented_point(const Observations& data, const McmcState& state,
                     std::size_t i, std::span<double> out);

CountTensor compute_counts(const TreeShape& shape, const Observations& data,
                           const McmcState& state);

// Dirichlet parameters alpha phi(m) + N_{m,j} for every set at levels 1..M,
// in the flat layout of BranchingProbabilities.
std::vector<std::vector<double>> posterior_dirichlet_params(
    const TreeShape& shape, const CountTensor& counts);

// Dirichlet(prior alphas + child counts) per internal node; the frozen root
// is left untouched. `shape.alpha` is the current precision.
BranchingProbabilities update_Y(const TreeShape& shape,
                                const BranchingProbabilities& current,
                                const CountTensor& counts, Rng& rng);

// log {prod_m Y} f0(x) r^{k-1} at resultant r for observation i.
double log_r_target(const TreeShape& shape, const Observations& data,
                    const McmcState& state, std::size_t i, double r);

// Acceptance for moving r_i from `current` to `proposal` under the
// Ga(kappa, kappa / r) random walk.
double r_log_acceptance(const TreeShape& shape, const Observations& data,
                        const McmcState& state, std::size_t i, double current,
                        double proposal, double kappa);

MhStep update_r_i(const TreeShape& shape, const Observations& data,
                  const McmcState& state, std::size_t i,
                  const ChainConfig& config, Rng& rng);

// Conditional posterior of alpha given Y, stored as the alpha-free per-level
// sums it needs.
class AlphaTarget {
 public:
  AlphaTarget(const TreeShape& shape, const BranchingProbabilities& probs,
              const PriorHyperparams& hyper);
  // No tree terms: the target is the Ga(a_alpha, b_alpha) prior alone.
  explicit AlphaTarget(const PriorHyperparams& hyper);

  double log_density(double alpha) const;
  double log_acceptance(double current, double proposal, double kappa) const;

 private:
  struct Level {
    double nodes;
    double kids;
    double phi;
    double sum_log_y;
  };
  std::vector<Level> levels_;
  double a_alpha_;
  double b_alpha_;
};

MhStep update_alpha(const AlphaTarget& target, double current,
                    const ChainConfig& config, Rng& rng);

// Conjugate draw of every mu_l. Throws ConfigError under regression.
std::vector<double> update_mu(const Observations& data, const McmcState& state,
                              const PriorHyperparams& hyper, Rng& rng);

// sum_i log {prod_m Y(eps_i)} f0(eps_i) with eps_i = x_i - Gamma z_i.
double log_gamma_likelihood(const TreeShape& shape, const Observations& data,
                            const McmcState& state,
                            std::span<const double> gamma);

// One-at-a-time random-walk MH over Gamma in row-major order.
std::vector<double> update_gamma(const TreeShape& shape,
                                 const Observations& data,
                                 const McmcState& state,
                                 const PriorHyperparams& hyper,
                                 const ChainConfig& config, Rng& rng,
                                 AcceptanceLog& log);

McmcState initialize_state(const Observations& data, const TreeShape& shape,
                           const PriorHyperparams& hyper, Rng& rng);

// counts -> Y -> each r_i -> alpha -> (mu or Gamma). Throws NumericalError
// if the state stops being finite.
void gibbs_sweep(McmcState& state, const Observations& data,
                 const TreeShape& shape, const ChainConfig& config,
                 const PriorHyperparams& hyper, Rng& rng, AcceptanceLog& log);

struct RetainedState {
  int iteration;
  McmcState state;
  AcceptanceLog acceptance;  // cumulative at this iteration
};

struct ChainResult {
  std::vector<RetainedState> retained;
  AcceptanceLog acceptance;
  // retained x n, f(theta_i | state) for each retained iteration.
  std::vector<double> likelihood;
  std::size_t n_obs = 0;
};

using ProgressFn = std::function<void(int iteration, const McmcState&)>;

ChainResult run_chain(const Observations& data, const ChainConfig& config,
                      const PriorHyperparams& hyper, const TreeShape& shape,
                      const ProgressFn& progress = {});

// Radial rule used for f(theta_i | state): |mu| + 4, or max_i |Gamma z_i| + 4
// under regression.
QuadratureRule state_quadrature(const Observations& data,
                                const McmcState& state, int nodes);

TreeModel model_of(const TreeShape& shape, const McmcState& state);

// f(theta_i | state) for every observation.
std::vector<double> observation_likelihoods(const Observations& data,
                                            const TreeShape& shape,
                                            const McmcState& state, int nodes);

struct LpmlResult {
  double lpml = 0.0;
  std::vector<double> cpo;
  std::vector<double> log_cpo;
  // Values in (0, e^-700) raised to e^-700 before inversion.
  std::size_t floored = 0;
  // Observations with some f_it == 0: CPO_i = 0 and LPML = -inf.
  std::vector<std::size_t> zero_observations;
};

// `likelihood` is iterations x n_obs row-major.
LpmlResult lpml(std::span<const double> likelihood, std::size_t n_obs);

}  // namespace ppt
