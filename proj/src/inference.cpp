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

#include "ppt/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ppt/error.hpp"
#include "ppt/geometry.hpp"

namespace ppt {

namespace {

constexpr std::size_t kMaxDim = 32;

}  // namespace

void PriorHyperparams::validate() const {
  if (!(a_alpha > 0.0) || !(b_alpha > 0.0)) {
    throw ConfigError("alpha prior parameters must be positive");
  }
  if (!(tau_mu > 0.0) || !(tau_gamma > 0.0)) {
    throw ConfigError("prior precisions must be positive");
  }
  if (!std::isfinite(mu_0)) throw ConfigError("mu_0 must be finite");
}

void ChainConfig::validate() const {
  if (iterations < 1) throw ConfigError("iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations) {
    throw ConfigError("burn_in must lie in [0, iterations)");
  }
  if (thin < 1) throw ConfigError("thin must be >= 1");
  if (!(kappa_r > 0.0) || !(kappa_alpha > 0.0) || !(kappa_gamma > 0.0)) {
    throw ConfigError("MH tuning constants must be positive");
  }
  if (quad_nodes < 2) throw ConfigError("quadrature needs at least 2 nodes");
}

void Observations::validate() const {
  if (k < 2 || static_cast<std::size_t>(k) > kMaxDim) {
    throw ConfigError("dimension k must lie in [2, 32]");
  }
  if (theta.size() % static_cast<std::size_t>(k - 1) != 0) {
    throw ConfigError("angle array is not a multiple of k - 1");
  }
  if (p < 0 || (p > 0 && z.size() != n() * static_cast<std::size_t>(p))) {
    throw ConfigError("covariate array does not match n x p");
  }
  for (std::size_t i = 0; i < n(); ++i) {
    AngleVector a{std::vector<double>(angles(i).begin(), angles(i).end())};
    if (!a.in_support()) {
      throw ConfigError("observation " + std::to_string(i + 1) +
                        " lies outside the angle support");
    }
  }
}

std::vector<double> McmcState::shift(const Observations& data,
                                     std::size_t i) const {
  std::vector<double> s(static_cast<std::size_t>(data.k), 0.0);
  if (!regression) return s;
  const auto z = data.covariates(i);
  const std::size_t p = z.size();
  for (std::size_t l = 0; l < s.size(); ++l) {
    for (std::size_t h = 0; h < p; ++h) s[l] += gamma[l * p + h] * z[h];
  }
  return s;
}

void augmented_point(const Observations& data, const McmcState& state,
                     std::size_t i, std::span<double> out) {
  unit_direction(data.angles(i), out);
  const double r = state.r[i];
  for (double& v : out) v *= r;
  if (state.regression) {
    const auto z = data.covariates(i);
    const std::size_t p = z.size();
    for (std::size_t l = 0; l < out.size(); ++l) {
      double s = 0.0;
      for (std::size_t h = 0; h < p; ++h) s += state.gamma[l * p + h] * z[h];
      out[l] -= s;
    }
  }
}

bool CountTensor::consistent(std::size_t n) const {
  for (int m = 1; m <= depth; ++m) {
    std::uint64_t total = 0;
    for (auto c : levels[m - 1]) total += c;
    if (total != n) return false;
  }
  for (int m = 2; m <= depth; ++m) {
    std::vector<std::uint64_t> parent(levels[m - 2].size(), 0);
    const unsigned mm = static_cast<unsigned>(m);
    for (std::size_t flat = 0; flat < levels[m - 1].size(); ++flat) {
      // Drop the lowest bit of every coordinate to reach the parent.
      std::size_t pf = 0;
      for (int l = 0; l < k; ++l) {
        const unsigned shift = static_cast<unsigned>(k - 1 - l) * mm;
        const std::size_t c = (flat >> shift) & ((std::size_t{1} << mm) - 1);
        pf |= (c >> 1) << (static_cast<unsigned>(k - 1 - l) * (mm - 1));
      }
      parent[pf] += levels[m - 1][flat];
    }
    for (std::size_t pf = 0; pf < parent.size(); ++pf) {
      if (parent[pf] != levels[m - 2][pf]) return false;
    }
  }
  return true;
}

CountTensor compute_counts(const TreeShape& shape, const Observations& data,
                           const McmcState& state) {
  CountTensor counts{shape.k, shape.depth, {}};
  for (int m = 1; m <= shape.depth; ++m) {
    counts.levels.emplace_back(shape.cells_at(m), 0u);
  }
  const std::size_t k = static_cast<std::size_t>(shape.k);
  double x[kMaxDim];
  std::uint32_t leaf[kMaxDim];
  for (std::size_t i = 0; i < data.n(); ++i) {
    augmented_point(data, state, i, std::span<double>(x, k));
    leaf_coords(shape, state.mu, std::span<const double>(x, k),
                std::span<std::uint32_t>(leaf, k));
    for (int m = 1; m <= shape.depth; ++m) {
      ++counts.levels[m - 1][ancestor_flat(
          shape, std::span<const std::uint32_t>(leaf, k), m)];
    }
  }
  return counts;
}

std::vector<std::vector<double>> posterior_dirichlet_params(
    const TreeShape& shape, const CountTensor& counts) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(shape.depth));
  for (int m = 1; m <= shape.depth; ++m) {
    const double a = shape.child_alpha(m - 1);
    auto& level = out[static_cast<std::size_t>(m - 1)];
    level.resize(shape.cells_at(m));
    for (std::size_t f = 0; f < level.size(); ++f) level[f] = a + counts.at(m, f);
  }
  return out;
}

BranchingProbabilities update_Y(const TreeShape& shape,
                                const BranchingProbabilities& current,
                                const CountTensor& counts, Rng& rng) {
  BranchingProbabilities next = current;
  const auto params = posterior_dirichlet_params(shape, counts);
  const int kids = shape.children();
  std::vector<double> node(static_cast<std::size_t>(kids));
  std::vector<double> draw(static_cast<std::size_t>(kids));
  for (int m = current.root_frozen() ? 2 : 1; m <= shape.depth; ++m) {
    const auto& level_params = params[static_cast<std::size_t>(m - 1)];
    auto level = next.level(m);
    const std::size_t parents = shape.cells_at(m - 1);
    for (std::size_t p = 0; p < parents; ++p) {
      for (int b = 0; b < kids; ++b) {
        node[static_cast<std::size_t>(b)] = level_params[next.child_flat(m, p, b)];
      }
      sample_dirichlet_into(node, rng, draw);
      for (int b = 0; b < kids; ++b) {
        level[next.child_flat(m, p, b)] = draw[static_cast<std::size_t>(b)];
      }
    }
  }
  return next;
}

namespace {

// log prod_m Y + log f0 at an arbitrary point.
double log_tree_kernel(const TreeShape& shape, const McmcState& state,
                       std::span<const double> x) {
  const std::size_t k = x.size();
  std::uint32_t leaf[kMaxDim];
  leaf_coords(shape, state.mu, x, std::span<std::uint32_t>(leaf, k));
  double acc = 0.0;
  for (int m = 1; m <= shape.depth; ++m) {
    acc += std::log(state.probs.at(
        m, ancestor_flat(shape, std::span<const std::uint32_t>(leaf, k), m)));
  }
  double q = 0.0;
  for (std::size_t l = 0; l < k; ++l) {
    const double z = x[l] - state.mu[l];
    q += z * z;
  }
  return acc - 0.5 * q - 0.5 * static_cast<double>(k) * std::log(kTwoPi);
}

double log_gamma_proposal(double to, double from, double kappa) {
  const double rate = kappa / from;
  return kappa * std::log(rate) + (kappa - 1.0) * std::log(to) - rate * to;
}

}  // namespace

double log_r_target(const TreeShape& shape, const Observations& data,
                    const McmcState& state, std::size_t i, double r) {
  const std::size_t k = static_cast<std::size_t>(shape.k);
  double x[kMaxDim];
  unit_direction(data.angles(i), std::span<double>(x, k));
  for (std::size_t l = 0; l < k; ++l) x[l] *= r;
  if (state.regression) {
    const auto s = state.shift(data, i);
    for (std::size_t l = 0; l < k; ++l) x[l] -= s[l];
  }
  return log_tree_kernel(shape, state, std::span<const double>(x, k)) +
         (shape.k - 1) * std::log(r);
}

double r_log_acceptance(const TreeShape& shape, const Observations& data,
                        const McmcState& state, std::size_t i, double current,
                        double proposal, double kappa) {
  const double log_ratio =
      log_r_target(shape, data, state, i, proposal) -
      log_r_target(shape, data, state, i, current) +
      log_gamma_proposal(current, proposal, kappa) -
      log_gamma_proposal(proposal, current, kappa);
  return std::isnan(log_ratio) ? -std::numeric_limits<double>::infinity()
                               : std::min(0.0, log_ratio);
}

MhStep update_r_i(const TreeShape& shape, const Observations& data,
                  const McmcState& state, std::size_t i,
                  const ChainConfig& config, Rng& rng) {
  const double current = state.r[i];
  const double proposal = sample_gamma(
      GammaShapeRate(config.kappa_r, config.kappa_r / current), rng);
  const double la = r_log_acceptance(shape, data, state, i, current, proposal,
                                     config.kappa_r);
  const bool accept = std::log(rng.uniform()) < la;
  return {accept ? proposal : current, accept, la};
}

AlphaTarget::AlphaTarget(const TreeShape& shape,
                         const BranchingProbabilities& probs,
                         const PriorHyperparams& hyper)
    : a_alpha_(hyper.a_alpha), b_alpha_(hyper.b_alpha) {
  for (int m = probs.root_frozen() ? 2 : 1; m <= shape.depth; ++m) {
    double s = 0.0;
    for (double y : probs.level(m)) s += std::log(y);
    levels_.push_back(Level{static_cast<double>(shape.cells_at(m - 1)),
                            static_cast<double>(shape.children()),
                            shape.phi(m), s});
  }
}

AlphaTarget::AlphaTarget(const PriorHyperparams& hyper)
    : a_alpha_(hyper.a_alpha), b_alpha_(hyper.b_alpha) {}

double AlphaTarget::log_density(double alpha) const {
  if (!(alpha > 0.0)) return -std::numeric_limits<double>::infinity();
  double lp = (a_alpha_ - 1.0) * std::log(alpha) - b_alpha_ * alpha;
  for (const Level& lv : levels_) {
    const double a = alpha * lv.phi;
    lp += lv.nodes * (std::lgamma(lv.kids * a) - lv.kids * std::lgamma(a)) +
          (a - 1.0) * lv.sum_log_y;
  }
  return lp;
}

double AlphaTarget::log_acceptance(double current, double proposal,
                                   double kappa) const {
  const double log_ratio = log_density(proposal) - log_density(current) +
                           log_gamma_proposal(current, proposal, kappa) -
                           log_gamma_proposal(proposal, current, kappa);
  return std::isnan(log_ratio) ? -std::numeric_limits<double>::infinity()
                               : std::min(0.0, log_ratio);
}

MhStep update_alpha(const AlphaTarget& target, double current,
                    const ChainConfig& config, Rng& rng) {
  const double proposal = sample_gamma(
      GammaShapeRate(config.kappa_alpha, config.kappa_alpha / current), rng);
  const double la = target.log_acceptance(current, proposal, config.kappa_alpha);
  const bool accept = std::log(rng.uniform()) < la;
  return {accept ? proposal : current, accept, la};
}

std::vector<double> update_mu(const Observations& data, const McmcState& state,
                              const PriorHyperparams& hyper, Rng& rng) {
  if (state.regression) {
    throw ConfigError("mu is fixed at zero under the regression model");
  }
  const std::size_t k = static_cast<std::size_t>(data.k);
  std::vector<double> sum(k, 0.0);
  double x[kMaxDim];
  for (std::size_t i = 0; i < data.n(); ++i) {
    augmented_point(data, state, i, std::span<double>(x, k));
    for (std::size_t l = 0; l < k; ++l) sum[l] += x[l];
  }
  const double n = static_cast<double>(data.n());
  const double precision = n + hyper.tau_mu;
  std::vector<double> mu(k);
  for (std::size_t l = 0; l < k; ++l) {
    mu[l] = sample_normal((sum[l] + hyper.tau_mu * hyper.mu_0) / precision,
                          precision, rng);
  }
  return mu;
}

namespace {

double observation_log_kernel(const TreeShape& shape, const Observations& data,
                              const McmcState& state,
                              std::span<const double> gamma, std::size_t i) {
  const std::size_t k = static_cast<std::size_t>(shape.k);
  double x[kMaxDim];
  unit_direction(data.angles(i), std::span<double>(x, k));
  const auto z = data.covariates(i);
  const std::size_t p = z.size();
  for (std::size_t l = 0; l < k; ++l) {
    double s = 0.0;
    for (std::size_t h = 0; h < p; ++h) s += gamma[l * p + h] * z[h];
    x[l] = x[l] * state.r[i] - s;
  }
  return log_tree_kernel(shape, state, std::span<const double>(x, k));
}

}  // namespace

double log_gamma_likelihood(const TreeShape& shape, const Observations& data,
                            const McmcState& state,
                            std::span<const double> gamma) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    total += observation_log_kernel(shape, data, state, gamma, i);
  }
  return total;
}

std::vector<double> update_gamma(const TreeShape& shape,
                                 const Observations& data,
                                 const McmcState& state,
                                 const PriorHyperparams& hyper,
                                 const ChainConfig& config, Rng& rng,
                                 AcceptanceLog& log) {
  if (!state.regression) {
    throw ConfigError("Gamma is only sampled under the regression model");
  }
  const std::size_t n = data.n();
  const std::size_t p = static_cast<std::size_t>(data.p);
  std::vector<double> gamma = state.gamma;
  std::vector<double> cached(n), trial(n);
  for (std::size_t i = 0; i < n; ++i) {
    cached[i] = observation_log_kernel(shape, data, state, gamma, i);
  }
  for (std::size_t entry = 0; entry < gamma.size(); ++entry) {
    const std::size_t h = entry % p;
    const double current = gamma[entry];
    const double proposal = sample_normal(current, config.kappa_gamma, rng);
    gamma[entry] = proposal;
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (data.covariates(i)[h] == 0.0) {
        trial[i] = cached[i];
        continue;
      }
      trial[i] = observation_log_kernel(shape, data, state, gamma, i);
      delta += trial[i] - cached[i];
    }
    double la = delta + log_normal_density(proposal, 0.0, hyper.tau_gamma) -
                log_normal_density(current, 0.0, hyper.tau_gamma);
    la = std::isnan(la) ? -std::numeric_limits<double>::infinity()
                        : std::min(0.0, la);
    const bool accept = std::log(rng.uniform()) < la;
    log.gamma.record(accept);
    if (accept) {
      cached.swap(trial);
    } else {
      gamma[entry] = current;
    }
  }
  return gamma;
}

McmcState initialize_state(const Observations& data, const TreeShape& shape,
                           const PriorHyperparams& hyper, Rng& rng) {
  data.validate();
  hyper.validate();
  if (data.k != shape.k) {
    throw ConfigError("data dimension does not match the tree dimension");
  }
  McmcState state;
  state.regression = data.has_covariates();
  state.alpha = hyper.a_alpha / hyper.b_alpha;
  TreeShape draw_shape = shape;
  draw_shape.alpha = state.alpha;
  state.probs = sample_prior(draw_shape, rng, state.regression);
  state.r.assign(data.n(), 1.0);
  state.mu.assign(static_cast<std::size_t>(shape.k),
                  state.regression ? 0.0 : hyper.mu_0);
  if (state.regression) {
    state.gamma.assign(static_cast<std::size_t>(shape.k * data.p), 0.0);
  }
  return state;
}

namespace {

void check_finite(const McmcState& state, int iteration) {
  auto fail = [&](const std::string& what) {
    throw NumericalError("chain diverged at iteration " +
                         std::to_string(iteration) + ": " + what);
  };
  if (!std::isfinite(state.alpha) || !(state.alpha > 0.0)) fail("alpha");
  for (double v : state.mu) {
    if (!std::isfinite(v)) fail("mu");
  }
  for (double v : state.gamma) {
    if (!std::isfinite(v)) fail("Gamma");
  }
  for (double v : state.r) {
    if (!std::isfinite(v) || !(v > 0.0)) fail("latent resultant");
  }
}

}  // namespace

void gibbs_sweep(McmcState& state, const Observations& data,
                 const TreeShape& shape, const ChainConfig& config,
                 const PriorHyperparams& hyper, Rng& rng, AcceptanceLog& log) {
  TreeShape cur = shape;
  cur.alpha = state.alpha;

  const CountTensor counts = compute_counts(cur, data, state);
  state.probs = update_Y(cur, state.probs, counts, rng);

  for (std::size_t i = 0; i < data.n(); ++i) {
    const MhStep step = update_r_i(cur, data, state, i, config, rng);
    state.r[i] = step.value;
    log.r.record(step.accepted);
  }

  const AlphaTarget target(cur, state.probs, hyper);
  const MhStep a = update_alpha(target, state.alpha, config, rng);
  state.alpha = a.value;
  log.alpha.record(a.accepted);
  cur.alpha = state.alpha;

  if (state.regression) {
    state.gamma = update_gamma(cur, data, state, hyper, config, rng, log);
  } else {
    state.mu = update_mu(data, state, hyper, rng);
  }
}

TreeModel model_of(const TreeShape& shape, const McmcState& state) {
  TreeShape s = shape;
  s.alpha = state.alpha;
  return TreeModel{s, state.probs, CenteringMeasure{state.mu}};
}

QuadratureRule state_quadrature(const Observations& data,
                                const McmcState& state, int nodes) {
  if (!state.regression) return QuadratureRule::for_center(state.mu, nodes);
  std::vector<std::vector<double>> shifts;
  shifts.reserve(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) {
    shifts.push_back(state.shift(data, i));
  }
  return QuadratureRule::for_shifts(shifts, nodes);
}

std::vector<double> observation_likelihoods(const Observations& data,
                                            const TreeShape& shape,
                                            const McmcState& state, int nodes) {
  const TreeModel model = model_of(shape, state);
  const ProjectedDensity f(model, state_quadrature(data, state, nodes));
  std::vector<double> out(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) {
    if (state.regression) {
      out[i] = f(data.angles(i), state.shift(data, i));
    } else {
      out[i] = f(data.angles(i));
    }
  }
  return out;
}

ChainResult run_chain(const Observations& data, const ChainConfig& config,
                      const PriorHyperparams& hyper, const TreeShape& shape,
                      const ProgressFn& progress) {
  config.validate();
  shape.validate();
  Rng rng(config.seed);
  McmcState state = initialize_state(data, shape, hyper, rng);

  ChainResult result;
  result.n_obs = data.n();
  result.retained.reserve(static_cast<std::size_t>(config.retained_count()));
  for (int it = 1; it <= config.iterations; ++it) {
    gibbs_sweep(state, data, shape, config, hyper, rng, result.acceptance);
    check_finite(state, it);
    if (config.retains(it)) {
      result.retained.push_back(RetainedState{it, state, result.acceptance});
      if (config.record_likelihood) {
        const auto lik =
            observation_likelihoods(data, shape, state, config.quad_nodes);
        result.likelihood.insert(result.likelihood.end(), lik.begin(),
                                 lik.end());
      }
    }
    if (progress) progress(it, state);
  }
  return result;
}

LpmlResult lpml(std::span<const double> likelihood, std::size_t n_obs) {
  if (n_obs == 0 || likelihood.size() % n_obs != 0) {
    throw DomainError("likelihood matrix is not iterations x n_obs");
  }
  const std::size_t iters = likelihood.size() / n_obs;
  if (iters == 0) throw DomainError("likelihood matrix has no iterations");
  constexpr double kLogFloor = -700.0;
  LpmlResult res;
  res.cpo.resize(n_obs);
  res.log_cpo.resize(n_obs);
  std::vector<double> neg_log(iters);
  for (std::size_t i = 0; i < n_obs; ++i) {
    bool zero = false;
    for (std::size_t t = 0; t < iters; ++t) {
      const double f = likelihood[t * n_obs + i];
      if (std::isnan(f) || f < 0.0) {
        throw DomainError("likelihood values must be non-negative");
      }
      if (f == 0.0) {
        zero = true;
        break;
      }
      double lf = std::log(f);
      if (lf < kLogFloor) {
        lf = kLogFloor;
        ++res.floored;
      }
      neg_log[t] = -lf;
    }
    if (zero) {
      res.zero_observations.push_back(i);
      res.cpo[i] = 0.0;
      res.log_cpo[i] = -std::numeric_limits<double>::infinity();
      continue;
    }
    res.log_cpo[i] =
        std::log(static_cast<double>(iters)) - log_sum_exp(neg_log);
    res.cpo[i] = std::exp(res.log_cpo[i]);
  }
  res.lpml = 0.0;
  for (double v : res.log_cpo) res.lpml += v;
  return res;
}

}  // namespace ppt
