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

#include "ppt/polya_tree.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ppt/error.hpp"

namespace ppt {

void TreeShape::validate() const {
  if (k < 1) throw DomainError("tree dimension k must be >= 1");
  if (depth < 1) throw DomainError("tree depth M must be >= 1");
  if (k * depth > 30) {
    throw DomainError("k * M = " + std::to_string(k * depth) +
                      " exceeds the supported 30 partition bits");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError("precision alpha must be positive");
  }
  if (!(delta > 1.0) || !std::isfinite(delta)) {
    throw DomainError("delta must exceed 1 for an absolutely continuous tree");
  }
}

double TreeShape::phi(int m) const {
  return std::pow(static_cast<double>(m), delta);
}

double TreeShape::child_alpha(int parent_level) const {
  return alpha * phi(parent_level + 1);
}

NodeAddress NodeAddress::parent() const {
  if (level < 1) throw DomainError("the root has no parent");
  NodeAddress up{level - 1, index};
  for (int& j : up.index) j = (j + 1) / 2;
  return up;
}

double CenteringMeasure::log_density(std::span<const double> x) const {
  double acc = 0.0;
  for (std::size_t l = 0; l < mu.size(); ++l) {
    const double z = x[l] - mu[l];
    acc += -0.5 * z * z;
  }
  return acc - 0.5 * static_cast<double>(mu.size()) * std::log(kTwoPi);
}

double CenteringMeasure::density(std::span<const double> x) const {
  return std::exp(log_density(x));
}

BranchingProbabilities::BranchingProbabilities(const TreeShape& shape,
                                               bool frozen_root)
    : k_(shape.k), depth_(shape.depth), frozen_root_(frozen_root) {
  shape.validate();
  const double mean = 1.0 / static_cast<double>(shape.children());
  levels_.reserve(static_cast<std::size_t>(depth_));
  for (int m = 1; m <= depth_; ++m) {
    levels_.emplace_back(shape.cells_at(m), mean);
  }
}

void BranchingProbabilities::set_root_frozen(bool frozen) {
  frozen_root_ = frozen;
  if (frozen) {
    const double mean = 1.0 / static_cast<double>(1 << k_);
    for (double& y : levels_.at(0)) y = mean;
  }
}

std::size_t BranchingProbabilities::child_flat(int m, std::size_t parent_flat,
                                               int b) const {
  const unsigned pbits = static_cast<unsigned>(m - 1);
  const unsigned cbits = static_cast<unsigned>(m);
  const std::size_t pmask = (std::size_t{1} << pbits) - 1;
  std::size_t flat = 0;
  for (int l = 0; l < k_; ++l) {
    const unsigned shift = static_cast<unsigned>(k_ - 1 - l);
    const std::size_t p = (parent_flat >> (pbits * shift)) & pmask;
    const std::size_t bit = (static_cast<unsigned>(b) >> shift) & 1u;
    flat |= (2 * p + bit) << (cbits * shift);
  }
  return flat;
}

std::size_t BranchingProbabilities::total_size() const {
  std::size_t n = 0;
  for (const auto& level : levels_) n += level.size();
  return n;
}

namespace {

void check_address(const TreeShape& shape, const NodeAddress& node,
                   int min_level, int max_level) {
  if (node.level < min_level || node.level > max_level) {
    throw DomainError("node level " + std::to_string(node.level) +
                      " outside [" + std::to_string(min_level) + ", " +
                      std::to_string(max_level) + "]");
  }
  if (static_cast<int>(node.index.size()) != shape.k) {
    throw DomainError("node index has " + std::to_string(node.index.size()) +
                      " coordinates, expected " + std::to_string(shape.k));
  }
  const int side = 1 << node.level;
  for (int j : node.index) {
    if (j < 1 || j > side) {
      throw DomainError("node index " + std::to_string(j) + " outside [1, " +
                        std::to_string(side) + "]");
    }
  }
}

}  // namespace

std::size_t flat_index(const TreeShape& shape, const NodeAddress& node) {
  check_address(shape, node, 0, shape.depth);
  std::size_t flat = 0;
  for (int l = 0; l < shape.k; ++l) {
    flat = (flat << node.level) |
           static_cast<std::size_t>(node.index[static_cast<std::size_t>(l)] - 1);
  }
  return flat;
}

NodeAddress address_from_flat(const TreeShape& shape, int level,
                              std::size_t flat) {
  if (level < 0 || level > shape.depth || flat >= shape.cells_at(level)) {
    throw DomainError("flat index outside level " + std::to_string(level));
  }
  NodeAddress node{level, std::vector<int>(static_cast<std::size_t>(shape.k))};
  const std::size_t mask = (std::size_t{1} << level) - 1;
  for (int l = shape.k - 1; l >= 0; --l) {
    node.index[static_cast<std::size_t>(l)] = static_cast<int>(flat & mask) + 1;
    flat >>= level;
  }
  return node;
}

Interval partition_bounds(const TreeShape& shape,
                          const CenteringMeasure& center, int level, int coord,
                          int index) {
  if (level < 0 || level > shape.depth) {
    throw DomainError("partition level outside [0, M]");
  }
  if (coord < 1 || coord > shape.k || coord > center.dim()) {
    throw DomainError("partition coordinate outside [1, k]");
  }
  const int side = 1 << level;
  if (index < 1 || index > side) {
    throw DomainError("partition index " + std::to_string(index) +
                      " outside [1, " + std::to_string(side) + "]");
  }
  const double mu = center.mu[static_cast<std::size_t>(coord - 1)];
  const double inf = std::numeric_limits<double>::infinity();
  const double lo =
      index == 1 ? -inf : mu + normal_quantile(double(index - 1) / side);
  const double hi = index == side ? inf : mu + normal_quantile(double(index) / side);
  return {lo, hi};
}

void leaf_coords(const TreeShape& shape, std::span<const double> mu,
                 std::span<const double> x, std::span<std::uint32_t> out) {
  const std::uint32_t side = shape.side(shape.depth);
  const double scale = static_cast<double>(side);
  for (int l = 0; l < shape.k; ++l) {
    const std::size_t ll = static_cast<std::size_t>(l);
    const double xl = x[ll];
    if (!std::isfinite(xl)) {
      throw DomainError("cannot locate a non-finite point");
    }
    const double s = normal_cdf(xl - mu[ll]) * scale;
    double c = std::ceil(s) - 1.0;
    const double n = std::nearbyint(s);
    if (std::fabs(s - n) < 1e-9 && n >= 1.0 && n <= scale - 1.0) {
      // Resolve near-boundary points against the quantile itself so that
      // locate and partition_bounds agree on the half-open convention.
      const double boundary = mu[ll] + normal_quantile(n / scale);
      c = xl <= boundary ? n - 1.0 : n;
    }
    if (c < 0.0) c = 0.0;
    if (c > scale - 1.0) c = scale - 1.0;
    out[ll] = static_cast<std::uint32_t>(c);
  }
}

std::size_t ancestor_flat(const TreeShape& shape,
                          std::span<const std::uint32_t> leaf, int level) {
  const unsigned drop = static_cast<unsigned>(shape.depth - level);
  std::size_t flat = 0;
  for (int l = 0; l < shape.k; ++l) {
    flat = (flat << level) | (leaf[static_cast<std::size_t>(l)] >> drop);
  }
  return flat;
}

NodeAddress locate(const TreeShape& shape, const CenteringMeasure& center,
                   std::span<const double> x, int level) {
  if (level < 1 || level > shape.depth) {
    throw DomainError("locate level outside [1, M]");
  }
  if (static_cast<int>(x.size()) != shape.k || center.dim() != shape.k) {
    throw DomainError("point dimension does not match the tree");
  }
  std::vector<std::uint32_t> leaf(static_cast<std::size_t>(shape.k));
  leaf_coords(shape, center.mu, x, leaf);
  NodeAddress node{level, std::vector<int>(static_cast<std::size_t>(shape.k))};
  const unsigned drop = static_cast<unsigned>(shape.depth - level);
  for (std::size_t l = 0; l < leaf.size(); ++l) {
    node.index[l] = static_cast<int>(leaf[l] >> drop) + 1;
  }
  return node;
}

std::vector<double> prior_alphas(const TreeShape& shape,
                                 const NodeAddress& node) {
  if (node.level < 0 || node.level >= shape.depth) {
    throw DomainError("prior_alphas requires an internal node (level < M)");
  }
  return std::vector<double>(static_cast<std::size_t>(shape.children()),
                             shape.child_alpha(node.level));
}

BranchingProbabilities sample_prior(const TreeShape& shape, Rng& rng,
                                    bool frozen_root) {
  BranchingProbabilities probs(shape, frozen_root);
  const int kids = shape.children();
  std::vector<double> alphas(static_cast<std::size_t>(kids));
  std::vector<double> draw(static_cast<std::size_t>(kids));
  for (int m = frozen_root ? 2 : 1; m <= shape.depth; ++m) {
    std::fill(alphas.begin(), alphas.end(), shape.child_alpha(m - 1));
    auto level = probs.level(m);
    const std::size_t parents = shape.cells_at(m - 1);
    for (std::size_t p = 0; p < parents; ++p) {
      sample_dirichlet_into(alphas, rng, draw);
      for (int b = 0; b < kids; ++b) {
        level[probs.child_flat(m, p, b)] = draw[static_cast<std::size_t>(b)];
      }
    }
  }
  return probs;
}

double set_probability(const TreeShape& shape,
                       const BranchingProbabilities& probs,
                       const NodeAddress& node) {
  check_address(shape, node, 0, shape.depth);
  double prob = 1.0;
  NodeAddress cur = node;
  while (cur.level > 0) {
    prob *= probs.at(cur.level, flat_index(shape, cur));
    cur = cur.parent();
  }
  return prob;
}

double path_probability(const TreeShape& shape,
                        const BranchingProbabilities& probs,
                        std::span<const std::uint32_t> leaf) {
  double prob = 1.0;
  for (int m = 1; m <= shape.depth; ++m) {
    prob *= probs.at(m, ancestor_flat(shape, leaf, m));
  }
  return prob;
}

double tree_density(const TreeShape& shape, const BranchingProbabilities& probs,
                    const CenteringMeasure& center, std::span<const double> x) {
  if (static_cast<int>(x.size()) != shape.k || center.dim() != shape.k) {
    throw DomainError("point dimension does not match the tree");
  }
  std::uint32_t leaf[32];
  leaf_coords(shape, center.mu, x,
              std::span<std::uint32_t>(leaf, static_cast<std::size_t>(shape.k)));
  const double p = path_probability(
      shape, probs,
      std::span<const std::uint32_t>(leaf, static_cast<std::size_t>(shape.k)));
  const double cells = std::ldexp(1.0, shape.k * shape.depth);
  return p * cells * center.density(x);
}

double log_prior_density_Y(const TreeShape& shape,
                           const BranchingProbabilities& probs) {
  const double kids = static_cast<double>(shape.children());
  double total = 0.0;
  for (int m = probs.root_frozen() ? 2 : 1; m <= shape.depth; ++m) {
    const double a = shape.child_alpha(m - 1);
    const double parents = static_cast<double>(shape.cells_at(m - 1));
    double sum_log = 0.0;
    for (double y : probs.level(m)) {
      if (y > 0.0) {
        sum_log += std::log(y);
      } else if (a != 1.0) {
        return a > 1.0 ? -std::numeric_limits<double>::infinity()
                       : std::numeric_limits<double>::infinity();
      }
    }
    total += parents * (std::lgamma(kids * a) - kids * std::lgamma(a)) +
             (a - 1.0) * sum_log;
  }
  return total;
}

}  // namespace ppt
