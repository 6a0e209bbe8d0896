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
#include <span>
#include <vector>

#include "ppt/numerics.hpp"

namespace ppt {

// Finite multivariate Polya tree on R^k: depth M, precision alpha and the
// level weight phi(m) = m^delta.
struct TreeShape {
  int k = 3;
  int depth = 3;
  double alpha = 1.0;
  double delta = 1.1;

  // Throws DomainError unless k >= 1, depth >= 1, alpha > 0, delta > 1 and
  // the level-M storage fits in 32-bit cell indices.
  void validate() const;

  int children() const { return 1 << k; }
  std::size_t cells_at(int level) const {
    return std::size_t{1} << (static_cast<unsigned>(k * level));
  }
  // Side length of the per-coordinate partition at `level`.
  std::uint32_t side(int level) const { return std::uint32_t{1} << level; }
  double phi(int m) const;
  // Dirichlet parameter of every child of a node at `parent_level`.
  double child_alpha(int parent_level) const;
};

// Level m and one-based index j (1 <= j_l <= 2^m) of a partition set.
struct NodeAddress {
  int level = 0;
  std::vector<int> index;

  NodeAddress parent() const;
  bool operator==(const NodeAddress&) const = default;
};

// Product of independent unit-precision normals centred at mu.
struct CenteringMeasure {
  std::vector<double> mu;

  static CenteringMeasure standard(int k) {
    return CenteringMeasure{std::vector<double>(static_cast<std::size_t>(k))};
  }
  int dim() const { return static_cast<int>(mu.size()); }
  double log_density(std::span<const double> x) const;
  double density(std::span<const double> x) const;
};

struct Interval {
  double lower;
  double upper;  // the set is (lower, upper]
};

// Branching probabilities of levels 1..M, one flat row-major array per level.
// Entry (m, j) holds Y_{m,j} = F(B_{m,j} | parent). The 2^k siblings that
// share a parent form one Dirichlet vector.
class BranchingProbabilities {
 public:
  BranchingProbabilities() = default;
  // Every vector at its prior mean 1/2^k.
  explicit BranchingProbabilities(const TreeShape& shape,
                                  bool frozen_root = false);

  int k() const { return k_; }
  int depth() const { return depth_; }
  bool root_frozen() const { return frozen_root_; }
  void set_root_frozen(bool frozen);

  std::span<double> level(int m) { return levels_.at(m - 1); }
  std::span<const double> level(int m) const { return levels_.at(m - 1); }
  double at(int m, std::size_t flat) const { return levels_[m - 1][flat]; }

  // Flat index of child `b` (bit l of b, most significant first, selects the
  // upper half in coordinate l) of the node `parent_flat` at level m - 1.
  std::size_t child_flat(int m, std::size_t parent_flat, int b) const;

  std::size_t total_size() const;

 private:
  int k_ = 0;
  int depth_ = 0;
  bool frozen_root_ = false;
  std::vector<std::vector<double>> levels_;
};

std::size_t flat_index(const TreeShape& shape, const NodeAddress& node);
NodeAddress address_from_flat(const TreeShape& shape, int level,
                              std::size_t flat);

Interval partition_bounds(const TreeShape& shape,
                          const CenteringMeasure& center, int level, int coord,
                          int index);

NodeAddress locate(const TreeShape& shape, const CenteringMeasure& center,
                   std::span<const double> x, int level);

// Zero-based coordinates of the level-M set containing x. The level-m
// ancestor of coordinate c is c >> (M - m).
void leaf_coords(const TreeShape& shape, std::span<const double> mu,
                 std::span<const double> x, std::span<std::uint32_t> out);

// Row-major flat index at `level` of the ancestor of the given level-M
// coordinates.
std::size_t ancestor_flat(const TreeShape& shape,
                          std::span<const std::uint32_t> leaf, int level);

std::vector<double> prior_alphas(const TreeShape& shape,
                                 const NodeAddress& node);

BranchingProbabilities sample_prior(const TreeShape& shape, Rng& rng,
                                    bool frozen_root);

double set_probability(const TreeShape& shape,
                       const BranchingProbabilities& probs,
                       const NodeAddress& node);

// prod_m Y_{m, j_m(x)} along the path of the given leaf coordinates.
double path_probability(const TreeShape& shape,
                        const BranchingProbabilities& probs,
                        std::span<const std::uint32_t> leaf);

double tree_density(const TreeShape& shape, const BranchingProbabilities& probs,
                    const CenteringMeasure& center, std::span<const double> x);

// Sum over random internal nodes of log Dir(Y | prior alphas). The frozen
// root vector is constant and contributes nothing.
//
// Boundary convention for entries exactly 0: the term (a - 1) log y is
// -inf when a > 1, 0 when a == 1 and +inf when a < 1. The library's own
// samplers never produce exact zeros.
double log_prior_density_Y(const TreeShape& shape,
                           const BranchingProbabilities& probs);

}  // namespace ppt
