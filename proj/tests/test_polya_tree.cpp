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

#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "ppt/error.hpp"
#include "ppt/polya_tree.hpp"

using namespace ppt;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

TreeShape shape_of(int k, int depth, double alpha = 1.0, double delta = 1.1) {
  TreeShape s;
  s.k = k;
  s.depth = depth;
  s.alpha = alpha;
  s.delta = delta;
  return s;
}

// All level-m addresses of a k-dimensional tree.
std::vector<NodeAddress> all_nodes(int k, int m) {
  std::vector<NodeAddress> out;
  const int side = 1 << m;
  std::vector<int> j(static_cast<std::size_t>(k), 1);
  while (true) {
    out.push_back({m, j});
    int c = k - 1;
    while (c >= 0 && j[static_cast<std::size_t>(c)] == side) {
      j[static_cast<std::size_t>(c)] = 1;
      --c;
    }
    if (c < 0) break;
    ++j[static_cast<std::size_t>(c)];
  }
  return out;
}

}  // namespace

TEST_CASE("TreeShape validation and storage") {
  CHECK_NOTHROW(shape_of(3, 3).validate());
  CHECK_THROWS_AS(shape_of(3, 3, 1.0, 1.0).validate(), DomainError);
  CHECK_THROWS_AS(shape_of(3, 3, 0.0).validate(), DomainError);
  CHECK_THROWS_AS(shape_of(0, 3).validate(), DomainError);
  const TreeShape s = shape_of(3, 3);
  CHECK(BranchingProbabilities(s).total_size() == 8u + 64u + 512u);
}

TEST_CASE("partition_bounds") {
  const TreeShape s = shape_of(1, 3);
  const auto c0 = CenteringMeasure::standard(1);
  Interval iv = partition_bounds(s, c0, 1, 1, 1);
  CHECK(iv.lower == -kInf);
  CHECK(iv.upper == 0.0);
  iv = partition_bounds(s, c0, 2, 1, 2);
  CHECK(std::abs(iv.lower - -0.6744897502) < 1e-9);
  CHECK(std::abs(iv.lower - oracle::quantile_bisect(0.25)) < 1e-9);
  CHECK(iv.upper == 0.0);
  iv = partition_bounds(s, CenteringMeasure{{1.5}}, 1, 1, 2);
  CHECK(iv.lower == 1.5);
  CHECK(iv.upper == kInf);
  CHECK_THROWS_AS(partition_bounds(s, c0, 1, 1, 3), DomainError);
  CHECK_THROWS_AS(partition_bounds(s, c0, 1, 1, 0), DomainError);
  CHECK_THROWS_AS(partition_bounds(s, c0, 1, 2, 1), DomainError);
}

TEST_CASE("locate") {
  const TreeShape s2 = shape_of(2, 3);
  const std::vector<double> x{0.1, -0.1};
  CHECK(locate(s2, CenteringMeasure::standard(2), x, 1).index == std::vector<int>{2, 1});
  const TreeShape s1 = shape_of(1, 3);
  const auto c = CenteringMeasure::standard(1);
  CHECK(locate(s1, c, std::vector<double>{-0.7}, 2).index[0] == 1);
  CHECK(locate(s1, c, std::vector<double>{-0.67449}, 2).index[0] == 1);
  CHECK(locate(s1, c, std::vector<double>{-0.6744}, 2).index[0] == 2);
  // The exact quantile belongs to the left set.
  const double q = normal_quantile(0.25);
  CHECK(locate(s1, c, std::vector<double>{q}, 2).index[0] == 1);
  CHECK(locate(s1, c, std::vector<double>{0.0}, 1).index[0] == 1);
  CHECK(locate(s1, c, std::vector<double>{1e300}, 3).index[0] == 8);
  CHECK(locate(s1, c, std::vector<double>{-1e300}, 3).index[0] == 1);
  CHECK_THROWS_AS(locate(s1, c, std::vector<double>{std::nan("")}, 2), DomainError);
  CHECK_THROWS_AS(locate(s1, c, std::vector<double>{kInf}, 2), DomainError);
}

TEST_CASE("locate agrees with partition_bounds") {
  const TreeShape s = shape_of(3, 4);
  Rng rng(17);
  const CenteringMeasure c{{0.3, -1.0, 2.0}};
  std::vector<double> x(3);
  for (int i = 0; i < 10000; ++i) {
    for (int l = 0; l < 3; ++l) x[l] = c.mu[l] + 3.0 * rng.standard_normal();
    for (int m = 1; m <= s.depth; ++m) {
      const NodeAddress a = locate(s, c, x, m);
      for (int l = 0; l < 3; ++l) {
        const Interval iv = partition_bounds(s, c, m, l + 1, a.index[l]);
        REQUIRE(x[l] > iv.lower);
        REQUIRE(x[l] <= iv.upper);
      }
    }
  }
}

TEST_CASE("NodeAddress parent halves indices") {
  const NodeAddress a{3, {5, 8, 1}};
  const NodeAddress p = a.parent();
  CHECK(p.level == 2);
  CHECK(p.index == std::vector<int>{3, 4, 1});
}

TEST_CASE("flat index round trip") {
  const TreeShape s = shape_of(3, 3);
  for (int m = 1; m <= 3; ++m) {
    for (std::size_t f = 0; f < s.cells_at(m); ++f) {
      REQUIRE(flat_index(s, address_from_flat(s, m, f)) == f);
    }
  }
  // Row-major with base 2^m per coordinate.
  CHECK(flat_index(s, NodeAddress{2, {2, 3, 4}}) == 1u * 16u + 2u * 4u + 3u);
}

TEST_CASE("prior_alphas") {
  for (double a : prior_alphas(shape_of(2, 3, 1.0, 1.1), NodeAddress{0, {1, 1}})) {
    CHECK(a == doctest::Approx(1.0));
  }
  const auto v = prior_alphas(shape_of(2, 3, 1.0, 1.1), NodeAddress{2, {1, 1}});
  CHECK(v.size() == 4u);
  for (double a : v) {
    CHECK(std::abs(a - std::pow(3.0, 1.1)) < 1e-12);
    CHECK(std::abs(a - 3.3484) < 1e-4);
  }
  for (double a : prior_alphas(shape_of(2, 3, 2.0, 2.0), NodeAddress{1, {1, 1}})) {
    CHECK(a == 8.0);
  }
  CHECK_THROWS_AS(prior_alphas(shape_of(2, 3), NodeAddress{3, {1, 1}}), DomainError);
}

TEST_CASE("sample_prior structure") {
  Rng rng(2);
  const TreeShape s = shape_of(2, 1);
  const auto p = sample_prior(s, rng, false);
  CHECK(p.level(1).size() == 4u);
  double sum = 0.0;
  for (double y : p.level(1)) sum += y;
  CHECK(std::abs(sum - 1.0) < 1e-12);

  const TreeShape s3 = shape_of(3, 3);
  const auto f = sample_prior(s3, rng, true);
  CHECK(f.root_frozen());
  for (double y : f.level(1)) CHECK(y == 0.125);
}

TEST_CASE("prior draws average to 1/2^k") {
  Rng rng(4);
  const TreeShape s = shape_of(2, 2);
  std::vector<double> acc(16, 0.0);
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto p = sample_prior(s, rng, false);
    for (std::size_t f = 0; f < 16; ++f) acc[f] += p.at(2, f);
  }
  // Dir(2^1.1, ...) entries have sd about 0.2, so 3 standard errors ~ 0.006.
  for (double a : acc) CHECK(std::abs(a / n - 0.25) < 0.007);
}

TEST_CASE("set_probability") {
  const TreeShape s = shape_of(2, 3);
  const BranchingProbabilities mean(s);
  for (int m = 1; m <= 3; ++m) {
    for (const auto& node : all_nodes(2, m)) {
      REQUIRE(std::abs(set_probability(s, mean, node) - std::pow(0.5, 2 * m)) < 1e-15);
    }
  }
  BranchingProbabilities p(s);
  auto l1 = p.level(1);
  // Children of the root in row-major order: (1,1), (1,2), (2,1), (2,2).
  l1[0] = 0.4;
  l1[1] = 0.2;
  l1[2] = 0.3;
  l1[3] = 0.1;
  CHECK(set_probability(s, p, NodeAddress{1, {1, 1}}) == 0.4);
  CHECK(set_probability(s, p, NodeAddress{1, {2, 1}}) == 0.3);
  CHECK_THROWS_AS(set_probability(s, p, NodeAddress{4, {1, 1}}), DomainError);
  CHECK_THROWS_AS(set_probability(s, p, NodeAddress{1, {1, 3}}), DomainError);
}

TEST_CASE("set probabilities telescope") {
  Rng rng(8);
  const TreeShape s = shape_of(2, 3);
  const auto p = sample_prior(s, rng, false);
  double leaves = 0.0;
  for (const auto& leaf : all_nodes(2, 3)) leaves += set_probability(s, p, leaf);
  CHECK(std::abs(leaves - 1.0) < 1e-10);
  for (int m = 1; m < 3; ++m) {
    for (const auto& parent : all_nodes(2, m)) {
      double kids = 0.0;
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          kids += set_probability(
              s, p, NodeAddress{m + 1, {2 * parent.index[0] - 1 + a, 2 * parent.index[1] - 1 + b}});
        }
      }
      REQUIRE(std::abs(kids - set_probability(s, p, parent)) < 1e-12);
    }
  }
}

TEST_CASE("tree_density") {
  const TreeShape s = shape_of(2, 3);
  const CenteringMeasure c{{0.5, -0.2}};
  const BranchingProbabilities mean(s);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> x{2 * rng.standard_normal(), 2 * rng.standard_normal()};
    const double f0 = oracle::normal_pdf(x[0], 0.5) * oracle::normal_pdf(x[1], -0.2);
    REQUIRE(std::abs(tree_density(s, mean, c, x) - f0) < 1e-14 * (1 + f0));
  }
  const TreeShape s1 = shape_of(1, 1);
  BranchingProbabilities p(s1);
  p.level(1)[0] = 1.0;
  p.level(1)[1] = 0.0;
  CHECK(tree_density(s1, p, CenteringMeasure::standard(1), std::vector<double>{0.5}) == 0.0);
}

TEST_CASE("tree_density integrates to one") {
  const TreeShape s = shape_of(2, 2);
  Rng rng(12);
  const auto p = sample_prior(s, rng, false);
  const CenteringMeasure c = CenteringMeasure::standard(2);
  // Midpoint tensor rule on [-9, 9]^2; the integrand is piecewise smooth.
  const int n = 1800;
  const double h = 18.0 / n;
  double total = 0.0;
  std::vector<double> x(2);
  for (int i = 0; i < n; ++i) {
    x[0] = -9.0 + (i + 0.5) * h;
    for (int j = 0; j < n; ++j) {
      x[1] = -9.0 + (j + 0.5) * h;
      total += tree_density(s, p, c, x);
    }
  }
  CHECK(std::abs(total * h * h - 1.0) < 0.005);
}

TEST_CASE("tree_density prior mean converges to f0") {
  const TreeShape s = shape_of(3, 3);
  const CenteringMeasure c{{1.0, 0.0, -1.0}};
  const std::vector<double> x{0.7, 0.2, -1.4};
  const double f0 = oracle::normal_pdf(0.7, 1.0) * oracle::normal_pdf(0.2, 0.0) *
                    oracle::normal_pdf(-1.4, -1.0);
  Rng rng(21);
  std::vector<double> v(10000);
  for (double& d : v) d = tree_density(s, sample_prior(s, rng, false), c, x);
  const double se = std::sqrt(oracle::variance(v) / v.size());
  CHECK(std::abs(oracle::mean(v) - f0) < 3 * se);
}

TEST_CASE("log_prior_density_Y") {
  const TreeShape a1 = shape_of(1, 1, 1.0, 1.1);
  BranchingProbabilities p(a1);
  CHECK(std::abs(log_prior_density_Y(a1, p)) < 1e-12);
  const TreeShape a2 = shape_of(1, 1, 2.0, 1.0 + 1e-12);
  // Beta(2, 2) at 1/2 is 6 * 1/4 = 1.5.
  CHECK(std::abs(log_prior_density_Y(a2, p) - std::log(1.5)) < 1e-9);

  Rng rng(5);
  const TreeShape s = shape_of(2, 3, 1.0);
  TreeShape s2 = s;
  s2.alpha = 2.0;
  for (int i = 0; i < 50; ++i) {
    const auto y = sample_prior(s, rng, false);
    REQUIRE(log_prior_density_Y(s, y) != log_prior_density_Y(s2, y));
  }
}

TEST_CASE("log_prior_density_Y skips the frozen root") {
  const TreeShape s = shape_of(2, 2, 1.3, 1.1);
  Rng rng(9);
  const auto y = sample_prior(s, rng, false);
  // The root term alone is the density of a depth-1 tree with the same root.
  BranchingProbabilities root(shape_of(2, 1, 1.3, 1.1));
  for (std::size_t f = 0; f < 4; ++f) root.level(1)[f] = y.at(1, f);
  const double root_term = log_prior_density_Y(shape_of(2, 1, 1.3, 1.1), root);
  auto frozen = y;
  frozen.set_root_frozen(true);
  CHECK(std::abs(log_prior_density_Y(s, frozen) - (log_prior_density_Y(s, y) - root_term)) <
        1e-10);
}

TEST_CASE("log_prior_density_Y boundary convention") {
  BranchingProbabilities p(shape_of(1, 1));
  p.level(1)[0] = 1.0;
  p.level(1)[1] = 0.0;
  CHECK(log_prior_density_Y(shape_of(1, 1, 2.0), p) == -kInf);
  CHECK(std::isfinite(log_prior_density_Y(shape_of(1, 1, 1.0, 1.5), p)));
  CHECK(log_prior_density_Y(shape_of(1, 1, 0.5), p) == kInf);
}
