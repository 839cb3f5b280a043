#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fairknn/distance_bounds.hpp"
#include "fairknn/knn.hpp"
#include "test_support.hpp"

namespace fairknn {
namespace {

using testing::InstanceShape;

TEST(DimBoundTest, ThreeCases) {
  // x - t = A; offset interval [-1, 1]
  auto a = dim_bound(2, 0, -1, 1);
  EXPECT_EQ(a.lb, 1.0);
  EXPECT_EQ(a.ub, 9.0);
  auto b = dim_bound(0.5, 0, -1, 1);
  EXPECT_EQ(b.lb, 0.0);
  EXPECT_EQ(b.ub, 2.25);
  auto c = dim_bound(-3, 0, -1, 1);
  EXPECT_EQ(c.lb, 4.0);
  EXPECT_EQ(c.ub, 16.0);
  EXPECT_THROW(dim_bound(0, 0, 1, -1), std::invalid_argument);
}

TEST(DistanceBoundTest, Examples) {
  const std::vector<double> x{0, 0}, t{3, 4};
  const PerturbationSpec box({{PerturbKind::kBox, -1, 1}, {PerturbKind::kBox, -1, 1}});
  const DistanceBound b = distance_bound(x, t, box);
  EXPECT_DOUBLE_EQ(b.lb, std::sqrt(13.0));
  EXPECT_DOUBLE_EQ(b.ub, std::sqrt(41.0));

  const DistanceBound f = distance_bound(x, t, PerturbationSpec::fixed(2));
  EXPECT_EQ(f.lb, 5.0);
  EXPECT_EQ(f.ub, 5.0);
}

TEST(DistanceBoundTest, FullRangeDimension) {
  // protected code in {0,1,2}; x sits at 2, t at 0 -> offset [-2, 0] makes
  // the gap anywhere in [0, 2]
  const PerturbationSpec spec({{PerturbKind::kFullRange, 0, 2}});
  const DistanceBound b = distance_bound(std::vector<double>{2}, std::vector<double>{0}, spec);
  EXPECT_EQ(b.lb, 0.0);
  EXPECT_EQ(b.ub, 2.0);
}

TEST(KthSmallestTest, AgreesWithSort) {
  std::mt19937_64 rng(31);
  for (std::size_t trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + rng() % 40);
    for (double& x : v) x = double(rng() % 10);
    const std::size_t k = 1 + rng() % v.size();
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(kth_smallest(v, k), sorted[k - 1]);
  }
  EXPECT_THROW(kth_smallest(std::vector<double>{1, 2}, 3), std::out_of_range);
}

TEST(OverNnTest, BoundsExample) {
  const std::vector<DistanceBound> bounds{
      {25.4, 29.4}, {30.1, 34.1}, {35.3, 39.3}, {37.2, 41.2}, {85.5, 90.5}};
  EXPECT_EQ(over_nn_from_bounds(bounds, 3), (NeighborSet{0, 1, 2, 3}));
}

TEST(OverNnTest, FixedSpecGivesConcreteNeighboursPlusTies) {
  std::mt19937_64 rng(32);
  for (std::size_t trial = 0; trial < 200; ++trial) {
    InstanceShape shape{10 + trial % 30, 2, 2, 4};
    const Dataset d = testing::random_dataset(rng, shape);
    const auto x = testing::random_point(rng, shape);
    const std::size_t k = 1 + trial % 7;
    const NeighborSet over = over_nn(d, x, k, PerturbationSpec::fixed(d.dims()));
    // every sample no farther than the k-th concrete neighbour
    const auto nn = testing::naive_knn(d, x, k);
    const double kth = testing::naive_distance(d.row(nn.back()), x);
    NeighborSet expected;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (testing::naive_distance(d.row(i), x) <= kth) expected.push_back(i);
    }
    EXPECT_EQ(over, expected);
    EXPECT_EQ(over_nn_exact(d, x, k, Metric::kEuclidean), expected);
  }
}

TEST(OverNnTest, ExactManhattan) {
  Schema s({{"a", AttributeKind::kNumerical, -9, 9, false},
            {"b", AttributeKind::kNumerical, -9, 9, false}},
           "y", {"0", "1"});
  // Manhattan distances from the origin: 3, 3, 4, 2; Euclidean would rank
  // (2,1) ahead of (3,0).
  const Dataset d(s, std::vector<double>{3, 0, 2, 1, 0, 4, 1, 1}, {0, 1, 0, 1});
  EXPECT_EQ(over_nn_exact(d, std::vector<double>{0, 0}, 2, Metric::kManhattan),
            (NeighborSet{0, 1, 3}));
}

TEST(SquaredBoundsTest, AgreesWithPerSampleBound) {
  std::mt19937_64 rng(33);
  for (std::size_t trial = 0; trial < 100; ++trial) {
    InstanceShape shape{5 + trial % 40, 1 + trial % 4, 2, 9};
    const Dataset d = testing::random_dataset(rng, shape);
    const auto x = testing::random_point(rng, shape);
    const PerturbationSpec spec = epsilon_spec(d.schema(), 0.05 * (trial % 4));
    const SquaredBounds sq = squared_bounds(d, x, spec);
    const auto bounds = distance_bounds(d, x, spec);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const DistanceBound one = distance_bound(x, d.row(i), spec);
      EXPECT_DOUBLE_EQ(std::sqrt(sq.lb[i]), one.lb);
      EXPECT_DOUBLE_EQ(std::sqrt(sq.ub[i]), one.ub);
      EXPECT_DOUBLE_EQ(bounds[i].lb, one.lb);
      EXPECT_DOUBLE_EQ(bounds[i].ub, one.ub);
      EXPECT_LE(one.lb, one.ub);
    }
  }
}

TEST(OverNnTest, GrowsWithPerturbation) {
  std::mt19937_64 rng(34);
  for (std::size_t trial = 0; trial < 100; ++trial) {
    InstanceShape shape{30, 3, 2, 8};
    const Dataset d = testing::random_dataset(rng, shape);
    const auto x = testing::random_point(rng, shape);
    const std::size_t k = 1 + trial % 5;
    NeighborSet prev = over_nn(d, x, k, PerturbationSpec::fixed(d.dims()));
    for (double eps : {0.0, 0.02, 0.1, 0.3}) {
      const NeighborSet cur = over_nn(d, x, k, epsilon_spec(d.schema(), eps));
      EXPECT_TRUE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
      EXPECT_GE(cur.size(), k);
      prev = cur;
    }
  }
}

}  // namespace
}  // namespace fairknn
