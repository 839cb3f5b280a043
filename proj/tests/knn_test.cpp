#include <gtest/gtest.h>

#include <random>

#include "fairknn/cross_validation.hpp"
#include "fairknn/knn.hpp"
#include "test_support.hpp"

namespace fairknn {
namespace {

using testing::InstanceShape;

TEST(DistanceTest, Basics) {
  const std::vector<double> o{0, 0}, p{3, 4};
  EXPECT_EQ(distance(o, o), 0.0);
  EXPECT_EQ(distance(o, p), 5.0);
  EXPECT_EQ(distance(o, p, Metric::kManhattan), 7.0);
  EXPECT_THROW(distance(o, std::vector<double>{1}), std::invalid_argument);
}

TEST(FreqLabelTest, MajorityAndTies) {
  EXPECT_EQ(freq_label(LabelHistogram{2, 1}), 0u);
  EXPECT_EQ(freq_label(LabelHistogram{2, 2}), 0u);
  EXPECT_EQ(freq_label(LabelHistogram{0, 3, 1}), 1u);
  EXPECT_EQ(freq_label(LabelHistogram{1, 3, 3}), 1u);
  EXPECT_THROW(freq_label(LabelHistogram{0, 0}), std::invalid_argument);
}

Dataset line(std::vector<double> xs, std::vector<Label> ys) {
  Schema s({{"x", AttributeKind::kNumerical, -100, 100, false}}, "y", {"0", "1"});
  return Dataset(s, xs, std::move(ys));
}

TEST(KNearestTest, FullSetAndTieBreak) {
  const Dataset d = line({5, -1, 1, 3}, {0, 0, 1, 1});
  const std::vector<double> x{0};
  EXPECT_EQ(k_nearest(d, x, 4), (NeighborSet{1, 2, 3, 0}));
  // samples 1 and 2 are equidistant; the lower index takes the only slot
  EXPECT_EQ(k_nearest(d, x, 1), (NeighborSet{1}));
  EXPECT_THROW(k_nearest(d, x, 0), std::out_of_range);
  EXPECT_THROW(k_nearest(d, x, 5), std::out_of_range);
}

TEST(KNearestTest, MatchesFullSort) {
  std::mt19937_64 rng(11);
  for (std::size_t trial = 0; trial < 200; ++trial) {
    InstanceShape shape{20, 3, 2, 5};
    const Dataset d = testing::random_dataset(rng, shape);
    const auto x = testing::random_point(rng, shape);
    for (std::size_t k : {1u, 5u, 20u}) {
      EXPECT_EQ(k_nearest(d, x, k), testing::naive_knn(d, x, k));
    }
  }
}

TEST(KnnPredictTest, Examples) {
  const Dataset unanimous = line({1, 2, 3}, {1, 1, 1});
  for (std::size_t k = 1; k <= 3; ++k) EXPECT_EQ(knn_predict(unanimous, k, std::vector{9.0}), 1u);
  const Dataset mixed = line({0, 1, 2, 10}, {1, 1, 0, 0});
  EXPECT_EQ(knn_predict(mixed, 3, std::vector{0.0}), 1u);
}

TEST(KnnPredictTest, MatchesNaivePredictor) {
  std::mt19937_64 rng(12);
  for (std::size_t trial = 0; trial < 300; ++trial) {
    InstanceShape shape{15 + trial % 20, 2, 2 + trial % 2, 6};
    const Dataset d = testing::random_dataset(rng, shape);
    const auto x = testing::random_point(rng, shape);
    const std::size_t k = 1 + trial % 7;
    const auto nn = testing::naive_knn(d, x, k);
    EXPECT_EQ(knn_predict(d, k, x), testing::naive_vote(nn, k, d.labels(), shape.classes));
  }
}

TEST(FoldPartitionTest, NearEqualAndSeeded) {
  const FoldPartition a = FoldPartition::make(23, 5, 1);
  const FoldPartition b = FoldPartition::make(23, 5, 1);
  std::size_t total = 0;
  for (std::size_t f = 0; f < 5; ++f) {
    EXPECT_GE(a.fold_size(f), 4u);
    EXPECT_LE(a.fold_size(f), 5u);
    total += a.fold_size(f);
    EXPECT_EQ(a.weight(f) * a.fold_size(f) * 5, a.rate_denominator());
  }
  EXPECT_EQ(total, 23u);
  for (std::size_t i = 0; i < 23; ++i) EXPECT_EQ(a.fold_of(i), b.fold_of(i));
  EXPECT_THROW(FoldPartition::make(3, 4, 0), ConfigError);
  EXPECT_THROW(FoldPartition::make(10, 1, 0), ConfigError);
}

TEST(ValidateGridTest, Bounds) {
  EXPECT_NO_THROW(validate_grid(10, 5, std::vector<std::size_t>{1, 8}));
  EXPECT_THROW(validate_grid(10, 5, std::vector<std::size_t>{9}), ConfigError);
  EXPECT_THROW(validate_grid(10, 5, std::vector<std::size_t>{0}), ConfigError);
  EXPECT_THROW(validate_grid(10, 5, std::vector<std::size_t>{}), ConfigError);
  EXPECT_THROW(validate_grid(10, 5, std::vector<std::size_t>{3, 3}), ConfigError);
}

TEST(CvNeighborsTest, MatchesNaiveOrder) {
  std::mt19937_64 rng(13);
  for (std::size_t trial = 0; trial < 40; ++trial) {
    InstanceShape shape{30 + trial * 7, 3, 2, 5};
    const Dataset d = testing::random_dataset(rng, shape);
    const FoldPartition folds = FoldPartition::make(d.size(), 2 + trial % 4, trial);
    const std::size_t kmax = std::min<std::size_t>(9, max_candidate_k(d.size(), folds.folds()));
    const auto naive = testing::naive_cv_orders(d, folds);
    for (std::size_t threads : {1u, 3u}) {
      const CvNeighbors table = CvNeighbors::build(d, folds, kmax, Metric::kEuclidean, threads);
      for (std::size_t i = 0; i < d.size(); ++i) {
        const auto got = table.of(i);
        ASSERT_EQ(std::vector<std::size_t>(got.begin(), got.end()),
                  std::vector<std::size_t>(naive[i].begin(), naive[i].begin() + kmax))
            << "sample " << i;
      }
    }
  }
}

TEST(CvNeighborsTest, SpansSeveralTiles) {
  std::mt19937_64 rng(14);
  InstanceShape shape{5000, 2, 2, 40};
  const Dataset d = testing::random_dataset(rng, shape);
  const FoldPartition folds = FoldPartition::make(d.size(), 5, 3);
  const CvNeighbors table = CvNeighbors::build(d, folds, 4, Metric::kEuclidean, 2);
  for (std::size_t i : {0u, 1234u, 4999u}) {
    const std::size_t f = folds.fold_of(i);
    auto naive = testing::naive_order(d, d.row(i), [&](std::size_t j) {
      return folds.fold_of(j) != f;
    });
    naive.resize(4);
    const auto got = table.of(i);
    EXPECT_EQ(std::vector<std::size_t>(got.begin(), got.end()), naive);
  }
}

TEST(KnnLearnTest, SingleCandidateAndTies) {
  const Dataset pure = line({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, {1, 1, 1, 1, 1, 1, 1, 1, 1, 1});
  EXPECT_EQ(knn_learn(pure, 5, std::vector<std::size_t>{5}, 0), 5u);
  // every candidate has zero error; the smallest wins whatever the order
  EXPECT_EQ(knn_learn(pure, 5, std::vector<std::size_t>{7, 3, 5}, 0), 3u);
}

TEST(KnnLearnTest, PicksSmallestArgmin) {
  std::mt19937_64 rng(16);
  const std::vector<std::size_t> grid{9, 1, 5, 3, 7};
  for (std::size_t trial = 0; trial < 50; ++trial) {
    const Dataset d = testing::random_dataset(rng, InstanceShape{40, 2, 2, 6});
    const FoldPartition folds = FoldPartition::make(d.size(), 4, trial);
    const CvNeighbors table = CvNeighbors::build(d, folds, 9);
    const auto result = knn_learn(table, folds, d.labels(), 2, grid);
    const std::size_t chosen = std::find(grid.begin(), grid.end(), result.k) - grid.begin();
    for (std::size_t g = 0; g < grid.size(); ++g) {
      EXPECT_GE(result.rate_numerators[g], result.rate_numerators[chosen]);
      if (grid[g] < result.k) EXPECT_GT(result.rate_numerators[g], result.rate_numerators[chosen]);
      EXPECT_EQ(result.rate_numerators[g],
                folds.rate_numerator(fold_errors(table, folds, d.labels(), 2, grid[g])));
    }
  }
}

TEST(KnnLearnTest, MatchesNaiveLearner) {
  std::mt19937_64 rng(15);
  for (std::size_t trial = 0; trial < 150; ++trial) {
    InstanceShape shape{12 + trial % 30, 1 + trial % 3, 2 + trial % 2, 5};
    const Dataset d = testing::random_dataset(rng, shape);
    const std::size_t p = 2 + trial % 4;
    std::vector<std::size_t> grid;
    for (std::size_t k = 1; k <= max_candidate_k(d.size(), p) && grid.size() < 5; k += 2) {
      grid.push_back(k);
    }
    const FoldPartition folds = FoldPartition::make(d.size(), p, trial);
    const auto naive = testing::naive_cv_orders(d, folds);
    EXPECT_EQ(knn_learn(d, p, grid, trial),
              testing::naive_cv_learn(naive, folds, d.labels(), shape.classes, grid));
  }
}

}  // namespace
}  // namespace fairknn
