#include <gtest/gtest.h>

#include <random>

#include "fairknn/cert_predict.hpp"
#include "fairknn/distance_bounds.hpp"
#include "fairknn/knn.hpp"
#include "test_support.hpp"

namespace fairknn {
namespace {

using testing::InstanceShape;

std::vector<std::size_t> iota_set(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

TEST(AbsSameLabelTest, Examples) {
  const std::vector<Label> all_y(6, 1);
  EXPECT_TRUE(abs_same_label(iota_set(6), 5, FlipBudget{0}, 1, all_y, 2));

  // one non-y member: K - |S| - 2n = 5 - 1 - 2 = 2 > 1
  const std::vector<Label> one_off{1, 1, 1, 1, 1, 0};
  EXPECT_TRUE(abs_same_label(iota_set(6), 5, FlipBudget{1}, 1, one_off, 2));

  const std::vector<Label> many_off{0, 0, 0, 1, 1, 1};
  EXPECT_FALSE(abs_same_label(iota_set(6), 3, FlipBudget{0}, 1, many_off, 2));

  // the flip budget alone can overturn any majority
  EXPECT_FALSE(abs_same_label(iota_set(6), 3, FlipBudget{3}, 1, all_y, 2));

  EXPECT_THROW(abs_same_label(iota_set(2), 3, FlipBudget{0}, 1, all_y, 2),
               std::invalid_argument);
}

// Every K-subset of `pool`, each with the flip adversary.
bool brute_force_same_label(std::span<const std::size_t> pool, std::size_t k, std::size_t n,
                            Label y, std::span<const Label> labels, std::size_t q) {
  const std::size_t m = pool.size();
  std::vector<bool> pick(m, false);
  std::fill(pick.begin(), pick.begin() + k, true);
  do {
    std::vector<std::size_t> counts(q, 0);
    for (std::size_t i = 0; i < m; ++i) {
      if (pick[i]) ++counts[labels[pool[i]]];
    }
    if (testing::brute_force_can_dethrone(counts, y, n)) return false;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return true;
}

TEST(AbsSameLabelTest, SoundAgainstSubsetEnumeration) {
  std::mt19937_64 rng(41);
  int certified = 0;
  for (std::size_t trial = 0; trial < 3000; ++trial) {
    const std::size_t q = 2 + rng() % 3;
    const std::size_t m = 1 + rng() % 10;
    const std::size_t k = 1 + rng() % m;
    const std::size_t n = rng() % 3;
    const Label y = static_cast<Label>(rng() % q);
    std::vector<Label> labels(m);
    // skew towards y so that certification actually happens
    for (Label& l : labels) l = rng() % 3 ? y : static_cast<Label>(rng() % q);
    const auto pool = iota_set(m);
    if (abs_same_label(pool, k, FlipBudget{n}, y, labels, q)) {
      ++certified;
      ASSERT_TRUE(brute_force_same_label(pool, k, n, y, labels, q))
          << "trial " << trial << " k=" << k << " n=" << n;
    }
  }
  EXPECT_GT(certified, 300);
}

TEST(AbsPredictSameTest, Examples) {
  Schema s({{"v", AttributeKind::kNumerical, 0, 10, false}}, "y", {"0", "1"});
  const Dataset d(s, std::vector<double>{1, 4, 8}, {0, 1, 0});
  const PerturbationSpec fixed = PerturbationSpec::fixed(1);
  EXPECT_TRUE(abs_predict_same(d, FlipBudget{0}, 1, std::vector<double>{4}, 1, fixed));
  EXPECT_FALSE(abs_predict_same(d, FlipBudget{1}, 1, std::vector<double>{4}, 1, fixed));
  EXPECT_FALSE(abs_predict_same(d, FlipBudget{3}, 3, std::vector<double>{4}, 1, fixed));
  // a box wide enough to reach the label-0 points
  const PerturbationSpec wide({{PerturbKind::kBox, -3, 3}});
  EXPECT_FALSE(abs_predict_same(d, FlipBudget{0}, 1, std::vector<double>{4}, 1, wide));
  EXPECT_TRUE(abs_predict_same_exact(d, FlipBudget{0}, 1, std::vector<double>{4}, 1,
                                     Metric::kManhattan));
}

TEST(AbsPredictSameTest, CertifiedMeansEverySampledPredictionAgrees) {
  std::mt19937_64 rng(42);
  int certified = 0;
  for (std::size_t trial = 0; trial < 300; ++trial) {
    InstanceShape shape{15 + trial % 15, 2, 2, 6};
    const Dataset d = testing::random_dataset(rng, shape);
    const auto x = testing::random_point(rng, shape);
    const std::size_t k = 1 + 2 * (trial % 3);
    const Label y = knn_predict(d, k, x);
    const PerturbationSpec spec = epsilon_spec(d.schema(), 0.05);
    if (!abs_predict_same(d, FlipBudget{0}, k, x, y, spec)) continue;
    ++certified;
    std::vector<double> lo(d.dims()), hi(d.dims());
    spec.resolve(x, lo, hi);
    for (int s = 0; s < 50; ++s) {
      std::vector<double> xp(x);
      for (std::size_t dim = 0; dim < d.dims(); ++dim) {
        if (spec[dim].kind == PerturbKind::kFullRange) {
          xp[dim] = double(rng() % 2);
        } else {
          xp[dim] += lo[dim] + (hi[dim] - lo[dim]) * double(rng() % 1001) / 1000.0;
        }
      }
      const auto nn = testing::naive_knn(d, xp, k);
      ASSERT_EQ(testing::naive_vote(nn, k, d.labels(), 2), y) << "trial " << trial;
    }
  }
  EXPECT_GT(certified, 30);
}

}  // namespace
}  // namespace fairknn
