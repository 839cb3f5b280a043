#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fairknn/common.hpp"
#include "fairknn/dataset.hpp"

namespace fairknn {

// p-fold split of sample indices, built from a seeded shuffle. Fold sizes
// differ by at most one.
//
// Mean fold error rates (1/p) sum_i e_i/|G_i| are kept as exact integer
// numerators over the common denominator p * lcm(|G_i|), so comparisons
// between candidate K values (and between concrete and abstract rates) never
// depend on floating-point rounding.
class FoldPartition {
 public:
  static FoldPartition make(std::size_t samples, std::size_t p, std::uint64_t seed);

  std::size_t folds() const { return members_.size(); }
  std::size_t samples() const { return fold_of_.size(); }
  std::size_t fold_of(std::size_t i) const { return fold_of_.at(i); }
  std::span<const std::size_t> members(std::size_t fold) const { return members_.at(fold); }
  std::size_t fold_size(std::size_t fold) const { return members_.at(fold).size(); }

  // Numerator contribution of one error in `fold`.
  std::uint64_t weight(std::size_t fold) const { return weights_.at(fold); }
  std::uint64_t rate_denominator() const { return denominator_; }
  std::uint64_t rate_numerator(std::span<const std::size_t> errors_per_fold) const;
  double rate(std::uint64_t numerator) const {
    return static_cast<double>(numerator) / static_cast<double>(denominator_);
  }

 private:
  std::vector<std::size_t> fold_of_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<std::uint64_t> weights_;
  std::uint64_t denominator_ = 1;
};

// Largest admissible candidate: floor(|T| (p-1) / p), which is also the size
// of the smallest training split.
std::size_t max_candidate_k(std::size_t samples, std::size_t p);

// Throws ConfigError on an empty grid, duplicates, or entries outside
// [1, max_candidate_k].
void validate_grid(std::size_t samples, std::size_t p, std::span<const std::size_t> grid);

// For every sample, its kmax nearest neighbours (by (distance, index)) among
// the samples outside its own fold. Labels never affect this table, so it is
// shared by the concrete learner, the abstract learner and the oracle.
class CvNeighbors {
 public:
  static CvNeighbors build(const Dataset& data, const FoldPartition& folds, std::size_t kmax,
                           Metric metric = Metric::kEuclidean, std::size_t threads = 1);

  std::size_t kmax() const { return kmax_; }
  std::size_t samples() const { return ids_.size() / (kmax_ == 0 ? 1 : kmax_); }
  std::span<const std::uint32_t> of(std::size_t i) const {
    return {ids_.data() + i * kmax_, kmax_};
  }

 private:
  std::size_t kmax_ = 0;
  std::vector<std::uint32_t> ids_;
};

// Misclassified held-out count per fold for candidate k under `labels`.
std::vector<std::size_t> fold_errors(const CvNeighbors& table, const FoldPartition& folds,
                                     std::span<const Label> labels, std::size_t label_count,
                                     std::size_t k);

struct LearnResult {
  std::size_t k = 0;
  std::vector<std::uint64_t> rate_numerators;  // one per grid entry
};

// argmin over the grid of mean fold error rate; ties go to the smallest k.
LearnResult knn_learn(const CvNeighbors& table, const FoldPartition& folds,
                      std::span<const Label> labels, std::size_t label_count,
                      std::span<const std::size_t> grid);

std::size_t knn_learn(const Dataset& data, std::size_t p, std::span<const std::size_t> grid,
                      std::uint64_t seed, Metric metric = Metric::kEuclidean,
                      std::size_t threads = 1);

inline constexpr std::size_t kDefaultFolds = 5;
inline constexpr std::size_t kDefaultGrid[] = {1, 3, 5, 7, 9, 15, 25};

}  // namespace fairknn
