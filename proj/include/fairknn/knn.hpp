#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fairknn/common.hpp"
#include "fairknn/dataset.hpp"

namespace fairknn {

// Sample indices into a Dataset. Concrete neighbor sets hold exactly K
// entries ordered by (distance, index); abstract ones (over_nn) hold at
// least K entries in index order.
using NeighborSet = std::vector<std::size_t>;

class LabelHistogram {
 public:
  explicit LabelHistogram(std::size_t label_count) : counts_(label_count, 0) {}
  LabelHistogram(std::initializer_list<std::size_t> counts) : counts_(counts) {}
  explicit LabelHistogram(std::vector<std::size_t> counts) : counts_(std::move(counts)) {}

  static LabelHistogram of(std::span<const Label> labels, std::span<const std::size_t> members,
                           std::size_t label_count);

  void add(Label y, std::size_t count = 1) { counts_.at(y) += count; }
  std::size_t operator[](Label y) const { return counts_.at(y); }
  std::size_t& operator[](Label y) { return counts_.at(y); }
  std::size_t label_count() const { return counts_.size(); }
  std::size_t total() const;
  std::span<const std::size_t> counts() const { return counts_; }

 private:
  std::vector<std::size_t> counts_;
};

// Euclidean or Manhattan distance. Throws on length mismatch.
double distance(std::span<const double> a, std::span<const double> b,
                Metric metric = Metric::kEuclidean);

// Most frequent label; ties go to the smallest label id. Throws on an empty
// histogram.
Label freq_label(const LabelHistogram& h);

// Ordering key per training sample: squared distance for Euclidean, plain
// distance for Manhattan. Monotone in the true distance.
std::vector<double> distance_keys(const Dataset& data, std::span<const double> x, Metric metric);

// The K samples minimising (distance, index). Throws if K is not in [1, |T|].
NeighborSet k_nearest(const Dataset& data, std::span<const double> x, std::size_t k,
                      Metric metric = Metric::kEuclidean);

Label knn_predict(const Dataset& data, std::size_t k, std::span<const double> x,
                  Metric metric = Metric::kEuclidean);

}  // namespace fairknn
