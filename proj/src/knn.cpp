#include "fairknn/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fairknn/simd/kernels.hpp"

namespace fairknn {

const char* to_string(Metric metric) {
  return metric == Metric::kEuclidean ? "euclidean" : "manhattan";
}

Metric parse_metric(const std::string& text) {
  if (text == "euclidean") return Metric::kEuclidean;
  if (text == "manhattan") return Metric::kManhattan;
  throw ConfigError("unknown metric '" + text + "'");
}

LabelHistogram LabelHistogram::of(std::span<const Label> labels,
                                  std::span<const std::size_t> members, std::size_t label_count) {
  LabelHistogram h(label_count);
  for (std::size_t i : members) h.add(labels[i]);
  return h;
}

std::size_t LabelHistogram::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
}

double distance(std::span<const double> a, std::span<const double> b, Metric metric) {
  if (a.size() != b.size()) throw std::invalid_argument("distance: vector length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += metric == Metric::kEuclidean ? diff * diff : std::fabs(diff);
  }
  return metric == Metric::kEuclidean ? std::sqrt(sum) : sum;
}

Label freq_label(const LabelHistogram& h) {
  if (h.total() == 0) throw std::invalid_argument("freq_label: empty histogram");
  Label best = 0;
  for (Label y = 1; y < h.label_count(); ++y) {
    if (h[y] > h[best]) best = y;
  }
  return best;
}

std::vector<double> distance_keys(const Dataset& data, std::span<const double> x, Metric metric) {
  if (x.size() != data.dims()) throw std::invalid_argument("input dimension mismatch");
  std::vector<double> keys(data.size());
  const simd::Kernels& k = simd::active();
  if (metric == Metric::kEuclidean) {
    k.squared_l2(data.features().view(), 0, data.size(), x.data(), keys.data());
  } else {
    k.manhattan(data.features().view(), 0, data.size(), x.data(), keys.data());
  }
  return keys;
}

NeighborSet k_nearest(const Dataset& data, std::span<const double> x, std::size_t k,
                      Metric metric) {
  if (k < 1 || k > data.size()) {
    throw std::out_of_range("k_nearest: K=" + std::to_string(k) + " outside [1, " +
                            std::to_string(data.size()) + "]");
  }
  const std::vector<double> keys = distance_keys(data, x, metric);
  NeighborSet order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto closer = [&](std::size_t a, std::size_t b) {
    return keys[a] < keys[b] || (keys[a] == keys[b] && a < b);
  };
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1), order.end(),
                   closer);
  order.resize(k);
  std::sort(order.begin(), order.end(), closer);
  return order;
}

Label knn_predict(const Dataset& data, std::size_t k, std::span<const double> x, Metric metric) {
  const NeighborSet nn = k_nearest(data, x, k, metric);
  return freq_label(LabelHistogram::of(data.labels(), nn, data.schema().label_count()));
}

}  // namespace fairknn
