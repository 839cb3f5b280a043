#include "fairknn/cert_predict.hpp"

#include <algorithm>
#include <stdexcept>

#include "fairknn/distance_bounds.hpp"

namespace fairknn {

bool abs_same_label(std::span<const std::size_t> over_nn, std::size_t k, FlipBudget n, Label y,
                    std::span<const Label> labels, std::size_t label_count) {
  if (over_nn.size() < k) throw std::invalid_argument("abs_same_label: |overNN| < K");
  if (y >= label_count) throw std::invalid_argument("abs_same_label: label out of range");

  // S = the non-y members; y' = Freq(S) with count #y' (0 when S is empty).
  LabelHistogram others(label_count);
  std::size_t s_size = 0;
  for (std::size_t i : over_nn) {
    const Label l = labels[i];
    if (l != y) {
      others.add(l);
      ++s_size;
    }
  }
  if (s_size >= k) return false;
  const auto counts = others.counts();
  const auto top = static_cast<long long>(*std::max_element(counts.begin(), counts.end()));
  // |overNN| >= K guarantees K - |S| y-labelled members exist.
  const long long margin =
      static_cast<long long>(k) - static_cast<long long>(s_size) - 2 * static_cast<long long>(n.n);
  return top < margin;
}

bool abs_predict_same(const Dataset& data, FlipBudget n, std::size_t k,
                      std::span<const double> x, Label y, const PerturbationSpec& spec) {
  const NeighborSet candidates = over_nn(data, x, k, spec);
  return abs_same_label(candidates, k, n, y, data.labels(), data.schema().label_count());
}

bool abs_predict_same_exact(const Dataset& data, FlipBudget n, std::size_t k,
                            std::span<const double> x, Label y, Metric metric) {
  const NeighborSet candidates = over_nn_exact(data, x, k, metric);
  return abs_same_label(candidates, k, n, y, data.labels(), data.schema().label_count());
}

}  // namespace fairknn
