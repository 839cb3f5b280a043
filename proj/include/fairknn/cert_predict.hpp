#pragma once

#include <cstddef>
#include <span>

#include "fairknn/common.hpp"
#include "fairknn/dataset.hpp"
#include "fairknn/knn.hpp"

namespace fairknn {

// True only if every size-K subset of over_nn, under every assignment of at
// most n label flips, has y as its strict most frequent label. Strictness
// makes the verdict independent of how the concrete predictor breaks ties.
// Throws std::invalid_argument if |over_nn| < K.
bool abs_same_label(std::span<const std::size_t> over_nn, std::size_t k, FlipBudget n, Label y,
                    std::span<const Label> labels, std::size_t label_count);

// over_nn under `spec`, then abs_same_label. True means KNN_predict(T', K, x')
// = y for every x' in the perturbation set and every T' within n flips of T.
bool abs_predict_same(const Dataset& data, FlipBudget n, std::size_t k,
                      std::span<const double> x, Label y, const PerturbationSpec& spec);

// Variant for unperturbed inputs under any metric.
bool abs_predict_same_exact(const Dataset& data, FlipBudget n, std::size_t k,
                            std::span<const double> x, Label y, Metric metric);

}  // namespace fairknn
