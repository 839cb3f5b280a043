#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fairknn/dataset.hpp"
#include "fairknn/knn.hpp"

namespace fairknn {

// Interval [lb, ub] on the (true, not squared) distance between any input in
// the perturbation set and one training sample.
struct DistanceBound {
  double lb = 0.0;
  double ub = 0.0;
};

// Exact range of (x_i - t_i + delta)^2 over delta in [lo, hi].
struct DimBound {
  double lb = 0.0;
  double ub = 0.0;
};

DimBound dim_bound(double x_i, double t_i, double lo, double hi);

DistanceBound distance_bound(std::span<const double> x, std::span<const double> t,
                             const PerturbationSpec& spec);

// Squared lower/upper bounds for every training sample, via the active SIMD
// kernel.
struct SquaredBounds {
  std::vector<double> lb;
  std::vector<double> ub;
};
SquaredBounds squared_bounds(const Dataset& data, std::span<const double> x,
                             const PerturbationSpec& spec);

std::vector<DistanceBound> distance_bounds(const Dataset& data, std::span<const double> x,
                                           const PerturbationSpec& spec);

// Relative widening applied to UB_Kmin before comparing lower bounds, so that
// last-bit rounding differences between the bound arithmetic and a concrete
// distance evaluation at a perturbed input can never drop a true neighbour.
inline constexpr double kBoundSlack = 1e-12;

// K-th smallest value (1-based K) via a bounded max-heap of size K.
double kth_smallest(std::span<const double> values, std::size_t k);

// {t | LB(t) <= UB_Kmin} from precomputed bounds; ascending index order.
NeighborSet over_nn_from_bounds(std::span<const DistanceBound> bounds, std::size_t k);

// Superset of every K-nearest-neighbour set of every input in the
// perturbation set (Euclidean metric). Ascending index order; size >= K.
NeighborSet over_nn(const Dataset& data, std::span<const double> x, std::size_t k,
                    const PerturbationSpec& spec);

// Degenerate (unperturbed) over_nn for any metric: every sample whose
// distance does not exceed the K-th smallest distance.
NeighborSet over_nn_exact(const Dataset& data, std::span<const double> x, std::size_t k,
                          Metric metric);

}  // namespace fairknn
