#include "fairknn/distance_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>

#include "fairknn/simd/kernels.hpp"

namespace fairknn {

DimBound dim_bound(double x_i, double t_i, double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("dim_bound: lo > hi");
  const double a = x_i - t_i;
  const double at_lo = a + lo;
  const double at_hi = a + hi;
  const double sq_lo = at_lo * at_lo;
  const double sq_hi = at_hi * at_hi;
  const bool straddles = at_lo <= 0.0 && at_hi >= 0.0;
  return {straddles ? 0.0 : std::min(sq_lo, sq_hi), std::max(sq_lo, sq_hi)};
}

DistanceBound distance_bound(std::span<const double> x, std::span<const double> t,
                             const PerturbationSpec& spec) {
  if (x.size() != spec.dims() || t.size() != spec.dims()) {
    throw std::invalid_argument("distance_bound: dimension mismatch");
  }
  std::vector<double> lo(spec.dims());
  std::vector<double> hi(spec.dims());
  spec.resolve(x, lo, hi);
  double lb = 0.0;
  double ub = 0.0;
  for (std::size_t d = 0; d < spec.dims(); ++d) {
    const DimBound b = dim_bound(x[d], t[d], lo[d], hi[d]);
    lb = lb + b.lb;
    ub = ub + b.ub;
  }
  return {std::sqrt(lb), std::sqrt(ub)};
}

SquaredBounds squared_bounds(const Dataset& data, std::span<const double> x,
                             const PerturbationSpec& spec) {
  if (x.size() != data.dims() || spec.dims() != data.dims()) {
    throw std::invalid_argument("squared_bounds: dimension mismatch");
  }
  std::vector<double> lo(spec.dims());
  std::vector<double> hi(spec.dims());
  spec.resolve(x, lo, hi);
  SquaredBounds out{std::vector<double>(data.size()), std::vector<double>(data.size())};
  simd::active().interval_bounds(data.features().view(), 0, data.size(), x.data(), lo.data(),
                                 hi.data(), out.lb.data(), out.ub.data());
  return out;
}

std::vector<DistanceBound> distance_bounds(const Dataset& data, std::span<const double> x,
                                           const PerturbationSpec& spec) {
  const SquaredBounds sq = squared_bounds(data, x, spec);
  std::vector<DistanceBound> out(data.size());
  for (std::size_t j = 0; j < data.size(); ++j) out[j] = {std::sqrt(sq.lb[j]), std::sqrt(sq.ub[j])};
  return out;
}

double kth_smallest(std::span<const double> values, std::size_t k) {
  if (k < 1 || k > values.size()) {
    throw std::out_of_range("K=" + std::to_string(k) + " outside [1, " +
                            std::to_string(values.size()) + "]");
  }
  std::priority_queue<double> heap;
  for (double v : values) {
    if (heap.size() < k) {
      heap.push(v);
    } else if (v < heap.top()) {
      heap.pop();
      heap.push(v);
    }
  }
  return heap.top();
}

namespace {

NeighborSet select_within(std::span<const double> lb, double cutoff) {
  NeighborSet out;
  for (std::size_t j = 0; j < lb.size(); ++j) {
    if (lb[j] <= cutoff) out.push_back(j);
  }
  return out;
}

}  // namespace

NeighborSet over_nn_from_bounds(std::span<const DistanceBound> bounds, std::size_t k) {
  std::vector<double> lb(bounds.size());
  std::vector<double> ub(bounds.size());
  for (std::size_t j = 0; j < bounds.size(); ++j) {
    lb[j] = bounds[j].lb;
    ub[j] = bounds[j].ub;
  }
  const double ub_kmin = kth_smallest(ub, k);
  return select_within(lb, ub_kmin * (1.0 + kBoundSlack));
}

NeighborSet over_nn(const Dataset& data, std::span<const double> x, std::size_t k,
                    const PerturbationSpec& spec) {
  if (k < 1 || k > data.size()) {
    throw std::out_of_range("over_nn: K=" + std::to_string(k) + " outside [1, " +
                            std::to_string(data.size()) + "]");
  }
  const SquaredBounds sq = squared_bounds(data, x, spec);
  // Squared comparison: sqrt is monotone, so no roots are needed.
  const double ub_kmin = kth_smallest(sq.ub, k);
  return select_within(sq.lb, ub_kmin * (1.0 + kBoundSlack));
}

NeighborSet over_nn_exact(const Dataset& data, std::span<const double> x, std::size_t k,
                          Metric metric) {
  if (k < 1 || k > data.size()) {
    throw std::out_of_range("over_nn_exact: K=" + std::to_string(k) + " outside [1, " +
                            std::to_string(data.size()) + "]");
  }
  const std::vector<double> keys = distance_keys(data, x, metric);
  return select_within(keys, kth_smallest(keys, k));
}

}  // namespace fairknn
