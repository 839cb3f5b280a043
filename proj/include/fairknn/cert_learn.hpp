#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "fairknn/common.hpp"
#include "fairknn/cross_validation.hpp"
#include "fairknn/dataset.hpp"
#include "fairknn/knn.hpp"

namespace fairknn {

// How the target label must beat its competitors after flipping.
//   kStrict: strictly more votes than every other label.
//   kLowestLabel: the concrete Freq rule, ties resolved to the smaller id.
enum class TieRule { kStrict, kLowestLabel };

// Whether at most n integer flips of other labels to y (never more than a
// label's available count) can make y win the vote under `rule`. Exact:
// for each total F in [0, min(n, #non-y)], each competitor l needs
// max(0, #l - #y - F + strict_l) of its own votes moved, and the sum of those
// deficits must fit in F.
bool flip_feasible(const LabelHistogram& h, Label y, FlipBudget n,
                   TieRule rule = TieRule::kStrict);

// Cheap pre-filter; false implies flip_feasible(h, y, n, rule) is false.
// Condition 1 sums the per-label constraints at the most favourable total
// flip count n; condition 2 bounds the gap to each competitor by 2n.
bool necessary_conditions(const LabelHistogram& h, Label y, FlipBudget n,
                          TieRule rule = TieRule::kStrict);

// Histogram forms of the two per-sample error tests.
bool may_err(const LabelHistogram& h, Label y, FlipBudget n);
bool must_err(const LabelHistogram& h, Label y, FlipBudget n);

bool abs_may_err(const Dataset& train, FlipBudget n, std::size_t k, std::span<const double> x,
                 Label y, Metric metric = Metric::kEuclidean);
bool abs_must_err(const Dataset& train, FlipBudget n, std::size_t k, std::span<const double> x,
                  Label y, Metric metric = Metric::kEuclidean);

struct ErrorBounds {
  std::vector<std::size_t> grid;
  // Exact rate numerators over FoldPartition::rate_denominator().
  std::vector<std::uint64_t> lb_numerator;
  std::vector<std::uint64_t> ub_numerator;
  std::uint64_t denominator = 1;
  // [grid entry][fold] -> held-out sample ids
  std::vector<std::vector<std::vector<std::size_t>>> err_lb;
  std::vector<std::vector<std::vector<std::size_t>>> err_ub;

  double lb(std::size_t g) const { return double(lb_numerator[g]) / double(denominator); }
  double ub(std::size_t g) const { return double(ub_numerator[g]) / double(denominator); }
};

struct KSet {
  std::vector<std::size_t> ks;
  double min_ub = 0.0;

  bool contains(std::size_t k) const { return std::find(ks.begin(), ks.end(), k) != ks.end(); }
};

// {k | LB_k <= min_g UB_g}, in grid order.
template <typename Rate>
std::vector<std::size_t> select_candidates(std::span<const std::size_t> grid,
                                           std::span<const Rate> lb, std::span<const Rate> ub) {
  if (grid.empty() || lb.size() != grid.size() || ub.size() != grid.size()) {
    throw std::invalid_argument("select_candidates: bound arrays do not match the grid");
  }
  const Rate min_ub = *std::min_element(ub.begin(), ub.end());
  std::vector<std::size_t> out;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (lb[g] <= min_ub) out.push_back(grid[g]);
  }
  return out;
}

KSet kset_from_bounds(std::span<const std::size_t> grid, std::span<const double> lb,
                      std::span<const double> ub);

// Per fold and candidate k: err_ub from may_err and err_lb from must_err over
// the held-out samples. The rate bounds additionally account for flips that
// land on held-out samples themselves (at most n of them across all folds),
// which change the label a held-out prediction is scored against.
ErrorBounds abs_error_bounds(const CvNeighbors& table, const FoldPartition& folds,
                             std::span<const Label> labels, std::size_t label_count, FlipBudget n,
                             std::span<const std::size_t> grid);

KSet abs_knn_learn(const ErrorBounds& bounds);

KSet abs_knn_learn(const Dataset& data, FlipBudget n, std::size_t p,
                   std::span<const std::size_t> grid, std::uint64_t seed,
                   Metric metric = Metric::kEuclidean, std::size_t threads = 1);

}  // namespace fairknn
