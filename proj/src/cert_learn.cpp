#include "fairknn/cert_learn.hpp"

#include <numeric>
#include <string>

namespace fairknn {
namespace {

using i64 = long long;

void check_label(const LabelHistogram& h, Label y) {
  if (y >= h.label_count()) {
    throw std::invalid_argument("label " + std::to_string(y) + " outside histogram of " +
                                std::to_string(h.label_count()) + " labels");
  }
}

// 1 when l must end strictly below y, 0 when a tie still lets y win.
i64 strictness(Label l, Label y, TieRule rule) {
  return rule == TieRule::kStrict || l < y ? 1 : 0;
}

}  // namespace

bool flip_feasible(const LabelHistogram& h, Label y, FlipBudget n, TieRule rule) {
  check_label(h, y);
  const i64 cy = static_cast<i64>(h[y]);
  const i64 others = static_cast<i64>(h.total()) - cy;
  const i64 max_flips = std::min(static_cast<i64>(n.n), others);
  for (i64 total = 0; total <= max_flips; ++total) {
    i64 needed = 0;
    for (Label l = 0; l < h.label_count(); ++l) {
      if (l == y) continue;
      needed += std::max<i64>(0, static_cast<i64>(h[l]) - cy - total + strictness(l, y, rule));
    }
    if (needed <= total) return true;
  }
  return false;
}

bool necessary_conditions(const LabelHistogram& h, Label y, FlipBudget n, TieRule rule) {
  check_label(h, y);
  const i64 q = static_cast<i64>(h.label_count());
  const i64 cy = static_cast<i64>(h[y]);
  const i64 budget = static_cast<i64>(n.n);
  const i64 others = static_cast<i64>(h.total()) - cy;

  // Condition 1: sum over l != y of (#l - f_l) < (q-1)(#y + F), F = n.
  const i64 lhs = others - budget;
  const i64 rhs = (q - 1) * (cy + budget);
  const bool cond1 = rule == TieRule::kStrict ? lhs < rhs : lhs <= rhs;

  // Condition 2: the strongest competitor l_p can lose at most 2n votes of
  // margin, i.e. (#l_p - #y)/2 < n; checked for every competitor so the
  // tie rule can be applied per label.
  bool cond2 = true;
  for (Label l = 0; l < h.label_count() && cond2; ++l) {
    if (l == y) continue;
    const i64 gap = static_cast<i64>(h[l]) - cy;
    cond2 = gap < 2 * budget + (1 - strictness(l, y, rule));
  }
  return cond1 && cond2;
}

bool may_err(const LabelHistogram& h, Label y, FlipBudget n) {
  check_label(h, y);
  // Moving m = min(n, #y) votes from y to a competitor l is the strongest
  // attack on the held-out prediction; it errs once l wins under the
  // smallest-id tie-break used by the concrete predictor.
  const i64 cy = static_cast<i64>(h[y]);
  const i64 moved = std::min(static_cast<i64>(n.n), cy);
  for (Label l = 0; l < h.label_count(); ++l) {
    if (l == y) continue;
    if (static_cast<i64>(h[l]) + moved - (cy - moved) >= (l > y ? 1 : 0)) return true;
  }
  return false;
}

bool must_err(const LabelHistogram& h, Label y, FlipBudget n) {
  if (!necessary_conditions(h, y, n, TieRule::kLowestLabel)) return true;
  return !flip_feasible(h, y, n, TieRule::kLowestLabel);
}

bool abs_may_err(const Dataset& train, FlipBudget n, std::size_t k, std::span<const double> x,
                 Label y, Metric metric) {
  const NeighborSet nn = k_nearest(train, x, k, metric);
  return may_err(LabelHistogram::of(train.labels(), nn, train.schema().label_count()), y, n);
}

bool abs_must_err(const Dataset& train, FlipBudget n, std::size_t k, std::span<const double> x,
                  Label y, Metric metric) {
  const NeighborSet nn = k_nearest(train, x, k, metric);
  return must_err(LabelHistogram::of(train.labels(), nn, train.schema().label_count()), y, n);
}

KSet kset_from_bounds(std::span<const std::size_t> grid, std::span<const double> lb,
                      std::span<const double> ub) {
  KSet out;
  out.ks = select_candidates<double>(grid, lb, ub);
  out.min_ub = *std::min_element(ub.begin(), ub.end());
  return out;
}

ErrorBounds abs_error_bounds(const CvNeighbors& table, const FoldPartition& folds,
                             std::span<const Label> labels, std::size_t label_count, FlipBudget n,
                             std::span<const std::size_t> grid) {
  validate_grid(folds.samples(), folds.folds(), grid);
  if (labels.size() != folds.samples()) throw std::invalid_argument("label count mismatch");
  const std::size_t p = folds.folds();

  // Folds in descending weight (= ascending size) order, for spending the
  // held-out flip budget where it moves the mean rate the most.
  std::vector<std::size_t> by_weight(p);
  std::iota(by_weight.begin(), by_weight.end(), std::size_t{0});
  std::stable_sort(by_weight.begin(), by_weight.end(), [&](std::size_t a, std::size_t b) {
    return folds.weight(a) > folds.weight(b);
  });

  ErrorBounds out;
  out.grid.assign(grid.begin(), grid.end());
  out.denominator = folds.rate_denominator();
  LabelHistogram h(label_count);
  for (std::size_t k : grid) {
    if (k > table.kmax()) throw std::out_of_range("candidate K exceeds neighbour table");
    std::vector<std::vector<std::size_t>> lb_sets(p);
    std::vector<std::vector<std::size_t>> ub_sets(p);
    for (std::size_t i = 0; i < folds.samples(); ++i) {
      h = LabelHistogram(label_count);
      const auto nn = table.of(i);
      for (std::size_t j = 0; j < k; ++j) h.add(labels[nn[j]]);
      const std::size_t f = folds.fold_of(i);
      if (may_err(h, labels[i], n)) ub_sets[f].push_back(i);
      if (must_err(h, labels[i], n)) lb_sets[f].push_back(i);
    }

    std::uint64_t ub = 0;
    std::uint64_t lb = 0;
    for (std::size_t f = 0; f < p; ++f) {
      ub += ub_sets[f].size() * folds.weight(f);
      lb += lb_sets[f].size() * folds.weight(f);
    }
    std::size_t raise = n.n;
    std::size_t lower = n.n;
    for (std::size_t f : by_weight) {
      const std::size_t up = std::min(raise, folds.fold_size(f) - ub_sets[f].size());
      const std::size_t down = std::min(lower, lb_sets[f].size());
      ub += up * folds.weight(f);
      lb -= down * folds.weight(f);
      raise -= up;
      lower -= down;
    }
    out.ub_numerator.push_back(ub);
    out.lb_numerator.push_back(lb);
    out.err_ub.push_back(std::move(ub_sets));
    out.err_lb.push_back(std::move(lb_sets));
  }
  return out;
}

KSet abs_knn_learn(const ErrorBounds& bounds) {
  KSet out;
  out.ks = select_candidates<std::uint64_t>(bounds.grid, bounds.lb_numerator, bounds.ub_numerator);
  const auto min_ub = *std::min_element(bounds.ub_numerator.begin(), bounds.ub_numerator.end());
  out.min_ub = double(min_ub) / double(bounds.denominator);
  return out;
}

KSet abs_knn_learn(const Dataset& data, FlipBudget n, std::size_t p,
                   std::span<const std::size_t> grid, std::uint64_t seed, Metric metric,
                   std::size_t threads) {
  validate_grid(data.size(), p, grid);
  const FoldPartition folds = FoldPartition::make(data.size(), p, seed);
  const std::size_t kmax = *std::max_element(grid.begin(), grid.end());
  const CvNeighbors table = CvNeighbors::build(data, folds, kmax, metric, threads);
  return abs_knn_learn(
      abs_error_bounds(table, folds, data.labels(), data.schema().label_count(), n, grid));
}

}  // namespace fairknn
