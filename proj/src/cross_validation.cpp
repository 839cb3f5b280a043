#include "fairknn/cross_validation.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

#include "fairknn/knn.hpp"
#include "fairknn/rng.hpp"
#include "fairknn/simd/kernels.hpp"
#include "fairknn/work_pool.hpp"
#include "topk.hpp"

namespace fairknn {

FoldPartition FoldPartition::make(std::size_t samples, std::size_t p, std::uint64_t seed) {
  if (p < 2 || p > samples) {
    throw ConfigError("fold count p=" + std::to_string(p) + " must be in [2, " +
                      std::to_string(samples) + "]");
  }
  std::vector<std::size_t> order(samples);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);

  FoldPartition out;
  out.fold_of_.resize(samples);
  out.members_.resize(p);
  for (std::size_t pos = 0; pos < samples; ++pos) {
    out.fold_of_[order[pos]] = pos % p;
  }
  for (std::size_t i = 0; i < samples; ++i) out.members_[out.fold_of_[i]].push_back(i);

  std::uint64_t lcm = 1;
  for (const auto& m : out.members_) lcm = std::lcm(lcm, static_cast<std::uint64_t>(m.size()));
  out.weights_.resize(p);
  for (std::size_t f = 0; f < p; ++f) out.weights_[f] = lcm / out.members_[f].size();
  out.denominator_ = lcm * p;
  return out;
}

std::uint64_t FoldPartition::rate_numerator(std::span<const std::size_t> errors_per_fold) const {
  std::uint64_t num = 0;
  for (std::size_t f = 0; f < folds(); ++f) num += errors_per_fold[f] * weights_[f];
  return num;
}

std::size_t max_candidate_k(std::size_t samples, std::size_t p) {
  return p == 0 ? 0 : samples * (p - 1) / p;
}

void validate_grid(std::size_t samples, std::size_t p, std::span<const std::size_t> grid) {
  if (grid.empty()) throw ConfigError("candidate K grid is empty");
  const std::size_t limit = max_candidate_k(samples, p);
  std::set<std::size_t> seen;
  for (std::size_t k : grid) {
    if (k < 1 || k > limit) {
      throw ConfigError("candidate K=" + std::to_string(k) + " outside [1, " +
                        std::to_string(limit) + "] for |T|=" + std::to_string(samples) +
                        ", p=" + std::to_string(p));
    }
    if (!seen.insert(k).second) throw ConfigError("duplicate candidate K=" + std::to_string(k));
  }
}

namespace {

constexpr std::size_t kTileRows = 2048;
constexpr std::size_t kQueryBatch = 128;

}  // namespace

CvNeighbors CvNeighbors::build(const Dataset& data, const FoldPartition& folds, std::size_t kmax,
                               Metric metric, std::size_t threads) {
  const std::size_t n = data.size();
  if (folds.samples() != n) throw std::invalid_argument("fold partition does not match dataset");
  if (kmax < 1 || kmax > max_candidate_k(n, folds.folds())) {
    throw ConfigError("neighbour table depth " + std::to_string(kmax) + " too large");
  }

  // Reorder samples fold-major so a query's training split is the whole
  // matrix minus one contiguous row range.
  std::vector<std::size_t> order;
  std::vector<std::size_t> fold_begin(folds.folds() + 1, 0);
  for (std::size_t f = 0; f < folds.folds(); ++f) {
    fold_begin[f] = order.size();
    order.insert(order.end(), folds.members(f).begin(), folds.members(f).end());
  }
  fold_begin[folds.folds()] = n;

  const std::size_t dims = data.dims();
  std::vector<double> permuted(n * dims);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t d = 0; d < dims; ++d) permuted[r * dims + d] = data.features().at(order[r], d);
  }
  const FeatureMatrix matrix(n, dims, permuted);
  const simd::ColumnView view = matrix.view();
  const simd::Kernels& kernels = simd::active();
  const auto kernel = metric == Metric::kEuclidean ? kernels.squared_l2 : kernels.manhattan;

  CvNeighbors out;
  out.kmax_ = kmax;
  out.ids_.resize(n * kmax);

  parallel_for(n, threads, kQueryBatch, [&](std::size_t q_begin, std::size_t q_end) {
    const std::size_t batch = q_end - q_begin;
    std::vector<detail::TopK> best(batch, detail::TopK(kmax));
    std::vector<double> query(dims);
    std::vector<double> keys(kTileRows);
    std::vector<double> queries(batch * dims);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t d = 0; d < dims; ++d) queries[b * dims + d] = matrix.at(q_begin + b, d);
    }

    auto scan = [&](std::size_t b, std::size_t begin, std::size_t end) {
      if (begin >= end) return;
      kernel(view, begin, end, queries.data() + b * dims, keys.data());
      detail::TopK& top = best[b];
      double cut = top.threshold();
      for (std::size_t r = begin; r < end; ++r) {
        const double key = keys[r - begin];
        if (key > cut) continue;
        top.offer(key, static_cast<std::uint32_t>(order[r]));
        cut = top.threshold();
      }
    };

    for (std::size_t t0 = 0; t0 < n; t0 += kTileRows) {
      const std::size_t t1 = std::min(n, t0 + kTileRows);
      for (std::size_t b = 0; b < batch; ++b) {
        const std::size_t f = folds.fold_of(order[q_begin + b]);
        const std::size_t skip0 = fold_begin[f];
        const std::size_t skip1 = fold_begin[f + 1];
        scan(b, t0, std::min(t1, skip0));
        scan(b, std::max(t0, skip1), t1);
      }
    }
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t sample = order[q_begin + b];
      std::copy(best[b].ids().begin(), best[b].ids().end(), out.ids_.begin() + sample * kmax);
    }
  });
  return out;
}

std::vector<std::size_t> fold_errors(const CvNeighbors& table, const FoldPartition& folds,
                                     std::span<const Label> labels, std::size_t label_count,
                                     std::size_t k) {
  if (k < 1 || k > table.kmax()) throw std::out_of_range("candidate K exceeds neighbour table");
  std::vector<std::size_t> errors(folds.folds(), 0);
  LabelHistogram h(label_count);
  for (std::size_t i = 0; i < folds.samples(); ++i) {
    h = LabelHistogram(label_count);
    const auto nn = table.of(i);
    for (std::size_t j = 0; j < k; ++j) h.add(labels[nn[j]]);
    if (freq_label(h) != labels[i]) ++errors[folds.fold_of(i)];
  }
  return errors;
}

LearnResult knn_learn(const CvNeighbors& table, const FoldPartition& folds,
                      std::span<const Label> labels, std::size_t label_count,
                      std::span<const std::size_t> grid) {
  validate_grid(folds.samples(), folds.folds(), grid);
  LearnResult result;
  std::uint64_t best = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const std::uint64_t num =
        folds.rate_numerator(fold_errors(table, folds, labels, label_count, grid[g]));
    result.rate_numerators.push_back(num);
    if (g == 0 || num < best || (num == best && grid[g] < result.k)) {
      best = num;
      result.k = grid[g];
    }
  }
  return result;
}

std::size_t knn_learn(const Dataset& data, std::size_t p, std::span<const std::size_t> grid,
                      std::uint64_t seed, Metric metric, std::size_t threads) {
  validate_grid(data.size(), p, grid);
  const FoldPartition folds = FoldPartition::make(data.size(), p, seed);
  const std::size_t kmax = *std::max_element(grid.begin(), grid.end());
  const CvNeighbors table = CvNeighbors::build(data, folds, kmax, metric, threads);
  return knn_learn(table, folds, data.labels(), data.schema().label_count(), grid).k;
}

}  // namespace fairknn
