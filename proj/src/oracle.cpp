#include "fairknn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fairknn/cross_validation.hpp"
#include "fairknn/knn.hpp"
#include "fairknn/rng.hpp"

namespace fairknn {

double count_clean_sets(std::size_t samples, std::size_t label_count, FlipBudget n) {
  double total = 1.0;
  double binom = 1.0;
  double alternatives = 1.0;
  for (std::size_t m = 1; m <= n.n && m <= samples; ++m) {
    binom = binom * static_cast<double>(samples - m + 1) / static_cast<double>(m);
    alternatives *= static_cast<double>(label_count - 1);
    total += std::round(binom) * alternatives;
  }
  return total;
}

namespace {

std::string cap_message(double count, double cap) {
  std::ostringstream out;
  out << "clean-set enumeration needs " << count << " datasets, above the cap of " << cap;
  return out.str();
}

}  // namespace

EnumerationCapExceeded::EnumerationCapExceeded(double count, double cap)
    : std::runtime_error(cap_message(count, cap)), count_(count) {}

CleanSetStream::CleanSetStream(std::span<const Label> labels, std::size_t label_count,
                               FlipBudget n, double cap)
    : labels_(labels.begin(), labels.end()),
      label_count_(label_count),
      budget_(std::min(n.n, labels.size())),
      total_(count_clean_sets(labels.size(), label_count, n)) {
  if (label_count < 2) throw std::invalid_argument("need at least two labels");
  if (total_ > cap) throw EnumerationCapExceeded(total_, cap);
}

void CleanSetStream::reset_labels() { choice_.assign(size_, 0); }

bool CleanSetStream::advance_labels() {
  for (std::size_t i = size_; i-- > 0;) {
    if (choice_[i] + 1 < label_count_ - 1) {
      ++choice_[i];
      std::fill(choice_.begin() + static_cast<std::ptrdiff_t>(i) + 1, choice_.end(), 0);
      return true;
    }
  }
  return false;
}

bool CleanSetStream::advance_indices() {
  const std::size_t n = labels_.size();
  for (std::size_t i = size_; i-- > 0;) {
    if (indices_[i] < n - size_ + i) {
      ++indices_[i];
      for (std::size_t j = i + 1; j < size_; ++j) indices_[j] = indices_[j - 1] + 1;
      return true;
    }
  }
  return false;
}

std::optional<CleanSetSpec> CleanSetStream::next() {
  if (done_) return std::nullopt;
  if (!started_) {
    started_ = true;
    return CleanSetSpec{};
  }
  bool moved = false;
  if (size_ > 0) {
    if (advance_labels()) {
      moved = true;
    } else if (advance_indices()) {
      reset_labels();
      moved = true;
    }
  }
  if (!moved) {
    if (size_ + 1 > budget_) {
      done_ = true;
      return std::nullopt;
    }
    ++size_;
    indices_.resize(size_);
    std::iota(indices_.begin(), indices_.end(), std::size_t{0});
    reset_labels();
  }
  CleanSetSpec spec(size_);
  for (std::size_t i = 0; i < size_; ++i) {
    const Label original = labels_[indices_[i]];
    const auto c = static_cast<Label>(choice_[i]);
    spec[i] = {indices_[i], c < original ? c : c + 1};
  }
  return spec;
}

std::vector<Label> apply_flips(std::span<const Label> labels, const CleanSetSpec& flips) {
  std::vector<Label> out(labels.begin(), labels.end());
  for (const Flip& f : flips) out.at(f.index) = f.label;
  return out;
}

std::vector<std::vector<double>> protected_variants(const Schema& schema,
                                                    std::span<const double> x) {
  std::vector<std::vector<double>> out{std::vector<double>(x.begin(), x.end())};
  for (std::size_t d : schema.protected_indices()) {
    const std::vector<double> values = schema.discrete_values(d);
    std::vector<std::vector<double>> next;
    for (const auto& base : out) {
      for (double v : values) {
        next.push_back(base);
        next.back()[d] = v;
      }
    }
    out = std::move(next);
  }
  // keep x itself even when its code lies outside the declared list
  if (std::find(out.begin(), out.end(), std::vector<double>(x.begin(), x.end())) == out.end()) {
    out.emplace_back(x.begin(), x.end());
  }
  return out;
}

namespace {

Label vote(std::span<const std::size_t> neighbours, std::size_t k, std::span<const Label> labels,
           std::size_t label_count) {
  LabelHistogram h(label_count);
  for (std::size_t j = 0; j < k; ++j) h.add(labels[neighbours[j]]);
  return freq_label(h);
}

}  // namespace

bool oracle_fair(const Dataset& data, FlipBudget n, std::span<const double> x, Label y,
                 const OracleOptions& options) {
  const std::size_t q = data.schema().label_count();
  CleanSetStream stream(data.labels(), q, n, options.cap);

  std::vector<std::vector<double>> inputs;
  if (options.variant == OracleVariant::kLabelFlipIndividual) {
    inputs = protected_variants(data.schema(), x);
  } else {
    inputs.emplace_back(x.begin(), x.end());
  }

  std::optional<FoldPartition> folds;
  std::optional<CvNeighbors> table;
  std::size_t depth = options.fixed_k;
  if (options.policy == KPolicy::kRelearn) {
    validate_grid(data.size(), options.folds, options.grid);
    folds = FoldPartition::make(data.size(), options.folds, options.seed);
    depth = *std::max_element(options.grid.begin(), options.grid.end());
    table = CvNeighbors::build(data, *folds, depth, options.metric);
  }

  // Neighbour order per input does not depend on labels.
  std::vector<NeighborSet> neighbours;
  for (const auto& input : inputs) neighbours.push_back(k_nearest(data, input, depth, options.metric));

  while (auto spec = stream.next()) {
    const std::vector<Label> labels = apply_flips(data.labels(), *spec);
    const std::size_t k = options.policy == KPolicy::kRelearn
                              ? knn_learn(*table, *folds, labels, q, options.grid).k
                              : options.fixed_k;
    for (const NeighborSet& nn : neighbours) {
      if (vote(nn, k, labels, q) != y) return false;
    }
  }
  return true;
}

std::optional<Counterexample> sample_falsify_epsilon(const Dataset& data, FlipBudget n,
                                                     std::size_t k, std::span<const double> x,
                                                     Label y, const PerturbationSpec& spec,
                                                     std::size_t samples, std::uint64_t seed,
                                                     Metric metric, double cap) {
  if (spec.dims() != data.dims() || x.size() != data.dims()) {
    throw std::invalid_argument("sample_falsify_epsilon: dimension mismatch");
  }
  const std::size_t q = data.schema().label_count();
  // validates the cap before any sampling work
  CleanSetStream probe(data.labels(), q, n, cap);

  // every code combination over the full-range dimensions
  std::vector<std::size_t> free_dims;
  for (std::size_t d = 0; d < spec.dims(); ++d) {
    if (spec[d].kind == PerturbKind::kFullRange) free_dims.push_back(d);
  }
  std::vector<std::vector<double>> combos{{}};
  for (std::size_t d : free_dims) {
    std::vector<std::vector<double>> next;
    for (const auto& base : combos) {
      for (double v = std::ceil(spec[d].lo); v <= spec[d].hi; v += 1.0) {
        next.push_back(base);
        next.back().push_back(v);
      }
    }
    combos = std::move(next);
  }
  if (combos.empty()) combos.emplace_back();

  Rng rng(seed);
  std::vector<double> candidate(x.size());
  for (std::size_t s = 0; s < samples; ++s) {
    const std::vector<double>& combo = combos[s % combos.size()];
    std::size_t next_free = 0;
    for (std::size_t d = 0; d < spec.dims(); ++d) {
      switch (spec[d].kind) {
        case PerturbKind::kFixed:
          candidate[d] = x[d];
          break;
        case PerturbKind::kBox:
          candidate[d] = x[d] + rng.uniform(spec[d].lo, spec[d].hi);
          break;
        case PerturbKind::kFullRange:
          candidate[d] = combo[next_free++];
          break;
      }
    }
    const NeighborSet nn = k_nearest(data, candidate, k, metric);
    CleanSetStream stream(data.labels(), q, n, cap);
    while (auto flips = stream.next()) {
      LabelHistogram h(q);
      for (std::size_t i : nn) {
        Label l = data.label(i);
        for (const Flip& f : *flips) {
          if (f.index == i) l = f.label;
        }
        h.add(l);
      }
      const Label predicted = freq_label(h);
      if (predicted != y) return Counterexample{candidate, *flips, predicted};
    }
  }
  return std::nullopt;
}

}  // namespace fairknn
