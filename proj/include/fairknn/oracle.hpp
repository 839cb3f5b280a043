#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "fairknn/common.hpp"
#include "fairknn/dataset.hpp"

namespace fairknn {

// Ground truth by explicit enumeration of every clean dataset within n label
// flips (and every protected-attribute variant of the input). Built only on
// the concrete KNN engine; shares nothing with the abstract certifier.

struct Flip {
  std::size_t index = 0;
  Label label = 0;
  bool operator==(const Flip&) const = default;
};

// Flips applied to T to obtain one clean set; indices strictly increasing,
// each new label differs from the original.
using CleanSetSpec = std::vector<Flip>;

inline constexpr double kDefaultEnumerationCap = 1e6;

// 1 + sum_{m=1..n} C(|T|, m) (q-1)^m, as a double (saturates gracefully).
double count_clean_sets(std::size_t samples, std::size_t label_count, FlipBudget n);

class EnumerationCapExceeded : public std::runtime_error {
 public:
  EnumerationCapExceeded(double count, double cap);
  double count() const { return count_; }

 private:
  double count_;
};

class CleanSetStream {
 public:
  // Throws EnumerationCapExceeded when count_clean_sets exceeds cap.
  CleanSetStream(std::span<const Label> labels, std::size_t label_count, FlipBudget n,
                 double cap = kDefaultEnumerationCap);

  std::optional<CleanSetSpec> next();
  double total() const { return total_; }

 private:
  bool advance_labels();
  bool advance_indices();
  void reset_labels();

  std::vector<Label> labels_;
  std::size_t label_count_;
  std::size_t budget_;
  double total_;
  std::size_t size_ = 0;  // current flip count m
  bool started_ = false;
  bool done_ = false;
  std::vector<std::size_t> indices_;
  std::vector<std::size_t> choice_;  // alternative 0..q-2 per chosen index
};

std::vector<Label> apply_flips(std::span<const Label> labels, const CleanSetSpec& flips);

// Every combination of protected-attribute codes, applied to x (x itself
// included). Returns {x} when the schema has no protected attributes.
std::vector<std::vector<double>> protected_variants(const Schema& schema,
                                                    std::span<const double> x);

enum class OracleVariant { kLabelFlip, kLabelFlipIndividual };
enum class KPolicy { kFixed, kRelearn };

struct OracleOptions {
  OracleVariant variant = OracleVariant::kLabelFlip;
  KPolicy policy = KPolicy::kRelearn;
  std::size_t fixed_k = 1;  // used with KPolicy::kFixed
  std::size_t folds = 5;
  std::vector<std::size_t> grid;
  std::uint64_t seed = 0;
  Metric metric = Metric::kEuclidean;
  double cap = kDefaultEnumerationCap;
};

// True iff every clean set (and, for the individual variant, every
// protected variant of x) leads the concrete pipeline to predict y.
bool oracle_fair(const Dataset& data, FlipBudget n, std::span<const double> x, Label y,
                 const OracleOptions& options);

struct Counterexample {
  std::vector<double> x;
  CleanSetSpec flips;
  Label predicted = 0;
};

// Uniform samples from the perturbation box (protected dimensions cycle
// through every code combination); each is checked against every clean set
// with K fixed. Returns the first input whose prediction differs from y.
std::optional<Counterexample> sample_falsify_epsilon(const Dataset& data, FlipBudget n,
                                                     std::size_t k, std::span<const double> x,
                                                     Label y, const PerturbationSpec& spec,
                                                     std::size_t samples, std::uint64_t seed,
                                                     Metric metric = Metric::kEuclidean,
                                                     double cap = kDefaultEnumerationCap);

}  // namespace fairknn
