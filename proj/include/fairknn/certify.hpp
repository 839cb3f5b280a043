#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fairknn/cert_learn.hpp"
#include "fairknn/common.hpp"
#include "fairknn/cross_validation.hpp"
#include "fairknn/dataset.hpp"
#include "fairknn/oracle.hpp"
#include "json.hpp"

namespace fairknn {

// Which fairness definition is certified on top of label flipping.
//   kFlip: the input is fixed.
//   kIndividual: protected attributes range over their domain.
//   kEpsilon: as kIndividual, plus an epsilon box on unprotected numerical
//             attributes.
enum class Variant { kFlip, kIndividual, kEpsilon };

const char* to_string(Variant variant);
Variant parse_variant(const std::string& text);

struct RunConfig {
  std::string train_path;
  std::string test_path;
  std::string schema_path;
  std::string out_dir;

  double epsilon_fraction = 0.01;
  std::size_t n_flips = 0;
  std::size_t folds = kDefaultFolds;
  std::vector<std::size_t> grid{std::begin(kDefaultGrid), std::end(kDefaultGrid)};
  std::uint64_t seed = 0;
  Metric metric = Metric::kEuclidean;
  Variant variant = Variant::kFlip;
  std::vector<std::string> group_by;
  std::size_t threads = 0;  // 0 = all available cores
  PreprocessOptions preprocess;

  // oracle-compare only
  double oracle_cap = kDefaultEnumerationCap;
  bool oracle_relearn = true;
  std::size_t falsify_samples = 0;

  nlohmann::json to_json() const;
  // Range checks that need no data; throws ConfigError.
  void validate() const;
};

// Perturbation set for one variant (epsilon fraction ignored unless kEpsilon).
PerturbationSpec variant_spec(const Schema& schema, Variant variant, double epsilon_fraction);

enum class Outcome { kCertified, kUnknown, kError };
const char* to_string(Outcome outcome);

struct Certificate {
  std::size_t test_index = 0;
  std::size_t source_row = 0;
  Variant variant = Variant::kFlip;
  Outcome outcome = Outcome::kUnknown;
  std::vector<std::size_t> kset;
  double seconds = 0.0;
  Label baseline = 0;
  std::string error;
};

struct GroupStats {
  std::vector<double> key;  // one code per group-by attribute
  std::size_t count = 0;
  std::size_t certified = 0;
};

struct BatchReport {
  nlohmann::json config;
  std::vector<std::string> class_names;
  std::size_t learned_k = 0;
  std::vector<std::uint64_t> learn_rates;  // exact numerators, one per grid entry
  ErrorBounds bounds;
  KSet kset;
  double kset_seconds = 0.0;
  std::vector<Certificate> rows;
  std::vector<std::string> group_attributes;
  std::vector<GroupStats> groups;

  std::size_t certified() const;
  nlohmann::json summary() const;
};

// Training data prepared once per batch: fold split, neighbour table,
// concrete K, KSet.
struct LearnedModel {
  FoldPartition folds;
  CvNeighbors table;
  std::size_t k = 0;
  std::vector<std::uint64_t> learn_rates;
  ErrorBounds bounds;
  KSet kset;
  double kset_seconds = 0.0;
};

LearnedModel learn_model(const Dataset& train, const RunConfig& config);

// Certifies one input against a learned model (Lines 1-2 reuse model.k;
// Lines 4-8 loop over model.kset). `seconds` covers the abstract phase.
Certificate certify_input(const Dataset& train, const LearnedModel& model,
                          std::span<const double> x, const RunConfig& config);

BatchReport certify_batch(const Dataset& train, const Dataset& test, const RunConfig& config);

// Loads, preprocesses and certifies per config, writing certificates.csv
// and summary.json into config.out_dir when it is set.
BatchReport certify_batch(const RunConfig& config);

struct OracleRow {
  std::size_t test_index = 0;
  Outcome certifier = Outcome::kUnknown;
  std::string oracle;  // fair | unfair | unavailable
  bool falsified = false;
  double certifier_seconds = 0.0;
  double oracle_seconds = 0.0;
};

struct OracleReport {
  nlohmann::json config;
  std::vector<OracleRow> rows;
  std::size_t soundness_violations = 0;

  nlohmann::json summary() const;
};

OracleReport oracle_compare(const Dataset& train, const Dataset& test, const RunConfig& config);
OracleReport oracle_compare(const RunConfig& config);

// Report writers. Timing columns/keys are the only fields that vary between
// identical runs.
void write_certificates_csv(const BatchReport& report, std::ostream& out);
void write_oracle_csv(const OracleReport& report, std::ostream& out);
void write_batch_report(const BatchReport& report, const std::string& dir);
void write_oracle_report(const OracleReport& report, const std::string& dir);

}  // namespace fairknn
