#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairknn/common.hpp"
#include "fairknn/simd/kernels.hpp"
#include "json.hpp"

namespace fairknn {

enum class AttributeKind { kNumerical, kCategorical, kBinary };

const char* to_string(AttributeKind kind);

struct Attribute {
  std::string name;
  AttributeKind kind = AttributeKind::kNumerical;
  double min = 0.0;
  double max = 0.0;
  bool is_protected = false;
};

// Attribute layout, value ranges, protected set and label vocabulary.
// Categorical and binary attributes hold integer codes in [min, max]; the
// KNN distance operates on the code directly.
class Schema {
 public:
  Schema() = default;
  Schema(std::vector<Attribute> attributes, std::string label_name,
         std::vector<std::string> classes);

  static Schema from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  std::size_t dims() const { return attributes_.size(); }
  std::size_t label_count() const { return classes_.size(); }

  const Attribute& attribute(std::size_t i) const { return attributes_.at(i); }
  std::span<const Attribute> attributes() const { return attributes_; }
  std::span<const std::size_t> protected_indices() const { return protected_; }

  std::optional<std::size_t> find(const std::string& name) const;

  const std::string& label_name() const { return label_name_; }
  std::span<const std::string> classes() const { return classes_; }
  std::optional<Label> label_id(const std::string& name) const;

  // Integer codes a categorical/binary attribute may take.
  std::vector<double> discrete_values(std::size_t i) const;

 private:
  std::vector<Attribute> attributes_;
  std::vector<std::size_t> protected_;
  std::string label_name_;
  std::vector<std::string> classes_;
};

struct Sample {
  std::vector<double> x;
  Label y = 0;
};

// Column-major storage of the attribute matrix; the SIMD kernels walk one
// attribute column across many samples at a time.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t dims, std::span<const double> row_major);

  std::size_t rows() const { return rows_; }
  std::size_t dims() const { return dims_; }
  double at(std::size_t row, std::size_t dim) const { return data_[dim * rows_ + row]; }
  const double* column(std::size_t dim) const { return data_.data() + dim * rows_; }
  std::vector<double> row(std::size_t i) const;

  simd::ColumnView view() const { return {data_.data(), rows_, dims_}; }

 private:
  std::size_t rows_ = 0;
  std::size_t dims_ = 0;
  std::vector<double> data_;
};

// The training set T. Immutable once built; relabelled copies share the
// feature matrix.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Schema schema, std::span<const double> row_major, std::vector<Label> labels,
          std::vector<std::size_t> source_index = {});

  const Schema& schema() const { return *schema_; }
  std::size_t size() const { return labels_.size(); }
  std::size_t dims() const { return schema_->dims(); }

  const FeatureMatrix& features() const { return *features_; }
  std::span<const Label> labels() const { return labels_; }
  Label label(std::size_t i) const { return labels_.at(i); }
  std::vector<double> row(std::size_t i) const { return features_->row(i); }
  Sample sample(std::size_t i) const { return {row(i), label(i)}; }

  // Row number in the originally loaded file for each sample.
  std::span<const std::size_t> source_index() const { return source_index_; }

  Dataset with_labels(std::vector<Label> labels) const;

 private:
  std::shared_ptr<const Schema> schema_ = std::make_shared<const Schema>();
  std::shared_ptr<const FeatureMatrix> features_ = std::make_shared<const FeatureMatrix>();
  std::vector<Label> labels_;
  std::vector<std::size_t> source_index_;
};

class LoadError : public std::runtime_error {
 public:
  LoadError(const std::string& what, std::size_t row, std::string column);
  std::size_t row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

Schema load_schema(const std::string& schema_path);
Dataset read_dataset(std::istream& csv, const Schema& schema);
Dataset load_dataset(const std::string& csv_path, const std::string& schema_path);
Dataset load_dataset(const std::string& csv_path, const Schema& schema);

struct PreprocessOptions {
  bool scale = false;
  std::optional<std::size_t> bins;
  // Attributes to discretize when bins is set; empty means every unprotected
  // numerical attribute.
  std::vector<std::string> bin_attributes;
  bool balance = false;
  std::uint64_t seed = 0;
};

// Fitted binning + standard scaling. Fit on the training set, then apply the
// same transform to held-out inputs.
class Preprocessor {
 public:
  static Preprocessor fit(const Dataset& train, const PreprocessOptions& options);

  Dataset apply(const Dataset& data) const;
  std::vector<double> apply(std::span<const double> x) const;
  const Schema& schema() const { return schema_; }

 private:
  Schema source_schema_;
  Schema schema_;
  std::vector<std::size_t> bins_;  // 0 = not binned
  std::vector<double> mean_;
  std::vector<double> scale_;  // 0 = not scaled
};

// Seeded uniform downsampling of every label to the minority label count.
Dataset balance_labels(const Dataset& data, std::uint64_t seed);

Dataset preprocess(const Dataset& data, const PreprocessOptions& options);

enum class PerturbKind { kFixed, kBox, kFullRange };

struct DimPerturbation {
  PerturbKind kind = PerturbKind::kFixed;
  // kBox: additive offset interval. kFullRange: the attribute's absolute
  // [min, max]; turned into an offset once x is known.
  double lo = 0.0;
  double hi = 0.0;
};

// Per-dimension description of the perturbed input set around x.
class PerturbationSpec {
 public:
  PerturbationSpec() = default;
  explicit PerturbationSpec(std::vector<DimPerturbation> dims);

  static PerturbationSpec fixed(std::size_t dims);

  std::size_t dims() const { return dims_.size(); }
  const DimPerturbation& operator[](std::size_t i) const { return dims_[i]; }
  std::span<const DimPerturbation> entries() const { return dims_; }

  // Writes the offset interval of every dimension for the concrete input x.
  void resolve(std::span<const double> x, std::span<double> lo, std::span<double> hi) const;

  bool contains(std::span<const double> x, std::span<const double> candidate) const;

 private:
  std::vector<DimPerturbation> dims_;
};

// Unprotected numerical dims get +/- fraction * range, other unprotected dims
// are fixed, protected dims range over their whole domain.
PerturbationSpec epsilon_spec(const Dataset& data, std::span<const double> x, double fraction);
PerturbationSpec epsilon_spec(const Schema& schema, double fraction);

}  // namespace fairknn
