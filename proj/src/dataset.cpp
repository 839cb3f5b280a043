#include "fairknn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "fairknn/rng.hpp"

namespace fairknn {

const char* to_string(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::kNumerical:
      return "numerical";
    case AttributeKind::kCategorical:
      return "categorical";
    case AttributeKind::kBinary:
      return "binary";
  }
  return "unknown";
}

namespace {

AttributeKind parse_kind(const std::string& text) {
  if (text == "numerical") return AttributeKind::kNumerical;
  if (text == "categorical") return AttributeKind::kCategorical;
  if (text == "binary") return AttributeKind::kBinary;
  throw ConfigError("unknown attribute kind '" + text + "'");
}

bool is_integer(double v) { return std::isfinite(v) && std::floor(v) == v; }

}  // namespace

Schema::Schema(std::vector<Attribute> attributes, std::string label_name,
               std::vector<std::string> classes)
    : attributes_(std::move(attributes)),
      label_name_(std::move(label_name)),
      classes_(std::move(classes)) {
  if (attributes_.empty()) throw ConfigError("schema has no attributes");
  if (classes_.size() < 2) throw ConfigError("schema needs at least two label classes");
  std::set<std::string> names;
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    const Attribute& a = attributes_[i];
    if (!names.insert(a.name).second) throw ConfigError("duplicate attribute '" + a.name + "'");
    if (!(a.min <= a.max)) throw ConfigError("attribute '" + a.name + "' has min > max");
    if (a.kind != AttributeKind::kNumerical && !(is_integer(a.min) && is_integer(a.max))) {
      throw ConfigError("attribute '" + a.name + "' needs integer code bounds");
    }
    if (a.is_protected) {
      if (a.kind == AttributeKind::kNumerical) {
        throw ConfigError("protected attribute '" + a.name + "' must be categorical or binary");
      }
      protected_.push_back(i);
    }
  }
  if (names.count(label_name_)) throw ConfigError("label column collides with an attribute name");
  std::set<std::string> class_names(classes_.begin(), classes_.end());
  if (class_names.size() != classes_.size()) throw ConfigError("duplicate label class");
}

Schema Schema::from_json(const nlohmann::json& doc) {
  try {
    std::vector<Attribute> attributes;
    for (const auto& a : doc.at("attributes")) {
      Attribute attr;
      attr.name = a.at("name").get<std::string>();
      attr.kind = parse_kind(a.at("kind").get<std::string>());
      attr.min = a.at("min").get<double>();
      attr.max = a.at("max").get<double>();
      attr.is_protected = a.value("protected", false);
      attributes.push_back(std::move(attr));
    }
    const auto& label = doc.at("label");
    return Schema(std::move(attributes), label.at("name").get<std::string>(),
                  label.at("classes").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed schema: ") + e.what());
  }
}

nlohmann::json Schema::to_json() const {
  nlohmann::json attrs = nlohmann::json::array();
  for (const Attribute& a : attributes_) {
    attrs.push_back({{"name", a.name},
                     {"kind", to_string(a.kind)},
                     {"min", a.min},
                     {"max", a.max},
                     {"protected", a.is_protected}});
  }
  return {{"attributes", attrs}, {"label", {{"name", label_name_}, {"classes", classes_}}}};
}

std::optional<std::size_t> Schema::find(const std::string& name) const {
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (attributes_[i].name == name) return i;
  }
  return std::nullopt;
}

std::optional<Label> Schema::label_id(const std::string& name) const {
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    if (classes_[i] == name) return static_cast<Label>(i);
  }
  return std::nullopt;
}

std::vector<double> Schema::discrete_values(std::size_t i) const {
  const Attribute& a = attributes_.at(i);
  std::vector<double> values;
  for (double v = std::ceil(a.min); v <= a.max; v += 1.0) values.push_back(v);
  return values;
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t dims,
                             std::span<const double> row_major)
    : rows_(rows), dims_(dims), data_(rows * dims) {
  if (row_major.size() != rows * dims) {
    throw std::invalid_argument("feature matrix size does not match rows * dims");
  }
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t d = 0; d < dims; ++d) data_[d * rows + r] = row_major[r * dims + d];
  }
}

std::vector<double> FeatureMatrix::row(std::size_t i) const {
  std::vector<double> out(dims_);
  for (std::size_t d = 0; d < dims_; ++d) out[d] = at(i, d);
  return out;
}

Dataset::Dataset(Schema schema, std::span<const double> row_major, std::vector<Label> labels,
                 std::vector<std::size_t> source_index)
    : schema_(std::make_shared<const Schema>(std::move(schema))),
      features_(std::make_shared<const FeatureMatrix>(labels.size(), schema_->dims(), row_major)),
      labels_(std::move(labels)),
      source_index_(std::move(source_index)) {
  if (source_index_.empty()) {
    source_index_.resize(labels_.size());
    std::iota(source_index_.begin(), source_index_.end(), std::size_t{0});
  }
  if (source_index_.size() != labels_.size()) {
    throw std::invalid_argument("source index table does not match sample count");
  }
  for (Label y : labels_) {
    if (y >= schema_->label_count()) throw std::invalid_argument("label id out of range");
  }
}

Dataset Dataset::with_labels(std::vector<Label> labels) const {
  if (labels.size() != labels_.size()) throw std::invalid_argument("label count mismatch");
  for (Label y : labels) {
    if (y >= schema_->label_count()) throw std::invalid_argument("label id out of range");
  }
  Dataset copy = *this;
  copy.labels_ = std::move(labels);
  return copy;
}

LoadError::LoadError(const std::string& what, std::size_t row, std::string column)
    : std::runtime_error(what), row_(row), column_(std::move(column)) {}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(trim(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

std::optional<double> parse_double(const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace

Schema load_schema(const std::string& schema_path) {
  std::ifstream in(schema_path);
  if (!in) throw ConfigError("cannot open schema file " + schema_path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("schema " + schema_path + " is not valid JSON: " + e.what());
  }
  return Schema::from_json(doc);
}

Dataset read_dataset(std::istream& csv, const Schema& schema) {
  std::string line;
  if (!std::getline(csv, line)) throw LoadError("empty CSV: missing header row", 0, "");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const std::vector<std::string> header = split_csv_line(line);

  // column position of each attribute, and of the label
  std::vector<std::size_t> position(schema.dims());
  std::optional<std::size_t> label_pos;
  std::map<std::string, std::size_t> by_name;
  for (std::size_t c = 0; c < header.size(); ++c) by_name[header[c]] = c;
  for (std::size_t d = 0; d < schema.dims(); ++d) {
    auto it = by_name.find(schema.attribute(d).name);
    if (it == by_name.end()) {
      throw LoadError("header is missing attribute column", 0, schema.attribute(d).name);
    }
    position[d] = it->second;
  }
  if (auto it = by_name.find(schema.label_name()); it != by_name.end()) {
    label_pos = it->second;
  } else {
    throw LoadError("header is missing label column", 0, schema.label_name());
  }
  if (header.size() != schema.dims() + 1) {
    throw LoadError("header has columns not described by the schema", 0, "");
  }

  std::vector<double> values;
  std::vector<Label> labels;
  std::size_t row = 0;
  while (std::getline(csv, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw LoadError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                          " cells, expected " + std::to_string(header.size()),
                      row, "");
    }
    for (std::size_t d = 0; d < schema.dims(); ++d) {
      const Attribute& a = schema.attribute(d);
      const std::string& cell = cells[position[d]];
      const auto v = parse_double(cell);
      if (!v) {
        throw LoadError("row " + std::to_string(row) + ", column '" + a.name +
                            "': not a number: '" + cell + "'",
                        row, a.name);
      }
      if (a.kind != AttributeKind::kNumerical && !is_integer(*v)) {
        throw LoadError("row " + std::to_string(row) + ", column '" + a.name +
                            "': expected an integer code",
                        row, a.name);
      }
      if (*v < a.min || *v > a.max) {
        throw LoadError("row " + std::to_string(row) + ", column '" + a.name +
                            "': value outside declared range",
                        row, a.name);
      }
      values.push_back(*v);
    }
    const std::string& label_cell = cells[*label_pos];
    const auto y = schema.label_id(label_cell);
    if (!y) {
      throw LoadError("row " + std::to_string(row) + ": unknown label '" + label_cell + "'", row,
                      schema.label_name());
    }
    labels.push_back(*y);
  }
  return Dataset(schema, values, std::move(labels));
}

Dataset load_dataset(const std::string& csv_path, const Schema& schema) {
  std::ifstream in(csv_path);
  if (!in) throw ConfigError("cannot open CSV file " + csv_path);
  return read_dataset(in, schema);
}

Dataset load_dataset(const std::string& csv_path, const std::string& schema_path) {
  return load_dataset(csv_path, load_schema(schema_path));
}

Preprocessor Preprocessor::fit(const Dataset& train, const PreprocessOptions& options) {
  if (options.bins && *options.bins < 2) throw std::invalid_argument("bins must be at least 2");
  const Schema& schema = train.schema();
  const std::size_t dims = schema.dims();

  Preprocessor p;
  p.source_schema_ = schema;
  p.bins_.assign(dims, 0);
  p.mean_.assign(dims, 0.0);
  p.scale_.assign(dims, 0.0);

  if (options.bins) {
    for (const std::string& name : options.bin_attributes) {
      if (!schema.find(name)) throw ConfigError("cannot bin unknown attribute '" + name + "'");
    }
    for (std::size_t d = 0; d < dims; ++d) {
      const Attribute& a = schema.attribute(d);
      if (a.kind != AttributeKind::kNumerical) continue;
      const bool listed = options.bin_attributes.empty() ||
                          std::find(options.bin_attributes.begin(), options.bin_attributes.end(),
                                    a.name) != options.bin_attributes.end();
      if (listed) p.bins_[d] = *options.bins;
    }
  }

  std::vector<Attribute> attrs(schema.attributes().begin(), schema.attributes().end());
  for (std::size_t d = 0; d < dims; ++d) {
    if (p.bins_[d] != 0) {
      attrs[d].kind = AttributeKind::kCategorical;
      attrs[d].min = 0.0;
      attrs[d].max = static_cast<double>(p.bins_[d] - 1);
    }
  }

  if (options.scale && train.size() > 0) {
    const FeatureMatrix& m = train.features();
    const double count = static_cast<double>(train.size());
    for (std::size_t d = 0; d < dims; ++d) {
      if (attrs[d].kind != AttributeKind::kNumerical) continue;
      // Shifted two-pass moments: a constant column gives exactly zero
      // deviation, so it maps to all zeros.
      const double* col = m.column(d);
      const double shift = col[0];
      double sum = 0.0;
      for (std::size_t r = 0; r < train.size(); ++r) sum += col[r] - shift;
      const double mean = shift + sum / count;
      double ss = 0.0;
      for (std::size_t r = 0; r < train.size(); ++r) {
        const double dev = col[r] - mean;
        ss += dev * dev;
      }
      const double sigma = std::sqrt(ss / count);
      p.mean_[d] = mean;
      p.scale_[d] = std::max(sigma, 1e-12);
      attrs[d].min = (attrs[d].min - mean) / p.scale_[d];
      attrs[d].max = (attrs[d].max - mean) / p.scale_[d];
    }
  }
  p.schema_ = Schema(std::move(attrs), schema.label_name(),
                     std::vector<std::string>(schema.classes().begin(), schema.classes().end()));
  return p;
}

std::vector<double> Preprocessor::apply(std::span<const double> x) const {
  if (x.size() != source_schema_.dims()) throw std::invalid_argument("input dimension mismatch");
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t d = 0; d < out.size(); ++d) {
    if (bins_[d] != 0) {
      const Attribute& a = source_schema_.attribute(d);
      const double width = (a.max - a.min) / static_cast<double>(bins_[d]);
      double bin = width > 0.0 ? std::floor((out[d] - a.min) / width) : 0.0;
      bin = std::clamp(bin, 0.0, static_cast<double>(bins_[d] - 1));
      out[d] = bin;
    } else if (scale_[d] != 0.0) {
      const double z = (out[d] - mean_[d]) / scale_[d];
      const Attribute& a = schema_.attribute(d);
      out[d] = std::clamp(z, a.min, a.max);
    }
  }
  return out;
}

Dataset Preprocessor::apply(const Dataset& data) const {
  std::vector<double> values;
  values.reserve(data.size() * data.dims());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::vector<double> row = apply(data.row(i));
    values.insert(values.end(), row.begin(), row.end());
  }
  return Dataset(schema_, values, std::vector<Label>(data.labels().begin(), data.labels().end()),
                 std::vector<std::size_t>(data.source_index().begin(), data.source_index().end()));
}

Dataset balance_labels(const Dataset& data, std::uint64_t seed) {
  const std::size_t q = data.schema().label_count();
  std::vector<std::vector<std::size_t>> by_label(q);
  for (std::size_t i = 0; i < data.size(); ++i) by_label[data.label(i)].push_back(i);
  std::size_t target = data.size();
  for (const auto& members : by_label) {
    if (!members.empty()) target = std::min(target, members.size());
  }
  Rng rng(seed);
  std::vector<std::size_t> keep;
  for (auto& members : by_label) {
    if (members.empty()) continue;
    rng.shuffle(members);
    members.resize(target);
    keep.insert(keep.end(), members.begin(), members.end());
  }
  std::sort(keep.begin(), keep.end());

  std::vector<double> values;
  std::vector<Label> labels;
  std::vector<std::size_t> source;
  for (std::size_t i : keep) {
    const std::vector<double> row = data.row(i);
    values.insert(values.end(), row.begin(), row.end());
    labels.push_back(data.label(i));
    source.push_back(data.source_index()[i]);
  }
  return Dataset(data.schema(), values, std::move(labels), std::move(source));
}

Dataset preprocess(const Dataset& data, const PreprocessOptions& options) {
  const Dataset base = options.balance ? balance_labels(data, options.seed) : data;
  return Preprocessor::fit(base, options).apply(base);
}

PerturbationSpec::PerturbationSpec(std::vector<DimPerturbation> dims) : dims_(std::move(dims)) {
  for (const DimPerturbation& d : dims_) {
    if (!(d.lo <= d.hi)) throw std::invalid_argument("perturbation interval has lo > hi");
    if (d.kind == PerturbKind::kFixed && (d.lo != 0.0 || d.hi != 0.0)) {
      throw std::invalid_argument("fixed dimension must have a zero offset interval");
    }
    if (d.kind == PerturbKind::kBox && (d.lo > 0.0 || d.hi < 0.0)) {
      throw std::invalid_argument("offset box must contain zero");
    }
  }
}

PerturbationSpec PerturbationSpec::fixed(std::size_t dims) {
  return PerturbationSpec(std::vector<DimPerturbation>(dims));
}

void PerturbationSpec::resolve(std::span<const double> x, std::span<double> lo,
                               std::span<double> hi) const {
  if (x.size() != dims_.size() || lo.size() != dims_.size() || hi.size() != dims_.size()) {
    throw std::invalid_argument("perturbation spec dimension mismatch");
  }
  for (std::size_t d = 0; d < dims_.size(); ++d) {
    const DimPerturbation& p = dims_[d];
    if (p.kind == PerturbKind::kFullRange) {
      // x may sit outside the declared range after clamping/rounding; the
      // offset box must still contain 0.
      lo[d] = std::min(p.lo - x[d], 0.0);
      hi[d] = std::max(p.hi - x[d], 0.0);
    } else {
      lo[d] = p.lo;
      hi[d] = p.hi;
    }
  }
}

bool PerturbationSpec::contains(std::span<const double> x,
                                std::span<const double> candidate) const {
  if (x.size() != dims_.size() || candidate.size() != dims_.size()) return false;
  for (std::size_t d = 0; d < dims_.size(); ++d) {
    const DimPerturbation& p = dims_[d];
    switch (p.kind) {
      case PerturbKind::kFixed:
        if (candidate[d] != x[d]) return false;
        break;
      case PerturbKind::kBox:
        if (candidate[d] < x[d] + p.lo || candidate[d] > x[d] + p.hi) return false;
        break;
      case PerturbKind::kFullRange:
        if (candidate[d] < std::min(p.lo, x[d]) || candidate[d] > std::max(p.hi, x[d])) {
          return false;
        }
        break;
    }
  }
  return true;
}

PerturbationSpec epsilon_spec(const Schema& schema, double fraction) {
  if (!(fraction >= 0.0)) throw std::invalid_argument("epsilon fraction must be >= 0");
  std::vector<DimPerturbation> dims(schema.dims());
  for (std::size_t d = 0; d < schema.dims(); ++d) {
    const Attribute& a = schema.attribute(d);
    if (a.is_protected) {
      dims[d] = {PerturbKind::kFullRange, a.min, a.max};
    } else if (a.kind == AttributeKind::kNumerical) {
      const double eps = fraction * (a.max - a.min);
      dims[d] = {PerturbKind::kBox, -eps, eps};
    }
  }
  return PerturbationSpec(std::move(dims));
}

PerturbationSpec epsilon_spec(const Dataset& data, std::span<const double> x, double fraction) {
  if (x.size() != data.dims()) throw std::invalid_argument("input dimension mismatch");
  return epsilon_spec(data.schema(), fraction);
}

}  // namespace fairknn
