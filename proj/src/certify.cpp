#include "fairknn/certify.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <map>

#include "fairknn/cert_predict.hpp"
#include "fairknn/knn.hpp"
#include "fairknn/work_pool.hpp"

namespace fairknn {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::size_t resolve_threads(std::size_t threads) {
  return threads == 0 ? default_threads() : threads;
}

}  // namespace

const char* to_string(Variant variant) {
  switch (variant) {
    case Variant::kFlip:
      return "flip";
    case Variant::kIndividual:
      return "individual";
    case Variant::kEpsilon:
      return "epsilon";
  }
  return "unknown";
}

Variant parse_variant(const std::string& text) {
  if (text == "flip") return Variant::kFlip;
  if (text == "individual") return Variant::kIndividual;
  if (text == "epsilon") return Variant::kEpsilon;
  throw ConfigError("unknown variant '" + text + "'");
}

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kCertified:
      return "certified";
    case Outcome::kUnknown:
      return "unknown";
    case Outcome::kError:
      return "error";
  }
  return "unknown";
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json pre = {{"scale", preprocess.scale},
                        {"bins", preprocess.bins ? nlohmann::json(*preprocess.bins) : nullptr},
                        {"bin_attributes", preprocess.bin_attributes},
                        {"balance", preprocess.balance}};
  return {{"train", train_path},
          {"test", test_path},
          {"schema", schema_path},
          {"out", out_dir},
          {"epsilon_frac", epsilon_fraction},
          {"n_flips", n_flips},
          {"p", folds},
          {"grid", grid},
          {"seed", seed},
          {"metric", to_string(metric)},
          {"variant", to_string(variant)},
          {"group_by", group_by},
          {"preprocess", pre},
          {"oracle_cap", oracle_cap},
          {"oracle_relearn", oracle_relearn},
          {"falsify_samples", falsify_samples}};
}

void RunConfig::validate() const {
  if (!(epsilon_fraction >= 0.0)) throw ConfigError("--epsilon-frac must be >= 0");
  if (folds < 2) throw ConfigError("--p must be at least 2");
  if (grid.empty()) throw ConfigError("--grid must list at least one K");
  if (metric == Metric::kManhattan && variant != Variant::kFlip) {
    throw ConfigError("perturbation bounds are Euclidean only; use --metric euclidean with --variant " +
                      std::string(to_string(variant)));
  }
  if (!(oracle_cap >= 1.0)) throw ConfigError("--oracle-cap must be >= 1");
  if (preprocess.bins && *preprocess.bins < 2) throw ConfigError("--bins must be at least 2");
}

PerturbationSpec variant_spec(const Schema& schema, Variant variant, double epsilon_fraction) {
  switch (variant) {
    case Variant::kFlip:
      return PerturbationSpec::fixed(schema.dims());
    case Variant::kIndividual:
      return epsilon_spec(schema, 0.0);
    case Variant::kEpsilon:
      return epsilon_spec(schema, epsilon_fraction);
  }
  throw std::invalid_argument("unknown variant");
}

LearnedModel learn_model(const Dataset& train, const RunConfig& config) {
  validate_grid(train.size(), config.folds, config.grid);
  const std::size_t threads = resolve_threads(config.threads);
  const std::size_t q = train.schema().label_count();
  const std::size_t kmax = *std::max_element(config.grid.begin(), config.grid.end());

  const auto start = Clock::now();
  FoldPartition folds = FoldPartition::make(train.size(), config.folds, config.seed);
  CvNeighbors table = CvNeighbors::build(train, folds, kmax, config.metric, threads);
  LearnResult learned = knn_learn(table, folds, train.labels(), q, config.grid);
  ErrorBounds bounds =
      abs_error_bounds(table, folds, train.labels(), q, FlipBudget{config.n_flips}, config.grid);
  KSet kset = abs_knn_learn(bounds);
  const double elapsed = seconds_since(start);

  return LearnedModel{std::move(folds), std::move(table),  learned.k, std::move(learned.rate_numerators),
                      std::move(bounds), std::move(kset), elapsed};
}

Certificate certify_input(const Dataset& train, const LearnedModel& model,
                          std::span<const double> x, const RunConfig& config) {
  Certificate cert;
  cert.variant = config.variant;
  cert.kset = model.kset.ks;
  cert.baseline = knn_predict(train, model.k, x, config.metric);

  const auto start = Clock::now();
  const FlipBudget n{config.n_flips};
  const PerturbationSpec spec = variant_spec(train.schema(), config.variant, config.epsilon_fraction);
  bool certified = true;
  for (std::size_t k : model.kset.ks) {
    const bool same = config.metric == Metric::kEuclidean
                          ? abs_predict_same(train, n, k, x, cert.baseline, spec)
                          : abs_predict_same_exact(train, n, k, x, cert.baseline, config.metric);
    if (!same) {
      certified = false;
      break;
    }
  }
  cert.seconds = seconds_since(start);
  cert.outcome = certified ? Outcome::kCertified : Outcome::kUnknown;
  return cert;
}

std::size_t BatchReport::certified() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const Certificate& c) {
    return c.outcome == Outcome::kCertified;
  }));
}

namespace {

nlohmann::json rate_entry(std::size_t count, std::size_t certified) {
  return {{"count", count},
          {"certified", certified},
          {"rate", count == 0 ? 0.0 : double(certified) / double(count)}};
}

}  // namespace

nlohmann::json BatchReport::summary() const {
  nlohmann::json out;
  out["config"] = config;
  out["classes"] = class_names;
  out["learned_k"] = learned_k;

  nlohmann::json candidates = nlohmann::json::array();
  for (std::size_t g = 0; g < bounds.grid.size(); ++g) {
    candidates.push_back({{"k", bounds.grid[g]},
                          {"cv_error", double(learn_rates[g]) / double(bounds.denominator)},
                          {"error_lb", bounds.lb(g)},
                          {"error_ub", bounds.ub(g)}});
  }
  out["candidates"] = candidates;
  out["kset"] = kset.ks;
  out["min_ub"] = kset.min_ub;

  std::size_t errors = 0;
  double total_seconds = 0.0;
  for (const Certificate& c : rows) {
    if (c.outcome == Outcome::kError) ++errors;
    total_seconds += c.seconds;
  }
  out["inputs"] = rows.size();
  out["certified"] = certified();
  out["errors"] = errors;
  out["certified_rate"] = rows.empty() ? 0.0 : double(certified()) / double(rows.size());

  nlohmann::json timing;
  timing["kset_seconds"] = kset_seconds;
  timing["mean_seconds"] = rows.empty() ? 0.0 : total_seconds / double(rows.size());
  timing["mean_seconds_amortized"] =
      rows.empty() ? 0.0 : (total_seconds + kset_seconds) / double(rows.size());
  out["timing"] = timing;

  if (!group_attributes.empty()) {
    nlohmann::json cells = nlohmann::json::array();
    std::vector<std::map<double, std::pair<std::size_t, std::size_t>>> marginal(
        group_attributes.size());
    for (const GroupStats& g : groups) {
      nlohmann::json key;
      for (std::size_t a = 0; a < group_attributes.size(); ++a) {
        key[group_attributes[a]] = g.key[a];
        auto& slot = marginal[a][g.key[a]];
        slot.first += g.count;
        slot.second += g.certified;
      }
      nlohmann::json cell = rate_entry(g.count, g.certified);
      cell["key"] = key;
      cells.push_back(cell);
    }
    // Marginals are count-weighted averages of the cell rates.
    nlohmann::json marginals;
    for (std::size_t a = 0; a < group_attributes.size(); ++a) {
      nlohmann::json values = nlohmann::json::array();
      for (const auto& [value, counts] : marginal[a]) {
        nlohmann::json entry = rate_entry(counts.first, counts.second);
        entry["value"] = value;
        values.push_back(entry);
      }
      marginals[group_attributes[a]] = values;
    }
    out["groups"] = {{"attributes", group_attributes},
                     {"cells", cells},
                     {"weighted", marginals},
                     {"overall", rate_entry(rows.size(), certified())}};
  }
  return out;
}

BatchReport certify_batch(const Dataset& train, const Dataset& test, const RunConfig& config) {
  config.validate();
  if (test.dims() != train.dims()) throw ConfigError("test set dimension differs from training set");

  std::vector<std::size_t> group_dims;
  for (const std::string& name : config.group_by) {
    const auto d = train.schema().find(name);
    if (!d) throw ConfigError("--group-by names unknown attribute '" + name + "'");
    if (train.schema().attribute(*d).kind == AttributeKind::kNumerical) {
      throw ConfigError("--group-by attribute '" + name + "' must be categorical or binary");
    }
    group_dims.push_back(*d);
  }

  BatchReport report;
  report.config = config.to_json();
  report.class_names.assign(train.schema().classes().begin(), train.schema().classes().end());
  const LearnedModel model = learn_model(train, config);
  report.learned_k = model.k;
  report.learn_rates = model.learn_rates;
  report.bounds = model.bounds;
  report.kset = model.kset;
  report.kset_seconds = model.kset_seconds;

  report.rows.resize(test.size());
  parallel_for(test.size(), resolve_threads(config.threads), 1,
               [&](std::size_t begin, std::size_t end) {
                 for (std::size_t i = begin; i < end; ++i) {
                   Certificate& slot = report.rows[i];
                   try {
                     slot = certify_input(train, model, test.row(i), config);
                   } catch (const std::exception& e) {
                     slot.variant = config.variant;
                     slot.kset = model.kset.ks;
                     slot.outcome = Outcome::kError;
                     slot.error = e.what();
                   }
                   slot.test_index = i;
                   slot.source_row = test.source_index()[i];
                 }
               });

  report.group_attributes = config.group_by;
  if (!group_dims.empty()) {
    std::map<std::vector<double>, GroupStats> cells;
    for (std::size_t i = 0; i < test.size(); ++i) {
      std::vector<double> key;
      for (std::size_t d : group_dims) key.push_back(test.features().at(i, d));
      GroupStats& g = cells[key];
      g.key = key;
      ++g.count;
      if (report.rows[i].outcome == Outcome::kCertified) ++g.certified;
    }
    for (auto& [key, stats] : cells) report.groups.push_back(stats);
  }
  return report;
}

namespace {

struct LoadedData {
  Dataset train;
  Dataset test;
};

LoadedData load_for(const RunConfig& config) {
  config.validate();
  for (const std::string* path : {&config.train_path, &config.test_path, &config.schema_path}) {
    if (path->empty() || !std::filesystem::exists(*path)) {
      throw ConfigError("file not found: '" + *path + "'");
    }
  }
  const Schema schema = load_schema(config.schema_path);
  Dataset train;
  Dataset test;
  try {
    train = load_dataset(config.train_path, schema);
    test = load_dataset(config.test_path, schema);
  } catch (const LoadError& e) {
    throw ConfigError(e.what());
  }
  PreprocessOptions pre = config.preprocess;
  pre.seed = config.seed;
  const Dataset base = pre.balance ? balance_labels(train, pre.seed) : train;
  const Preprocessor transform = Preprocessor::fit(base, pre);
  return {transform.apply(base), transform.apply(test)};
}

}  // namespace

BatchReport certify_batch(const RunConfig& config) {
  const LoadedData data = load_for(config);
  BatchReport report = certify_batch(data.train, data.test, config);
  if (!config.out_dir.empty()) write_batch_report(report, config.out_dir);
  return report;
}

nlohmann::json OracleReport::summary() const {
  std::size_t available = 0;
  std::size_t fair = 0;
  std::size_t certified = 0;
  std::size_t certified_available = 0;
  std::size_t falsified = 0;
  double oracle_seconds = 0.0;
  double certifier_seconds = 0.0;
  for (const OracleRow& r : rows) {
    const bool cert = r.certifier == Outcome::kCertified;
    if (cert) ++certified;
    if (r.falsified) ++falsified;
    if (r.oracle == "unavailable") continue;
    ++available;
    if (r.oracle == "fair") ++fair;
    if (cert) ++certified_available;
    oracle_seconds += r.oracle_seconds;
    certifier_seconds += r.certifier_seconds;
  }
  nlohmann::json out;
  out["config"] = config;
  out["inputs"] = rows.size();
  out["oracle_available"] = available;
  out["ground_truth_rate"] =
      available == 0 ? nlohmann::json(nullptr) : nlohmann::json(double(fair) / double(available));
  out["certified_rate"] = rows.empty() ? 0.0 : double(certified) / double(rows.size());
  out["accuracy"] = fair == 0 ? nlohmann::json(nullptr)
                              : nlohmann::json(double(certified_available) / double(fair));
  out["falsified"] = falsified;
  out["soundness_violations"] = soundness_violations;
  nlohmann::json timing;
  timing["oracle_seconds"] = oracle_seconds;
  timing["certifier_seconds"] = certifier_seconds;
  timing["speedup"] = certifier_seconds > 0.0 ? nlohmann::json(oracle_seconds / certifier_seconds)
                                              : nlohmann::json(nullptr);
  out["timing"] = timing;
  return out;
}

OracleReport oracle_compare(const Dataset& train, const Dataset& test, const RunConfig& config) {
  config.validate();
  OracleReport report;
  report.config = config.to_json();
  const LearnedModel model = learn_model(train, config);
  const FlipBudget n{config.n_flips};

  OracleOptions options;
  options.variant = config.variant == Variant::kFlip ? OracleVariant::kLabelFlip
                                                     : OracleVariant::kLabelFlipIndividual;
  options.policy = config.oracle_relearn ? KPolicy::kRelearn : KPolicy::kFixed;
  options.fixed_k = model.k;
  options.folds = config.folds;
  options.grid = config.grid;
  options.seed = config.seed;
  options.metric = config.metric;
  options.cap = config.oracle_cap;

  report.rows.resize(test.size());
  parallel_for(test.size(), resolve_threads(config.threads), 1,
               [&](std::size_t begin, std::size_t end) {
                 for (std::size_t i = begin; i < end; ++i) {
                   OracleRow& row = report.rows[i];
                   row.test_index = i;
                   const std::vector<double> x = test.row(i);
                   Certificate cert;
                   try {
                     cert = certify_input(train, model, x, config);
                   } catch (const std::exception&) {
                     cert.outcome = Outcome::kError;
                   }
                   row.certifier = cert.outcome;
                   // The abstract phase time plus this input's share of the
                   // one-off KSet computation.
                   row.certifier_seconds =
                       cert.seconds + model.kset_seconds / double(std::max<std::size_t>(1, test.size()));

                   const auto start = Clock::now();
                   try {
                     row.oracle = oracle_fair(train, n, x, cert.baseline, options) ? "fair" : "unfair";
                     if (config.variant == Variant::kEpsilon && config.falsify_samples > 0) {
                       const PerturbationSpec spec =
                           variant_spec(train.schema(), config.variant, config.epsilon_fraction);
                       row.falsified = sample_falsify_epsilon(train, n, model.k, x, cert.baseline,
                                                              spec, config.falsify_samples,
                                                              config.seed + i, config.metric,
                                                              config.oracle_cap)
                                           .has_value();
                       if (row.falsified) row.oracle = "unfair";
                     }
                   } catch (const EnumerationCapExceeded&) {
                     row.oracle = "unavailable";
                   }
                   row.oracle_seconds = seconds_since(start);
                 }
               });
  for (const OracleRow& r : report.rows) {
    if (r.certifier == Outcome::kCertified && (r.oracle == "unfair" || r.falsified)) {
      ++report.soundness_violations;
    }
  }
  return report;
}

OracleReport oracle_compare(const RunConfig& config) {
  const LoadedData data = load_for(config);
  OracleReport report = oracle_compare(data.train, data.test, config);
  if (!config.out_dir.empty()) write_oracle_report(report, config.out_dir);
  return report;
}

}  // namespace fairknn
