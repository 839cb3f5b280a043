// fairknn: batch fairness certification for KNN classifiers.
//
//   fairknn certify --train T.csv --test X.csv --schema S.json --n-flips 1 --out out/
//   fairknn oracle-compare ... --oracle-cap 1e6 --oracle-relearn on

#include <iostream>

#include "CLI11.hpp"
#include "fairknn/certify.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitUnsound = 3;

struct Flags {
  fairknn::RunConfig config;
  std::string variant = "flip";
  std::string metric = "euclidean";
  std::string relearn = "on";
  std::size_t bins = 0;
};

void add_common(CLI::App& cmd, Flags& f) {
  auto& c = f.config;
  cmd.add_option("--train", c.train_path, "training CSV")->required();
  cmd.add_option("--test", c.test_path, "test CSV")->required();
  cmd.add_option("--schema", c.schema_path, "schema JSON")->required();
  cmd.add_option("--epsilon-frac", c.epsilon_fraction, "epsilon as a fraction of attribute range")
      ->capture_default_str();
  cmd.add_option("--n-flips", c.n_flips, "label-flip budget n")->capture_default_str();
  cmd.add_option("--p", c.folds, "cross-validation folds")->capture_default_str();
  cmd.add_option("--grid", c.grid, "candidate K values")->delimiter(',')->capture_default_str();
  cmd.add_option("--variant", f.variant, "flip | individual | epsilon")
      ->check(CLI::IsMember({"flip", "individual", "epsilon"}))
      ->capture_default_str();
  cmd.add_option("--metric", f.metric, "euclidean | manhattan")
      ->check(CLI::IsMember({"euclidean", "manhattan"}))
      ->capture_default_str();
  cmd.add_option("--seed", c.seed, "fold and balancing seed")->capture_default_str();
  cmd.add_option("--group-by", c.group_by, "categorical attributes for per-group rates")
      ->delimiter(',');
  cmd.add_option("--out", c.out_dir, "output directory");
  cmd.add_option("--threads", c.threads, "worker threads (0 = all cores)")->capture_default_str();
  cmd.add_flag("--scale", c.preprocess.scale, "z-score numerical attributes");
  cmd.add_option("--bins", f.bins, "equal-width bins for --bin-attrs (0 = off)");
  cmd.add_option("--bin-attrs", c.preprocess.bin_attributes, "attributes to bin")->delimiter(',');
  cmd.add_flag("--balance", c.preprocess.balance, "downsample training labels to equal counts");
}

void finish(Flags& f) {
  f.config.variant = fairknn::parse_variant(f.variant);
  f.config.metric = fairknn::parse_metric(f.metric);
  f.config.oracle_relearn = f.relearn == "on";
  if (f.bins > 0) f.config.preprocess.bins = f.bins;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certify fairness of KNN predictions under label bias"};
  app.require_subcommand(1);

  Flags certify_flags;
  auto* certify = app.add_subcommand("certify", "certify every test input");
  add_common(*certify, certify_flags);

  Flags oracle_flags;
  auto* oracle = app.add_subcommand("oracle-compare", "compare with exhaustive enumeration");
  add_common(*oracle, oracle_flags);
  oracle->add_option("--oracle-cap", oracle_flags.config.oracle_cap, "max clean datasets")
      ->capture_default_str();
  oracle->add_option("--oracle-relearn", oracle_flags.relearn, "re-learn K per clean dataset")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  oracle->add_option("--falsify-samples", oracle_flags.config.falsify_samples,
                     "sampled perturbations per input (epsilon variant)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (certify->parsed()) {
      finish(certify_flags);
      const auto report = fairknn::certify_batch(certify_flags.config);
      const auto s = report.summary();
      std::cout << "learned K " << report.learned_k << ", KSet size " << report.kset.ks.size()
                << ", certified " << report.certified() << "/" << report.rows.size() << '\n';
      if (certify_flags.config.out_dir.empty()) std::cout << s.dump(2) << '\n';
      return 0;
    }
    finish(oracle_flags);
    const auto report = fairknn::oracle_compare(oracle_flags.config);
    const auto s = report.summary();
    if (oracle_flags.config.out_dir.empty()) std::cout << s.dump(2) << '\n';
    if (report.soundness_violations > 0) {
      std::cerr << "soundness violation: " << report.soundness_violations
                << " certified inputs are unfair under enumeration\n";
      return kExitUnsound;
    }
    std::cout << "oracle available " << s["oracle_available"] << "/" << s["inputs"]
              << ", certified " << s["certified_rate"] << '\n';
    return 0;
  } catch (const fairknn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
