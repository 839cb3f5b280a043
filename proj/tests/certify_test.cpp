#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "fairknn/cert_predict.hpp"
#include "fairknn/certify.hpp"
#include "fairknn/knn.hpp"
#include "test_support.hpp"

namespace fairknn {
namespace {

using testing::InstanceShape;

RunConfig salary_config() {
  RunConfig c;
  c.train_path = FAIRKNN_DATA_DIR "/salary/train.csv";
  c.test_path = FAIRKNN_DATA_DIR "/salary/test.csv";
  c.schema_path = FAIRKNN_DATA_DIR "/salary/schema.json";
  c.grid = {3, 5, 7, 9};
  c.preprocess.scale = true;
  c.n_flips = 1;
  c.threads = 2;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Drop the trailing seconds column from every data row.
std::string strip_csv_timing(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') line = line.substr(0, line.rfind(','));
    out += line + '\n';
  }
  return out;
}

std::string strip_json_timing(const std::string& text) {
  auto doc = nlohmann::json::parse(text);
  doc.erase("timing");
  return doc.dump();
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fairknn_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

TEST(CertifyBatchTest, SalaryRegressionBaseline) {
  // recorded on the first run of this fixture and frozen
  const struct {
    Variant variant;
    std::size_t certified;
  } expected[] = {{Variant::kFlip, 14}, {Variant::kIndividual, 4}, {Variant::kEpsilon, 4}};
  for (const auto& e : expected) {
    RunConfig c = salary_config();
    c.variant = e.variant;
    c.group_by = {"sex", "rank"};
    const BatchReport r = certify_batch(c);
    EXPECT_EQ(r.rows.size(), 24u);
    EXPECT_EQ(r.learned_k, 7u);
    EXPECT_EQ(r.kset.ks, (std::vector<std::size_t>{3, 5, 7, 9}));
    EXPECT_EQ(r.certified(), e.certified) << to_string(e.variant);

    const auto s = r.summary();
    ASSERT_TRUE(s.contains("groups"));
    std::size_t cells = 0, certified = 0;
    for (const auto& cell : s["groups"]["cells"]) {
      cells += cell["count"].get<std::size_t>();
      certified += cell["certified"].get<std::size_t>();
    }
    EXPECT_EQ(cells, 24u);
    EXPECT_EQ(certified, e.certified);
    std::size_t by_sex = 0;
    for (const auto& v : s["groups"]["weighted"]["sex"]) by_sex += v["count"].get<std::size_t>();
    EXPECT_EQ(by_sex, 24u);
  }
}

TEST(CertifyBatchTest, CertifiedIffEveryKPasses) {
  std::mt19937_64 rng(71);
  for (std::size_t trial = 0; trial < 20; ++trial) {
    InstanceShape shape{40, 2, 2, 6};
    const Dataset train = testing::random_dataset(rng, shape);
    const Dataset test = testing::random_dataset(rng, InstanceShape{10, 2, 2, 6});
    RunConfig c;
    c.grid = {1, 3, 5, 7};
    c.n_flips = trial % 2;
    c.variant = Variant::kIndividual;
    c.threads = 1;
    const BatchReport r = certify_batch(train, test, c);
    const PerturbationSpec spec = variant_spec(train.schema(), c.variant, 0.0);
    for (const Certificate& cert : r.rows) {
      EXPECT_EQ(cert.baseline, knn_predict(train, r.learned_k, test.row(cert.test_index)));
      bool all = true;
      for (std::size_t k : r.kset.ks) {
        all = all && abs_predict_same(train, FlipBudget{c.n_flips}, k, test.row(cert.test_index),
                                      cert.baseline, spec);
      }
      EXPECT_EQ(cert.outcome == Outcome::kCertified, all);
    }
  }
}

TEST(CertifyBatchTest, ZeroEpsilonMatchesIndividual) {
  RunConfig c = salary_config();
  c.epsilon_fraction = 0.0;
  c.variant = Variant::kEpsilon;
  const BatchReport eps = certify_batch(c);
  c.variant = Variant::kIndividual;
  const BatchReport ind = certify_batch(c);
  ASSERT_EQ(eps.rows.size(), ind.rows.size());
  for (std::size_t i = 0; i < eps.rows.size(); ++i) {
    EXPECT_EQ(eps.rows[i].outcome, ind.rows[i].outcome);
  }
}

TEST(CertifyBatchTest, ReportsAreDeterministic) {
  RunConfig c = salary_config();
  c.group_by = {"sex"};
  c.out_dir = scratch_dir("determinism").string();
  certify_batch(c);
  const std::string csv1 = slurp(std::filesystem::path(c.out_dir) / "certificates.csv");
  const std::string json1 = slurp(std::filesystem::path(c.out_dir) / "summary.json");
  c.threads = 1;  // scheduling must not leak into the report
  certify_batch(c);
  c.threads = 2;
  const std::string csv2 = slurp(std::filesystem::path(c.out_dir) / "certificates.csv");
  const std::string json2 = slurp(std::filesystem::path(c.out_dir) / "summary.json");
  // threads is part of the recorded config, so compare after re-running
  // with the original value
  certify_batch(c);
  const std::string csv3 = slurp(std::filesystem::path(c.out_dir) / "certificates.csv");
  const std::string json3 = slurp(std::filesystem::path(c.out_dir) / "summary.json");
  EXPECT_EQ(strip_csv_timing(csv1), strip_csv_timing(csv3));
  EXPECT_EQ(strip_json_timing(json1), strip_json_timing(json3));
  EXPECT_EQ(strip_csv_timing(csv1).substr(strip_csv_timing(csv1).find('\n')),
            strip_csv_timing(csv2).substr(strip_csv_timing(csv2).find('\n')));
  EXPECT_NE(csv1.find("# config: "), std::string::npos);
  EXPECT_NE(json1.find("\"config\""), std::string::npos);
}

TEST(CertifyBatchTest, ConfigErrors) {
  RunConfig c = salary_config();
  c.train_path = "/nonexistent/train.csv";
  EXPECT_THROW(certify_batch(c), ConfigError);

  c = salary_config();
  c.metric = Metric::kManhattan;
  c.variant = Variant::kIndividual;
  EXPECT_THROW(certify_batch(c), ConfigError);

  c = salary_config();
  c.group_by = {"year"};
  EXPECT_THROW(certify_batch(c), ConfigError);

  c = salary_config();
  c.grid = {60};
  EXPECT_THROW(certify_batch(c), ConfigError);

  c = salary_config();
  c.folds = 1;
  EXPECT_THROW(certify_batch(c), ConfigError);
}

TEST(CertifyBatchTest, ManhattanFlipVariantRuns) {
  RunConfig c = salary_config();
  c.metric = Metric::kManhattan;
  const BatchReport r = certify_batch(c);
  EXPECT_EQ(r.rows.size(), 24u);
  for (const Certificate& cert : r.rows) EXPECT_NE(cert.outcome, Outcome::kError);
}

TEST(OracleCompareTest, NoBudgetFlipIsExact) {
  RunConfig c = salary_config();
  c.n_flips = 0;
  const OracleReport r = oracle_compare(c);
  EXPECT_EQ(r.soundness_violations, 0u);
  EXPECT_EQ(r.summary()["accuracy"].get<double>(), 1.0);

  // the protected-attribute box over-approximates neighbours, so only
  // soundness holds here
  c.variant = Variant::kIndividual;
  EXPECT_EQ(oracle_compare(c).soundness_violations, 0u);
}

TEST(OracleCompareTest, SoundOnFixture) {
  for (std::size_t n : {1u, 2u}) {
    for (Variant v : {Variant::kFlip, Variant::kIndividual}) {
      RunConfig c = salary_config();
      c.n_flips = n;
      c.variant = v;
      const OracleReport r = oracle_compare(c);
      EXPECT_EQ(r.soundness_violations, 0u);
      for (const OracleRow& row : r.rows) EXPECT_NE(row.oracle, "unavailable");
    }
  }
}

TEST(OracleCompareTest, CapMarksRowsUnavailable) {
  RunConfig c = salary_config();
  c.n_flips = 3;
  c.oracle_cap = 100;
  const OracleReport r = oracle_compare(c);
  for (const OracleRow& row : r.rows) EXPECT_EQ(row.oracle, "unavailable");
  EXPECT_TRUE(r.summary()["ground_truth_rate"].is_null());
}

TEST(OracleCompareTest, EpsilonFalsification) {
  RunConfig c = salary_config();
  c.variant = Variant::kEpsilon;
  c.epsilon_fraction = 0.05;
  c.falsify_samples = 20;
  const OracleReport r = oracle_compare(c);
  EXPECT_EQ(r.soundness_violations, 0u);
}

#ifdef FAIRKNN_CLI
int run_cli(const std::string& args) {
  const std::string cmd = std::string(FAIRKNN_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string fixture_args() {
  const std::string dir = FAIRKNN_DATA_DIR "/salary/";
  return "--train " + dir + "train.csv --test " + dir + "test.csv --schema " + dir +
         "schema.json --grid 3,5,7,9 --scale";
}

TEST(CliTest, ExitCodes) {
  const auto out = scratch_dir("cli");
  EXPECT_EQ(run_cli("certify " + fixture_args() + " --n-flips 1 --variant individual " +
                    "--group-by sex,rank --out " + out.string()),
            0);
  EXPECT_TRUE(std::filesystem::exists(out / "certificates.csv"));
  EXPECT_TRUE(std::filesystem::exists(out / "summary.json"));
  EXPECT_EQ(run_cli("oracle-compare " + fixture_args() + " --n-flips 1 --oracle-relearn off " +
                    "--out " + out.string()),
            0);
  EXPECT_TRUE(std::filesystem::exists(out / "oracle_summary.json"));

  EXPECT_EQ(run_cli("certify " + fixture_args() + " --variant sideways"), 2);
  EXPECT_EQ(run_cli("certify " + fixture_args() + " --metric manhattan --variant epsilon"), 2);
  EXPECT_EQ(run_cli("certify " + fixture_args() + " --p 1"), 2);
  EXPECT_EQ(run_cli("certify --train missing.csv --test missing.csv --schema missing.json"), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
}
#endif

}  // namespace
}  // namespace fairknn
