#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "fairknn/certify.hpp"

namespace fairknn {
namespace {

std::string join_ks(const std::vector<std::size_t>& ks) {
  std::string out;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(ks[i]);
  }
  return out;
}

std::ofstream open_in(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path path = std::filesystem::path(dir) / name;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_certificates_csv(const BatchReport& report, std::ostream& out) {
  out << "# config: " << report.config.dump() << '\n';
  out << "test_index,source_row,variant,outcome,baseline_label,kset,seconds\n";
  for (const Certificate& c : report.rows) {
    const std::string label = c.outcome == Outcome::kError || c.baseline >= report.class_names.size()
                                  ? std::string()
                                  : report.class_names[c.baseline];
    out << c.test_index << ',' << c.source_row << ',' << to_string(c.variant) << ','
        << to_string(c.outcome) << ',' << label << ',' << join_ks(c.kset) << ','
        << std::setprecision(6) << c.seconds << '\n';
  }
}

void write_oracle_csv(const OracleReport& report, std::ostream& out) {
  out << "# config: " << report.config.dump() << '\n';
  out << "test_index,certifier,oracle,falsified,certifier_seconds,oracle_seconds\n";
  for (const OracleRow& r : report.rows) {
    out << r.test_index << ',' << to_string(r.certifier) << ',' << r.oracle << ','
        << (r.falsified ? 1 : 0) << ',' << std::setprecision(6) << r.certifier_seconds << ','
        << r.oracle_seconds << '\n';
  }
}

void write_batch_report(const BatchReport& report, const std::string& dir) {
  auto csv = open_in(dir, "certificates.csv");
  write_certificates_csv(report, csv);
  auto json = open_in(dir, "summary.json");
  json << report.summary().dump(2) << '\n';
}

void write_oracle_report(const OracleReport& report, const std::string& dir) {
  auto csv = open_in(dir, "oracle.csv");
  write_oracle_csv(report, csv);
  auto json = open_in(dir, "oracle_summary.json");
  json << report.summary().dump(2) << '\n';
}

}  // namespace fairknn
