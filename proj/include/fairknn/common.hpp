#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace fairknn {

using Label = std::uint32_t;

enum class Metric { kEuclidean, kManhattan };

// Number of labels an adversary (or a de-biasing step) may flip in T.
struct FlipBudget {
  std::size_t n = 0;
};

// Raised for malformed inputs at API boundaries (bad K, bad grid, length
// mismatch). Plain argument validation throws std::invalid_argument too; this
// type exists so the CLI can tell configuration problems apart.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

const char* to_string(Metric metric);
Metric parse_metric(const std::string& text);

}  // namespace fairknn
