#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace fairknn::detail {

// Bounded ascending list of the k smallest (key, id) pairs seen so far.
// k stays small (the largest candidate K), so insertion sort beats a heap.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) {
    keys_.reserve(k);
    ids_.reserve(k);
  }

  void reset() {
    keys_.clear();
    ids_.clear();
  }

  bool full() const { return keys_.size() == k_; }

  // Candidates with key > threshold() can never enter.
  double threshold() const {
    return full() ? keys_.back() : std::numeric_limits<double>::infinity();
  }

  void offer(double key, std::uint32_t id) {
    if (full()) {
      if (key > keys_.back() || (key == keys_.back() && id > ids_.back())) return;
      keys_.pop_back();
      ids_.pop_back();
    }
    std::size_t pos = keys_.size();
    keys_.push_back(key);
    ids_.push_back(id);
    while (pos > 0 && (keys_[pos - 1] > key || (keys_[pos - 1] == key && ids_[pos - 1] > id))) {
      keys_[pos] = keys_[pos - 1];
      ids_[pos] = ids_[pos - 1];
      --pos;
    }
    keys_[pos] = key;
    ids_[pos] = id;
  }

  const std::vector<double>& keys() const { return keys_; }
  const std::vector<std::uint32_t>& ids() const { return ids_; }

 private:
  std::size_t k_;
  std::vector<double> keys_;
  std::vector<std::uint32_t> ids_;
};

}  // namespace fairknn::detail
