#pragma once

#include <cstdint>
#include <vector>

#include "cxlsim/types.hpp"

namespace cxlsim {

enum class LlcResult : uint8_t { Hit, Miss };

// Set-associative last-level cache with per-set LRU over 64 B lines.
// Misses allocate the line; evictions are silent (no writeback traffic
// is generated toward memory).
class LlcModel {
 public:
  LlcModel(uint64_t capacity_bytes, uint32_t ways);

  LlcResult access(uint64_t address);

  uint64_t sets() const { return sets_; }
  uint64_t hits() const { return hits_; }
  uint64_t misses() const { return misses_; }

 private:
  struct Line {
    uint64_t tag = 0;
    uint64_t stamp = 0;
    bool valid = false;
  };

  uint64_t sets_;
  uint32_t ways_;
  uint64_t stamp_counter_ = 0;
  uint64_t hits_ = 0;
  uint64_t misses_ = 0;
  std::vector<Line> lines_;  // sets_ * ways_, row-major by set
};

}  // namespace cxlsim
