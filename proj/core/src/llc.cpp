#include "cxlsim/llc.hpp"

#include <cassert>

namespace cxlsim {

LlcModel::LlcModel(uint64_t capacity_bytes, uint32_t ways) : ways_(ways) {
  assert(ways_ > 0);
  assert(capacity_bytes % (kCachelineBytes * ways_) == 0);
  sets_ = capacity_bytes / (kCachelineBytes * ways_);
  assert(sets_ > 0);
  lines_.resize(sets_ * ways_);
}

LlcResult LlcModel::access(uint64_t address) {
  const uint64_t line_no = address / kCachelineBytes;
  const uint64_t set = line_no % sets_;
  const uint64_t tag = line_no / sets_;
  Line* base = &lines_[set * ways_];

  for (uint32_t w = 0; w < ways_; ++w) {
    if (base[w].valid && base[w].tag == tag) {
      base[w].stamp = ++stamp_counter_;
      ++hits_;
      return LlcResult::Hit;
    }
  }

  // miss: fill a free way, else evict the LRU way
  Line* victim = nullptr;
  for (uint32_t w = 0; w < ways_; ++w) {
    if (!base[w].valid) {
      victim = &base[w];
      break;
    }
  }
  if (!victim) {
    victim = &base[0];
    for (uint32_t w = 1; w < ways_; ++w)
      if (base[w].stamp < victim->stamp) victim = &base[w];
  }
  victim->valid = true;
  victim->tag = tag;
  victim->stamp = ++stamp_counter_;
  ++misses_;
  return LlcResult::Miss;
}

}  // namespace cxlsim
