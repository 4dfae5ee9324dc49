#pragma once

#include <cstdint>
#include <vector>

#include "cxlsim/types.hpp"

namespace cxlsim {

// Host physical address layout: one CXL-mapped window plus a list of
// disjoint host-DRAM regions.
class AddressMap {
 public:
  AddressMap(uint64_t cxl_base, uint64_t cxl_limit) : cxl_base_(cxl_base), cxl_limit_(cxl_limit) {}

  void add_dram_region(uint64_t base, uint64_t limit) {
    if (base < limit) dram_regions_.push_back({base, limit});
  }

  AccessClass classify(uint64_t address) const {
    if (address >= cxl_base_ && address < cxl_limit_) return AccessClass::CxlSsd;
    for (const auto& r : dram_regions_)
      if (address >= r.base && address < r.limit) return AccessClass::HostDram;
    throw SimError("unmapped address 0x" + to_hex(address));
  }

  uint64_t cxl_base() const { return cxl_base_; }
  uint64_t cxl_limit() const { return cxl_limit_; }

 private:
  struct Region {
    uint64_t base;
    uint64_t limit;
  };

  static std::string to_hex(uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%llx", static_cast<unsigned long long>(v));
    return buf;
  }

  uint64_t cxl_base_;
  uint64_t cxl_limit_;
  std::vector<Region> dram_regions_;
};

}  // namespace cxlsim
