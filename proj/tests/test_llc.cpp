#include "doctest.h"

#include "cxlsim/address_map.hpp"
#include "cxlsim/llc.hpp"

using namespace cxlsim;

namespace {
uint64_t addr_of_line(uint64_t line) { return line * kCachelineBytes; }
}  // namespace

TEST_CASE("cold access misses, repeat hits") {
  LlcModel llc(8 * 1024 * 1024, 16);
  CHECK(llc.access(0x1000) == LlcResult::Miss);
  CHECK(llc.access(0x1000) == LlcResult::Hit);
  CHECK(llc.access(0x1001) == LlcResult::Hit);  // same cacheline
  CHECK(llc.access(0x1040) == LlcResult::Miss); // next line
  CHECK(llc.hits() == 2);
  CHECK(llc.misses() == 2);
}

TEST_CASE("per-set LRU, hand-simulated") {
  // one set, two ways: capacity = 64 * 2
  LlcModel llc(128, 2);
  REQUIRE(llc.sets() == 1);

  // fill: A, B; then C evicts A (LRU); re-access of A misses
  CHECK(llc.access(addr_of_line(0)) == LlcResult::Miss);  // A
  CHECK(llc.access(addr_of_line(1)) == LlcResult::Miss);  // B
  CHECK(llc.access(addr_of_line(2)) == LlcResult::Miss);  // C evicts A
  CHECK(llc.access(addr_of_line(0)) == LlcResult::Miss);  // A gone (evicts B)

  // recency: A,B resident; touch A; C evicts B, not A
  LlcModel llc2(128, 2);
  llc2.access(addr_of_line(0));                            // A
  llc2.access(addr_of_line(1));                            // B
  CHECK(llc2.access(addr_of_line(0)) == LlcResult::Hit);   // touch A
  llc2.access(addr_of_line(2));                            // C evicts B
  CHECK(llc2.access(addr_of_line(0)) == LlcResult::Hit);   // A survived
  CHECK(llc2.access(addr_of_line(1)) == LlcResult::Miss);  // B evicted
}

TEST_CASE("associativity+1 distinct lines in one set force an LRU miss") {
  // 4 sets, 4 ways
  const uint32_t ways = 4;
  const uint64_t sets = 4;
  LlcModel llc(kCachelineBytes * ways * sets, ways);
  REQUIRE(llc.sets() == sets);

  // lines mapping to set 0 are line numbers 0, 4, 8, ... (line % sets)
  // hand-simulated LRU: after A B C D E the set holds {B C D E}
  for (uint64_t i = 0; i <= ways; ++i)
    CHECK(llc.access(addr_of_line(i * sets)) == LlcResult::Miss);
  // A was least-recently used and got evicted; refetching it evicts B
  CHECK(llc.access(addr_of_line(0)) == LlcResult::Miss);
  // set is now {C D E A}: C is resident, B is not
  CHECK(llc.access(addr_of_line(2 * sets)) == LlcResult::Hit);
  CHECK(llc.access(addr_of_line(1 * sets)) == LlcResult::Miss);
}

TEST_CASE("address classification over the region table") {
  const uint64_t GiB = 1ULL << 30;
  AddressMap map(1 * GiB, 3 * GiB);
  map.add_dram_region(0, 1 * GiB);

  CHECK(map.classify(1 * GiB) == AccessClass::CxlSsd);        // inclusive base
  CHECK(map.classify(3 * GiB - 64) == AccessClass::CxlSsd);
  CHECK(map.classify(0) == AccessClass::HostDram);
  CHECK(map.classify(1 * GiB - 1) == AccessClass::HostDram);
  CHECK_THROWS_AS(map.classify(3 * GiB), SimError);           // exclusive limit
  CHECK_THROWS_AS(map.classify(4 * GiB), SimError);
}
