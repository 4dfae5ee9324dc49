#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "cxlsim/latency.hpp"
#include "cxlsim/types.hpp"

namespace cxlsim {

class Recorder;

struct NandGeometry {
  uint32_t channels = 4;
  uint32_t ways = 8;
  uint64_t page_size = 16384;
  uint64_t pages_per_way = 4096;

  uint64_t total_pages() const {
    return static_cast<uint64_t>(channels) * ways * pages_per_way;
  }
  uint32_t unit_count() const { return channels * ways; }
};

// Channel-first striping: consecutive pages round-robin across channels,
// then across ways.
struct NandUnit {
  uint32_t channel = 0;
  uint32_t way = 0;
};

NandUnit map_page(uint64_t page_number, const NandGeometry& geometry);

struct NandOpRequest {
  NandOpKind kind = NandOpKind::Read;
  uint64_t page = 0;
};

struct NandOpRecord {
  NandOpKind kind = NandOpKind::Read;
  uint64_t page = 0;
  uint32_t channel = 0;
  uint32_t way = 0;
  uint64_t submit_ns = 0;
  uint64_t start_ns = 0;
  uint64_t complete_ns = 0;
};

struct NandBatchResult {
  uint64_t makespan_ns = 0;  // latest completion minus submit time
  std::vector<NandOpRecord> ops;
};

// Parallel NAND array: one FIFO per (channel, way) unit, pluggable
// per-operation latency provider, and a linear queue-depth overhead
// standing in for controller/firmware time under load.
class NandArray {
 public:
  NandArray(NandGeometry geometry, LatencyProvider provider,
            uint64_t queue_overhead_ns = 0, Recorder* recorder = nullptr);

  // Queues every op to its unit; start = max(now, unit busy-until),
  // latency = provider sample + overhead * depth-at-start. Returns the
  // per-op schedule and the batch makespan.
  NandBatchResult submit(std::span<const NandOpRequest> ops, uint64_t now_ns);

  const NandGeometry& geometry() const { return geometry_; }
  LatencyProvider& provider() { return provider_; }
  const std::vector<NandOpRecord>& op_log() const { return op_log_; }
  uint64_t reads() const { return reads_; }
  uint64_t programs() const { return programs_; }

  // --- data plane (page contents; materialized only under payload capture) ---
  void enable_store(bool pattern_prefill);
  bool store_enabled() const { return store_enabled_; }
  // Deterministic prefill byte for untouched pages under pattern mode.
  static uint8_t prefill_byte(uint64_t page, uint64_t offset);
  std::vector<uint8_t> read_page_bytes(uint64_t page) const;
  void write_page_bytes(uint64_t page, std::span<const uint8_t> bytes);
  const std::map<uint64_t, std::vector<uint8_t>>& store() const { return store_; }

 private:
  NandGeometry geometry_;
  LatencyProvider provider_;
  uint64_t queue_overhead_ns_;
  Recorder* recorder_;

  std::vector<uint64_t> busy_until_;  // per unit
  std::vector<NandOpRecord> op_log_;
  uint64_t reads_ = 0;
  uint64_t programs_ = 0;

  bool store_enabled_ = false;
  bool pattern_prefill_ = false;
  std::map<uint64_t, std::vector<uint8_t>> store_;
};

}  // namespace cxlsim
