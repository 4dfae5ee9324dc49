#pragma once

#include <array>
#include <cstdint>
#include <list>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cxlsim/config.hpp"
#include "cxlsim/latency.hpp"
#include "cxlsim/metrics.hpp"
#include "cxlsim/nand.hpp"
#include "cxlsim/transport.hpp"
#include "cxlsim/types.hpp"

namespace cxlsim {

struct WriteLogEntry {
  uint64_t cacheline_address = 0;  // device-local, 64 B aligned
  std::array<uint8_t, kCachelineBytes> payload{};  // zero-filled without capture
  uint64_t sequence = 0;
  bool valid = false;

  bool operator==(const WriteLogEntry&) const = default;
};

// Bounded append ring of logged 64 B writes. Stale entries (overwritten
// cachelines) occupy slots until a compaction drains the ring.
class WriteLog {
 public:
  explicit WriteLog(uint64_t capacity) : slots_(capacity) {}

  uint64_t capacity() const { return slots_.size(); }
  uint64_t used() const { return used_; }
  uint64_t live() const { return live_; }
  bool full() const { return used_ == slots_.size(); }

  uint64_t append(uint64_t cacheline_address, const uint8_t* payload, uint64_t sequence);
  void invalidate(uint64_t slot);
  const WriteLogEntry& entry(uint64_t slot) const { return slots_[slot]; }

  // Empties the ring after a full-drain compaction.
  void drain();

  // Live entries in append order (oldest first).
  std::vector<WriteLogEntry> live_entries() const;

 private:
  std::vector<WriteLogEntry> slots_;
  uint64_t head_ = 0;
  uint64_t used_ = 0;
  uint64_t live_ = 0;
};

// Two-level index over buffered writes: modified page -> cacheline
// offset within that page -> log slot. A first-level entry exists iff
// its second-level map is non-empty.
class LogIndex {
 public:
  std::optional<uint64_t> lookup(uint64_t page, uint32_t offset) const;
  void insert(uint64_t page, uint32_t offset, uint64_t slot);
  void erase(uint64_t page, uint32_t offset);
  void clear() { pages_.clear(); }
  bool empty() const { return pages_.empty(); }
  uint64_t page_count() const { return pages_.size(); }
  const std::map<uint64_t, std::map<uint32_t, uint64_t>>& pages() const { return pages_; }

 private:
  std::map<uint64_t, std::map<uint32_t, uint64_t>> pages_;
};

struct CacheFrame {
  std::vector<uint8_t> bytes;  // empty without payload capture
  bool dirty = false;
};

// On-device DRAM cache of whole NAND pages, strict LRU (O(1) touch and
// victim selection via a recency list).
class DataCache {
 public:
  explicit DataCache(uint64_t capacity_frames) : capacity_(capacity_frames) {}

  uint64_t capacity() const { return capacity_; }
  uint64_t size() const { return frames_.size(); }
  bool resident(uint64_t page) const { return frames_.count(page) != 0; }

  CacheFrame* find(uint64_t page);
  const CacheFrame* find(uint64_t page) const;
  void touch(uint64_t page);

  struct Evicted {
    uint64_t page = 0;
    bool dirty = false;
    std::vector<uint8_t> bytes;
  };
  // Inserts a non-resident page; returns the LRU victim when full.
  std::optional<Evicted> insert(uint64_t page, CacheFrame frame);

  const std::map<uint64_t, CacheFrame>& frames() const { return frames_; }

 private:
  uint64_t capacity_;
  std::map<uint64_t, CacheFrame> frames_;
  std::map<uint64_t, std::list<uint64_t>::iterator> lru_pos_;
  std::list<uint64_t> lru_order_;  // front = least recently used
};

enum class ReadSource : uint8_t { DataCache, WriteLog, Nand };

const char* to_string(ReadSource s);

struct DeviceResult {
  uint64_t total_ns = 0;
  uint64_t overhead_ns = 0;  // total minus NAND wait
  Breakdown breakdown;
  bool fault = false;
  std::string diagnostic;
};

struct ReadResult : DeviceResult {
  ReadSource source = ReadSource::Nand;
  bool has_payload = false;
  std::array<uint8_t, kCachelineBytes> payload{};
};

struct CompactionReport {
  uint64_t pages = 0;
  uint64_t reads = 0;
  uint64_t programs = 0;
  uint64_t wall_ns = 0;
  Breakdown breakdown;
};

struct FirmwareParams {
  uint64_t hdm_base = 0;       // host address mapped to device offset 0
  uint64_t page_size = 16384;
  uint64_t write_log_capacity = 4096;
  uint64_t data_cache_frames = 1024;
  CompactionMode compaction_mode = CompactionMode::Sequential;
  bool payload_capture = false;
};

// CXL-SSD firmware: write log, data cache, two-level log index, and log
// compaction, executing real data-structure logic per request against
// the NAND timing model. Requests are processed one at a time.
class Firmware : public CxlDevice {
 public:
  Firmware(const FirmwareParams& params, NandArray& nand, LogicCostModel& costs,
           Recorder* recorder = nullptr);

  // CxlDevice: translates the host address through the HDM base and
  // dispatches to the read/write handler.
  DeviceResponse execute(CxlOpcode opcode, uint64_t host_address) override;

  // Device-local entry points (addresses are offsets from 0).
  DeviceResult handle_write(uint64_t address, const uint8_t* payload = nullptr);
  ReadResult handle_read(uint64_t address);

  CompactionReport compact_sequential();
  CompactionReport compact_parallel();

  // Index probe; charges one index-check cost draw.
  std::optional<uint64_t> lookup_index(uint64_t address);

  // Admits a page, evicting (and, when dirty, programming) the LRU
  // victim if the cache is full. The caller provides the page image.
  std::optional<DataCache::Evicted> cache_admit(uint64_t page_number,
                                                std::vector<uint8_t> page_bytes,
                                                Breakdown& breakdown);

  uint64_t capacity_bytes() const { return capacity_bytes_; }
  uint64_t page_of(uint64_t address) const { return address / params_.page_size; }
  uint32_t offset_of(uint64_t address) const {
    return static_cast<uint32_t>((address % params_.page_size) / kCachelineBytes);
  }

  const WriteLog& write_log() const { return log_; }
  const LogIndex& log_index() const { return index_; }
  const DataCache& data_cache() const { return cache_; }
  NandArray& nand() { return nand_; }
  uint64_t device_time_ns() const { return device_now_ns_; }
  uint64_t compactions() const { return compactions_; }
  uint64_t evictions() const { return evictions_; }
  uint64_t dirty_evictions() const { return dirty_evictions_; }
  const std::string& last_fault() const { return last_fault_; }

  // Checks the live-log/index bijection; throws SimError on violation.
  void verify_index_soundness() const;

  struct Snapshot {
    std::map<uint64_t, std::vector<uint8_t>> nand_pages;
    std::map<uint64_t, std::pair<std::vector<uint8_t>, bool>> cache_frames;
    std::vector<WriteLogEntry> live_log;
    std::map<uint64_t, std::map<uint32_t, uint64_t>> index;

    bool operator==(const Snapshot&) const = default;
  };
  Snapshot snapshot() const;

 private:
  DeviceResult fault_result(uint64_t address);
  void merge_logged_lines(uint64_t page, std::vector<uint8_t>& bytes) const;
  // Drains the whole log; NAND submissions start at device-local t0.
  CompactionReport run_compaction(CompactionMode mode, uint64_t t0);

  FirmwareParams params_;
  NandArray& nand_;
  LogicCostModel& costs_;
  Recorder* recorder_;

  uint64_t capacity_bytes_;
  WriteLog log_;
  LogIndex index_;
  DataCache cache_;

  uint64_t sequence_ = 0;
  uint64_t device_now_ns_ = 0;
  uint64_t compactions_ = 0;
  uint64_t evictions_ = 0;
  uint64_t dirty_evictions_ = 0;
  std::string last_fault_;
};

}  // namespace cxlsim
