#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cxlsim/types.hpp"

namespace cxlsim {

enum class EventKind : uint8_t {
  LogInsert = 0,
  CacheHit,
  CacheMiss,
  NandRead,
  NandProgram,
  Compaction,
  ContextSwitch,
  Count
};

const char* to_string(EventKind k);

// Latency breakdown slots. Device-side events use the firmware
// categories; NAND op events use the nand_* slots.
enum class BreakdownKey : uint8_t {
  LogInsert = 0,
  CacheCheck,
  CacheInsert,
  IndexCheck,
  IndexUpdate,
  NandWait,
  NandBase,
  NandQueueOverhead,
  NandQueueWait,
  Count
};

const char* to_string(BreakdownKey k);

struct Breakdown {
  std::array<uint64_t, static_cast<size_t>(BreakdownKey::Count)> ns{};

  uint64_t& operator[](BreakdownKey k) { return ns[static_cast<size_t>(k)]; }
  uint64_t operator[](BreakdownKey k) const { return ns[static_cast<size_t>(k)]; }
  uint64_t total() const {
    uint64_t t = 0;
    for (uint64_t v : ns) t += v;
    return t;
  }
};

struct EventRecord {
  uint64_t ordinal = 0;
  EventKind kind = EventKind::LogInsert;
  uint64_t latency_ns = 0;
  Breakdown breakdown;
  uint32_t core = 0;
  uint32_t thread = 0;
  uint64_t sim_time = 0;
};

struct LatencySummary {
  uint64_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population stddev
  uint64_t p50 = 0;     // nearest-rank percentiles
  uint64_t p99 = 0;
  uint64_t min = 0;
  uint64_t max = 0;
};

struct HistogramBin {
  uint64_t lo_ns = 0;
  uint64_t hi_ns = 0;
  uint64_t count = 0;
};

struct CdfPoint {
  uint64_t latency_ns = 0;
  double cum_fraction = 0.0;
};

// Single-threaded event sink with incremental aggregation. Full event
// records are kept only when keep_events is set; per-kind latency
// vectors (for histograms/CDFs/percentiles) are always kept.
class Recorder {
 public:
  explicit Recorder(bool keep_events = true) : keep_events_(keep_events) {}

  void set_context(uint32_t core, uint32_t thread, uint64_t sim_time) {
    ctx_core_ = core;
    ctx_thread_ = thread;
    ctx_time_ = sim_time;
  }

  void record(EventKind kind, uint64_t latency_ns, const Breakdown& breakdown);

  // Rebuilds aggregates from a saved stream.
  void replay(const std::vector<EventRecord>& events);

  uint64_t count(EventKind kind) const {
    return counts_[static_cast<size_t>(kind)];
  }
  const std::vector<uint64_t>& latencies(EventKind kind) const {
    return latencies_[static_cast<size_t>(kind)];
  }
  const Breakdown& breakdown_sum(EventKind kind) const {
    return breakdown_sums_[static_cast<size_t>(kind)];
  }
  const std::vector<EventRecord>& events() const { return events_; }
  bool keeps_events() const { return keep_events_; }

  LatencySummary summary(EventKind kind) const;
  std::vector<HistogramBin> histogram(EventKind kind, uint64_t bin_width_ns) const;
  std::vector<CdfPoint> cdf(EventKind kind) const;
  // Per-category means; they sum to the kind's overall mean.
  std::map<std::string, double> breakdown_means(EventKind kind) const;

 private:
  bool keep_events_;
  uint64_t next_ordinal_ = 0;
  uint32_t ctx_core_ = 0;
  uint32_t ctx_thread_ = 0;
  uint64_t ctx_time_ = 0;

  std::array<uint64_t, static_cast<size_t>(EventKind::Count)> counts_{};
  std::array<std::vector<uint64_t>, static_cast<size_t>(EventKind::Count)> latencies_;
  std::array<Breakdown, static_cast<size_t>(EventKind::Count)> breakdown_sums_;
  std::vector<EventRecord> events_;
};

// Aggregated per-run metrics plus everything needed to rebuild the
// serialized report files.
struct RunReport {
  std::string experiment_name;
  std::string config_json;  // resolved config echo

  uint64_t accesses = 0;
  uint64_t instructions = 0;
  std::vector<uint64_t> core_cycles;
  uint64_t max_core_cycle = 0;
  double cycles_per_instruction = 0.0;

  uint64_t llc_hits = 0;
  uint64_t llc_misses = 0;
  uint64_t dram_accesses = 0;
  uint64_t cxl_accesses = 0;

  uint64_t context_switches = 0;
  uint64_t compactions = 0;
  uint64_t nand_reads = 0;
  uint64_t nand_programs = 0;
  uint64_t evictions = 0;
  uint64_t dirty_evictions = 0;

  std::map<std::string, LatencySummary> kind_summaries;
  std::map<std::string, std::vector<HistogramBin>> histograms;
  std::map<std::string, std::vector<CdfPoint>> cdfs;
  std::map<std::string, std::map<std::string, double>> breakdowns;
};

std::string report_to_json(const RunReport& report);
RunReport report_from_json(const std::string& json_text);

// Writes report.json, hist_<kind>.csv, cdf_<kind>.csv into out_dir;
// events.csv and nand_events.csv only when the raw streams are given.
struct NandOpRecord;
void write_report_files(const RunReport& report, const std::string& out_dir,
                        const std::vector<EventRecord>* events = nullptr,
                        const std::vector<NandOpRecord>* nand_events = nullptr);

}  // namespace cxlsim
