#pragma once

#include <cstdint>
#include <string>

#include "cxlsim/types.hpp"

namespace cxlsim {

enum class CompactionMode : uint8_t { Sequential, Parallel };
enum class LogicCostMode : uint8_t { Constant, Distribution };
enum class NandLatencyMode : uint8_t { Constant, Empirical, Spike };
enum class NandPrefill : uint8_t { Zero, Pattern };

// Firmware logic cost categories. Constant mode mirrors a static
// parameter model; distribution mode draws truncated normals.
struct LogicCostParams {
  double log_insert_ns = 640.0;
  double cache_check_ns = 712.0;
  double cache_insert_ns = 0.0;
  double index_check_ns = 0.0;
  double index_update_ns = 0.0;

  double log_insert_stddev_ns = 0.0;
  double cache_check_stddev_ns = 0.0;
  double cache_insert_stddev_ns = 0.0;
  double index_check_stddev_ns = 0.0;
  double index_update_stddev_ns = 0.0;
};

// Flat key/value experiment configuration. Unknown keys are rejected at
// parse time; validate() range-checks everything before a run starts.
struct ExperimentConfig {
  std::string experiment_name = "default";

  // host
  uint32_t core_count = 1;
  uint32_t threads_per_core = 1;
  uint64_t frequency_hz = 2'000'000'000;
  uint64_t instruction_cycles = 1;
  uint64_t llc_bytes = 8ULL * 1024 * 1024;
  uint32_t llc_ways = 16;
  uint64_t llc_hit_cycles = 40;
  uint64_t dram_access_cycles = 100;
  uint64_t dram_base = 0;
  uint64_t dram_limit = 0x40000000ULL;
  uint64_t cxl_base = 0x40000000ULL;
  uint64_t cxl_limit = 0xC0000000ULL;
  uint64_t switch_threshold_ns = 2000;
  uint64_t switch_penalty_cycles = 0;
  uint64_t access_budget = UINT64_MAX;
  uint64_t seed = 1;
  std::string trace_file;

  // transport
  uint64_t interface_overhead_ns = 40;

  // firmware
  uint64_t write_log_capacity_entries = 4096;
  uint64_t data_cache_frames = 1024;
  uint64_t page_size_bytes = 16384;
  CompactionMode compaction_mode = CompactionMode::Sequential;
  LogicCostMode logic_cost_mode = LogicCostMode::Constant;
  LogicCostParams logic_costs;
  bool payload_capture = false;
  NandPrefill nand_prefill = NandPrefill::Zero;

  // nand
  uint32_t nand_channels = 4;
  uint32_t nand_ways = 8;
  uint64_t nand_pages_per_way = 4096;
  uint64_t nand_read_ns = 99'720;
  uint64_t nand_program_ns = 600'000;
  NandLatencyMode nand_latency_mode = NandLatencyMode::Constant;
  std::string nand_empirical_csv;
  uint64_t nand_spike_magnitude_ns = 372'000;
  double nand_spike_probability = 0.001;
  uint64_t nand_queue_overhead_ns = 0;

  // reporting
  uint64_t hist_bin_ns = 1000;
  bool emit_events = false;

  uint64_t device_capacity_bytes() const {
    return static_cast<uint64_t>(nand_channels) * nand_ways * nand_pages_per_way *
           page_size_bytes;
  }

  // Throws ConfigError on any out-of-range or inconsistent value.
  void validate() const;

  // Applies one "key=value" override string.
  void apply_override(const std::string& key_value);
};

// Parses a flat key/value config file ("key = value", '#' comments).
ExperimentConfig load_config(const std::string& path);

// Parses config text (used by load_config and tests).
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);

// Resolved-config echo for report embedding.
std::string config_to_json(const ExperimentConfig& cfg);

const char* to_string(CompactionMode m);
const char* to_string(LogicCostMode m);
const char* to_string(NandLatencyMode m);
const char* to_string(NandPrefill p);

}  // namespace cxlsim
