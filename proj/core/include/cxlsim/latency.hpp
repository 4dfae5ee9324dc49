#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cxlsim/config.hpp"
#include "cxlsim/types.hpp"

namespace cxlsim {

enum class NandOpKind : uint8_t { Read, Program };

// Per-kind summary of an empirical sample table.
struct SampleStats {
  uint64_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population stddev
  uint64_t min = 0;
  uint64_t max = 0;
};

// Sorted sample table with weights; draws use inverse-transform sampling
// and return only values present in the table.
struct EmpiricalTable {
  std::vector<uint64_t> values;   // ascending
  std::vector<double> cum_weight; // normalized cumulative, back() == 1.0

  uint64_t draw(double u) const;
  SampleStats stats() const;
};

// Swappable source of per-operation NAND latencies. Sampling is a pure
// function of (seed, kind, ordinal), so identical seeds reproduce
// identical streams regardless of call interleaving.
class LatencyProvider {
 public:
  static LatencyProvider constant(uint64_t read_ns, uint64_t program_ns);
  static LatencyProvider empirical(EmpiricalTable read_table, EmpiricalTable program_table,
                                   uint64_t seed);
  // Base draw, replaced by base + magnitude with probability spike_p.
  static LatencyProvider spike(LatencyProvider base, uint64_t magnitude_ns, double spike_p,
                               uint64_t seed);

  NandLatencyMode mode() const { return mode_; }

  // Stateful draw: advances the per-kind ordinal.
  uint64_t sample(NandOpKind kind);

  // Pure draw at an explicit ordinal.
  uint64_t sample_at(NandOpKind kind, uint64_t ordinal) const;

  SampleStats table_stats(NandOpKind kind) const;

 private:
  LatencyProvider() = default;

  NandLatencyMode mode_ = NandLatencyMode::Constant;
  uint64_t seed_ = 0;
  uint64_t constant_ns_[2] = {0, 0};
  EmpiricalTable tables_[2];

  // spike wraps a base provider
  std::vector<LatencyProvider> base_;  // 0 or 1 element
  uint64_t spike_magnitude_ns_ = 0;
  double spike_probability_ = 0.0;

  uint64_t ordinals_[2] = {0, 0};
};

// Loads `kind,latency_ns` CSV rows (kind in {read, program}) into an
// empirical provider. Missing kinds and non-numeric rows are errors.
LatencyProvider load_empirical(const std::string& path, uint64_t seed);
LatencyProvider parse_empirical_csv(const std::string& text, const std::string& origin,
                                    uint64_t seed);

// Builds the NAND provider described by a config.
LatencyProvider make_nand_provider(const ExperimentConfig& cfg);

enum class CostCategory : uint8_t {
  LogInsert = 0,
  CacheCheck,
  CacheInsert,
  IndexCheck,
  IndexUpdate,
  Count
};

// Firmware logic cost source: fixed per-category constants, or
// truncated-normal draws (floor 0) around the configured means.
class LogicCostModel {
 public:
  LogicCostModel(LogicCostMode mode, const LogicCostParams& params, uint64_t seed);

  uint64_t cost(CostCategory category);
  uint64_t cost_at(CostCategory category, uint64_t ordinal) const;

 private:
  LogicCostMode mode_;
  uint64_t seed_;
  double mean_[static_cast<size_t>(CostCategory::Count)];
  double stddev_[static_cast<size_t>(CostCategory::Count)];
  uint64_t ordinals_[static_cast<size_t>(CostCategory::Count)] = {};
};

}  // namespace cxlsim
