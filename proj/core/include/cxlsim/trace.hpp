#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cxlsim/types.hpp"

namespace cxlsim {

// One trace record: `core thread op(R|W) hex_address gap_instructions`.
// gap_instructions counts non-memory instructions executed before this
// access.
struct TraceRecord {
  MemOp opcode = MemOp::Read;
  uint64_t address = 0;
  uint64_t gap_instructions = 0;
};

// Per-(core, thread) ordered request streams.
class TraceSet {
 public:
  TraceSet() = default;
  TraceSet(uint32_t cores, uint32_t threads_per_core)
      : cores_(cores),
        threads_per_core_(threads_per_core),
        streams_(static_cast<size_t>(cores) * threads_per_core) {}

  uint32_t cores() const { return cores_; }
  uint32_t threads_per_core() const { return threads_per_core_; }

  std::vector<TraceRecord>& stream(uint32_t core, uint32_t thread) {
    return streams_[static_cast<size_t>(core) * threads_per_core_ + thread];
  }
  const std::vector<TraceRecord>& stream(uint32_t core, uint32_t thread) const {
    return streams_[static_cast<size_t>(core) * threads_per_core_ + thread];
  }

  uint64_t total_records() const {
    uint64_t n = 0;
    for (const auto& s : streams_) n += s.size();
    return n;
  }

 private:
  uint32_t cores_ = 0;
  uint32_t threads_per_core_ = 0;
  std::vector<std::vector<TraceRecord>> streams_;
};

enum class TraceFormat : uint8_t { Text };

// Loads a trace in the given format. Malformed records raise TraceError
// with the line number; out-of-range core/thread ids raise TraceError
// as validation failures.
TraceSet load_trace(const std::string& path, uint32_t cores, uint32_t threads_per_core,
                    TraceFormat format = TraceFormat::Text);
TraceSet parse_trace_text(const std::string& text, const std::string& origin,
                          uint32_t cores, uint32_t threads_per_core);

enum class AddressDist : uint8_t { Uniform, Zipfian };
enum class GapDist : uint8_t { Fixed, Uniform };

struct TraceGenSpec {
  uint32_t cores = 1;
  uint32_t threads_per_core = 1;
  uint64_t count = 0;
  double read_ratio = 0.5;
  AddressDist address_dist = AddressDist::Uniform;
  double zipf_theta = 0.99;  // used when address_dist == Zipfian; 0 => uniform
  uint64_t addr_base = 0x40000000ULL;
  uint64_t addr_limit = 0xC0000000ULL;
  GapDist gap_dist = GapDist::Fixed;
  uint64_t gap_a = 0;  // Fixed: the gap; Uniform: inclusive lower bound
  uint64_t gap_b = 0;  // Uniform: inclusive upper bound
  uint64_t seed = 1;

  void validate() const;
};

struct TraceGenSummary {
  uint64_t records = 0;
  uint64_t reads = 0;
  uint64_t writes = 0;
};

// Deterministic synthetic trace generation; records are interleaved
// round-robin across (core, thread) pairs in the output file.
TraceGenSummary generate_trace(const TraceGenSpec& spec, const std::string& out_path);

// Zipfian(theta) rank sampler over [0, n) using the standard closed-form
// approximation; theta = 0 degenerates to the exact uniform distribution.
class ZipfSampler {
 public:
  ZipfSampler(uint64_t n, double theta);
  uint64_t sample(double u) const;

 private:
  uint64_t n_;
  double theta_;
  double alpha_ = 0.0;
  double zetan_ = 0.0;
  double eta_ = 0.0;
  double zeta2_ = 0.0;
};

}  // namespace cxlsim
