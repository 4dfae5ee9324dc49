#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "cxlsim/address_map.hpp"
#include "cxlsim/config.hpp"
#include "cxlsim/firmware.hpp"
#include "cxlsim/latency.hpp"
#include "cxlsim/llc.hpp"
#include "cxlsim/metrics.hpp"
#include "cxlsim/nand.hpp"
#include "cxlsim/trace.hpp"
#include "cxlsim/transport.hpp"

namespace cxlsim {

// Threshold rule: switch away only when the reported latency strictly
// exceeds the threshold and a peer thread is runnable right now.
inline bool should_switch(uint64_t reported_latency_ns, uint64_t threshold_ns,
                          bool runnable_peer_exists) {
  return reported_latency_ns > threshold_ns && runnable_peer_exists;
}

// Trace-replay host: multi-core cycle accounting over a shared LLC, with
// CXL-window misses delegated synchronously to the device and the
// measured latency folded back into the dispatching core's clock.
class Engine {
 public:
  Engine(const ExperimentConfig& cfg, TraceSet traces);
  Engine(const ExperimentConfig& cfg, TraceSet traces, bool keep_events);

  // Executes until every trace is exhausted or the access budget is
  // reached; deterministic for a fixed config and trace set.
  RunReport run();

  Recorder& recorder() { return *recorder_; }
  Firmware& firmware() { return *firmware_; }
  NandArray& nand() { return *nand_; }
  LlcModel& llc() { return *llc_; }

  // Single-request dispatch helpers, exposed for tests.
  AccessClass classify(uint64_t address) const { return address_map_.classify(address); }

 private:
  struct ThreadState {
    uint32_t id = 0;
    size_t cursor = 0;
    bool blocked = false;
    uint64_t blocked_until = 0;
  };

  struct Core {
    uint32_t id = 0;
    uint64_t cycle = 0;
    uint32_t active = 0;
    std::vector<ThreadState> threads;
  };

  struct DispatchResult {
    uint64_t total_ns = 0;        // device total plus interface overhead
    uint64_t cxl_overhead_ns = 0; // device-reported logic component
  };

  bool thread_runnable(const Core& core, const ThreadState& th) const;
  bool thread_exhausted(const Core& core, const ThreadState& th) const;
  bool core_has_work(const Core& core) const;
  int pick_core() const;
  // Advances one scheduling action; sets consumed when a memory access
  // was executed.
  void step(Core& core, bool& consumed);
  DispatchResult dispatch_cxl(const MemoryRequest& request);
  void maybe_context_switch(Core& core, ThreadState& th, uint64_t reported_ns);

  RunReport build_report() const;

  ExperimentConfig cfg_;
  TraceSet traces_;
  AddressMap address_map_;

  std::unique_ptr<Recorder> recorder_;
  std::unique_ptr<LogicCostModel> costs_;
  std::unique_ptr<NandArray> nand_;
  std::unique_ptr<Firmware> firmware_;
  std::unique_ptr<CxlPort> port_;
  std::unique_ptr<LlcModel> llc_;

  std::vector<Core> cores_;
  uint64_t accesses_ = 0;
  uint64_t instructions_ = 0;
  uint64_t dram_accesses_ = 0;
  uint64_t cxl_accesses_ = 0;
  bool ran_ = false;
};

}  // namespace cxlsim
