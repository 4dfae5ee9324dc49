#include "cxlsim/engine.hpp"

#include <algorithm>
#include <cassert>

namespace cxlsim {

Engine::Engine(const ExperimentConfig& cfg, TraceSet traces)
    : Engine(cfg, std::move(traces), cfg.emit_events) {}

Engine::Engine(const ExperimentConfig& cfg, TraceSet traces, bool keep_events)
    : cfg_(cfg), traces_(std::move(traces)), address_map_(cfg.cxl_base, cfg.cxl_limit) {
  cfg_.validate();
  if (traces_.cores() != cfg_.core_count ||
      traces_.threads_per_core() != cfg_.threads_per_core)
    throw SimError("trace set shape does not match core/thread configuration");

  address_map_.add_dram_region(cfg_.dram_base, cfg_.dram_limit);

  recorder_ = std::make_unique<Recorder>(keep_events);
  costs_ = std::make_unique<LogicCostModel>(cfg_.logic_cost_mode, cfg_.logic_costs,
                                            cfg_.seed);

  NandGeometry geom;
  geom.channels = cfg_.nand_channels;
  geom.ways = cfg_.nand_ways;
  geom.page_size = cfg_.page_size_bytes;
  geom.pages_per_way = cfg_.nand_pages_per_way;
  nand_ = std::make_unique<NandArray>(geom, make_nand_provider(cfg_),
                                      cfg_.nand_queue_overhead_ns, recorder_.get());
  if (cfg_.payload_capture)
    nand_->enable_store(cfg_.nand_prefill == NandPrefill::Pattern);

  FirmwareParams fw;
  fw.hdm_base = cfg_.cxl_base;
  fw.page_size = cfg_.page_size_bytes;
  fw.write_log_capacity = cfg_.write_log_capacity_entries;
  fw.data_cache_frames = cfg_.data_cache_frames;
  fw.compaction_mode = cfg_.compaction_mode;
  fw.payload_capture = cfg_.payload_capture;
  firmware_ = std::make_unique<Firmware>(fw, *nand_, *costs_, recorder_.get());

  port_ = std::make_unique<CxlPort>(*firmware_,
                                    InterfaceModel{cfg_.interface_overhead_ns});
  llc_ = std::make_unique<LlcModel>(cfg_.llc_bytes, cfg_.llc_ways);

  cores_.resize(cfg_.core_count);
  for (uint32_t c = 0; c < cfg_.core_count; ++c) {
    cores_[c].id = c;
    cores_[c].threads.resize(cfg_.threads_per_core);
    for (uint32_t t = 0; t < cfg_.threads_per_core; ++t) cores_[c].threads[t].id = t;
  }
}

bool Engine::thread_exhausted(const Core& core, const ThreadState& th) const {
  return th.cursor >= traces_.stream(core.id, th.id).size();
}

bool Engine::thread_runnable(const Core& core, const ThreadState& th) const {
  if (thread_exhausted(core, th)) return false;
  return !th.blocked || th.blocked_until <= core.cycle;
}

bool Engine::core_has_work(const Core& core) const {
  for (const ThreadState& th : core.threads)
    if (!thread_exhausted(core, th)) return true;
  return false;
}

int Engine::pick_core() const {
  int best = -1;
  for (const Core& core : cores_) {
    if (!core_has_work(core)) continue;
    if (best < 0 || core.cycle < cores_[best].cycle) best = static_cast<int>(core.id);
  }
  return best;
}

Engine::DispatchResult Engine::dispatch_cxl(const MemoryRequest& request) {
  CxlCommand cmd = port_->make_command(request);
  const uint64_t cycle_before = cores_[request.core_id].cycle;
  CxlCompletion cpl = port_->issue(cmd);
  assert(cores_[request.core_id].cycle == cycle_before);
  (void)cycle_before;

  if (cpl.status != CxlStatus::Ok)
    throw SimError("device fault at request ordinal " + std::to_string(accesses_) +
                   " (core " + std::to_string(request.core_id) + " thread " +
                   std::to_string(request.thread_id) + "): " + port_->last_fault());
  DispatchResult r;
  r.total_ns = finalize_latency(cpl, InterfaceModel{cfg_.interface_overhead_ns});
  r.cxl_overhead_ns = cpl.cxl_op_overhead_ns;
  return r;
}

void Engine::maybe_context_switch(Core& core, ThreadState& th, uint64_t reported_ns) {
  bool peer = false;
  for (const ThreadState& other : core.threads)
    if (other.id != th.id && thread_runnable(core, other)) peer = true;

  if (should_switch(reported_ns, cfg_.switch_threshold_ns, peer)) {
    th.blocked = true;
    th.blocked_until = core.cycle + ns_to_cycles(reported_ns, cfg_.frequency_hz);
    recorder_->record(EventKind::ContextSwitch, 0, Breakdown{});
    core.cycle += cfg_.switch_penalty_cycles;
    // round-robin to the next runnable peer
    for (uint32_t i = 1; i <= core.threads.size(); ++i) {
      uint32_t cand = (core.active + i) % core.threads.size();
      if (cand != th.id && thread_runnable(core, core.threads[cand])) {
        core.active = cand;
        break;
      }
    }
  } else {
    core.cycle += ns_to_cycles(reported_ns, cfg_.frequency_hz);
  }
}

void Engine::step(Core& core, bool& consumed) {
  consumed = false;

  if (!thread_runnable(core, core.threads[core.active])) {
    // rotate to a runnable thread
    bool rotated = false;
    for (uint32_t i = 1; i <= core.threads.size(); ++i) {
      uint32_t cand = (core.active + i) % core.threads.size();
      if (thread_runnable(core, core.threads[cand])) {
        core.active = cand;
        rotated = true;
        break;
      }
    }
    if (!rotated) {
      // every live thread is blocked: stall to the earliest wake, then
      // resume that thread (round-robin tie-break)
      uint64_t best_wake = UINT64_MAX;
      uint32_t best_thread = core.active;
      for (uint32_t i = 1; i <= core.threads.size(); ++i) {
        uint32_t cand = (core.active + i) % core.threads.size();
        const ThreadState& th = core.threads[cand];
        if (thread_exhausted(core, th)) continue;
        assert(th.blocked);
        if (th.blocked_until < best_wake) {
          best_wake = th.blocked_until;
          best_thread = cand;
        }
      }
      assert(best_wake != UINT64_MAX);
      core.cycle = std::max(core.cycle, best_wake);
      core.active = best_thread;
      return;  // no access consumed this step
    }
  }

  ThreadState& th = core.threads[core.active];
  if (th.blocked) th.blocked = false;

  const TraceRecord& rec = traces_.stream(core.id, th.id)[th.cursor];
  ++th.cursor;

  core.cycle += rec.gap_instructions * cfg_.instruction_cycles;
  instructions_ += rec.gap_instructions + 1;
  recorder_->set_context(core.id, th.id, core.cycle);

  if (llc_->access(cacheline_of(rec.address)) == LlcResult::Hit) {
    core.cycle += cfg_.llc_hit_cycles;
  } else {
    AccessClass cls;
    try {
      cls = address_map_.classify(rec.address);
    } catch (const SimError& e) {
      throw SimError(std::string(e.what()) + " at request ordinal " +
                     std::to_string(accesses_));
    }
    if (cls == AccessClass::HostDram) {
      core.cycle += cfg_.dram_access_cycles;
      ++dram_accesses_;
    } else {
      ++cxl_accesses_;
      MemoryRequest request{core.id, th.id, rec.opcode, cacheline_of(rec.address),
                            core.cycle};
      DispatchResult r = dispatch_cxl(request);
      maybe_context_switch(core, th, r.total_ns);
    }
  }
  consumed = true;
}

RunReport Engine::run() {
  if (ran_) throw SimError("engine can only run once");
  ran_ = true;

  while (accesses_ < cfg_.access_budget) {
    int c = pick_core();
    if (c < 0) break;
    bool consumed = false;
    step(cores_[static_cast<size_t>(c)], consumed);
    if (consumed) ++accesses_;
  }

  // A thread that blocked on its final dispatched access never gets
  // reselected; its completion still bounds the core's busy time.
  for (Core& core : cores_)
    for (const ThreadState& th : core.threads)
      if (th.blocked) core.cycle = std::max(core.cycle, th.blocked_until);

  return build_report();
}

RunReport Engine::build_report() const {
  RunReport r;
  r.experiment_name = cfg_.experiment_name;
  r.config_json = config_to_json(cfg_);

  r.accesses = accesses_;
  r.instructions = instructions_;
  for (const Core& core : cores_) r.core_cycles.push_back(core.cycle);
  r.max_core_cycle = r.core_cycles.empty()
                         ? 0
                         : *std::max_element(r.core_cycles.begin(), r.core_cycles.end());
  r.cycles_per_instruction =
      instructions_ == 0 ? 0.0
                         : static_cast<double>(r.max_core_cycle) /
                               static_cast<double>(instructions_);

  r.llc_hits = llc_->hits();
  r.llc_misses = llc_->misses();
  r.dram_accesses = dram_accesses_;
  r.cxl_accesses = cxl_accesses_;

  r.context_switches = recorder_->count(EventKind::ContextSwitch);
  r.compactions = firmware_->compactions();
  r.nand_reads = nand_->reads();
  r.nand_programs = nand_->programs();
  r.evictions = firmware_->evictions();
  r.dirty_evictions = firmware_->dirty_evictions();

  for (size_t k = 0; k < static_cast<size_t>(EventKind::Count); ++k) {
    EventKind kind = static_cast<EventKind>(k);
    if (recorder_->count(kind) == 0) continue;
    const char* name = to_string(kind);
    r.kind_summaries[name] = recorder_->summary(kind);
    r.histograms[name] = recorder_->histogram(kind, cfg_.hist_bin_ns);
    r.cdfs[name] = recorder_->cdf(kind);
    auto means = recorder_->breakdown_means(kind);
    if (!means.empty()) r.breakdowns[name] = std::move(means);
  }
  return r;
}

}  // namespace cxlsim
