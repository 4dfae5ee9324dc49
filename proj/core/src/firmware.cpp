#include "cxlsim/firmware.hpp"

#include <cassert>
#include <cstring>

namespace cxlsim {

namespace {

void accumulate(Breakdown& into, const Breakdown& from) {
  for (size_t i = 0; i < into.ns.size(); ++i) into.ns[i] += from.ns[i];
}

}  // namespace

const char* to_string(ReadSource s) {
  switch (s) {
    case ReadSource::DataCache: return "data_cache";
    case ReadSource::WriteLog: return "write_log";
    case ReadSource::Nand: return "nand";
  }
  return "?";
}

uint64_t WriteLog::append(uint64_t cacheline_address, const uint8_t* payload,
                          uint64_t sequence) {
  assert(!slots_.empty());
  assert(!full());
  uint64_t slot = (head_ + used_) % slots_.size();
  WriteLogEntry& e = slots_[slot];
  e.cacheline_address = cacheline_address;
  e.sequence = sequence;
  e.valid = true;
  if (payload) std::memcpy(e.payload.data(), payload, kCachelineBytes);
  else e.payload.fill(0);
  ++used_;
  ++live_;
  return slot;
}

void WriteLog::invalidate(uint64_t slot) {
  assert(slots_[slot].valid);
  slots_[slot].valid = false;
  assert(live_ > 0);
  --live_;
}

void WriteLog::drain() {
  for (uint64_t i = 0; i < used_; ++i) slots_[(head_ + i) % slots_.size()].valid = false;
  head_ = 0;
  used_ = 0;
  live_ = 0;
}

std::vector<WriteLogEntry> WriteLog::live_entries() const {
  std::vector<WriteLogEntry> out;
  out.reserve(live_);
  for (uint64_t i = 0; i < used_; ++i) {
    const WriteLogEntry& e = slots_[(head_ + i) % slots_.size()];
    if (e.valid) out.push_back(e);
  }
  return out;
}

std::optional<uint64_t> LogIndex::lookup(uint64_t page, uint32_t offset) const {
  auto pit = pages_.find(page);
  if (pit == pages_.end()) return std::nullopt;
  auto oit = pit->second.find(offset);
  if (oit == pit->second.end()) return std::nullopt;
  return oit->second;
}

void LogIndex::insert(uint64_t page, uint32_t offset, uint64_t slot) {
  pages_[page][offset] = slot;
}

void LogIndex::erase(uint64_t page, uint32_t offset) {
  auto pit = pages_.find(page);
  if (pit == pages_.end()) return;
  pit->second.erase(offset);
  if (pit->second.empty()) pages_.erase(pit);
}

CacheFrame* DataCache::find(uint64_t page) {
  auto it = frames_.find(page);
  return it == frames_.end() ? nullptr : &it->second;
}

const CacheFrame* DataCache::find(uint64_t page) const {
  auto it = frames_.find(page);
  return it == frames_.end() ? nullptr : &it->second;
}

void DataCache::touch(uint64_t page) {
  auto pos = lru_pos_.find(page);
  assert(pos != lru_pos_.end());
  lru_order_.splice(lru_order_.end(), lru_order_, pos->second);
}

std::optional<DataCache::Evicted> DataCache::insert(uint64_t page, CacheFrame frame) {
  assert(capacity_ > 0);
  assert(!resident(page));
  std::optional<Evicted> evicted;
  if (frames_.size() == capacity_) {
    uint64_t victim_page = lru_order_.front();
    lru_order_.pop_front();
    lru_pos_.erase(victim_page);
    auto victim = frames_.find(victim_page);
    evicted = Evicted{victim_page, victim->second.dirty, std::move(victim->second.bytes)};
    frames_.erase(victim);
  }
  lru_pos_[page] = lru_order_.insert(lru_order_.end(), page);
  frames_.emplace(page, std::move(frame));
  return evicted;
}

Firmware::Firmware(const FirmwareParams& params, NandArray& nand, LogicCostModel& costs,
                   Recorder* recorder)
    : params_(params),
      nand_(nand),
      costs_(costs),
      recorder_(recorder),
      capacity_bytes_(nand.geometry().total_pages() * nand.geometry().page_size),
      log_(params.write_log_capacity),
      cache_(params.data_cache_frames) {
  assert(params_.page_size == nand_.geometry().page_size);
  if (params_.payload_capture && !nand_.store_enabled())
    throw SimError("payload capture requires the nand data store to be enabled");
}

DeviceResponse Firmware::execute(CxlOpcode opcode, uint64_t host_address) {
  DeviceResponse resp;
  if (host_address < params_.hdm_base) {
    resp.fault = true;
    resp.diagnostic = "address below device window";
    last_fault_ = resp.diagnostic;
    return resp;
  }
  uint64_t device_address = host_address - params_.hdm_base;
  DeviceResult r = opcode == CxlOpcode::CxlWrite
                       ? handle_write(device_address)
                       : static_cast<DeviceResult>(handle_read(device_address));
  resp.total_ns = r.total_ns;
  resp.overhead_ns = r.overhead_ns;
  resp.fault = r.fault;
  resp.diagnostic = r.diagnostic;
  return resp;
}

DeviceResult Firmware::fault_result(uint64_t address) {
  DeviceResult res;
  res.fault = true;
  res.diagnostic = "unmapped device address 0x";
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%llx", static_cast<unsigned long long>(address));
  res.diagnostic += buf;
  last_fault_ = res.diagnostic;
  return res;
}

DeviceResult Firmware::handle_write(uint64_t address, const uint8_t* payload) {
  const uint64_t addr = cacheline_of(address);
  if (addr >= capacity_bytes_) return fault_result(address);

  DeviceResult res;
  uint64_t local = 0;

  // Stale entries can exhaust the ring before the live-occupancy trigger
  // fires; reclaim space first.
  if (log_.full()) {
    CompactionReport r = run_compaction(params_.compaction_mode, device_now_ns_ + local);
    local += r.wall_ns;
    accumulate(res.breakdown, r.breakdown);
  }

  const uint64_t page = page_of(addr);
  const uint32_t offset = offset_of(addr);
  Breakdown wb;

  // Later writes invalidate earlier entries for the same cacheline; the
  // index always points at the newest slot.
  if (auto prev = index_.lookup(page, offset)) log_.invalidate(*prev);
  uint64_t slot = log_.append(addr, params_.payload_capture ? payload : nullptr,
                              sequence_++);
  wb[BreakdownKey::LogInsert] += costs_.cost(CostCategory::LogInsert);

  // Keep a resident page frame coherent with the logged write.
  if (CacheFrame* f = cache_.find(page)) {
    if (params_.payload_capture) {
      uint8_t* dst = f->bytes.data() + static_cast<size_t>(offset) * kCachelineBytes;
      if (payload) std::memcpy(dst, payload, kCachelineBytes);
      else std::memset(dst, 0, kCachelineBytes);
    }
    f->dirty = true;
    cache_.touch(page);
  }

  index_.insert(page, offset, slot);
  wb[BreakdownKey::IndexUpdate] += costs_.cost(CostCategory::IndexUpdate);

  local += wb.total();
  accumulate(res.breakdown, wb);
  if (recorder_) recorder_->record(EventKind::LogInsert, wb.total(), wb);

  if (log_.live() >= params_.write_log_capacity) {
    CompactionReport r = run_compaction(params_.compaction_mode, device_now_ns_ + local);
    local += r.wall_ns;
    accumulate(res.breakdown, r.breakdown);
  }

  res.total_ns = res.breakdown.total();
  res.overhead_ns = res.total_ns - res.breakdown[BreakdownKey::NandWait];
  device_now_ns_ += res.total_ns;
  return res;
}

ReadResult Firmware::handle_read(uint64_t address) {
  const uint64_t addr = cacheline_of(address);
  ReadResult res;
  if (addr >= capacity_bytes_) {
    static_cast<DeviceResult&>(res) = fault_result(address);
    return res;
  }

  const uint64_t page = page_of(addr);
  const uint32_t offset = offset_of(addr);
  Breakdown& b = res.breakdown;

  b[BreakdownKey::CacheCheck] += costs_.cost(CostCategory::CacheCheck);
  if (CacheFrame* f = cache_.find(page)) {
    cache_.touch(page);
    if (params_.payload_capture) {
      std::memcpy(res.payload.data(),
                  f->bytes.data() + static_cast<size_t>(offset) * kCachelineBytes,
                  kCachelineBytes);
      res.has_payload = true;
    }
    res.source = ReadSource::DataCache;
    res.total_ns = b.total();
    res.overhead_ns = res.total_ns;
    device_now_ns_ += res.total_ns;
    if (recorder_) recorder_->record(EventKind::CacheHit, res.total_ns, b);
    return res;
  }

  b[BreakdownKey::IndexCheck] += costs_.cost(CostCategory::IndexCheck);
  if (auto slot = index_.lookup(page, offset)) {
    const WriteLogEntry& e = log_.entry(*slot);
    if (params_.payload_capture) {
      std::memcpy(res.payload.data(), e.payload.data(), kCachelineBytes);
      res.has_payload = true;
    }
    // served from on-device DRAM; counted with the cache hits
    res.source = ReadSource::WriteLog;
    res.total_ns = b.total();
    res.overhead_ns = res.total_ns;
    device_now_ns_ += res.total_ns;
    if (recorder_) recorder_->record(EventKind::CacheHit, res.total_ns, b);
    return res;
  }

  // NAND path: load the page, fold in newer logged lines, admit it.
  NandOpRequest read_op{NandOpKind::Read, page};
  NandBatchResult nand_read =
      nand_.submit(std::span<const NandOpRequest>(&read_op, 1), device_now_ns_ + b.total());
  b[BreakdownKey::NandWait] += nand_read.makespan_ns;

  std::vector<uint8_t> bytes;
  if (params_.payload_capture) {
    bytes = nand_.read_page_bytes(page);
    merge_logged_lines(page, bytes);
  }
  if (params_.payload_capture) {
    std::memcpy(res.payload.data(),
                bytes.data() + static_cast<size_t>(offset) * kCachelineBytes,
                kCachelineBytes);
    res.has_payload = true;
  }
  cache_admit(page, std::move(bytes), b);

  res.source = ReadSource::Nand;
  res.total_ns = b.total();
  res.overhead_ns = res.total_ns - b[BreakdownKey::NandWait];
  device_now_ns_ += res.total_ns;
  if (recorder_) recorder_->record(EventKind::CacheMiss, res.total_ns, b);
  return res;
}

std::optional<DataCache::Evicted> Firmware::cache_admit(uint64_t page_number,
                                                        std::vector<uint8_t> page_bytes,
                                                        Breakdown& breakdown) {
  assert(!cache_.resident(page_number));
  CacheFrame frame;
  frame.bytes = std::move(page_bytes);
  frame.dirty = false;
  auto evicted = cache_.insert(page_number, std::move(frame));
  if (evicted && evicted->dirty) {
    NandOpRequest prog{NandOpKind::Program, evicted->page};
    NandBatchResult r = nand_.submit(std::span<const NandOpRequest>(&prog, 1),
                                     device_now_ns_ + breakdown.total());
    breakdown[BreakdownKey::NandWait] += r.makespan_ns;
    if (params_.payload_capture)
      nand_.write_page_bytes(evicted->page, evicted->bytes);
    ++dirty_evictions_;
  }
  if (evicted) ++evictions_;
  breakdown[BreakdownKey::CacheInsert] += costs_.cost(CostCategory::CacheInsert);
  return evicted;
}

std::optional<uint64_t> Firmware::lookup_index(uint64_t address) {
  const uint64_t addr = cacheline_of(address);
  Breakdown b;
  b[BreakdownKey::IndexCheck] += costs_.cost(CostCategory::IndexCheck);
  device_now_ns_ += b.total();
  return index_.lookup(page_of(addr), offset_of(addr));
}

void Firmware::merge_logged_lines(uint64_t page, std::vector<uint8_t>& bytes) const {
  auto pit = index_.pages().find(page);
  if (pit == index_.pages().end()) return;
  for (const auto& [offset, slot] : pit->second) {
    const WriteLogEntry& e = log_.entry(slot);
    assert(e.valid);
    std::memcpy(bytes.data() + static_cast<size_t>(offset) * kCachelineBytes,
                e.payload.data(), kCachelineBytes);
  }
}

CompactionReport Firmware::compact_sequential() {
  CompactionReport rep = run_compaction(CompactionMode::Sequential, device_now_ns_);
  device_now_ns_ += rep.wall_ns;
  return rep;
}

CompactionReport Firmware::compact_parallel() {
  CompactionReport rep = run_compaction(CompactionMode::Parallel, device_now_ns_);
  device_now_ns_ += rep.wall_ns;
  return rep;
}

CompactionReport Firmware::run_compaction(CompactionMode mode, uint64_t t0) {
  CompactionReport rep;
  if (index_.empty() && log_.used() == 0) return rep;
  Breakdown& b = rep.breakdown;

  // Snapshot of covered pages in ascending page order.
  std::vector<uint64_t> pages;
  pages.reserve(index_.page_count());
  for (const auto& [page, offsets] : index_.pages()) pages.push_back(page);

  if (mode == CompactionMode::Sequential) {
    for (uint64_t page : pages) {
      ++rep.pages;
      b[BreakdownKey::IndexCheck] += costs_.cost(CostCategory::IndexCheck);
      if (CacheFrame* f = cache_.find(page)) {
        // resident frame already reflects every logged write
        NandOpRequest prog{NandOpKind::Program, page};
        NandBatchResult r =
            nand_.submit(std::span<const NandOpRequest>(&prog, 1), t0 + b.total());
        b[BreakdownKey::NandWait] += r.makespan_ns;
        if (params_.payload_capture) nand_.write_page_bytes(page, f->bytes);
        f->dirty = false;
        ++rep.programs;
      } else {
        NandOpRequest read{NandOpKind::Read, page};
        NandBatchResult rr =
            nand_.submit(std::span<const NandOpRequest>(&read, 1), t0 + b.total());
        b[BreakdownKey::NandWait] += rr.makespan_ns;
        ++rep.reads;

        std::vector<uint8_t> bytes;
        if (params_.payload_capture) {
          bytes = nand_.read_page_bytes(page);
          merge_logged_lines(page, bytes);
        }

        NandOpRequest prog{NandOpKind::Program, page};
        NandBatchResult rp =
            nand_.submit(std::span<const NandOpRequest>(&prog, 1), t0 + b.total());
        b[BreakdownKey::NandWait] += rp.makespan_ns;
        if (params_.payload_capture) nand_.write_page_bytes(page, bytes);
        ++rep.programs;
      }
      b[BreakdownKey::IndexUpdate] += costs_.cost(CostCategory::IndexUpdate);
    }
  } else {
    // Scan and batch the loads, merge, then batch every program; same
    // end state as the sequential pass by construction.
    std::vector<NandOpRequest> reads;
    for (uint64_t page : pages) {
      ++rep.pages;
      b[BreakdownKey::IndexCheck] += costs_.cost(CostCategory::IndexCheck);
      if (!cache_.resident(page)) reads.push_back({NandOpKind::Read, page});
    }
    std::map<uint64_t, std::vector<uint8_t>> merged;
    if (!reads.empty()) {
      NandBatchResult rr = nand_.submit(reads, t0 + b.total());
      b[BreakdownKey::NandWait] += rr.makespan_ns;
      rep.reads = reads.size();
      if (params_.payload_capture) {
        for (const NandOpRequest& op : reads) {
          std::vector<uint8_t> bytes = nand_.read_page_bytes(op.page);
          merge_logged_lines(op.page, bytes);
          merged.emplace(op.page, std::move(bytes));
        }
      }
    }
    for (uint64_t page : pages)
      b[BreakdownKey::IndexUpdate] += costs_.cost(CostCategory::IndexUpdate);

    std::vector<NandOpRequest> programs;
    programs.reserve(pages.size());
    for (uint64_t page : pages) programs.push_back({NandOpKind::Program, page});
    if (!programs.empty()) {
      NandBatchResult rp = nand_.submit(programs, t0 + b.total());
      b[BreakdownKey::NandWait] += rp.makespan_ns;
      rep.programs = programs.size();
    }
    for (uint64_t page : pages) {
      if (CacheFrame* f = cache_.find(page)) {
        if (params_.payload_capture) nand_.write_page_bytes(page, f->bytes);
        f->dirty = false;
      } else if (params_.payload_capture) {
        nand_.write_page_bytes(page, merged.at(page));
      }
    }
  }

  log_.drain();
  index_.clear();
  rep.wall_ns = b.total();

  ++compactions_;
  if (recorder_) recorder_->record(EventKind::Compaction, rep.wall_ns, rep.breakdown);
  return rep;
}

void Firmware::verify_index_soundness() const {
  uint64_t indexed = 0;
  for (const auto& [page, offsets] : index_.pages()) {
    if (offsets.empty())
      throw SimError("index soundness: empty second-level map for page " +
                     std::to_string(page));
    for (const auto& [offset, slot] : offsets) {
      const WriteLogEntry& e = log_.entry(slot);
      if (!e.valid)
        throw SimError("index soundness: path to invalid slot " + std::to_string(slot));
      if (page_of(e.cacheline_address) != page || offset_of(e.cacheline_address) != offset)
        throw SimError("index soundness: slot address mismatch");
      ++indexed;
    }
  }
  if (indexed != log_.live())
    throw SimError("index soundness: " + std::to_string(indexed) + " paths vs " +
                   std::to_string(log_.live()) + " live entries");
}

Firmware::Snapshot Firmware::snapshot() const {
  Snapshot s;
  s.nand_pages = nand_.store();
  for (const auto& [page, frame] : cache_.frames())
    s.cache_frames[page] = {frame.bytes, frame.dirty};
  s.live_log = log_.live_entries();
  s.index = index_.pages();
  return s;
}

}  // namespace cxlsim
