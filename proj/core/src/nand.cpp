#include "cxlsim/nand.hpp"

#include <algorithm>
#include <cassert>

#include "cxlsim/metrics.hpp"

namespace cxlsim {

NandUnit map_page(uint64_t page_number, const NandGeometry& geometry) {
  if (page_number >= geometry.total_pages())
    throw SimError("nand: page " + std::to_string(page_number) + " out of range");
  NandUnit u;
  u.channel = static_cast<uint32_t>(page_number % geometry.channels);
  u.way = static_cast<uint32_t>((page_number / geometry.channels) % geometry.ways);
  return u;
}

NandArray::NandArray(NandGeometry geometry, LatencyProvider provider,
                     uint64_t queue_overhead_ns, Recorder* recorder)
    : geometry_(geometry),
      provider_(std::move(provider)),
      queue_overhead_ns_(queue_overhead_ns),
      recorder_(recorder),
      busy_until_(geometry.unit_count(), 0) {}

NandBatchResult NandArray::submit(std::span<const NandOpRequest> ops, uint64_t now_ns) {
  NandBatchResult result;
  result.ops.reserve(ops.size());

  // Group the batch per unit, preserving submission order within each.
  std::vector<std::vector<size_t>> per_unit(geometry_.unit_count());
  std::vector<NandUnit> units(ops.size());
  for (size_t i = 0; i < ops.size(); ++i) {
    units[i] = map_page(ops[i].page, geometry_);
    per_unit[units[i].channel * geometry_.ways + units[i].way].push_back(i);
  }

  result.ops.resize(ops.size());
  uint64_t latest = now_ns;
  for (uint32_t u = 0; u < geometry_.unit_count(); ++u) {
    const auto& queue = per_unit[u];
    if (queue.empty()) continue;
    uint64_t avail = std::max(busy_until_[u], now_ns);
    for (size_t qi = 0; qi < queue.size(); ++qi) {
      size_t i = queue[qi];
      // depth at start: this op plus everything still waiting behind it
      uint64_t depth = queue.size() - qi;
      uint64_t sample = provider_.sample(ops[i].kind);
      uint64_t latency = sample + queue_overhead_ns_ * depth;

      NandOpRecord rec;
      rec.kind = ops[i].kind;
      rec.page = ops[i].page;
      rec.channel = units[i].channel;
      rec.way = units[i].way;
      rec.submit_ns = now_ns;
      rec.start_ns = avail;
      rec.complete_ns = avail + latency;
      avail = rec.complete_ns;
      result.ops[i] = rec;
      op_log_.push_back(rec);
      latest = std::max(latest, rec.complete_ns);

      if (ops[i].kind == NandOpKind::Read) ++reads_;
      else ++programs_;

      if (recorder_) {
        Breakdown b;
        b[BreakdownKey::NandBase] = sample;
        b[BreakdownKey::NandQueueOverhead] = queue_overhead_ns_ * depth;
        b[BreakdownKey::NandQueueWait] = rec.start_ns - rec.submit_ns;
        recorder_->record(
            ops[i].kind == NandOpKind::Read ? EventKind::NandRead : EventKind::NandProgram,
            rec.complete_ns - rec.submit_ns, b);
      }
    }
    busy_until_[u] = avail;
  }

  result.makespan_ns = latest - now_ns;
  return result;
}

void NandArray::enable_store(bool pattern_prefill) {
  store_enabled_ = true;
  pattern_prefill_ = pattern_prefill;
}

uint8_t NandArray::prefill_byte(uint64_t page, uint64_t offset) {
  return static_cast<uint8_t>(0x5A ^ (page * 131) ^ (offset * 7));
}

std::vector<uint8_t> NandArray::read_page_bytes(uint64_t page) const {
  assert(store_enabled_);
  auto it = store_.find(page);
  if (it != store_.end()) return it->second;
  std::vector<uint8_t> bytes(geometry_.page_size, 0);
  if (pattern_prefill_)
    for (uint64_t i = 0; i < geometry_.page_size; ++i) bytes[i] = prefill_byte(page, i);
  return bytes;
}

void NandArray::write_page_bytes(uint64_t page, std::span<const uint8_t> bytes) {
  assert(store_enabled_);
  assert(bytes.size() == geometry_.page_size);
  store_[page] = std::vector<uint8_t>(bytes.begin(), bytes.end());
}

}  // namespace cxlsim
