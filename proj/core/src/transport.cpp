#include "cxlsim/transport.hpp"

#include <cassert>

namespace cxlsim {

namespace {

void put_u16(std::byte* p, uint16_t v) {
  p[0] = static_cast<std::byte>(v & 0xFF);
  p[1] = static_cast<std::byte>((v >> 8) & 0xFF);
}

void put_u32(std::byte* p, uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::byte>((v >> (8 * i)) & 0xFF);
}

void put_u64(std::byte* p, uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<std::byte>((v >> (8 * i)) & 0xFF);
}

uint16_t get_u16(const std::byte* p) {
  return static_cast<uint16_t>(std::to_integer<uint16_t>(p[0]) |
                               (std::to_integer<uint16_t>(p[1]) << 8));
}

uint32_t get_u32(const std::byte* p) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::to_integer<uint32_t>(p[i]) << (8 * i);
  return v;
}

uint64_t get_u64(const std::byte* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::to_integer<uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

CommandImage encode_command(const CxlCommand& cmd) {
  CommandImage out{};
  out[0] = static_cast<std::byte>(cmd.opcode);
  out[1] = static_cast<std::byte>(cmd.flags);
  put_u16(&out[2], cmd.tag);
  put_u64(&out[4], cmd.address);
  // bytes 12..15 reserved, zero
  return out;
}

CxlCommand decode_command(std::span<const std::byte, kCommandWireBytes> image) {
  CxlCommand cmd;
  uint8_t op = std::to_integer<uint8_t>(image[0]);
  if (op != static_cast<uint8_t>(CxlOpcode::CxlRead) &&
      op != static_cast<uint8_t>(CxlOpcode::CxlWrite))
    throw TransportError("bad command opcode " + std::to_string(op));
  cmd.opcode = static_cast<CxlOpcode>(op);
  cmd.flags = std::to_integer<uint8_t>(image[1]);
  cmd.tag = get_u16(&image[2]);
  cmd.address = get_u64(&image[4]);
  return cmd;
}

CompletionImage encode_completion(const CxlCompletion& cpl) {
  CompletionImage out{};
  put_u16(&out[0], cpl.tag);
  put_u16(&out[2], static_cast<uint16_t>(cpl.status));
  put_u32(&out[4], cpl.total_device_latency_ns);
  put_u32(&out[8], cpl.cxl_op_overhead_ns);
  return out;
}

CxlCompletion decode_completion(std::span<const std::byte, kCompletionWireBytes> image) {
  CxlCompletion cpl;
  cpl.tag = get_u16(&image[0]);
  uint16_t st = get_u16(&image[2]);
  if (st > 1) throw TransportError("bad completion status " + std::to_string(st));
  cpl.status = static_cast<CxlStatus>(st);
  cpl.total_device_latency_ns = get_u32(&image[4]);
  cpl.cxl_op_overhead_ns = get_u32(&image[8]);
  return cpl;
}

CxlCommand encode_request(MemOp op, uint64_t address, uint16_t tag) {
  CxlCommand cmd;
  cmd.opcode = op == MemOp::Read ? CxlOpcode::CxlRead : CxlOpcode::CxlWrite;
  cmd.flags = 0;
  cmd.tag = tag;
  cmd.address = cacheline_of(address);
  return cmd;
}

CxlCommand encode_request(const MemoryRequest& request, uint16_t tag) {
  return encode_request(request.opcode, request.address, tag);
}

uint64_t ns_to_cycles(uint64_t ns, uint64_t frequency_hz) {
  if (frequency_hz == 0) throw SimError("ns_to_cycles: frequency must be > 0");
  constexpr uint64_t kNsPerSec = 1'000'000'000ULL;
  unsigned __int128 num = static_cast<unsigned __int128>(ns) * frequency_hz;
  unsigned __int128 cycles = (num + (kNsPerSec - 1)) / kNsPerSec;
  if (cycles > UINT64_MAX)
    throw std::overflow_error("ns_to_cycles: result exceeds 64 bits");
  return static_cast<uint64_t>(cycles);
}

uint64_t finalize_latency(const CxlCompletion& cpl, const InterfaceModel& iface) {
  if (cpl.status != CxlStatus::Ok)
    throw TransportError("finalize_latency on errored completion");
  return static_cast<uint64_t>(cpl.total_device_latency_ns) + iface.interface_overhead_ns;
}

CxlCompletion CxlPort::issue(const CxlCommand& cmd) {
  assert(!outstanding_ && "single outstanding command contract");
  outstanding_ = cmd.tag;

  DeviceResponse r = device_.execute(cmd.opcode, cmd.address);

  CxlCompletion cpl;
  cpl.tag = *outstanding_;
  outstanding_.reset();

  if (r.fault) {
    last_fault_ = r.diagnostic;
    cpl.status = CxlStatus::DeviceError;
    return cpl;
  }
  // The CQE latency fields are 32-bit; a wider measurement cannot be
  // represented on the wire and is an error rather than a saturation.
  if (r.total_ns > UINT32_MAX || r.overhead_ns > UINT32_MAX)
    throw TransportError("device latency exceeds completion field width");
  assert(r.overhead_ns <= r.total_ns);
  cpl.status = CxlStatus::Ok;
  cpl.total_device_latency_ns = static_cast<uint32_t>(r.total_ns);
  cpl.cxl_op_overhead_ns = static_cast<uint32_t>(r.overhead_ns);
  return cpl;
}

}  // namespace cxlsim
