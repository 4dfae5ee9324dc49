#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "cxlsim/types.hpp"

namespace cxlsim {

enum class CxlOpcode : uint8_t { CxlRead = 0x01, CxlWrite = 0x02 };
enum class CxlStatus : uint16_t { Ok = 0, DeviceError = 1 };

// Custom command carrying the memory-access semantics to the device.
// Payload transfer is disabled in normal operation; only the opcode and
// the 64 B aligned address travel down.
struct CxlCommand {
  CxlOpcode opcode = CxlOpcode::CxlRead;
  uint8_t flags = 0;  // bit 0: payload_present (unused in normal operation)
  uint16_t tag = 0;
  uint64_t address = 0;

  bool payload_present() const { return flags & 0x1; }
};

// Completion record carrying the device-measured latencies back up.
struct CxlCompletion {
  uint16_t tag = 0;
  CxlStatus status = CxlStatus::Ok;
  uint32_t total_device_latency_ns = 0;
  uint32_t cxl_op_overhead_ns = 0;
};

// Wire layouts, little-endian, frozen:
//   command    = opcode(1) | flags(1) | tag(2) | address(8) | reserved(4)
//   completion = tag(2) | status(2) | total_latency_ns(4) | cxl_overhead_ns(4)
inline constexpr size_t kCommandWireBytes = 16;
inline constexpr size_t kCompletionWireBytes = 12;

using CommandImage = std::array<std::byte, kCommandWireBytes>;
using CompletionImage = std::array<std::byte, kCompletionWireBytes>;

CommandImage encode_command(const CxlCommand& cmd);
CxlCommand decode_command(std::span<const std::byte, kCommandWireBytes> image);
CompletionImage encode_completion(const CxlCompletion& cpl);
CxlCompletion decode_completion(std::span<const std::byte, kCompletionWireBytes> image);

// Builds a command from a memory request targeting the CXL window. The
// low 6 address bits are masked off.
CxlCommand encode_request(MemOp op, uint64_t address, uint16_t tag);
CxlCommand encode_request(const MemoryRequest& request, uint16_t tag);

// ceil(ns * hz / 1e9) in exact integer arithmetic.
uint64_t ns_to_cycles(uint64_t ns, uint64_t frequency_hz);

// Fixed CXL.mem interface delay added on top of the device-measured
// latency (the NVMe transport itself is not modeled).
struct InterfaceModel {
  uint64_t interface_overhead_ns = 40;
};

uint64_t finalize_latency(const CxlCompletion& cpl, const InterfaceModel& iface);

// What the device reports for one executed command.
struct DeviceResponse {
  uint64_t total_ns = 0;
  uint64_t overhead_ns = 0;  // logic cost excluding NAND wait
  bool fault = false;
  std::string diagnostic;
};

class CxlDevice {
 public:
  virtual ~CxlDevice() = default;
  virtual DeviceResponse execute(CxlOpcode opcode, uint64_t address) = 0;
};

// Synchronous command port. One command is outstanding at a time; the
// caller's clock must not advance between issue() entry and return.
class CxlPort {
 public:
  explicit CxlPort(CxlDevice& device, InterfaceModel iface = {})
      : device_(device), iface_(iface) {}

  CxlCompletion issue(const CxlCommand& cmd);

  CxlCommand make_command(MemOp op, uint64_t address) {
    return encode_request(op, address, next_tag_++);
  }
  CxlCommand make_command(const MemoryRequest& request) {
    return encode_request(request, next_tag_++);
  }

  uint64_t interface_overhead_ns() const { return iface_.interface_overhead_ns; }
  const std::string& last_fault() const { return last_fault_; }

 private:
  CxlDevice& device_;
  InterfaceModel iface_;
  uint16_t next_tag_ = 0;
  std::optional<uint16_t> outstanding_;
  std::string last_fault_;
};

}  // namespace cxlsim
