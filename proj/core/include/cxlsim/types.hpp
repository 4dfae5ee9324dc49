#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cxlsim {

inline constexpr uint64_t kCachelineBytes = 64;
inline constexpr uint64_t kCachelineMask = ~(kCachelineBytes - 1);

enum class MemOp : uint8_t { Read, Write };

// One cacheline-granular memory access replayed from a trace.
struct MemoryRequest {
  uint32_t core_id = 0;
  uint32_t thread_id = 0;
  MemOp opcode = MemOp::Read;
  uint64_t address = 0;
  uint64_t issue_cycle = 0;
};

inline uint64_t cacheline_of(uint64_t address) { return address & kCachelineMask; }

enum class AccessClass : uint8_t { HostDram, CxlSsd };

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct TraceError : std::runtime_error {
  explicit TraceError(const std::string& what) : std::runtime_error(what) {}
};

struct TransportError : std::runtime_error {
  explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};

struct SimError : std::runtime_error {
  explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

struct ReportError : std::runtime_error {
  explicit ReportError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cxlsim
