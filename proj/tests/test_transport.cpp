#include "doctest.h"

#include <random>

#include "cxlsim/transport.hpp"

using namespace cxlsim;

namespace {

std::array<std::byte, kCommandWireBytes> bytes16(std::initializer_list<int> v) {
  std::array<std::byte, kCommandWireBytes> out{};
  size_t i = 0;
  for (int b : v) out[i++] = static_cast<std::byte>(b);
  return out;
}

std::array<std::byte, kCompletionWireBytes> bytes12(std::initializer_list<int> v) {
  std::array<std::byte, kCompletionWireBytes> out{};
  size_t i = 0;
  for (int b : v) out[i++] = static_cast<std::byte>(b);
  return out;
}

struct FixedDevice : CxlDevice {
  DeviceResponse next;
  DeviceResponse execute(CxlOpcode, uint64_t) override { return next; }
};

}  // namespace

TEST_CASE("command golden bytes") {
  CxlCommand w{CxlOpcode::CxlWrite, 0, 0x1234, 0x40000040ULL};
  CHECK(encode_command(w) == bytes16({0x02, 0x00, 0x34, 0x12, 0x40, 0x00, 0x00, 0x40,
                                      0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}));

  CxlCommand r{CxlOpcode::CxlRead, 0, 0, 0x40000000ULL};
  CHECK(encode_command(r) == bytes16({0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x40,
                                      0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}));

  CxlCommand hi{CxlOpcode::CxlRead, 0, 0xFFFF, 0xDEADBEC0ULL};
  CHECK(encode_command(hi) == bytes16({0x01, 0x00, 0xFF, 0xFF, 0xC0, 0xBE, 0xAD, 0xDE,
                                       0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}));
}

TEST_CASE("completion golden bytes") {
  CxlCompletion a{0x1234, CxlStatus::Ok, 640, 640};
  CHECK(encode_completion(a) == bytes12({0x34, 0x12, 0x00, 0x00, 0x80, 0x02, 0x00, 0x00,
                                         0x80, 0x02, 0x00, 0x00}));

  CxlCompletion b{1, CxlStatus::Ok, 99720, 712};
  CHECK(encode_completion(b) == bytes12({0x01, 0x00, 0x00, 0x00, 0x88, 0x85, 0x01, 0x00,
                                         0xC8, 0x02, 0x00, 0x00}));

  CxlCompletion c{7, CxlStatus::DeviceError, 0, 0};
  CHECK(encode_completion(c) == bytes12({0x07, 0x00, 0x01, 0x00, 0x00, 0x00, 0x00, 0x00,
                                         0x00, 0x00, 0x00, 0x00}));
}

TEST_CASE("round trip recovers opcode and masked address") {
  std::mt19937_64 rng(1234);
  for (int i = 0; i < 20000; ++i) {
    MemOp op = (rng() & 1) ? MemOp::Write : MemOp::Read;
    uint64_t addr = rng();
    uint16_t tag = static_cast<uint16_t>(rng());

    CxlCommand cmd = encode_request(op, addr, tag);
    CHECK(cmd.address % kCachelineBytes == 0);
    CommandImage img = encode_command(cmd);
    CxlCommand back = decode_command(img);
    CHECK(back.opcode == cmd.opcode);
    CHECK(back.address == (addr & kCachelineMask));
    CHECK(back.tag == tag);

    CxlCompletion cpl{tag, CxlStatus::Ok, static_cast<uint32_t>(rng()),
                      0};
    cpl.cxl_op_overhead_ns = cpl.total_device_latency_ns / 2;
    CxlCompletion cback = decode_completion(encode_completion(cpl));
    CHECK(cback.tag == cpl.tag);
    CHECK(cback.total_device_latency_ns == cpl.total_device_latency_ns);
    CHECK(cback.cxl_op_overhead_ns == cpl.cxl_op_overhead_ns);
  }
}

TEST_CASE("low six address bits are masked") {
  CxlCommand a = encode_request(MemOp::Write, 0x40000041ULL, 9);
  CxlCommand b = encode_request(MemOp::Write, 0x40000040ULL, 9);
  CHECK(encode_command(a) == encode_command(b));
}

TEST_CASE("decode rejects garbage") {
  auto img = bytes16({0x77});
  CHECK_THROWS_AS(decode_command(img), TransportError);
  auto cimg = bytes12({0x00, 0x00, 0x09, 0x00});
  CHECK_THROWS_AS(decode_completion(cimg), TransportError);
}

TEST_CASE("ns_to_cycles: exact ceil conversion") {
  CHECK(ns_to_cycles(40, 2'000'000'000ULL) == 80);
  CHECK(ns_to_cycles(1, 2'500'000'000ULL) == 3);
  CHECK(ns_to_cycles(0, 3'000'000'000ULL) == 0);

  // frozen value, re-verified against the ceil bound identity below
  const uint64_t cycles = ns_to_cycles(99'720, 3'000'000'000ULL);
  CHECK(cycles == 299'160);
  unsigned __int128 num = static_cast<unsigned __int128>(99'720) * 3'000'000'000ULL;
  unsigned __int128 lhs = static_cast<unsigned __int128>(cycles - 1) * 1'000'000'000ULL;
  unsigned __int128 rhs = static_cast<unsigned __int128>(cycles) * 1'000'000'000ULL;
  CHECK(lhs < num);
  CHECK(num <= rhs);

  CHECK_THROWS_AS(ns_to_cycles(1, 0), SimError);
  CHECK_THROWS_AS(ns_to_cycles(UINT64_MAX, UINT64_MAX), std::overflow_error);
}

TEST_CASE("ns_to_cycles: ceil subadditivity bounds") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 5000; ++i) {
    uint64_t a = rng() % 1'000'000;
    uint64_t b = rng() % 1'000'000;
    uint64_t hz = 1 + rng() % 5'000'000'000ULL;
    uint64_t ab = ns_to_cycles(a + b, hz);
    CHECK(ab <= ns_to_cycles(a, hz) + ns_to_cycles(b, hz));
    CHECK(ab >= ns_to_cycles(a, hz));
  }
}

TEST_CASE("finalize_latency adds the interface overhead") {
  InterfaceModel iface40{40};
  InterfaceModel iface0{0};
  CHECK(finalize_latency({0, CxlStatus::Ok, 712, 712}, iface40) == 752);
  CHECK(finalize_latency({0, CxlStatus::Ok, 0, 0}, iface40) == 40);
  CHECK(finalize_latency({0, CxlStatus::Ok, 640, 640}, iface0) == 640);
  CHECK_THROWS_AS(finalize_latency({0, CxlStatus::DeviceError, 0, 0}, iface40),
                  TransportError);

  // additive and monotone in both arguments
  CHECK(finalize_latency({0, CxlStatus::Ok, 100, 0}, InterfaceModel{7}) == 107);
  CHECK(finalize_latency({0, CxlStatus::Ok, 101, 0}, InterfaceModel{7}) >
        finalize_latency({0, CxlStatus::Ok, 100, 0}, InterfaceModel{7}));
  CHECK(finalize_latency({0, CxlStatus::Ok, 100, 0}, InterfaceModel{8}) >
        finalize_latency({0, CxlStatus::Ok, 100, 0}, InterfaceModel{7}));
}

TEST_CASE("port issue: tags match, statuses and faults propagate") {
  FixedDevice dev;
  CxlPort port(dev, InterfaceModel{40});

  dev.next = {640, 640, false, ""};
  CxlCommand cmd = port.make_command(MemOp::Write, 0x40000040ULL);
  CxlCompletion cpl = port.issue(cmd);
  CHECK(cpl.tag == cmd.tag);
  CHECK(cpl.status == CxlStatus::Ok);
  CHECK(cpl.total_device_latency_ns == 640);
  CHECK(cpl.cxl_op_overhead_ns == 640);

  // consecutive commands get distinct tags
  CxlCommand cmd2 = port.make_command(MemOp::Read, 0x40000000ULL);
  CHECK(cmd2.tag != cmd.tag);

  dev.next = {0, 0, true, "unmapped device page"};
  CxlCompletion bad = port.issue(cmd2);
  CHECK(bad.status == CxlStatus::DeviceError);
  CHECK(port.last_fault() == "unmapped device page");

  // a measurement wider than the CQE field is an error, not a saturation
  dev.next = {static_cast<uint64_t>(UINT32_MAX) + 1, 0, false, ""};
  CHECK_THROWS_AS(port.issue(port.make_command(MemOp::Read, 0x40000000ULL)),
                  TransportError);
}
