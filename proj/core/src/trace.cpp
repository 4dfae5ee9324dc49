#include "cxlsim/trace.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cxlsim/rng.hpp"

namespace cxlsim {

namespace {

// rng stream ids for trace generation
constexpr uint64_t kStreamOp = 100;
constexpr uint64_t kStreamAddr = 101;
constexpr uint64_t kStreamGap = 102;

uint64_t parse_field_u64(const std::string& tok, int base, const std::string& origin,
                         size_t lineno, const char* what) {
  size_t off = 0;
  if (base == 16 && tok.size() > 2 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X'))
    off = 2;
  uint64_t out = 0;
  auto [p, ec] = std::from_chars(tok.data() + off, tok.data() + tok.size(), out, base);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw TraceError(origin + ":" + std::to_string(lineno) + ": bad " + what + " '" +
                     tok + "'");
  return out;
}

}  // namespace

TraceSet parse_trace_text(const std::string& text, const std::string& origin,
                          uint32_t cores, uint32_t threads_per_core) {
  TraceSet set(cores, threads_per_core);
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream ls(line);
    std::string core_tok, thread_tok, op_tok, addr_tok, gap_tok, extra;
    if (!(ls >> core_tok >> thread_tok >> op_tok >> addr_tok >> gap_tok))
      throw TraceError(origin + ":" + std::to_string(lineno) +
                       ": expected 'core thread R|W hex_address gap'");
    if (ls >> extra)
      throw TraceError(origin + ":" + std::to_string(lineno) + ": trailing field '" +
                       extra + "'");

    uint64_t core = parse_field_u64(core_tok, 10, origin, lineno, "core id");
    uint64_t thread = parse_field_u64(thread_tok, 10, origin, lineno, "thread id");
    if (core >= cores)
      throw TraceError(origin + ":" + std::to_string(lineno) + ": core id " +
                       std::to_string(core) + " out of range (core_count=" +
                       std::to_string(cores) + ")");
    if (thread >= threads_per_core)
      throw TraceError(origin + ":" + std::to_string(lineno) + ": thread id " +
                       std::to_string(thread) + " out of range (threads_per_core=" +
                       std::to_string(threads_per_core) + ")");

    TraceRecord rec;
    if (op_tok == "R" || op_tok == "r") rec.opcode = MemOp::Read;
    else if (op_tok == "W" || op_tok == "w") rec.opcode = MemOp::Write;
    else
      throw TraceError(origin + ":" + std::to_string(lineno) + ": bad op '" + op_tok +
                       "' (expected R or W)");
    rec.address = parse_field_u64(addr_tok, 16, origin, lineno, "address");
    rec.gap_instructions = parse_field_u64(gap_tok, 10, origin, lineno, "gap count");

    set.stream(static_cast<uint32_t>(core), static_cast<uint32_t>(thread))
        .push_back(rec);
  }
  return set;
}

TraceSet load_trace(const std::string& path, uint32_t cores, uint32_t threads_per_core,
                    TraceFormat format) {
  if (format != TraceFormat::Text)
    throw TraceError("unsupported trace format");
  std::ifstream in(path);
  if (!in) throw TraceError("cannot open trace file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trace_text(buf.str(), path, cores, threads_per_core);
}

void TraceGenSpec::validate() const {
  if (cores == 0) throw ConfigError("gen-trace: cores must be >= 1");
  if (threads_per_core == 0) throw ConfigError("gen-trace: threads must be >= 1");
  if (read_ratio < 0.0 || read_ratio > 1.0)
    throw ConfigError("gen-trace: read_ratio must be in [0, 1]");
  if (addr_base >= addr_limit) throw ConfigError("gen-trace: addr_base >= addr_limit");
  if (addr_limit - addr_base < kCachelineBytes)
    throw ConfigError("gen-trace: address range smaller than one cacheline");
  if (address_dist == AddressDist::Zipfian && (zipf_theta < 0.0 || zipf_theta >= 1.0))
    throw ConfigError("gen-trace: zipf theta must be in [0, 1)");
  if (gap_dist == GapDist::Uniform && gap_a > gap_b)
    throw ConfigError("gen-trace: uniform gap bounds must satisfy a <= b");
}

ZipfSampler::ZipfSampler(uint64_t n, double theta) : n_(n), theta_(theta) {
  if (theta_ == 0.0) return;
  alpha_ = 1.0 / (1.0 - theta_);
  for (uint64_t i = 1; i <= n_; ++i) zetan_ += 1.0 / std::pow(static_cast<double>(i), theta_);
  zeta2_ = 1.0 + 1.0 / std::pow(2.0, theta_);
  eta_ = (1.0 - std::pow(2.0 / static_cast<double>(n_), 1.0 - theta_)) /
         (1.0 - zeta2_ / zetan_);
}

uint64_t ZipfSampler::sample(double u) const {
  if (theta_ == 0.0) {
    uint64_t k = static_cast<uint64_t>(u * static_cast<double>(n_));
    return k >= n_ ? n_ - 1 : k;
  }
  double uz = u * zetan_;
  if (uz < 1.0) return 0;
  if (uz < zeta2_) return 1;
  double k = static_cast<double>(n_) * std::pow(eta_ * u - eta_ + 1.0, alpha_);
  uint64_t out = static_cast<uint64_t>(k);
  return out >= n_ ? n_ - 1 : out;
}

TraceGenSummary generate_trace(const TraceGenSpec& spec, const std::string& out_path) {
  spec.validate();

  std::ofstream out(out_path);
  if (!out) throw TraceError("cannot open output trace file '" + out_path + "'");

  const uint64_t lines = (spec.addr_limit - spec.addr_base) / kCachelineBytes;
  ZipfSampler addr_sampler(lines, spec.address_dist == AddressDist::Zipfian
                                      ? spec.zipf_theta
                                      : 0.0);
  const uint32_t slots = spec.cores * spec.threads_per_core;

  TraceGenSummary summary;
  char buf[96];
  for (uint64_t i = 0; i < spec.count; ++i) {
    uint32_t slot = static_cast<uint32_t>(i % slots);
    uint32_t core = slot / spec.threads_per_core;
    uint32_t thread = slot % spec.threads_per_core;

    bool is_read = CounterRng::draw_unit(spec.seed, kStreamOp, i) < spec.read_ratio;
    uint64_t rank = addr_sampler.sample(CounterRng::draw_unit(spec.seed, kStreamAddr, i));
    uint64_t address = spec.addr_base + rank * kCachelineBytes;

    uint64_t gap = spec.gap_a;
    if (spec.gap_dist == GapDist::Uniform) {
      uint64_t span = spec.gap_b - spec.gap_a + 1;
      gap = spec.gap_a + CounterRng::draw_u64(spec.seed, kStreamGap, i) % span;
    }

    int n = std::snprintf(buf, sizeof(buf), "%u %u %c 0x%llx %llu\n", core, thread,
                          is_read ? 'R' : 'W',
                          static_cast<unsigned long long>(address),
                          static_cast<unsigned long long>(gap));
    out.write(buf, n);

    ++summary.records;
    if (is_read) ++summary.reads;
    else ++summary.writes;
  }
  out.flush();
  if (!out) throw TraceError("write failure on '" + out_path + "'");
  return summary;
}

}  // namespace cxlsim
