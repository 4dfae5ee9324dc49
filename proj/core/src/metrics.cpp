#include "cxlsim/metrics.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "cxlsim/nand.hpp"

namespace cxlsim {

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::LogInsert: return "log_insert";
    case EventKind::CacheHit: return "cache_hit";
    case EventKind::CacheMiss: return "cache_miss";
    case EventKind::NandRead: return "nand_read";
    case EventKind::NandProgram: return "nand_program";
    case EventKind::Compaction: return "compaction";
    case EventKind::ContextSwitch: return "context_switch";
    default: return "?";
  }
}

const char* to_string(BreakdownKey k) {
  switch (k) {
    case BreakdownKey::LogInsert: return "log_insert";
    case BreakdownKey::CacheCheck: return "cache_check";
    case BreakdownKey::CacheInsert: return "cache_insert";
    case BreakdownKey::IndexCheck: return "index_check";
    case BreakdownKey::IndexUpdate: return "index_update";
    case BreakdownKey::NandWait: return "nand_wait";
    case BreakdownKey::NandBase: return "nand_base";
    case BreakdownKey::NandQueueOverhead: return "nand_queue_overhead";
    case BreakdownKey::NandQueueWait: return "nand_queue_wait";
    default: return "?";
  }
}

void Recorder::record(EventKind kind, uint64_t latency_ns, const Breakdown& breakdown) {
  assert(breakdown.total() == latency_ns ||
         (breakdown.total() == 0 && "events without a breakdown carry an empty one"));
  size_t k = static_cast<size_t>(kind);
  ++counts_[k];
  latencies_[k].push_back(latency_ns);
  for (size_t i = 0; i < breakdown.ns.size(); ++i)
    breakdown_sums_[k].ns[i] += breakdown.ns[i];
  if (keep_events_) {
    EventRecord e;
    e.ordinal = next_ordinal_;
    e.kind = kind;
    e.latency_ns = latency_ns;
    e.breakdown = breakdown;
    e.core = ctx_core_;
    e.thread = ctx_thread_;
    e.sim_time = ctx_time_;
    events_.push_back(e);
  }
  ++next_ordinal_;
}

void Recorder::replay(const std::vector<EventRecord>& events) {
  for (const EventRecord& e : events) {
    set_context(e.core, e.thread, e.sim_time);
    record(e.kind, e.latency_ns, e.breakdown);
  }
}

LatencySummary Recorder::summary(EventKind kind) const {
  const auto& lat = latencies_[static_cast<size_t>(kind)];
  LatencySummary s;
  s.count = lat.size();
  if (lat.empty()) return s;

  double mean = 0.0;
  uint64_t mn = lat[0], mx = lat[0];
  for (uint64_t v : lat) {
    mean += static_cast<double>(v);
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  mean /= static_cast<double>(lat.size());
  double var = 0.0;
  for (uint64_t v : lat) {
    double d = static_cast<double>(v) - mean;
    var += d * d;
  }
  var /= static_cast<double>(lat.size());

  std::vector<uint64_t> sorted = lat;
  std::sort(sorted.begin(), sorted.end());
  auto nearest_rank = [&](double p) {
    size_t rank = static_cast<size_t>(
        std::ceil(p / 100.0 * static_cast<double>(sorted.size())));
    if (rank == 0) rank = 1;
    return sorted[rank - 1];
  };

  s.mean = mean;
  s.stddev = std::sqrt(var);
  s.p50 = nearest_rank(50.0);
  s.p99 = nearest_rank(99.0);
  s.min = mn;
  s.max = mx;
  return s;
}

std::vector<HistogramBin> Recorder::histogram(EventKind kind, uint64_t bin_width_ns) const {
  if (bin_width_ns == 0) throw ReportError("histogram bin width must be > 0");
  const auto& lat = latencies_[static_cast<size_t>(kind)];
  std::vector<HistogramBin> bins;
  if (lat.empty()) return bins;

  uint64_t mn = *std::min_element(lat.begin(), lat.end());
  uint64_t mx = *std::max_element(lat.begin(), lat.end());
  uint64_t nbins = (mx - mn) / bin_width_ns + 1;
  constexpr uint64_t kMaxBins = 16'000'000;
  if (nbins > kMaxBins)
    throw ReportError("histogram bin width " + std::to_string(bin_width_ns) +
                      " ns yields " + std::to_string(nbins) + " bins over [" +
                      std::to_string(mn) + ", " + std::to_string(mx) +
                      "]; raise hist_bin_ns");
  bins.resize(nbins);
  for (uint64_t i = 0; i < nbins; ++i) {
    bins[i].lo_ns = mn + i * bin_width_ns;
    bins[i].hi_ns = bins[i].lo_ns + bin_width_ns;
  }
  for (uint64_t v : lat) ++bins[(v - mn) / bin_width_ns].count;
  return bins;
}

std::vector<CdfPoint> Recorder::cdf(EventKind kind) const {
  const auto& lat = latencies_[static_cast<size_t>(kind)];
  std::vector<CdfPoint> out;
  if (lat.empty()) return out;

  std::vector<uint64_t> sorted = lat;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  for (size_t i = 0; i < sorted.size(); ++i) {
    if (!out.empty() && out.back().latency_ns == sorted[i]) {
      out.back().cum_fraction = static_cast<double>(i + 1) / n;
    } else {
      out.push_back({sorted[i], static_cast<double>(i + 1) / n});
    }
  }
  return out;
}

std::map<std::string, double> Recorder::breakdown_means(EventKind kind) const {
  std::map<std::string, double> out;
  size_t k = static_cast<size_t>(kind);
  if (counts_[k] == 0) return out;
  for (size_t i = 0; i < breakdown_sums_[k].ns.size(); ++i) {
    double mean = static_cast<double>(breakdown_sums_[k].ns[i]) /
                  static_cast<double>(counts_[k]);
    if (breakdown_sums_[k].ns[i] != 0) out[to_string(static_cast<BreakdownKey>(i))] = mean;
  }
  return out;
}

namespace {

nlohmann::ordered_json summary_to_json(const LatencySummary& s) {
  nlohmann::ordered_json j;
  j["count"] = s.count;
  j["mean"] = s.mean;
  j["stddev"] = s.stddev;
  j["p50"] = s.p50;
  j["p99"] = s.p99;
  j["min"] = s.min;
  j["max"] = s.max;
  return j;
}

LatencySummary summary_from_json(const nlohmann::json& j) {
  LatencySummary s;
  s.count = j.at("count").get<uint64_t>();
  s.mean = j.at("mean").get<double>();
  s.stddev = j.at("stddev").get<double>();
  s.p50 = j.at("p50").get<uint64_t>();
  s.p99 = j.at("p99").get<uint64_t>();
  s.min = j.at("min").get<uint64_t>();
  s.max = j.at("max").get<uint64_t>();
  return s;
}

}  // namespace

std::string report_to_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["experiment_name"] = r.experiment_name;
  j["config"] = nlohmann::ordered_json::parse(
      r.config_json.empty() ? "{}" : r.config_json);

  nlohmann::ordered_json totals;
  totals["accesses"] = r.accesses;
  totals["instructions"] = r.instructions;
  totals["core_cycles"] = r.core_cycles;
  totals["max_core_cycle"] = r.max_core_cycle;
  totals["cycles_per_instruction"] = r.cycles_per_instruction;
  totals["llc_hits"] = r.llc_hits;
  totals["llc_misses"] = r.llc_misses;
  totals["dram_accesses"] = r.dram_accesses;
  totals["cxl_accesses"] = r.cxl_accesses;
  j["totals"] = totals;

  nlohmann::ordered_json counts;
  counts["context_switches"] = r.context_switches;
  counts["compactions"] = r.compactions;
  counts["nand_reads"] = r.nand_reads;
  counts["nand_programs"] = r.nand_programs;
  counts["evictions"] = r.evictions;
  counts["dirty_evictions"] = r.dirty_evictions;
  j["counts"] = counts;

  nlohmann::ordered_json kinds;
  for (const auto& [name, s] : r.kind_summaries) kinds[name] = summary_to_json(s);
  j["kinds"] = kinds;

  nlohmann::ordered_json breakdowns;
  for (const auto& [name, cats] : r.breakdowns) {
    nlohmann::ordered_json b;
    for (const auto& [cat, mean] : cats) b[cat] = mean;
    breakdowns[name] = b;
  }
  j["breakdowns"] = breakdowns;

  return j.dump(2);
}

RunReport report_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ReportError(std::string("malformed report json: ") + e.what());
  }
  if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
    throw ReportError("unsupported report schema version");

  RunReport r;
  r.experiment_name = j.value("experiment_name", "");
  if (j.contains("config")) r.config_json = j["config"].dump(2);

  const auto& t = j.at("totals");
  r.accesses = t.at("accesses").get<uint64_t>();
  r.instructions = t.at("instructions").get<uint64_t>();
  r.core_cycles = t.at("core_cycles").get<std::vector<uint64_t>>();
  r.max_core_cycle = t.at("max_core_cycle").get<uint64_t>();
  r.cycles_per_instruction = t.at("cycles_per_instruction").get<double>();
  r.llc_hits = t.at("llc_hits").get<uint64_t>();
  r.llc_misses = t.at("llc_misses").get<uint64_t>();
  r.dram_accesses = t.at("dram_accesses").get<uint64_t>();
  r.cxl_accesses = t.at("cxl_accesses").get<uint64_t>();

  const auto& c = j.at("counts");
  r.context_switches = c.at("context_switches").get<uint64_t>();
  r.compactions = c.at("compactions").get<uint64_t>();
  r.nand_reads = c.at("nand_reads").get<uint64_t>();
  r.nand_programs = c.at("nand_programs").get<uint64_t>();
  r.evictions = c.at("evictions").get<uint64_t>();
  r.dirty_evictions = c.value("dirty_evictions", 0ULL);

  for (const auto& [name, s] : j.at("kinds").items())
    r.kind_summaries[name] = summary_from_json(s);
  if (j.contains("breakdowns"))
    for (const auto& [name, cats] : j.at("breakdowns").items())
      for (const auto& [cat, mean] : cats.items())
        r.breakdowns[name][cat] = mean.get<double>();
  return r;
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

void write_report_files(const RunReport& report, const std::string& out_dir,
                        const std::vector<EventRecord>* events,
                        const std::vector<NandOpRecord>* nand_events) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);

  auto open = [&](const std::string& name) {
    std::ofstream f(out_dir + "/" + name, std::ios::binary);
    if (!f) throw ReportError("cannot write '" + out_dir + "/" + name + "'");
    return f;
  };

  {
    std::ofstream f = open("report.json");
    f << report_to_json(report) << "\n";
  }

  for (const auto& [name, bins] : report.histograms) {
    std::ofstream f = open("hist_" + name + ".csv");
    f << "bin_lo_ns,bin_hi_ns,count\n";
    for (const auto& b : bins)
      f << b.lo_ns << "," << b.hi_ns << "," << b.count << "\n";
  }

  for (const auto& [name, points] : report.cdfs) {
    std::ofstream f = open("cdf_" + name + ".csv");
    f << "latency_ns,cum_fraction\n";
    for (const auto& p : points)
      f << p.latency_ns << "," << fmt_double(p.cum_fraction) << "\n";
  }

  if (events) {
    std::ofstream f = open("events.csv");
    f << "ordinal,kind,core,thread,sim_cycle,latency_ns";
    for (size_t i = 0; i < static_cast<size_t>(BreakdownKey::Count); ++i)
      f << "," << to_string(static_cast<BreakdownKey>(i));
    f << "\n";
    for (const EventRecord& e : *events) {
      f << e.ordinal << "," << to_string(e.kind) << "," << e.core << "," << e.thread
        << "," << e.sim_time << "," << e.latency_ns;
      for (uint64_t v : e.breakdown.ns) f << "," << v;
      f << "\n";
    }
  }

  if (nand_events) {
    std::ofstream f = open("nand_events.csv");
    f << "kind,page,channel,way,submit_ns,start_ns,complete_ns\n";
    for (const NandOpRecord& op : *nand_events) {
      f << (op.kind == NandOpKind::Read ? "read" : "program") << "," << op.page << ","
        << op.channel << "," << op.way << "," << op.submit_ns << "," << op.start_ns
        << "," << op.complete_ns << "\n";
    }
  }
}

}  // namespace cxlsim
