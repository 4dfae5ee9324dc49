#include "cxlsim/compare.hpp"

#include "json.hpp"

namespace cxlsim {

namespace {

nlohmann::ordered_json ratio_of(double a, double b) {
  if (b == 0.0) {
    if (a == 0.0) return 1.0;
    return nullptr;  // undefined
  }
  return a / b;
}

}  // namespace

std::string compare_reports(const RunReport& a, const RunReport& b) {
  nlohmann::ordered_json j;

  nlohmann::ordered_json totals;
  totals["accesses_ratio"] = ratio_of(static_cast<double>(a.accesses),
                                      static_cast<double>(b.accesses));
  totals["instructions_ratio"] = ratio_of(static_cast<double>(a.instructions),
                                          static_cast<double>(b.instructions));
  totals["max_core_cycle_ratio"] = ratio_of(static_cast<double>(a.max_core_cycle),
                                            static_cast<double>(b.max_core_cycle));
  totals["cycles_per_instruction_ratio"] =
      ratio_of(a.cycles_per_instruction, b.cycles_per_instruction);
  j["totals"] = totals;

  nlohmann::ordered_json counts;
  auto count_ratio = [&](const char* name, uint64_t ca, uint64_t cb) {
    counts[name] = ratio_of(static_cast<double>(ca), static_cast<double>(cb));
  };
  count_ratio("context_switches_ratio", a.context_switches, b.context_switches);
  count_ratio("compactions_ratio", a.compactions, b.compactions);
  count_ratio("nand_reads_ratio", a.nand_reads, b.nand_reads);
  count_ratio("nand_programs_ratio", a.nand_programs, b.nand_programs);
  count_ratio("evictions_ratio", a.evictions, b.evictions);
  j["counts"] = counts;

  nlohmann::ordered_json kinds;
  for (const auto& [name, sa] : a.kind_summaries) {
    auto it = b.kind_summaries.find(name);
    if (it == b.kind_summaries.end()) continue;
    const LatencySummary& sb = it->second;
    nlohmann::ordered_json k;
    k["mean_ratio"] = ratio_of(sa.mean, sb.mean);
    k["mean_delta"] = sa.mean - sb.mean;
    k["stddev_ratio"] = ratio_of(sa.stddev, sb.stddev);
    k["p99_ratio"] = ratio_of(static_cast<double>(sa.p99), static_cast<double>(sb.p99));
    k["count_ratio"] = ratio_of(static_cast<double>(sa.count),
                                static_cast<double>(sb.count));
    kinds[name] = k;
  }
  j["kinds"] = kinds;

  nlohmann::ordered_json only_a = nlohmann::ordered_json::array();
  nlohmann::ordered_json only_b = nlohmann::ordered_json::array();
  for (const auto& [name, s] : a.kind_summaries)
    if (!b.kind_summaries.count(name)) only_a.push_back(name);
  for (const auto& [name, s] : b.kind_summaries)
    if (!a.kind_summaries.count(name)) only_b.push_back(name);
  j["only_in_a"] = only_a;
  j["only_in_b"] = only_b;

  return j.dump(2);
}

}  // namespace cxlsim
