#include "cxlsim/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"

namespace cxlsim {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::string v = trim(value);
  if (v.empty()) throw ConfigError("empty value for key '" + key + "'");
  int base = 10;
  size_t off = 0;
  if (v.size() > 2 && v[0] == '0' && (v[1] == 'x' || v[1] == 'X')) {
    base = 16;
    off = 2;
  }
  uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data() + off, v.data() + v.size(), out, base);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("invalid integer for key '" + key + "': '" + value + "'");
  return out;
}

double parse_f64(const std::string& key, const std::string& value) {
  std::string v = trim(value);
  try {
    size_t pos = 0;
    double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("invalid number for key '" + key + "': '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  std::string v = trim(value);
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("invalid boolean for key '" + key + "': '" + value + "'");
}

}  // namespace

const char* to_string(CompactionMode m) {
  return m == CompactionMode::Sequential ? "sequential" : "parallel";
}
const char* to_string(LogicCostMode m) {
  return m == LogicCostMode::Constant ? "constant" : "distribution";
}
const char* to_string(NandLatencyMode m) {
  switch (m) {
    case NandLatencyMode::Constant: return "constant";
    case NandLatencyMode::Empirical: return "empirical";
    case NandLatencyMode::Spike: return "spike";
  }
  return "?";
}
const char* to_string(NandPrefill p) {
  return p == NandPrefill::Zero ? "zero" : "pattern";
}

void ExperimentConfig::apply_override(const std::string& key_value) {
  size_t eq = key_value.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override must be key=value: '" + key_value + "'");
  std::string key = trim(key_value.substr(0, eq));
  std::string value = trim(key_value.substr(eq + 1));

  auto u64 = [&](uint64_t& field) { field = parse_u64(key, value); };
  auto u32 = [&](uint32_t& field) {
    uint64_t v = parse_u64(key, value);
    if (v > UINT32_MAX) throw ConfigError("value too large for key '" + key + "'");
    field = static_cast<uint32_t>(v);
  };
  auto f64 = [&](double& field) { field = parse_f64(key, value); };

  if (key == "experiment_name") experiment_name = value;
  else if (key == "core_count") u32(core_count);
  else if (key == "threads_per_core") u32(threads_per_core);
  else if (key == "frequency_hz") u64(frequency_hz);
  else if (key == "instruction_cycles") u64(instruction_cycles);
  else if (key == "llc_bytes") u64(llc_bytes);
  else if (key == "llc_ways") u32(llc_ways);
  else if (key == "llc_hit_cycles") u64(llc_hit_cycles);
  else if (key == "dram_access_cycles") u64(dram_access_cycles);
  else if (key == "dram_base") u64(dram_base);
  else if (key == "dram_limit") u64(dram_limit);
  else if (key == "cxl_base") u64(cxl_base);
  else if (key == "cxl_limit") u64(cxl_limit);
  else if (key == "switch_threshold_ns") u64(switch_threshold_ns);
  else if (key == "switch_penalty_cycles") u64(switch_penalty_cycles);
  else if (key == "access_budget") u64(access_budget);
  else if (key == "seed") u64(seed);
  else if (key == "trace_file") trace_file = value;
  else if (key == "interface_overhead_ns") u64(interface_overhead_ns);
  else if (key == "write_log_capacity_entries") u64(write_log_capacity_entries);
  else if (key == "data_cache_frames") u64(data_cache_frames);
  else if (key == "page_size_bytes") u64(page_size_bytes);
  else if (key == "compaction_mode") {
    if (value == "sequential") compaction_mode = CompactionMode::Sequential;
    else if (value == "parallel") compaction_mode = CompactionMode::Parallel;
    else throw ConfigError("compaction_mode must be sequential|parallel");
  } else if (key == "logic_cost_mode") {
    if (value == "constant") logic_cost_mode = LogicCostMode::Constant;
    else if (value == "distribution") logic_cost_mode = LogicCostMode::Distribution;
    else throw ConfigError("logic_cost_mode must be constant|distribution");
  }
  else if (key == "cost_log_insert_ns") f64(logic_costs.log_insert_ns);
  else if (key == "cost_cache_check_ns") f64(logic_costs.cache_check_ns);
  else if (key == "cost_cache_insert_ns") f64(logic_costs.cache_insert_ns);
  else if (key == "cost_index_check_ns") f64(logic_costs.index_check_ns);
  else if (key == "cost_index_update_ns") f64(logic_costs.index_update_ns);
  else if (key == "cost_log_insert_stddev_ns") f64(logic_costs.log_insert_stddev_ns);
  else if (key == "cost_cache_check_stddev_ns") f64(logic_costs.cache_check_stddev_ns);
  else if (key == "cost_cache_insert_stddev_ns") f64(logic_costs.cache_insert_stddev_ns);
  else if (key == "cost_index_check_stddev_ns") f64(logic_costs.index_check_stddev_ns);
  else if (key == "cost_index_update_stddev_ns") f64(logic_costs.index_update_stddev_ns);
  else if (key == "payload_capture") payload_capture = parse_bool(key, value);
  else if (key == "nand_prefill") {
    if (value == "zero") nand_prefill = NandPrefill::Zero;
    else if (value == "pattern") nand_prefill = NandPrefill::Pattern;
    else throw ConfigError("nand_prefill must be zero|pattern");
  }
  else if (key == "nand_channels") u32(nand_channels);
  else if (key == "nand_ways") u32(nand_ways);
  else if (key == "nand_pages_per_way") u64(nand_pages_per_way);
  else if (key == "nand_read_ns") u64(nand_read_ns);
  else if (key == "nand_program_ns") u64(nand_program_ns);
  else if (key == "nand_latency_mode") {
    if (value == "constant") nand_latency_mode = NandLatencyMode::Constant;
    else if (value == "empirical") nand_latency_mode = NandLatencyMode::Empirical;
    else if (value == "spike") nand_latency_mode = NandLatencyMode::Spike;
    else throw ConfigError("nand_latency_mode must be constant|empirical|spike");
  }
  else if (key == "nand_empirical_csv") nand_empirical_csv = value;
  else if (key == "nand_spike_magnitude_ns") u64(nand_spike_magnitude_ns);
  else if (key == "nand_spike_probability") f64(nand_spike_probability);
  else if (key == "nand_queue_overhead_ns") u64(nand_queue_overhead_ns);
  else if (key == "hist_bin_ns") u64(hist_bin_ns);
  else if (key == "emit_events") emit_events = parse_bool(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    try {
      cfg.apply_override(s);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };

  if (core_count == 0) fail("core_count must be >= 1");
  if (threads_per_core == 0) fail("threads_per_core must be >= 1");
  if (frequency_hz == 0) fail("frequency_hz must be > 0");
  if (llc_ways == 0) fail("llc_ways must be >= 1");
  if (llc_bytes == 0 || llc_bytes % (kCachelineBytes * llc_ways) != 0)
    fail("llc_bytes must be a nonzero multiple of 64 * llc_ways");
  if (cxl_base >= cxl_limit) fail("cxl_base must be < cxl_limit");
  if (cxl_base % kCachelineBytes != 0 || cxl_limit % kCachelineBytes != 0)
    fail("cxl window bounds must be 64 B aligned");
  if (dram_base > dram_limit) fail("dram_base must be <= dram_limit");
  if (dram_limit > cxl_base && dram_base < cxl_limit)
    fail("dram region overlaps cxl window");
  if (page_size_bytes == 0 || page_size_bytes % kCachelineBytes != 0)
    fail("page_size_bytes must be a nonzero multiple of 64");
  if (write_log_capacity_entries == 0) fail("write_log_capacity_entries must be >= 1");
  if (data_cache_frames == 0) fail("data_cache_frames must be >= 1");
  if (nand_channels == 0 || nand_ways == 0 || nand_pages_per_way == 0)
    fail("nand geometry dimensions must be >= 1");
  if (cxl_limit - cxl_base > device_capacity_bytes())
    fail("cxl window larger than device capacity");
  if (nand_latency_mode == NandLatencyMode::Empirical && nand_empirical_csv.empty())
    fail("nand_latency_mode=empirical requires nand_empirical_csv");
  if (nand_spike_probability < 0.0 || nand_spike_probability > 1.0)
    fail("nand_spike_probability must be in [0, 1]");
  if (hist_bin_ns == 0) fail("hist_bin_ns must be > 0");

  const double* costs[] = {
      &logic_costs.log_insert_ns,       &logic_costs.cache_check_ns,
      &logic_costs.cache_insert_ns,     &logic_costs.index_check_ns,
      &logic_costs.index_update_ns,     &logic_costs.log_insert_stddev_ns,
      &logic_costs.cache_check_stddev_ns, &logic_costs.cache_insert_stddev_ns,
      &logic_costs.index_check_stddev_ns, &logic_costs.index_update_stddev_ns};
  for (const double* c : costs)
    if (*c < 0.0) fail("logic cost parameters must be >= 0");
}

std::string config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["experiment_name"] = c.experiment_name;
  j["core_count"] = c.core_count;
  j["threads_per_core"] = c.threads_per_core;
  j["frequency_hz"] = c.frequency_hz;
  j["instruction_cycles"] = c.instruction_cycles;
  j["llc_bytes"] = c.llc_bytes;
  j["llc_ways"] = c.llc_ways;
  j["llc_hit_cycles"] = c.llc_hit_cycles;
  j["dram_access_cycles"] = c.dram_access_cycles;
  j["dram_base"] = c.dram_base;
  j["dram_limit"] = c.dram_limit;
  j["cxl_base"] = c.cxl_base;
  j["cxl_limit"] = c.cxl_limit;
  j["switch_threshold_ns"] = c.switch_threshold_ns;
  j["switch_penalty_cycles"] = c.switch_penalty_cycles;
  j["access_budget"] = c.access_budget;
  j["seed"] = c.seed;
  j["trace_file"] = c.trace_file;
  j["interface_overhead_ns"] = c.interface_overhead_ns;
  j["write_log_capacity_entries"] = c.write_log_capacity_entries;
  j["data_cache_frames"] = c.data_cache_frames;
  j["page_size_bytes"] = c.page_size_bytes;
  j["compaction_mode"] = to_string(c.compaction_mode);
  j["logic_cost_mode"] = to_string(c.logic_cost_mode);
  j["cost_log_insert_ns"] = c.logic_costs.log_insert_ns;
  j["cost_cache_check_ns"] = c.logic_costs.cache_check_ns;
  j["cost_cache_insert_ns"] = c.logic_costs.cache_insert_ns;
  j["cost_index_check_ns"] = c.logic_costs.index_check_ns;
  j["cost_index_update_ns"] = c.logic_costs.index_update_ns;
  j["cost_log_insert_stddev_ns"] = c.logic_costs.log_insert_stddev_ns;
  j["cost_cache_check_stddev_ns"] = c.logic_costs.cache_check_stddev_ns;
  j["cost_cache_insert_stddev_ns"] = c.logic_costs.cache_insert_stddev_ns;
  j["cost_index_check_stddev_ns"] = c.logic_costs.index_check_stddev_ns;
  j["cost_index_update_stddev_ns"] = c.logic_costs.index_update_stddev_ns;
  j["payload_capture"] = c.payload_capture;
  j["nand_prefill"] = to_string(c.nand_prefill);
  j["nand_channels"] = c.nand_channels;
  j["nand_ways"] = c.nand_ways;
  j["nand_pages_per_way"] = c.nand_pages_per_way;
  j["nand_read_ns"] = c.nand_read_ns;
  j["nand_program_ns"] = c.nand_program_ns;
  j["nand_latency_mode"] = to_string(c.nand_latency_mode);
  j["nand_empirical_csv"] = c.nand_empirical_csv;
  j["nand_spike_magnitude_ns"] = c.nand_spike_magnitude_ns;
  j["nand_spike_probability"] = c.nand_spike_probability;
  j["nand_queue_overhead_ns"] = c.nand_queue_overhead_ns;
  j["hist_bin_ns"] = c.hist_bin_ns;
  j["emit_events"] = c.emit_events;
  return j.dump(2);
}

}  // namespace cxlsim
