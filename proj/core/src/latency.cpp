#include "cxlsim/latency.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cxlsim/rng.hpp"

namespace cxlsim {

namespace {

// rng stream ids; kind index is added so read/program draws never collide
constexpr uint64_t kStreamNandBase = 1;    // +0 read, +1 program
constexpr uint64_t kStreamSpike = 5;       // +kind
constexpr uint64_t kStreamLogic = 10;      // +category, paired draws

}  // namespace

uint64_t EmpiricalTable::draw(double u) const {
  assert(!values.empty());
  auto it = std::upper_bound(cum_weight.begin(), cum_weight.end(), u);
  size_t idx = static_cast<size_t>(it - cum_weight.begin());
  if (idx >= values.size()) idx = values.size() - 1;
  return values[idx];
}

SampleStats EmpiricalTable::stats() const {
  SampleStats s;
  if (values.empty()) return s;
  s.count = values.size();
  s.min = values.front();
  s.max = values.back();
  double prev = 0.0;
  double mean = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    double w = cum_weight[i] - prev;
    prev = cum_weight[i];
    mean += w * static_cast<double>(values[i]);
  }
  double var = 0.0;
  prev = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    double w = cum_weight[i] - prev;
    prev = cum_weight[i];
    double d = static_cast<double>(values[i]) - mean;
    var += w * d * d;
  }
  s.mean = mean;
  s.stddev = std::sqrt(var);
  return s;
}

LatencyProvider LatencyProvider::constant(uint64_t read_ns, uint64_t program_ns) {
  LatencyProvider p;
  p.mode_ = NandLatencyMode::Constant;
  p.constant_ns_[0] = read_ns;
  p.constant_ns_[1] = program_ns;
  return p;
}

LatencyProvider LatencyProvider::empirical(EmpiricalTable read_table,
                                           EmpiricalTable program_table, uint64_t seed) {
  if (read_table.values.empty() || program_table.values.empty())
    throw ConfigError("empirical latency provider requires a non-empty table per kind");
  LatencyProvider p;
  p.mode_ = NandLatencyMode::Empirical;
  p.seed_ = seed;
  p.tables_[0] = std::move(read_table);
  p.tables_[1] = std::move(program_table);
  return p;
}

LatencyProvider LatencyProvider::spike(LatencyProvider base, uint64_t magnitude_ns,
                                       double spike_p, uint64_t seed) {
  LatencyProvider p;
  p.mode_ = NandLatencyMode::Spike;
  p.seed_ = seed;
  p.spike_magnitude_ns_ = magnitude_ns;
  p.spike_probability_ = spike_p;
  p.base_.push_back(std::move(base));
  return p;
}

uint64_t LatencyProvider::sample(NandOpKind kind) {
  size_t k = static_cast<size_t>(kind);
  return sample_at(kind, ordinals_[k]++);
}

uint64_t LatencyProvider::sample_at(NandOpKind kind, uint64_t ordinal) const {
  size_t k = static_cast<size_t>(kind);
  switch (mode_) {
    case NandLatencyMode::Constant:
      return constant_ns_[k];
    case NandLatencyMode::Empirical: {
      double u = CounterRng::draw_unit(seed_, kStreamNandBase + k, ordinal);
      return tables_[k].draw(u);
    }
    case NandLatencyMode::Spike: {
      uint64_t base = base_[0].sample_at(kind, ordinal);
      double u = CounterRng::draw_unit(seed_, kStreamSpike + k, ordinal);
      return u < spike_probability_ ? base + spike_magnitude_ns_ : base;
    }
  }
  return 0;
}

SampleStats LatencyProvider::table_stats(NandOpKind kind) const {
  size_t k = static_cast<size_t>(kind);
  if (mode_ == NandLatencyMode::Empirical) return tables_[k].stats();
  SampleStats s;
  s.count = 1;
  s.mean = static_cast<double>(constant_ns_[k]);
  s.min = s.max = constant_ns_[k];
  return s;
}

LatencyProvider parse_empirical_csv(const std::string& text, const std::string& origin,
                                    uint64_t seed) {
  std::vector<uint64_t> values[2];
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;

    size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'kind,latency_ns'");
    std::string kind = line.substr(0, comma);
    kind.erase(0, kind.find_first_not_of(" \t"));
    kind.erase(kind.find_last_not_of(" \t\r") + 1);
    std::string num = line.substr(comma + 1);
    num.erase(0, num.find_first_not_of(" \t"));
    num.erase(num.find_last_not_of(" \t\r") + 1);

    uint64_t ns = 0;
    auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), ns);
    if (ec != std::errc() || p != num.data() + num.size())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": bad latency '" +
                        num + "'");

    if (kind == "read") values[0].push_back(ns);
    else if (kind == "program") values[1].push_back(ns);
    else
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": bad kind '" + kind +
                        "' (expected read or program)");
  }

  if (values[0].empty())
    throw ConfigError(origin + ": no 'read' rows in empirical latency file");
  if (values[1].empty())
    throw ConfigError(origin + ": no 'program' rows in empirical latency file");

  EmpiricalTable tables[2];
  for (int k = 0; k < 2; ++k) {
    std::sort(values[k].begin(), values[k].end());
    size_t n = values[k].size();
    tables[k].values = std::move(values[k]);
    tables[k].cum_weight.resize(n);
    for (size_t i = 0; i < n; ++i)
      tables[k].cum_weight[i] = static_cast<double>(i + 1) / static_cast<double>(n);
  }
  return LatencyProvider::empirical(std::move(tables[0]), std::move(tables[1]), seed);
}

LatencyProvider load_empirical(const std::string& path, uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open empirical latency file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_empirical_csv(buf.str(), path, seed);
}

LatencyProvider make_nand_provider(const ExperimentConfig& cfg) {
  switch (cfg.nand_latency_mode) {
    case NandLatencyMode::Constant:
      return LatencyProvider::constant(cfg.nand_read_ns, cfg.nand_program_ns);
    case NandLatencyMode::Empirical:
      return load_empirical(cfg.nand_empirical_csv, cfg.seed);
    case NandLatencyMode::Spike: {
      LatencyProvider base =
          cfg.nand_empirical_csv.empty()
              ? LatencyProvider::constant(cfg.nand_read_ns, cfg.nand_program_ns)
              : load_empirical(cfg.nand_empirical_csv, cfg.seed);
      return LatencyProvider::spike(std::move(base), cfg.nand_spike_magnitude_ns,
                                    cfg.nand_spike_probability, cfg.seed);
    }
  }
  throw ConfigError("bad nand latency mode");
}

LogicCostModel::LogicCostModel(LogicCostMode mode, const LogicCostParams& p, uint64_t seed)
    : mode_(mode), seed_(seed) {
  mean_[static_cast<size_t>(CostCategory::LogInsert)] = p.log_insert_ns;
  mean_[static_cast<size_t>(CostCategory::CacheCheck)] = p.cache_check_ns;
  mean_[static_cast<size_t>(CostCategory::CacheInsert)] = p.cache_insert_ns;
  mean_[static_cast<size_t>(CostCategory::IndexCheck)] = p.index_check_ns;
  mean_[static_cast<size_t>(CostCategory::IndexUpdate)] = p.index_update_ns;
  stddev_[static_cast<size_t>(CostCategory::LogInsert)] = p.log_insert_stddev_ns;
  stddev_[static_cast<size_t>(CostCategory::CacheCheck)] = p.cache_check_stddev_ns;
  stddev_[static_cast<size_t>(CostCategory::CacheInsert)] = p.cache_insert_stddev_ns;
  stddev_[static_cast<size_t>(CostCategory::IndexCheck)] = p.index_check_stddev_ns;
  stddev_[static_cast<size_t>(CostCategory::IndexUpdate)] = p.index_update_stddev_ns;
}

uint64_t LogicCostModel::cost(CostCategory category) {
  size_t c = static_cast<size_t>(category);
  return cost_at(category, ordinals_[c]++);
}

uint64_t LogicCostModel::cost_at(CostCategory category, uint64_t ordinal) const {
  size_t c = static_cast<size_t>(category);
  if (mode_ == LogicCostMode::Constant || stddev_[c] == 0.0)
    return static_cast<uint64_t>(std::llround(mean_[c]));

  // Box-Muller from the counter rng; floor at zero.
  double u1 = CounterRng::draw_unit(seed_, kStreamLogic + c, 2 * ordinal);
  double u2 = CounterRng::draw_unit(seed_, kStreamLogic + c, 2 * ordinal + 1);
  if (u1 < 1e-300) u1 = 1e-300;
  double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  double v = mean_[c] + stddev_[c] * z;
  if (v < 0.0) v = 0.0;
  return static_cast<uint64_t>(std::llround(v));
}

}  // namespace cxlsim
