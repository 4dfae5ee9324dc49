#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cxlsim/compare.hpp"
#include "cxlsim/config.hpp"
#include "cxlsim/engine.hpp"
#include "cxlsim/metrics.hpp"
#include "cxlsim/trace.hpp"

namespace {

// exit codes: 0 ok, 2 config, 3 file I/O, 4 simulation runtime
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitRuntime = 4;

int cmd_run(const std::string& config_path, const std::string& out_dir,
            const std::vector<std::string>& overrides, bool emit_events,
            uint64_t* seed_override) {
  cxlsim::ExperimentConfig cfg = cxlsim::load_config(config_path);
  for (const std::string& o : overrides) cfg.apply_override(o);
  if (seed_override) cfg.seed = *seed_override;
  if (emit_events) cfg.emit_events = true;
  cfg.validate();
  if (cfg.trace_file.empty())
    throw cxlsim::ConfigError("config: trace_file is required for run");

  cxlsim::TraceSet traces =
      cxlsim::load_trace(cfg.trace_file, cfg.core_count, cfg.threads_per_core);
  std::printf("loaded %llu trace records from %s\n",
              static_cast<unsigned long long>(traces.total_records()),
              cfg.trace_file.c_str());

  if (cfg.nand_latency_mode == cxlsim::NandLatencyMode::Empirical) {
    cxlsim::LatencyProvider p = cxlsim::load_empirical(cfg.nand_empirical_csv, cfg.seed);
    cxlsim::SampleStats r = p.table_stats(cxlsim::NandOpKind::Read);
    cxlsim::SampleStats w = p.table_stats(cxlsim::NandOpKind::Program);
    std::printf("empirical nand table: read mean %.1f ns stddev %.1f ns (%llu rows), "
                "program mean %.1f ns stddev %.1f ns (%llu rows)\n",
                r.mean, r.stddev, static_cast<unsigned long long>(r.count), w.mean,
                w.stddev, static_cast<unsigned long long>(w.count));
  }

  cxlsim::Engine engine(cfg, std::move(traces));
  cxlsim::RunReport report = engine.run();

  const auto* events = cfg.emit_events ? &engine.recorder().events() : nullptr;
  const auto* nand_events = cfg.emit_events ? &engine.nand().op_log() : nullptr;
  cxlsim::write_report_files(report, out_dir, events, nand_events);

  std::printf("run complete: %llu accesses, %llu instructions, max core cycle %llu\n",
              static_cast<unsigned long long>(report.accesses),
              static_cast<unsigned long long>(report.instructions),
              static_cast<unsigned long long>(report.max_core_cycle));
  std::printf("report written to %s/report.json\n", out_dir.c_str());
  return 0;
}

int cmd_gen_trace(const cxlsim::TraceGenSpec& spec, const std::string& out_path) {
  cxlsim::TraceGenSummary s = cxlsim::generate_trace(spec, out_path);
  double achieved = s.records == 0 ? 0.0
                                   : static_cast<double>(s.reads) /
                                         static_cast<double>(s.records);
  std::printf("wrote %llu records to %s (reads %llu, writes %llu, read ratio %.4f)\n",
              static_cast<unsigned long long>(s.records), out_path.c_str(),
              static_cast<unsigned long long>(s.reads),
              static_cast<unsigned long long>(s.writes), achieved);
  return 0;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cxlsim::ReportError("cannot open report '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int cmd_compare(const std::string& path_a, const std::string& path_b,
                const std::string& out_path) {
  cxlsim::RunReport a = cxlsim::report_from_json(slurp(path_a));
  cxlsim::RunReport b = cxlsim::report_from_json(slurp(path_b));
  std::string diff = cxlsim::compare_reports(a, b);
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw cxlsim::ReportError("cannot write '" + out_path + "'");
    out << diff << "\n";
  }
  std::cout << diff << "\n";
  return 0;
}

int cmd_validate(const std::string& config_path,
                 const std::vector<std::string>& overrides) {
  cxlsim::ExperimentConfig cfg = cxlsim::load_config(config_path);
  for (const std::string& o : overrides) cfg.apply_override(o);
  cfg.validate();
  std::printf("config ok\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-driven CXL-SSD simulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Execute a trace-driven simulation");
  std::string run_config, run_out = "out";
  std::vector<std::string> run_overrides;
  bool run_emit_events = false;
  uint64_t run_seed = 0;
  bool run_seed_set = false;
  run->add_option("--config", run_config, "Config file path")->required();
  run->add_option("--out", run_out, "Output directory (default: out)");
  run->add_option("--override", run_overrides, "Config override key=value (repeatable)");
  run->add_flag("--emit-events", run_emit_events, "Write raw event streams");
  run->add_option("--seed", run_seed, "Seed override")
      ->each([&](const std::string&) { run_seed_set = true; });

  // gen-trace
  auto* gen = app.add_subcommand("gen-trace", "Generate a synthetic memory trace");
  cxlsim::TraceGenSpec spec;
  std::string gen_out = "trace.txt";
  std::string addr_dist = "uniform";
  std::string gap_dist = "fixed:0";
  gen->add_option("--out", gen_out, "Output trace path")->required();
  gen->add_option("--cores", spec.cores, "Core count (default 1)");
  gen->add_option("--threads", spec.threads_per_core, "Threads per core (default 1)");
  gen->add_option("--count", spec.count, "Total record count")->required();
  gen->add_option("--read-ratio", spec.read_ratio, "Read fraction in [0,1] (default 0.5)");
  gen->add_option("--addr-dist", addr_dist, "uniform | zipfian (default uniform)");
  gen->add_option("--theta", spec.zipf_theta, "Zipfian theta in [0,1) (default 0.99)");
  gen->add_option("--addr-base", spec.addr_base, "Address range base (default 0x40000000)");
  gen->add_option("--addr-limit", spec.addr_limit, "Address range limit (default 0xC0000000)");
  gen->add_option("--gap-dist", gap_dist, "fixed:<n> | uniform:<a>:<b> (default fixed:0)");
  gen->add_option("--seed", spec.seed, "Generator seed (default 1)");

  // compare
  auto* cmp = app.add_subcommand("compare", "Diff two report.json files (A over B)");
  std::string cmp_a, cmp_b, cmp_out;
  cmp->add_option("report_a", cmp_a, "Report A")->required();
  cmp->add_option("report_b", cmp_b, "Report B")->required();
  cmp->add_option("--out", cmp_out, "Also write the diff JSON here");

  // validate-config
  auto* val = app.add_subcommand("validate-config", "Parse and range-check a config");
  std::string val_config;
  std::vector<std::string> val_overrides;
  val->add_option("--config", val_config, "Config file path")->required();
  val->add_option("--override", val_overrides, "Config override key=value (repeatable)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run)
      return cmd_run(run_config, run_out, run_overrides, run_emit_events,
                     run_seed_set ? &run_seed : nullptr);
    if (*gen) {
      if (addr_dist == "uniform") spec.address_dist = cxlsim::AddressDist::Uniform;
      else if (addr_dist == "zipfian") spec.address_dist = cxlsim::AddressDist::Zipfian;
      else throw cxlsim::ConfigError("gen-trace: --addr-dist must be uniform|zipfian");

      if (gap_dist.rfind("fixed:", 0) == 0) {
        spec.gap_dist = cxlsim::GapDist::Fixed;
        spec.gap_a = std::stoull(gap_dist.substr(6));
      } else if (gap_dist.rfind("uniform:", 0) == 0) {
        std::string rest = gap_dist.substr(8);
        size_t colon = rest.find(':');
        if (colon == std::string::npos)
          throw cxlsim::ConfigError("gen-trace: --gap-dist uniform:<a>:<b>");
        spec.gap_dist = cxlsim::GapDist::Uniform;
        spec.gap_a = std::stoull(rest.substr(0, colon));
        spec.gap_b = std::stoull(rest.substr(colon + 1));
      } else {
        throw cxlsim::ConfigError("gen-trace: --gap-dist must be fixed:<n>|uniform:<a>:<b>");
      }
      return cmd_gen_trace(spec, gen_out);
    }
    if (*cmp) return cmd_compare(cmp_a, cmp_b, cmp_out);
    if (*val) return cmd_validate(val_config, val_overrides);
  } catch (const cxlsim::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const cxlsim::TraceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const cxlsim::ReportError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
