#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "cxlsim/engine.hpp"
#include "cxlsim/firmware.hpp"
#include "cxlsim/latency.hpp"
#include "cxlsim/nand.hpp"
#include "cxlsim/transport.hpp"

using namespace cxlsim;

namespace {

void BM_EncodeDecode(benchmark::State& state) {
  std::mt19937_64 rng(1);
  for (auto _ : state) {
    CxlCommand cmd = encode_request((rng() & 1) ? MemOp::Read : MemOp::Write, rng(),
                                    static_cast<uint16_t>(rng()));
    CommandImage img = encode_command(cmd);
    benchmark::DoNotOptimize(decode_command(img));
  }
}
BENCHMARK(BM_EncodeDecode);

void BM_LlcAccess(benchmark::State& state) {
  LlcModel llc(8 * 1024 * 1024, 16);
  std::mt19937_64 rng(2);
  for (auto _ : state)
    benchmark::DoNotOptimize(llc.access((rng() % (1 << 20)) * kCachelineBytes));
}
BENCHMARK(BM_LlcAccess);

void BM_NandBatchSubmit(benchmark::State& state) {
  NandGeometry geom{4, 8, 16384, 4096};
  NandArray nand(geom, LatencyProvider::constant(65'000, 600'000), 0);
  std::mt19937_64 rng(3);
  std::vector<NandOpRequest> batch(static_cast<size_t>(state.range(0)));
  uint64_t now = 0;
  for (auto _ : state) {
    for (auto& op : batch)
      op = {(rng() & 1) ? NandOpKind::Read : NandOpKind::Program,
            rng() % geom.total_pages()};
    NandBatchResult r = nand.submit(batch, now);
    now += r.makespan_ns;
    benchmark::DoNotOptimize(r);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NandBatchSubmit)->Arg(8)->Arg(64)->Arg(512);

void BM_FirmwareWrite(benchmark::State& state) {
  NandGeometry geom{4, 8, 16384, 4096};
  LogicCostParams params;
  LogicCostModel costs(LogicCostMode::Constant, params, 1);
  NandArray nand(geom, LatencyProvider::constant(65'000, 600'000), 0);
  FirmwareParams fw_params;
  fw_params.page_size = 16384;
  fw_params.write_log_capacity = 4096;
  fw_params.data_cache_frames = 1024;
  Firmware fw(fw_params, nand, costs);
  std::mt19937_64 rng(4);
  const uint64_t lines = geom.total_pages() * (16384 / kCachelineBytes);
  for (auto _ : state)
    benchmark::DoNotOptimize(fw.handle_write((rng() % lines) * kCachelineBytes));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FirmwareWrite);

void BM_FirmwareReadMix(benchmark::State& state) {
  NandGeometry geom{4, 8, 16384, 4096};
  LogicCostParams params;
  LogicCostModel costs(LogicCostMode::Constant, params, 1);
  NandArray nand(geom, LatencyProvider::constant(65'000, 600'000), 0);
  FirmwareParams fw_params;
  fw_params.page_size = 16384;
  fw_params.write_log_capacity = 65536;
  fw_params.data_cache_frames = 1024;
  Firmware fw(fw_params, nand, costs);
  std::mt19937_64 rng(5);
  // hot working set around the cache capacity to mix hits and misses
  const uint64_t hot_lines = 1500ULL * (16384 / kCachelineBytes);
  for (auto _ : state)
    benchmark::DoNotOptimize(fw.handle_read((rng() % hot_lines) * kCachelineBytes));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FirmwareReadMix);

void BM_EmpiricalSample(benchmark::State& state) {
  EmpiricalTable table;
  for (uint64_t i = 0; i < 1024; ++i) table.values.push_back(50'000 + i * 97);
  table.cum_weight.resize(table.values.size());
  for (size_t i = 0; i < table.values.size(); ++i)
    table.cum_weight[i] = static_cast<double>(i + 1) / table.values.size();
  LatencyProvider p = LatencyProvider::empirical(table, table, 7);
  for (auto _ : state) benchmark::DoNotOptimize(p.sample(NandOpKind::Read));
}
BENCHMARK(BM_EmpiricalSample);

}  // namespace

BENCHMARK_MAIN();
