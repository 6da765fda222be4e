#include <benchmark/benchmark.h>

#include <filesystem>

#include "hdlmutant/design_gen.hpp"
#include "hdlmutant/harness.hpp"

using namespace hdlmutant;
namespace fs = std::filesystem;

namespace {

std::vector<NamedDesign> seeds(int n) {
  SplitMix64 rng(42);
  std::vector<NamedDesign> out;
  for (int i = 0; i < n; ++i) out.push_back({"b" + std::to_string(i), generate_design("b" + std::to_string(i), rng)});
  return out;
}

// One campaign of 8 iterations x 8 variants against the identity and a
// faulty tool. Arg = worker count; 1 runs the serial loop.
void BM_Campaign(benchmark::State& state) {
  const auto designs = seeds(8);
  const fs::path out = fs::temp_directory_path() / "hdlmutant-bench";
  CampaignConfig cfg;
  ToolSpec id;
  id.name = "id";
  id.kind = ToolKind::kIdentity;
  ToolSpec faulty;
  faulty.name = "f";
  faulty.kind = ToolKind::kFaulty;
  faulty.fault_profile = "off_by_one_shift";
  cfg.tools = {id, faulty};
  cfg.max_iterations = 8;
  cfg.variants_per_seed = 8;
  cfg.output_dir = out;
  cfg.reduce = false;
  cfg.workers = static_cast<int>(state.range(0));
  std::uint64_t variants = 0;
  for (auto _ : state) {
    auto res = run_campaign(cfg, designs);
    variants += res.stats.variants;
  }
  state.counters["variants/s"] = benchmark::Counter(static_cast<double>(variants), benchmark::Counter::kIsRate);
  fs::remove_all(out);
}
BENCHMARK(BM_Campaign)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

// Variant generation alone on one seed.
void BM_GenVariant(benchmark::State& state) {
  SplitMix64 rng(1);
  const auto seed = generate_design("g", rng);
  StimulusConfig sc;
  const auto tb = generate_testbench(extract_ports(seed), sc);
  const auto cov = simulate(seed, tb).coverage;
  MutationConfig mc;
  std::uint64_t n = 0;
  for (auto _ : state) {
    SplitMix64 r(n++);
    benchmark::DoNotOptimize(gen_variant(seed, cov, nullptr, mc, tb, r));
  }
}
BENCHMARK(BM_GenVariant)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
