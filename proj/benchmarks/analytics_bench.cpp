#include <benchmark/benchmark.h>

#include "dnsward/analytics.hpp"
#include "dnsward/synth.hpp"

using namespace dnsward;

static void BM_Generate(benchmark::State& state) {
  auto profiles = synth::default_profiles();
  const Date from = synth::default_from();
  const Date to = from + static_cast<int>(state.range(0)) - 1;
  for (auto _ : state) {
    uint64_t n = 0;
    synth::generate(profiles, from, to, 1, [&](const qlog::QueryRecord&) { ++n; });
    benchmark::DoNotOptimize(n);
    state.counters["records"] = static_cast<double>(n);
  }
}
BENCHMARK(BM_Generate)->Arg(7)->Arg(28)->Unit(benchmark::kMillisecond);

static void BM_Aggregate(benchmark::State& state) {
  const auto records = synth::generate_records(synth::default_profiles(),
                                               synth::default_from(),
                                               synth::default_from() + 13, 1);
  for (auto _ : state) {
    analytics::Aggregator agg;
    for (const auto& r : records) agg.add(r);
    benchmark::DoNotOptimize(agg.finish());
  }
  state.counters["records"] = static_cast<double>(records.size());
}
BENCHMARK(BM_Aggregate)->Unit(benchmark::kMillisecond);

static void BM_JsonlRoundTrip(benchmark::State& state) {
  const auto records = synth::generate_records(synth::default_profiles(),
                                               synth::default_from(),
                                               synth::default_from() + 1, 1);
  size_t i = 0;
  for (auto _ : state) {
    const auto line = qlog::to_jsonl(records[i++ % records.size()]);
    benchmark::DoNotOptimize(qlog::from_jsonl(line));
  }
}
BENCHMARK(BM_JsonlRoundTrip);
