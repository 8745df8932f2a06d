// Serial reference vs OpenMP kernels on shared inputs.

#include <benchmark/benchmark.h>

#include "aml/eval.hpp"
#include "aml/extract.hpp"
#include "aml/graph.hpp"
#include "aml/rng.hpp"
#include "aml/synth_data.hpp"
#include "aml/typology.hpp"

namespace {

using namespace aml;

const TransactionGraph& graph() {
  static const TransactionGraph g = [] {
    SynthCsvConfig cfg;
    cfg.rows = 200'000;
    cfg.seed = 1;
    const SynthCsvResult r = synth_csv(cfg);
    return load_csv_text(r.csv);
  }();
  return g;
}

const std::vector<EdgeId>& focal() {
  static const std::vector<EdgeId> f = [] {
    Rng rng(2);
    std::vector<EdgeId> out(512);
    for (auto& e : out) e = static_cast<EdgeId>(rng.index(graph().edge_count()));
    return out;
  }();
  return f;
}

const std::vector<Subgraph>& subgraphs() {
  static const std::vector<Subgraph> subs = [] {
    std::vector<Subgraph> out;
    for (std::uint64_t i = 0; i < 512; ++i) {
      GenConfig g;
      g.kind = kLaunderingKinds[i % 8];
      g.fan = 4 + static_cast<unsigned>(i % 4);
      g.seed = i;
      out.push_back(generate(g));
    }
    return out;
  }();
  return subs;
}

void BM_ExtractSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(extract_batch_serial(graph(), focal(), ExtractionConfig{}));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(focal().size()));
}
void BM_ExtractParallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(extract_batch(graph(), focal(), ExtractionConfig{}));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(focal().size()));
}

void BM_DetectSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(detect_batch_serial(subgraphs()));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(subgraphs().size()));
}
void BM_DetectParallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(detect_batch(subgraphs()));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(subgraphs().size()));
}

std::vector<double> outcomes() {
  std::vector<double> xs(2000, 0.0);
  std::fill_n(xs.begin(), 1274, 1.0);
  Rng rng(3);
  rng.shuffle(xs);
  return xs;
}

void BM_BootstrapSerial(benchmark::State& st) {
  const auto xs = outcomes();
  const IndexMetric mean = [&](std::span<const std::uint32_t> idx) {
    double s = 0;
    for (auto i : idx) s += xs[i];
    return s / static_cast<double>(idx.size());
  };
  for (auto _ : st) benchmark::DoNotOptimize(bootstrap_serial(xs.size(), mean, 1000, 7));
}
void BM_BootstrapParallel(benchmark::State& st) {
  const auto xs = outcomes();
  const IndexMetric mean = [&](std::span<const std::uint32_t> idx) {
    double s = 0;
    for (auto i : idx) s += xs[i];
    return s / static_cast<double>(idx.size());
  };
  for (auto _ : st) benchmark::DoNotOptimize(bootstrap(xs.size(), mean, 1000, 7));
}

}  // namespace

BENCHMARK(BM_ExtractSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExtractParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DetectSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DetectParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BootstrapSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BootstrapParallel)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  // build shared inputs outside the timed loops
  (void)focal();
  (void)subgraphs();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
