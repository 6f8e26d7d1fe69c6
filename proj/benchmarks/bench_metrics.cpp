#include <benchmark/benchmark.h>

#include <random>

#include "segdst/metrics.hpp"
#include "segdst/parse.hpp"
#include "segdst/schema.hpp"

namespace {

segdst::BoundarySet random_boundaries(int length, double density,
                                      std::mt19937_64& rng) {
  segdst::BoundarySet b;
  b.length = length;
  std::bernoulli_distribution flip(density);
  for (int i = 1; i < length; ++i) {
    if (flip(rng)) b.indices.insert(i);
  }
  return b;
}

void BM_Pk(benchmark::State& state) {
  std::mt19937_64 rng(7);
  auto ref = random_boundaries(static_cast<int>(state.range(0)), 0.2, rng);
  auto hyp = random_boundaries(static_cast<int>(state.range(0)), 0.2, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(segdst::pk(ref, hyp));
  }
}
BENCHMARK(BM_Pk)->Arg(20)->Arg(200)->Arg(2000);

void BM_WindowDiff(benchmark::State& state) {
  std::mt19937_64 rng(11);
  auto ref = random_boundaries(static_cast<int>(state.range(0)), 0.2, rng);
  auto hyp = random_boundaries(static_cast<int>(state.range(0)), 0.2, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(segdst::window_diff(ref, hyp));
  }
}
BENCHMARK(BM_WindowDiff)->Arg(20)->Arg(200)->Arg(2000);

void BM_ParseS3dstOutput(benchmark::State& state) {
  auto schema = segdst::LabelSchema::with_default_segmentation_labels();
  schema.intents = {{"ANALYSIS", "a"}, {"CREATION", "c"}};
  schema.domains = {"GAMES", "WEATHER"};
  std::string text;
  const int turns = static_cast<int>(state.range(0));
  for (int i = 1; i <= turns; ++i) {
    text += "<T" + std::to_string(i) + ">\n<summary>s</summary>\n";
    text += "<preceding_topical_relation>YES</preceding_topical_relation>\n";
    text += "<intent>ANALYSIS</intent>\n<domain>GAMES</domain>\n";
    text += "</T" + std::to_string(i) + ">\n";
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(segdst::parse_s3dst_output(
        text, turns, schema, segdst::PromptVariant::kS3dstJoint));
  }
}
BENCHMARK(BM_ParseS3dstOutput)->Arg(10)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
