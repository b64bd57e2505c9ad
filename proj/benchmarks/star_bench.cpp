#include <random>

#include <benchmark/benchmark.h>

#include "star/argumentation.hpp"
#include "star/comprehension.hpp"
#include "star/nl2star.hpp"
#include "star/parser.hpp"
#include "../tests/support/files.hpp"

using namespace star;

namespace {

const std::string& phone_text() {
  static const std::string text = testing::read_file("data/examples/phone.star");
  return text;
}

void BM_ParsePhoneStory(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(parse_domain(phone_text()));
}
BENCHMARK(BM_ParsePhoneStory);

void BM_ReadPhoneStory(benchmark::State& state) {
  const Domain domain = *parse_domain(phone_text()).domain;
  for (auto _ : state) benchmark::DoNotOptimize(read_story(domain));
}
BENCHMARK(BM_ReadPhoneStory)->Unit(benchmark::kMillisecond);

// Chain of `n` switch events over a fluent with two opposing causal rules.
void BM_ReadSwitchingStory(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::string text = "session(s(0),[],all).\nsession(s(1),[],all).\n";
  for (int i = 0; i < n; ++i) {
    text += "s(1) :: " + std::string(i % 2 ? "switch_off" : "switch_on") + " at " + std::to_string(3 * i) + ".\n";
  }
  text += "fluents([lit]).\nc(01) :: switch_on causes lit.\nc(02) :: switch_off causes -lit.\n";
  const Domain domain = *parse_domain(text).domain;
  for (auto _ : state) benchmark::DoNotOptimize(read_story(domain));
}
BENCHMARK(BM_ReadSwitchingStory)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_GroundedExtension(benchmark::State& state) {
  std::mt19937 rng(42);
  const auto n = static_cast<std::uint32_t>(state.range(0));
  AttackGraph g;
  g.size = n;
  std::uniform_int_distribution<std::uint32_t> pick(0, n - 1);
  for (std::uint32_t e = 0; e < 4 * n; ++e) g.edges.emplace_back(pick(rng), pick(rng));
  for (auto _ : state) benchmark::DoNotOptimize(grounded_extension(g));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GroundedExtension)->RangeMultiplier(8)->Range(64, 1 << 18)->Complexity();

void BM_ConvertAnnotatedStory(benchmark::State& state) {
  const auto story = parse_annotated_story(testing::read_file("tests/fixtures/phone_story.annotated.json"));
  for (auto _ : state) benchmark::DoNotOptimize(convert(story));
}
BENCHMARK(BM_ConvertAnnotatedStory);

}  // namespace

BENCHMARK_MAIN();
