// Serial vs OpenMP throughput for held-out decoding and the exhaustive
// oracle check.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <filesystem>

#include "l2s/batch.hpp"
#include "l2s/conll.hpp"
#include "l2s/dep/oracle_check.hpp"
#include "l2s/dep/pipeline.hpp"

using namespace l2s;

namespace {

struct Fixture {
  dep::TrainedParser trained;
  std::vector<dep::ParseInstance> xs;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    const std::filesystem::path dir = L2S_SYNTH_DATA;
    const auto train = conll::read_conll_file(dir / "train.conll");
    const auto test = conll::read_conll_file(dir / "test.conll");
    dep::TrainSettings ts;
    ts.passes = 1;
    const std::vector<conll::Sentence> head(train.begin(), train.begin() + 300);
    Fixture out{dep::train_parser(head, dep::ParserConfig{}, LearnerConfig{}, ts), {}};
    for (const auto& s : test) out.xs.push_back(out.trained.task.prepare(s));
    return out;
  }();
  return f;
}

void BM_DecodeSerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    auto out = decode_all_serial(f.trained.task, std::span<const dep::ParseInstance>(f.xs), f.trained.model);
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.xs.size()));
}

void BM_DecodeParallel(benchmark::State& state) {
  const auto& f = fixture();
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto out = decode_all(f.trained.task, std::span<const dep::ParseInstance>(f.xs), f.trained.model);
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.xs.size()));
}

const std::vector<std::vector<int>>& trees() {
  static const auto t = dep::oracle_check_cases(6, 200, 1);
  return t;
}

void BM_OracleCheckSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(dep::check_oracle_serial(trees()));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(trees().size()));
}

void BM_OracleCheckParallel(benchmark::State& state) {
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(dep::check_oracle(trees()));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(trees().size()));
}

}  // namespace

BENCHMARK(BM_DecodeSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_DecodeParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_OracleCheckSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_OracleCheckParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
