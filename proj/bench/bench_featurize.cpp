// Serial reference vs OpenMP corpus featurization.
//   ./bench_featurize --benchmark_counters_tabular=true

#include <benchmark/benchmark.h>

#include "convctx/context_features.hpp"
#include "convctx/synthetic_corpus.hpp"

namespace {

const convctx::Corpus& bench_corpus() {
    static const convctx::Corpus corpus = [] {
        convctx::CorpusSpec spec;
        spec.task = convctx::Task::Hate;
        spec.num_trees = 400;
        spec.context_signal = 0.8;
        spec.seed = 1;
        return convctx::generate(spec).corpus;
    }();
    return corpus;
}

template <typename Fn>
void run(benchmark::State& state, Fn featurize) {
    const auto& corpus = bench_corpus();
    const convctx::HashedBowProvider provider(static_cast<std::size_t>(state.range(0)));
    convctx::FeatureConfig cfg;
    cfg.walk.seed = 42;
    for (auto _ : state) {
        auto examples = featurize(corpus, provider, cfg, convctx::Task::Hate);
        benchmark::DoNotOptimize(examples.data());
    }
    state.counters["nodes/s"] =
        benchmark::Counter(static_cast<double>(corpus.node_count()), benchmark::Counter::kIsIterationInvariantRate);
}

void BM_FeaturizeSerial(benchmark::State& state) { run(state, convctx::featurize_corpus_serial); }
void BM_FeaturizeParallel(benchmark::State& state) { run(state, convctx::featurize_corpus); }

}  // namespace

BENCHMARK(BM_FeaturizeSerial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FeaturizeParallel)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
