#include <benchmark/benchmark.h>

#include "testing.hpp"
#include "xling/align.hpp"
#include "xling/embeddings.hpp"
#include "xling/reduce.hpp"
#include "xling/sentiment.hpp"
#include "xling/skipgram.hpp"

using namespace xling;
using namespace xling::testing;

namespace {

void BM_NearestNeighborsCosine(benchmark::State& state) {
    Rng rng(1);
    auto space = make_space("eng", gaussian_matrix(rng, static_cast<std::size_t>(state.range(0)), 100));
    auto query = to_std(gaussian_matrix(rng, 1, 100).row(0).transpose());
    for (auto _ : state) benchmark::DoNotOptimize(nearest_neighbors(space, query, 10));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NearestNeighborsCosine)->Arg(1000)->Arg(20000);

void BM_NearestNeighborsCsls(benchmark::State& state) {
    Rng rng(2);
    auto space = make_space("eng", gaussian_matrix(rng, static_cast<std::size_t>(state.range(0)), 100));
    auto from = make_space("myv", gaussian_matrix(rng, 2000, 100));
    auto query = to_std(from.matrix().row(0).transpose());
    NeighborOptions opt{Metric::csls, 10, &from};
    for (auto _ : state) benchmark::DoNotOptimize(nearest_neighbors(space, query, 10, opt));
}
BENCHMARK(BM_NearestNeighborsCsls)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_InduceLexicon(benchmark::State& state) {
    Rng rng(3);
    auto n = static_cast<std::size_t>(state.range(0));
    auto src = make_space("src", gaussian_matrix(rng, n, 100), "s");
    auto tgt = make_space("tgt", gaussian_matrix(rng, n, 100), "t");
    for (auto _ : state) benchmark::DoNotOptimize(induce_lexicon(src, tgt, {1, 10, n}));
}
BENCHMARK(BM_InduceLexicon)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_Procrustes(benchmark::State& state) {
    Rng rng(4);
    auto d = static_cast<std::size_t>(state.range(0));
    RowMatrix x = gaussian_matrix(rng, 5000, d);
    RowMatrix y = x * random_orthogonal(rng, d);
    for (auto _ : state) benchmark::DoNotOptimize(procrustes(x, y));
}
BENCHMARK(BM_Procrustes)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_Reduce(benchmark::State& state) {
    Rng rng(5);
    auto space = make_space("eng", gaussian_matrix(rng, static_cast<std::size_t>(state.range(0)), 300));
    for (auto _ : state) benchmark::DoNotOptimize(reduce(space, {100, 7}));
}
BENCHMARK(BM_Reduce)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_SkipGramEpoch(benchmark::State& state) {
    Rng rng(6);
    auto space = make_space("myv", gaussian_matrix(rng, 2000, 100, 0.1));
    std::vector<LemmaSentence> corpus;
    for (int s = 0; s < 1000; ++s) {
        LemmaSentence ls;
        for (int t = 0; t < 12; ++t) ls.lemmas.push_back(word("w", rng.below(2000)));
        corpus.push_back(ls);
    }
    SkipGramConfig c;
    c.epochs = 1;
    for (auto _ : state) benchmark::DoNotOptimize(skipgram_finetune(space, corpus, c));
    state.SetItemsProcessed(state.iterations() * 12000);
}
BENCHMARK(BM_SkipGramEpoch)->Unit(benchmark::kMillisecond);

void BM_Featurize(benchmark::State& state) {
    Rng rng(7);
    auto space = make_space("eng", gaussian_matrix(rng, 5000, 300));
    SentimentModel model(300, 1u << 16);
    std::vector<std::string> sentence;
    for (int t = 0; t < 20; ++t) sentence.push_back(word("w", rng.below(5000)));
    for (auto _ : state) benchmark::DoNotOptimize(featurize(sentence, space, model));
}
BENCHMARK(BM_Featurize);

}  // namespace

BENCHMARK_MAIN();
