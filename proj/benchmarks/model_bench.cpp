#include <benchmark/benchmark.h>

#include "hesitant/experiment.hpp"
#include "hesitant/rng.hpp"
#include "hesitant/uq.hpp"

using namespace hesitant;

namespace {

PreparedCorpus corpus(std::size_t n, std::size_t dim) {
    CorpusSource source;
    SyntheticSpec spec;
    spec.n = n;
    spec.seed = 3;
    source.synthetic = spec;
    FeaturizerConfig features;
    features.dim = dim;
    return prepare_corpus(load_corpus(source), PrepConfig{}, features, Strategy::random(7));
}

void BM_ForwardDeterministic(benchmark::State& state) {
    const auto c = corpus(256, 4096);
    const auto params = init_params(Arch{4096, static_cast<std::size_t>(state.range(0)), 0.2, InitScheme::Uniform}, 1);
    for (auto _ : state) {
        for (const auto& x : c.features) benchmark::DoNotOptimize(forward(params, x, Deterministic{}));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * c.features.size()));
}
BENCHMARK(BM_ForwardDeterministic)->Arg(16)->Arg(64)->Arg(256);

void BM_McDropout(benchmark::State& state) {
    const auto c = corpus(256, 4096);
    const auto params = init_params(Arch{4096, 64, 0.2, InitScheme::Uniform}, 1);
    std::vector<std::string> ids;
    for (const auto& s : c.studies) ids.push_back(s.study_id);
    for (auto _ : state) {
        benchmark::DoNotOptimize(mc_dropout_predict(params, c.features, ids, static_cast<std::size_t>(state.range(0)), 0));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * c.features.size() * state.range(0)));
}
BENCHMARK(BM_McDropout)->Arg(10)->Arg(50);

void BM_TrainEpoch(benchmark::State& state) {
    const auto c = corpus(2000, 4096);
    std::vector<std::size_t> rows(c.studies.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    const auto data = labelled_rows(c, rows);
    TrainConfig config;
    config.epochs = 1;
    config.batch_size = static_cast<std::size_t>(state.range(0));
    config.learning_rate = 0.01;
    const Arch arch{4096, 64, 0.2, InitScheme::Uniform};
    for (auto _ : state) benchmark::DoNotOptimize(train(data, arch, config));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * data.size()));
}
BENCHMARK(BM_TrainEpoch)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

} // namespace
