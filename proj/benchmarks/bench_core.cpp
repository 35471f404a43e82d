#include <benchmark/benchmark.h>

#include "fedcurr/datagen.hpp"
#include "fedcurr/federation.hpp"
#include "fedcurr/model.hpp"

using namespace fedcurr;

static void BM_SoftmaxGrad(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Dataset ds = gen_synthetic(n, 10, 32, 0.1, 2.0, 1);
    const ModelSpec spec{ModelKind::SoftmaxRegression, 32, 10, 0};
    Rng rng = make_rng(1, Stream::Init);
    const ParamVector p = init_params(spec, rng);
    for (auto _ : state) benchmark::DoNotOptimize(grad(spec, p, ds.samples));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SoftmaxGrad)->Arg(10)->Arg(100)->Arg(1000);

static void BM_MlpGrad(benchmark::State& state) {
    const Dataset ds = gen_synthetic(100, 10, 32, 0.1, 2.0, 1);
    const ModelSpec spec{ModelKind::MlpTanh, 32, 10, static_cast<std::size_t>(state.range(0))};
    Rng rng = make_rng(1, Stream::Init);
    const ParamVector p = init_params(spec, rng);
    for (auto _ : state) benchmark::DoNotOptimize(grad(spec, p, ds.samples));
}
BENCHMARK(BM_MlpGrad)->Arg(16)->Arg(64);

static void BM_DirichletPartition(benchmark::State& state) {
    const Dataset ds = gen_synthetic(10000, 10, 4, 0.1, 2.0, 1);
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(partition(ds, {PartitionScheme::Dirichlet, 100, 0.1, 2, 0.0, seed++}));
}
BENCHMARK(BM_DirichletPartition);

static void BM_PartitionDifficulty(benchmark::State& state) {
    const Dataset ds = gen_synthetic(10000, 10, 4, 0.1, 2.0, 1);
    const Partition base = partition(ds, {PartitionScheme::Dirichlet, 100, 0.1, 2, 0.0, 1});
    const std::vector<double> losses(ds.difficulty_noise.begin(), ds.difficulty_noise.end());
    for (auto _ : state) benchmark::DoNotOptimize(partition_difficulty(ds, base, 0.5, losses, 1));
}
BENCHMARK(BM_PartitionDifficulty);

// One aggregation round: 10 of 100 clients, 2 local epochs.
static void BM_Round(benchmark::State& state) {
    const Dataset train = gen_synthetic(4000, 2, 10, 0.1, 2.0, 1);
    const SampleBatch test = gen_synthetic(1000, 2, 10, 0.1, 2.0, 2).samples;
    const Partition part = partition(train, {PartitionScheme::Dirichlet, 100, 0.1, 2, 0.0, 1});
    ExperimentConfig cfg;
    cfg.model = {ModelKind::SoftmaxRegression, 10, 2, 0};
    cfg.num_clients = 100;
    cfg.participation = 10;
    cfg.rounds = 1;
    cfg.local_epochs = 2;
    if (state.range(0) != 0) cfg.data_curriculum = DataCurriculum{};
    for (auto _ : state) benchmark::DoNotOptimize(run_experiment(cfg, train, part, test));
}
BENCHMARK(BM_Round)->Arg(0)->Arg(1)->ArgName("curriculum");
BENCHMARK_MAIN();
