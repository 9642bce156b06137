#include <benchmark/benchmark.h>

#include "gsa/catalog.hpp"
#include "gsa/gene_scores.hpp"
#include "gsa/inference.hpp"
#include "gsa/simulation.hpp"

namespace {

// Full permutation analysis on the standard study shape: 1000 genes,
// 50 + 50 samples, 50 blocks of 20.
void BM_AnalyzeMaxmean(benchmark::State& state) {
    auto spec = *gsa::scenario_preset("scenario1");
    spec.seed = 12;
    const auto [matrix, catalog] = gsa::generate_scenario(spec);
    const auto resolved = gsa::resolve_catalog(catalog, matrix, 1);

    gsa::AnalysisOptions options;
    options.permutations = static_cast<int>(state.range(0));
    options.seed = 7;
    options.threads = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            gsa::analyze(matrix, resolved, gsa::SetStatisticKind::maxmean, options));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AnalyzeMaxmean)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_GeneScores(benchmark::State& state) {
    auto spec = *gsa::scenario_preset("scenario1");
    spec.seed = 12;
    const auto [matrix, catalog] = gsa::generate_scenario(spec);
    for (auto _ : state) {
        benchmark::DoNotOptimize(gsa::compute_gene_scores(matrix));
    }
    state.SetItemsProcessed(state.iterations() * matrix.n_genes());
}
BENCHMARK(BM_GeneScores);

void BM_BhFdr(benchmark::State& state) {
    gsa::RandomStream stream(3, 0);
    std::vector<double> p(static_cast<std::size_t>(state.range(0)));
    for (auto& v : p) v = stream.next_double();
    for (auto _ : state) {
        benchmark::DoNotOptimize(gsa::bh_fdr(p, 0.1));
    }
}
BENCHMARK(BM_BhFdr)->Arg(50)->Arg(500);

}  // namespace
