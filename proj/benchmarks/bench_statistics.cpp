#include <benchmark/benchmark.h>

#include <vector>

#include "gsa/numerics.hpp"
#include "gsa/random.hpp"
#include "gsa/set_statistics.hpp"

namespace {

std::vector<double> normals(int n, std::uint64_t seed) {
    gsa::RandomStream stream(seed, 0);
    std::vector<double> z(static_cast<std::size_t>(n));
    for (auto& v : z) v = stream.next_normal();
    return z;
}

void BM_SetMaxmean(benchmark::State& state) {
    const auto z = normals(static_cast<int>(state.range(0)), 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(gsa::set_maxmean(z));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SetMaxmean)->Arg(25)->Arg(100)->Arg(1000);

void BM_SetKsSigned(benchmark::State& state) {
    const auto set = normals(static_cast<int>(state.range(0)), 2);
    const auto complement = normals(1000 - static_cast<int>(state.range(0)), 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(gsa::set_ks_signed(set, complement));
    }
}
BENCHMARK(BM_SetKsSigned)->Arg(25)->Arg(100);

void BM_TCdf(benchmark::State& state) {
    double t = -4.0;
    for (auto _ : state) {
        t = t >= 4.0 ? -4.0 : t + 1e-3;
        benchmark::DoNotOptimize(gsa::t_cdf(t, 48));
    }
}
BENCHMARK(BM_TCdf);

void BM_NormalQuantile(benchmark::State& state) {
    double p = 0.0;
    for (auto _ : state) {
        p = p >= 0.999 ? 1e-3 : p + 1e-3;
        benchmark::DoNotOptimize(gsa::normal_quantile(p));
    }
}
BENCHMARK(BM_NormalQuantile);

}  // namespace

BENCHMARK_MAIN();
