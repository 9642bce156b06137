#include <benchmark/benchmark.h>

#include <vector>

#include "gsa/random.hpp"
#include "gsa/selection_model.hpp"

namespace {

gsa::TiltedModel make_model(int n, int m) {
    gsa::RandomStream stream(9, 0);
    gsa::TiltedModel model;
    model.s.resize(static_cast<std::size_t>(n));
    for (auto& v : model.s) v = stream.next_normal();
    model.beta = 1.0;
    model.m = m;
    return model;
}

void BM_SamplerBuild(benchmark::State& state) {
    const auto model = make_model(static_cast<int>(state.range(0)),
                                  static_cast<int>(state.range(0)) / 10);
    for (auto _ : state) {
        gsa::ConditionalBernoulliSampler sampler(model);
        benchmark::DoNotOptimize(&sampler);
    }
}
BENCHMARK(BM_SamplerBuild)->Arg(500)->Arg(2000)->Unit(benchmark::kMicrosecond);

void BM_SamplerDraw(benchmark::State& state) {
    const auto model = make_model(static_cast<int>(state.range(0)),
                                  static_cast<int>(state.range(0)) / 10);
    gsa::ConditionalBernoulliSampler sampler(model);
    gsa::RandomStream stream(11, 0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sampler.sample(stream));
    }
}
BENCHMARK(BM_SamplerDraw)->Arg(500)->Arg(2000)->Unit(benchmark::kMicrosecond);

void BM_MleBeta(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto model = make_model(n, n / 10);
    gsa::ConditionalBernoulliSampler sampler(model);
    gsa::RandomStream stream(13, 0);
    const auto subset = sampler.sample(stream);
    for (auto _ : state) {
        benchmark::DoNotOptimize(gsa::mle_beta(model.s, subset));
    }
}
BENCHMARK(BM_MleBeta)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
