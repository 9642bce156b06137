#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "gsa/random.hpp"
#include "gsa/selection_model.hpp"
#include "oracles.hpp"

using namespace gsa;

namespace {

// All m-subsets of {0..n-1}, lexicographic.
void enumerate_subsets(int n, int m, std::vector<std::vector<int>>& out) {
    std::vector<int> current(static_cast<std::size_t>(m));
    const std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == m) {
            out.push_back(current);
            return;
        }
        for (int i = start; i <= n - (m - depth); ++i) {
            current[static_cast<std::size_t>(depth)] = i;
            rec(i + 1, depth + 1);
        }
    };
    rec(0, 0);
}

std::vector<double> scores_for(int n, std::uint64_t seed) {
    RandomStream stream(seed, 0);
    std::vector<double> s(static_cast<std::size_t>(n));
    for (auto& v : s) v = stream.next_normal();
    return s;
}

}  // namespace

TEST_SUITE("selection_model") {

TEST_CASE("subset_log_prob: uniform at beta = 0") {
    TiltedModel model;
    model.s = scores_for(6, 1);
    model.beta = 0.0;
    model.m = 3;
    const double expected = -std::log(20.0);  // C(6,3)
    std::vector<std::vector<int>> subsets;
    enumerate_subsets(6, 3, subsets);
    for (const auto& subset : subsets) {
        CHECK(subset_log_prob(model, subset) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("subset_log_prob: two-gene enumeration") {
    TiltedModel model;
    model.s = {0.0, std::log(2.0)};
    model.beta = 1.0;
    model.m = 1;
    // weights (1, 2) normalize to probabilities (1/3, 2/3)
    CHECK(std::exp(subset_log_prob(model, std::vector<int>{0})) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(std::exp(subset_log_prob(model, std::vector<int>{1})) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("subset_log_prob: probabilities sum to one") {
    TiltedModel model;
    model.s = scores_for(6, 2);
    model.beta = 1.3;
    model.m = 3;
    std::vector<std::vector<int>> subsets;
    enumerate_subsets(6, 3, subsets);
    double total = 0.0;
    for (const auto& subset : subsets) total += std::exp(subset_log_prob(model, subset));
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(subset_log_prob(model, std::vector<int>{0, 0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(subset_log_prob(model, std::vector<int>{0, 1}), std::invalid_argument);
}

TEST_CASE("subset_log_prob: shift invariance") {
    TiltedModel model;
    model.s = scores_for(7, 3);
    model.beta = 0.8;
    model.m = 3;
    TiltedModel shifted = model;
    for (auto& v : shifted.s) v += 4.25;
    std::vector<std::vector<int>> subsets;
    enumerate_subsets(7, 3, subsets);
    for (const auto& subset : subsets) {
        CHECK(subset_log_prob(model, subset) ==
              doctest::Approx(subset_log_prob(shifted, subset)).epsilon(1e-10));
    }
}

TEST_CASE("sample_subset: uniform when beta = 0") {
    TiltedModel model;
    model.s = scores_for(5, 3);
    model.beta = 0.0;
    model.m = 2;

    ConditionalBernoulliSampler sampler(model);
    RandomStream stream(8, 0);
    std::map<std::vector<int>, int> counts;
    const int draws = 20000;
    for (int d = 0; d < draws; ++d) ++counts[sampler.sample(stream)];

    CHECK(counts.size() == 10);
    const double expected = draws / 10.0;
    double chi2 = 0.0;
    for (const auto& [subset, count] : counts) {
        chi2 += (count - expected) * (count - expected) / expected;
    }
    CHECK(chi2 < oracle::chisq_critical_99(9));
}

TEST_CASE("sample_subset: tilted two-gene frequencies") {
    TiltedModel model;
    model.s = {0.0, std::log(2.0)};
    model.beta = 1.0;
    model.m = 1;
    ConditionalBernoulliSampler sampler(model);
    RandomStream stream(12, 0);
    int second = 0;
    const int draws = 20000;
    for (int d = 0; d < draws; ++d) {
        if (sampler.sample(stream)[0] == 1) ++second;
    }
    CHECK(std::fabs(second / static_cast<double>(draws) - 2.0 / 3.0) < 0.02);
}

TEST_CASE("sample_subset: m = N returns everything") {
    TiltedModel model;
    model.s = scores_for(4, 5);
    model.beta = 2.0;
    model.m = 4;
    RandomStream stream(3, 0);
    CHECK(sample_subset(model, stream) == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("sampler frequencies match enumerated probabilities") {
    // spot configurations here; the acceptance suite sweeps every
    // (N <= 8, m <= 4) pair
    for (const auto& [n, m] : std::vector<std::pair<int, int>>{{5, 2}, {6, 3}, {8, 4}}) {
        TiltedModel model;
        model.s = scores_for(n, static_cast<std::uint64_t>(n * 10 + m));
        model.beta = 1.0;
        model.m = m;

        std::vector<std::vector<int>> subsets;
        enumerate_subsets(n, m, subsets);
        std::map<std::vector<int>, double> probability;
        for (const auto& subset : subsets) {
            probability[subset] = std::exp(subset_log_prob(model, subset));
        }

        ConditionalBernoulliSampler sampler(model);
        RandomStream stream(19, static_cast<std::uint64_t>(n));
        std::map<std::vector<int>, int> counts;
        const int draws = 50000;
        for (int d = 0; d < draws; ++d) ++counts[sampler.sample(stream)];

        double chi2 = 0.0;
        for (const auto& [subset, prob] : probability) {
            const double expected = prob * draws;
            const double got = counts.count(subset) ? counts[subset] : 0;
            chi2 += (got - expected) * (got - expected) / expected;
        }
        CHECK(chi2 < oracle::chisq_critical_99(static_cast<int>(subsets.size()) - 1));
    }
}

TEST_CASE("tilt direction: larger beta raises sampled subset means") {
    const auto s = scores_for(60, 44);
    const int m = 10;
    double prev_mean = -1e9;
    for (double beta : {-1.0, 0.0, 1.0, 2.0}) {
        TiltedModel model{s, beta, m};
        ConditionalBernoulliSampler sampler(model);
        RandomStream stream(9, static_cast<std::uint64_t>(beta * 7 + 100));
        double total = 0.0;
        const int draws = 4000;
        for (int d = 0; d < draws; ++d) {
            const auto subset = sampler.sample(stream);
            for (int idx : subset) total += s[static_cast<std::size_t>(idx)];
        }
        const double mean = total / (draws * m);
        CHECK(mean > prev_mean);
        prev_mean = mean;
    }
}

TEST_CASE("mle_beta: exact zero, boundary, constant scores") {
    const std::vector<double> s{1.0, 2.0, 3.0};
    // subset mean equals the overall mean -> beta = 0 exactly
    CHECK(mle_beta(s, std::vector<int>{0, 2}) == 0.0);
    CHECK(mle_beta(s, std::vector<int>{1}) == 0.0);

    const std::vector<double> two{0.0, 1.0};
    CHECK_THROWS_AS(mle_beta(two, std::vector<int>{1}), std::invalid_argument);  // mean = max
    CHECK_THROWS_AS(mle_beta(std::vector<double>{2.0, 2.0, 2.0}, std::vector<int>{0}),
                    std::invalid_argument);
}

TEST_CASE("conditional_subset_mean: enumeration and sparse limit") {
    const auto s = scores_for(7, 33);
    const double beta = 0.9;
    const int m = 3;
    // enumeration oracle: E[subset mean] = sum over subsets of prob * mean
    std::vector<std::vector<int>> subsets;
    enumerate_subsets(7, m, subsets);
    TiltedModel model{s, beta, m};
    double expected = 0.0;
    for (const auto& subset : subsets) {
        double mean = 0.0;
        for (int idx : subset) mean += s[static_cast<std::size_t>(idx)];
        expected += std::exp(subset_log_prob(model, subset)) * mean / m;
    }
    CHECK(conditional_subset_mean(s, beta, m) == doctest::Approx(expected).epsilon(1e-12));

    // m << N: the conditional mean approaches the softmax tilted mean
    const auto big = scores_for(4000, 34);
    CHECK(conditional_subset_mean(big, 1.0, 4) ==
          doctest::Approx(tilted_mean(big, 1.0)).epsilon(0.01));

    // beta = 0 reduces to the plain mean
    double plain = 0.0;
    for (double v : s) plain += v;
    plain /= static_cast<double>(s.size());
    CHECK(conditional_subset_mean(s, 0.0, m) == doctest::Approx(plain).epsilon(1e-12));
}

TEST_CASE("mle_beta: solves the conditional score equation") {
    const auto s = scores_for(200, 3);
    const std::vector<int> subset{0, 3, 5, 8, 13, 21, 34, 55, 89, 144};
    const double beta = mle_beta(s, subset);
    double target = 0.0;
    for (int idx : subset) target += s[static_cast<std::size_t>(idx)];
    target /= static_cast<double>(subset.size());
    CHECK(std::fabs(conditional_subset_mean(s, beta, static_cast<int>(subset.size())) - target) <=
          1e-10);
}

TEST_CASE("mle_beta: consistency against the sampler at a 10% sampling fraction") {
    const auto s = scores_for(1500, 27);
    TiltedModel model{s, 1.0, 150};
    ConditionalBernoulliSampler sampler(model);
    RandomStream stream(45, 0);
    double total = 0.0;
    const int draws = 5;
    for (int d = 0; d < draws; ++d) {
        total += mle_beta(s, sampler.sample(stream));
    }
    CHECK(std::fabs(total / draws - 1.0) < 0.1);
}

TEST_CASE("mle_beta: shift invariance") {
    const auto s = scores_for(80, 61);
    std::vector<double> shifted(s);
    for (auto& v : shifted) v += 3.75;
    const std::vector<int> subset{1, 4, 9, 16, 25, 36, 49, 64};
    CHECK(mle_beta(s, subset) == doctest::Approx(mle_beta(shifted, subset)).epsilon(1e-6));
}

}  // TEST_SUITE
