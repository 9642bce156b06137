#pragma once

#include <span>
#include <vector>

#include "gsa/random.hpp"

namespace gsa {

// Exponentially tilted set selection. Conditioned on size m, a subset S of
// the N genes is selected with probability proportional to
// exp(beta * sum_{i in S} s_i); beta = 0 is uniform selection over
// m-subsets. Equivalently, member scores behave like draws from an
// exponentially tilted version of their empirical distribution, so the
// tilt-direction property of the sampler (larger beta pushes subset score
// means up) doubles as the check on that view.
struct TiltedModel {
    std::vector<double> s;  // per-gene scores
    double beta = 0.0;      // tilt parameter
    int m = 0;              // target subset size

    int n_genes() const { return static_cast<int>(s.size()); }
};

// log probability of one m-subset under the conditional law. Probabilities
// over all m-subsets sum to one: the normalizer is the degree-m elementary
// symmetric polynomial of the weights, evaluated by a log-space dynamic
// program rather than closed form.
double subset_log_prob(const TiltedModel& model, std::span<const int> subset);

// Exact sampler for the conditional law. Builds the elementary-symmetric
// table once; each draw is a single backward pass, so reuse one sampler for
// repeated draws from the same model.
class ConditionalBernoulliSampler {
public:
    explicit ConditionalBernoulliSampler(const TiltedModel& model);

    // Draws one subset (ascending indices). Deterministic given the stream.
    std::vector<int> sample(RandomStream& stream) const;

private:
    int n_ = 0;
    int m_ = 0;
    std::vector<double> log_weight_;  // shifted log weights
    std::vector<double> table_;       // (n+1) x (m+1) log elementary symmetric polys

    double log_esp(int i, int k) const {
        return table_[static_cast<std::size_t>(i) * (m_ + 1) + k];
    }
};

// One-shot convenience wrapper around the sampler.
std::vector<int> sample_subset(const TiltedModel& model, RandomStream& stream);

// Mean of scores under the tilted weights exp(beta * s_i); strictly
// increasing in beta whenever the scores are not constant. This is the
// sparse-selection (m << N) limit of conditional_subset_mean.
double tilted_mean(std::span<const double> s, double beta);

// Expected subset mean E[mean of s over S] under the conditional law at
// size m, computed exactly from inclusion probabilities via a
// derivative-carrying pass over the elementary-symmetric recurrence.
// Strictly increasing in beta for nonconstant scores.
double conditional_subset_mean(std::span<const double> s, double beta, int m);

// Maximum-likelihood tilt for an observed m-subset: solves the score
// equation conditional_subset_mean(s, beta, m) = mean of s over the subset,
// to absolute residual 1e-10, by safeguarded monotone root search. At small
// sampling fractions this coincides with the softmax tilted-mean equation;
// at larger m/N the conditional form stays consistent where the softmax
// form saturates. The subset mean must lie strictly between the means of
// the m smallest and m largest scores (the attainable range).
// (The companion size estimate is just the observed m and is not returned.)
double mle_beta(std::span<const double> s, std::span<const int> observed_subset);

}  // namespace gsa
