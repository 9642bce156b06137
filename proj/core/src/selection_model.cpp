#include "gsa/selection_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace gsa {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add_exp(double x, double y) {
    if (x == kNegInf) return y;
    if (y == kNegInf) return x;
    const double hi = std::max(x, y);
    const double lo = std::min(x, y);
    if (hi - lo > 38.0) return hi;  // below one ulp
    return hi + std::log1p(std::exp(lo - hi));
}

// Shifted log weights a_i = beta * s_i - max_j(beta * s_j). The shift keeps
// every weight in (0, 1]; subset probabilities are shift-invariant.
std::vector<double> shifted_log_weights(const TiltedModel& model) {
    if (model.s.empty()) {
        throw std::invalid_argument("tilted model: no scores");
    }
    if (model.m < 1 || model.m > model.n_genes()) {
        throw std::invalid_argument("tilted model: need 1 <= m <= N");
    }
    std::vector<double> a(model.s.size());
    double top = kNegInf;
    for (std::size_t i = 0; i < model.s.size(); ++i) {
        a[i] = model.beta * model.s[i];
        if (!std::isfinite(a[i])) {
            throw std::overflow_error(
                "tilted model: beta * s overflowed; rescale the scores or shrink beta");
        }
        top = std::max(top, a[i]);
    }
    for (double& v : a) v -= top;
    return a;
}

void check_subset(const TiltedModel& model, std::span<const int> subset) {
    if (static_cast<int>(subset.size()) != model.m) {
        throw std::invalid_argument("subset size does not match the model's m");
    }
    std::unordered_set<int> seen;
    for (int idx : subset) {
        if (idx < 0 || idx >= model.n_genes()) {
            throw std::invalid_argument("subset index out of range");
        }
        if (!seen.insert(idx).second) {
            throw std::invalid_argument("subset contains duplicate indices");
        }
    }
}

}  // namespace

double subset_log_prob(const TiltedModel& model, std::span<const int> subset) {
    check_subset(model, subset);
    const auto a = shifted_log_weights(model);

    // log e_m over all genes via the usual DP in log space.
    const int m = model.m;
    std::vector<double> log_esp(static_cast<std::size_t>(m) + 1, kNegInf);
    log_esp[0] = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const int k_hi = std::min<int>(m, static_cast<int>(i) + 1);
        for (int k = k_hi; k >= 1; --k) {
            log_esp[static_cast<std::size_t>(k)] =
                log_add_exp(log_esp[static_cast<std::size_t>(k)],
                            a[i] + log_esp[static_cast<std::size_t>(k) - 1]);
        }
    }

    double log_num = 0.0;
    for (int idx : subset) log_num += a[static_cast<std::size_t>(idx)];
    return log_num - log_esp[static_cast<std::size_t>(m)];
}

ConditionalBernoulliSampler::ConditionalBernoulliSampler(const TiltedModel& model)
    : n_(model.n_genes()), m_(model.m), log_weight_(shifted_log_weights(model)) {
    // table[i][k] = log e_k(w_1..w_i); row 0 is the empty prefix.
    table_.assign(static_cast<std::size_t>(n_ + 1) * (m_ + 1), kNegInf);
    table_[0] = 0.0;  // e_0 of empty prefix
    for (int i = 1; i <= n_; ++i) {
        const std::size_t row = static_cast<std::size_t>(i) * (m_ + 1);
        const std::size_t prev = static_cast<std::size_t>(i - 1) * (m_ + 1);
        table_[row] = 0.0;  // e_0 = 1
        const int k_hi = std::min(m_, i);
        for (int k = 1; k <= k_hi; ++k) {
            table_[row + k] = log_add_exp(table_[prev + k],
                                          log_weight_[static_cast<std::size_t>(i - 1)] +
                                              table_[prev + k - 1]);
        }
    }
    if (log_esp(n_, m_) == kNegInf) {
        throw std::overflow_error(
            "tilted model: subset weights underflowed; rescale the scores or shrink beta");
    }
}

std::vector<int> ConditionalBernoulliSampler::sample(RandomStream& stream) const {
    std::vector<int> subset;
    subset.reserve(static_cast<std::size_t>(m_));
    int k = m_;
    for (int i = n_; i >= 1 && k >= 1; --i) {
        // P(include gene i | k still needed among first i).
        const double log_p = log_weight_[static_cast<std::size_t>(i - 1)] +
                             log_esp(i - 1, k - 1) - log_esp(i, k);
        const double p = std::exp(log_p);
        if (stream.next_double() < p) {
            subset.push_back(i - 1);
            --k;
        }
    }
    std::reverse(subset.begin(), subset.end());
    return subset;
}

std::vector<int> sample_subset(const TiltedModel& model, RandomStream& stream) {
    return ConditionalBernoulliSampler(model).sample(stream);
}

double tilted_mean(std::span<const double> s, double beta) {
    if (s.empty()) {
        throw std::invalid_argument("tilted_mean: no scores");
    }
    double top = kNegInf;
    for (double v : s) top = std::max(top, beta * v);
    if (!std::isfinite(top)) {
        throw std::overflow_error("tilted_mean: beta * s overflowed");
    }
    double wsum = 0.0, swsum = 0.0;
    for (double v : s) {
        const double w = std::exp(beta * v - top);
        wsum += w;
        swsum += v * w;
    }
    return swsum / wsum;
}

double conditional_subset_mean(std::span<const double> s, double beta, int m) {
    const int n = static_cast<int>(s.size());
    if (n < 1 || m < 1 || m > n) {
        throw std::invalid_argument("conditional_subset_mean: need 1 <= m <= N");
    }
    // Shift scores nonnegative: the law is invariant and the mean shifts
    // back, so every DP term stays nonnegative and log space is enough for
    // any beta.
    double low = s[0], high = s[0];
    for (double v : s) {
        low = std::min(low, v);
        high = std::max(high, v);
    }
    if (!std::isfinite(beta * low) || !std::isfinite(beta * high)) {
        throw std::overflow_error("conditional_subset_mean: beta * s overflowed");
    }

    // log E[k] = log e_k over the genes seen so far, log D[k] with
    // D[k] = sum_j s'_j w_j e_{k-1}(rest); D[m]/E[m] is the expected subset
    // total of the shifted scores.
    std::vector<double> log_esp(static_cast<std::size_t>(m) + 1, kNegInf);
    std::vector<double> log_desp(static_cast<std::size_t>(m) + 1, kNegInf);
    log_esp[0] = 0.0;
    const double shift_top = beta * (beta >= 0.0 ? high : low);
    for (int i = 0; i < n; ++i) {
        const double shifted = s[static_cast<std::size_t>(i)] - low;
        const double log_w = beta * s[static_cast<std::size_t>(i)] - shift_top;
        const double log_sw = shifted > 0.0 ? std::log(shifted) + log_w : kNegInf;
        const int k_hi = std::min(m, i + 1);
        for (int k = k_hi; k >= 1; --k) {
            const double via_e = log_sw + log_esp[static_cast<std::size_t>(k) - 1];
            const double via_d = log_w + log_desp[static_cast<std::size_t>(k) - 1];
            log_desp[static_cast<std::size_t>(k)] =
                log_add_exp(log_desp[static_cast<std::size_t>(k)], log_add_exp(via_e, via_d));
            log_esp[static_cast<std::size_t>(k)] =
                log_add_exp(log_esp[static_cast<std::size_t>(k)],
                            log_w + log_esp[static_cast<std::size_t>(k) - 1]);
        }
    }
    if (log_esp[static_cast<std::size_t>(m)] == kNegInf) {
        throw std::overflow_error(
            "conditional_subset_mean: subset weights underflowed; rescale the scores");
    }
    const double shifted_total = std::exp(log_desp[static_cast<std::size_t>(m)] -
                                          log_esp[static_cast<std::size_t>(m)]);
    return shifted_total / static_cast<double>(m) + low;
}

double mle_beta(std::span<const double> s, std::span<const int> observed_subset) {
    if (observed_subset.empty()) {
        throw std::invalid_argument("mle_beta: empty subset");
    }
    const int m = static_cast<int>(observed_subset.size());
    double target = 0.0;
    for (int idx : observed_subset) {
        if (idx < 0 || idx >= static_cast<int>(s.size())) {
            throw std::invalid_argument("mle_beta: subset index out of range");
        }
        target += s[static_cast<std::size_t>(idx)];
    }
    target /= static_cast<double>(m);

    const auto [lo_it, hi_it] = std::minmax_element(s.begin(), s.end());
    if (*lo_it == *hi_it) {
        throw std::invalid_argument("mle_beta: constant scores, tilt is unidentifiable");
    }
    // Attainable range of the conditional mean: the m smallest scores up to
    // the m largest.
    std::vector<double> sorted(s.begin(), s.end());
    std::sort(sorted.begin(), sorted.end());
    double bottom = 0.0, top = 0.0;
    for (int i = 0; i < m; ++i) {
        bottom += sorted[static_cast<std::size_t>(i)];
        top += sorted[sorted.size() - 1 - static_cast<std::size_t>(i)];
    }
    bottom /= m;
    top /= m;
    if (!(target > bottom && target < top)) {
        throw std::invalid_argument(
            "mle_beta: subset mean at or outside the attainable range, no finite solution");
    }

    constexpr double kTol = 1e-10;
    const auto residual = [&](double beta) {
        return conditional_subset_mean(s, beta, m) - target;
    };
    const double at_zero = residual(0.0);
    if (std::fabs(at_zero) <= kTol) return 0.0;

    // Expand a bracket around the root; the conditional mean is increasing.
    double lo = 0.0, hi = 0.0;
    double f_lo = at_zero, f_hi = at_zero;
    if (at_zero < 0.0) {
        hi = 1.0;
        while ((f_hi = residual(hi)) < 0.0) {
            lo = hi;
            f_lo = f_hi;
            hi *= 2.0;
            if (hi > 1e9) {
                throw std::invalid_argument("mle_beta: no solution within a workable range");
            }
        }
    } else {
        lo = -1.0;
        while ((f_lo = residual(lo)) > 0.0) {
            hi = lo;
            f_hi = f_lo;
            lo *= 2.0;
            if (lo < -1e9) {
                throw std::invalid_argument("mle_beta: no solution within a workable range");
            }
        }
    }

    // Illinois-damped regula falsi with a bisection guard.
    double beta = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double f = residual(beta);
        if (std::fabs(f) <= kTol) return beta;
        if (f > 0.0) {
            hi = beta;
            f_hi = f;
            f_lo *= 0.5;
        } else {
            lo = beta;
            f_lo = f;
            f_hi *= 0.5;
        }
        double next = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if (!(next > lo && next < hi) || !std::isfinite(next)) {
            next = 0.5 * (lo + hi);
        }
        beta = next;
    }
    return beta;
}

}  // namespace gsa
