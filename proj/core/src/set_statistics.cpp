#include "gsa/set_statistics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace gsa {

const char* to_string(SetStatisticKind kind) {
    switch (kind) {
        case SetStatisticKind::mean: return "mean";
        case SetStatisticKind::mean_abs: return "mean_abs";
        case SetStatisticKind::maxmean: return "maxmean";
        case SetStatisticKind::ks_signed: return "ks";
    }
    return "?";
}

const char* to_string(Side side) {
    return side == Side::positive ? "positive" : "negative";
}

std::optional<SetStatisticKind> parse_set_statistic(const std::string& name) {
    if (name == "mean") return SetStatisticKind::mean;
    if (name == "mean_abs") return SetStatisticKind::mean_abs;
    if (name == "maxmean") return SetStatisticKind::maxmean;
    if (name == "ks" || name == "ks_signed") return SetStatisticKind::ks_signed;
    return std::nullopt;
}

double set_mean(std::span<const double> z_set, ScoreFunctionKind f) {
    if (z_set.empty()) {
        throw std::invalid_argument("set_mean: empty set");
    }
    double sum = 0.0;
    for (double z : z_set) sum += apply_score(f, z);
    return sum / static_cast<double>(z_set.size());
}

MaxmeanResult set_maxmean(std::span<const double> z_set) {
    if (z_set.empty()) {
        throw std::invalid_argument("set_maxmean: empty set");
    }
    double sum_plus = 0.0;
    double sum_minus = 0.0;
    for (double z : z_set) {
        if (z > 0.0) {
            sum_plus += z;
        } else {
            sum_minus -= z;
        }
    }
    const double m = static_cast<double>(z_set.size());
    MaxmeanResult r;
    r.s_plus = sum_plus / m;
    r.s_minus = sum_minus / m;
    if (r.s_minus > r.s_plus) {
        r.value = r.s_minus;
        r.side = Side::negative;
    } else {
        r.value = r.s_plus;
        r.side = Side::positive;
    }
    return r;
}

double set_ks_signed(std::span<const double> z_set, std::span<const double> z_complement) {
    if (z_set.empty() || z_complement.empty()) {
        throw std::invalid_argument("set_ks_signed: both samples must be nonempty");
    }
    std::vector<double> a(z_set.begin(), z_set.end());
    std::vector<double> b(z_complement.begin(), z_complement.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());

    const double inv_na = 1.0 / static_cast<double>(a.size());
    const double inv_nb = 1.0 / static_cast<double>(b.size());

    double best = 0.0;
    double best_abs = -1.0;
    std::size_t ia = 0, ib = 0;
    // Walk the pooled order; evaluate D just after each distinct value, so
    // ties across samples advance both counters before the comparison.
    while (ia < a.size() || ib < b.size()) {
        double x;
        if (ia < a.size() && ib < b.size()) {
            x = std::min(a[ia], b[ib]);
        } else if (ia < a.size()) {
            x = a[ia];
        } else {
            x = b[ib];
        }
        while (ia < a.size() && a[ia] == x) ++ia;
        while (ib < b.size() && b[ib] == x) ++ib;

        const double f_set = static_cast<double>(ia) * inv_na;
        const double f_comp = static_cast<double>(ib) * inv_nb;
        const double d = f_comp - f_set;
        if (std::fabs(d) > best_abs) {
            best_abs = std::fabs(d);
            best = d;
        }
    }
    return best;
}

std::optional<Moments> randomization_moments(SetStatisticKind kind, const Moments& score_moments,
                                             int m) {
    if (kind == SetStatisticKind::ks_signed) {
        return std::nullopt;  // needs empirical row randomization
    }
    return randomization_moments(score_moments, m);
}

Moments randomization_moments(const Moments& score_moments, int m) {
    if (m < 1) {
        throw std::invalid_argument("randomization_moments: m must be >= 1");
    }
    return {score_moments.mean, score_moments.stdev / std::sqrt(static_cast<double>(m))};
}

}  // namespace gsa
