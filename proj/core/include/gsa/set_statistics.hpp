#pragma once

#include <optional>
#include <span>
#include <string>

#include "gsa/numerics.hpp"

namespace gsa {

// Per-gene scoring functions s(z).
enum class ScoreFunctionKind {
    identity,       // s(z) = z
    absolute,       // s(z) = |z|
    positive_part,  // s(z) = max(z, 0)
    negative_part,  // s(z) = -min(z, 0)
};

inline double apply_score(ScoreFunctionKind kind, double z) {
    switch (kind) {
        case ScoreFunctionKind::identity: return z;
        case ScoreFunctionKind::absolute: return z < 0.0 ? -z : z;
        case ScoreFunctionKind::positive_part: return z > 0.0 ? z : 0.0;
        case ScoreFunctionKind::negative_part: return z < 0.0 ? -z : 0.0;
    }
    return 0.0;
}

// Gene-set summary statistics. The kind also fixes the restandardization
// recipe applied by the inference layer.
enum class SetStatisticKind {
    mean,       // average z
    mean_abs,   // average |z|
    maxmean,    // max of averaged positive and negative parts
    ks_signed,  // signed two-sample Kolmogorov-Smirnov against the complement
};

enum class Side { positive, negative };

const char* to_string(SetStatisticKind kind);
const char* to_string(Side side);
std::optional<SetStatisticKind> parse_set_statistic(const std::string& name);

// Average of s(z_i) over the set. Errors on an empty set.
double set_mean(std::span<const double> z_set, ScoreFunctionKind f);

struct MaxmeanResult {
    double value = 0.0;  // max(s_plus, s_minus)
    Side side = Side::positive;
    double s_plus = 0.0;   // mean of positive parts over all m members
    double s_minus = 0.0;  // mean of negative parts over all m members
};

// Maxmean statistic: both part-averages divide by the full set size m, so a
// handful of extreme scores cannot dominate. Ties resolve to the positive
// side.
MaxmeanResult set_maxmean(std::span<const double> z_set);

// Signed two-sample KS statistic. With D(x) = F_complement(x) - F_set(x),
// returns D at the location maximizing |D| (smallest such location on
// ties). Positive values mean the set sits at larger z than its complement.
double set_ks_signed(std::span<const double> z_set, std::span<const double> z_complement);

// Analytic row-randomization moments (mean_s, stdev_s / sqrt(m)) for
// mean-type statistics, given the score moments over the chosen basis.
// Returns nothing for ks_signed, which needs empirical moments from
// row randomization.
std::optional<Moments> randomization_moments(SetStatisticKind kind, const Moments& score_moments,
                                             int m);

// Same computation for a score-function statistic directly.
Moments randomization_moments(const Moments& score_moments, int m);

}  // namespace gsa
