#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gsa/gene_scores.hpp"
#include "gsa/numerics.hpp"
#include "gsa/random.hpp"
#include "gsa/set_statistics.hpp"

namespace gsa {

struct ExpressionMatrix;
struct ResolvedCatalog;

// ---------------------------------------------------------------------------
// Permutation plan
// ---------------------------------------------------------------------------

// B relabelings of the n samples, each preserving the class sizes. The plan
// is a pure function of (seed, B, n1, n2): relabeling b is drawn from
// RandomStream(seed, b), so any subset can be regenerated independently.
struct PermutationPlan {
    std::uint64_t seed = 0;
    int n1 = 0;
    int n2 = 0;
    std::vector<std::vector<int>> labels;  // B entries of length n1 + n2, values {1, 2}

    int size() const { return static_cast<int>(labels.size()); }
};

PermutationPlan make_permutation_plan(std::uint64_t seed, int count, int n1, int n2);

// ---------------------------------------------------------------------------
// Options
// ---------------------------------------------------------------------------

enum class StandardizationMode {
    restandardized,  // standardize by row-randomization moments (the default)
    raw,             // compare raw S against raw S*, no correction
};

// Where the permutation-side moments come from: each permuted dataset's own
// catalog moments, or one pooled pair across all permutations.
enum class PermutationMomentsScope { per_permutation, pooled };

enum class PValueConvention {
    weak,     // #{S'* >= S'} / B
    add_one,  // (#{S'* >= S'} + 1) / (B + 1), never exactly zero
};

struct AnalysisOptions {
    int permutations = 1000;
    std::uint64_t seed = 0;
    MomentsMode moments_mode = MomentsMode::multiplicity;
    StandardizationMode standardization = StandardizationMode::restandardized;
    PermutationMomentsScope moments_scope = PermutationMomentsScope::per_permutation;
    PValueConvention pvalue_convention = PValueConvention::weak;
    double q_cut = 0.10;
    int ks_randomization_draws = 200;  // nested draws for ks moments
    int threads = 0;                   // 0 = hardware concurrency
    TwoSampleOptions gene_score_options;
};

// ---------------------------------------------------------------------------
// Standardization
// ---------------------------------------------------------------------------

// Direct restandardization of one permutation value:
//   S** = mean_dagger + (stdev_dagger / stdev_star) * (S* - mean_star).
double restandardize_value(double s_star, const Moments& randomization,
                           const Moments& permutation);

// Moments of s(z) over a basis of gene indices. NaN scores are skipped;
// errors if fewer than 2 usable values remain.
Moments score_moments(std::span<const double> z, std::span<const int> basis,
                      ScoreFunctionKind f);

// A standardized set score. `value` is the signed standardized statistic
// for mean / mean_abs / ks, and the winning standardized part-average for
// maxmean; `side` is the enrichment direction (maxmean: the winning part,
// others: the sign of the value).
struct StandardizedScore {
    double value = 0.0;
    Side side = Side::positive;
};

// Standardizes one set's statistic against catalog score moments taken over
// `basis`. maxmean standardizes its positive and negative part-averages
// separately and takes the larger. ks_signed requires empirical moments
// from row randomization. Throws DegenerateStatisticError when the null
// scale is zero.
StandardizedScore standardize_score(SetStatisticKind kind, std::span<const double> z,
                                    std::span<const int> set_indices,
                                    std::span<const int> basis,
                                    const std::optional<Moments>& ks_moments = std::nullopt);

// ---------------------------------------------------------------------------
// Row randomization
// ---------------------------------------------------------------------------

// R raw statistics over uniform without-replacement m-subsets of the genes.
// Used to estimate (mu_dagger, sigma_dagger) for ks_signed and to validate
// the analytic moments of the mean-type statistics.
std::vector<double> row_randomization_scores(std::span<const double> z, int m,
                                             SetStatisticKind kind, int draws,
                                             RandomStream& stream);

// ---------------------------------------------------------------------------
// Permutation engine
// ---------------------------------------------------------------------------

// Observed and permuted standardized scores for one statistic kind.
// Degenerate permutation cells are NaN and excluded from p-value
// denominators.
struct PermutationScores {
    SetStatisticKind kind = SetStatisticKind::maxmean;
    int n_sets = 0;
    int n_permutations = 0;
    std::vector<double> observed;     // K
    std::vector<Side> observed_side;  // K
    std::vector<double> perm;         // K x B, row-major
    std::vector<Side> perm_side;      // K x B

    double cell(int set, int b) const {
        return perm[static_cast<std::size_t>(set) * n_permutations + b];
    }
    Side cell_side(int set, int b) const {
        return perm_side[static_cast<std::size_t>(set) * n_permutations + b];
    }
    int degenerate_cells = 0;
};

// One pass over the permutation plan, scoring every requested statistic on
// every permuted dataset. Each permuted dataset is standardized by its own
// catalog moments (or pooled/raw per options). Deterministic for fixed
// (matrix, catalog, plan, options) at any thread count.
std::vector<PermutationScores> permutation_scores_multi(
    const ExpressionMatrix& matrix, const ResolvedCatalog& resolved,
    std::span<const SetStatisticKind> kinds, const PermutationPlan& plan,
    const AnalysisOptions& options);

PermutationScores permutation_scores(const ExpressionMatrix& matrix,
                                     const ResolvedCatalog& resolved, SetStatisticKind kind,
                                     const PermutationPlan& plan,
                                     const AnalysisOptions& options);

// ---------------------------------------------------------------------------
// P-values and FDR
// ---------------------------------------------------------------------------

struct PValueTriple {
    double p = 1.0;     // main p: upper tail (|.| tail for ks_signed)
    double p_lo = 1.0;  // lower tail of the signed score
    double p_hi = 1.0;  // upper tail of the signed score
    int valid = 0;      // permutations entering the denominators
};

PValueTriple pvalues(SetStatisticKind kind, double observed, Side observed_side,
                     std::span<const double> perm, std::span<const Side> perm_side,
                     PValueConvention convention);

struct BhResult {
    std::vector<double> q;         // original order
    std::vector<int> significant;  // indices with q <= q_cut, ascending
};

// Benjamini-Hochberg step-up: q_(k) = min_{j >= k} K p_(j) / j on the
// sorted p-values, mapped back to input order.
BhResult bh_fdr(std::span<const double> p, double q_cut);

// ---------------------------------------------------------------------------
// Full per-catalog analysis
// ---------------------------------------------------------------------------

struct SetScoreRow {
    std::string name;
    int m = 0;
    double raw = 0.0;      // unstandardized statistic
    double s_prime = 0.0;  // standardized statistic
    Side side = Side::positive;
    double p = 1.0;
    double p_lo = 1.0;
    double p_hi = 1.0;
    double q = 1.0;
};

struct SetScoreTable {
    SetStatisticKind kind = SetStatisticKind::maxmean;
    std::vector<SetScoreRow> rows;  // sorted by p, ties by name
    int permutations = 0;
    int degenerate_cells = 0;
};

SetScoreTable analyze(const ExpressionMatrix& matrix, const ResolvedCatalog& resolved,
                      SetStatisticKind kind, const AnalysisOptions& options);

std::vector<SetScoreTable> analyze_multi(const ExpressionMatrix& matrix,
                                         const ResolvedCatalog& resolved,
                                         std::span<const SetStatisticKind> kinds,
                                         const AnalysisOptions& options);

}  // namespace gsa
