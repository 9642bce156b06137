#pragma once

#include <span>
#include <string>
#include <vector>

#include "gsa/numerics.hpp"

namespace gsa {

struct ExpressionMatrix;
struct ResolvedCatalog;

// Per-gene two-sample statistics and their z transform. Positive values
// mean higher expression in class 2.
struct GeneScores {
    std::vector<double> t;
    std::vector<double> z;
    int df = 0;  // n - 2
};

struct TwoSampleOptions {
    // Replace the pooled sd with max(sp, 1e-8 * median nonzero sp) instead
    // of erroring on zero-variance genes. Off by default.
    bool variance_floor = false;
};

// Pooled-variance two-sample t per gene, class 2 minus class 1, on
// n - 2 degrees of freedom. Zero pooled variance is an error naming the
// offending gene unless the variance floor is on.
std::vector<double> two_sample_t(const ExpressionMatrix& matrix,
                                 const TwoSampleOptions& options = {});

// Elementwise z_i from t_i through the t c.d.f. and the normal quantile;
// c.d.f. values are clamped so outputs stay finite.
std::vector<double> t_to_z(std::span<const double> t, int df);

GeneScores compute_gene_scores(const ExpressionMatrix& matrix,
                               const TwoSampleOptions& options = {});

// Basis over which catalog-wide score moments are taken.
enum class MomentsMode {
    multiplicity,  // concatenated per-set member scores; a gene counts once per set
    all_genes,     // every matrix gene exactly once
};

// Mean and population stdev of per-gene scores s over the chosen basis.
Moments catalog_score_moments(std::span<const double> s, const ResolvedCatalog& resolved,
                              MomentsMode mode);

// The flat index basis the moments are taken over (exposed for reuse by the
// permutation engine; multiplicity order follows the catalog).
std::vector<int> moments_basis(const ResolvedCatalog& resolved, int n_genes, MomentsMode mode);

namespace detail {
// Permutation-loop variant of two_sample_t: zero-variance genes become NaN
// instead of aborting the run.
std::vector<double> two_sample_t_permissive(const ExpressionMatrix& matrix,
                                            std::span<const int> labels);
}  // namespace detail

}  // namespace gsa
