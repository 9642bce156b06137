#include "gsa/gene_scores.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gsa/catalog.hpp"
#include "gsa/errors.hpp"
#include "gsa/expression.hpp"

namespace gsa {

namespace {

struct PooledT {
    std::vector<double> t;          // NaN where pooled variance is zero
    std::vector<int> zero_variance; // gene indices
};

PooledT pooled_t_raw(const ExpressionMatrix& matrix, std::span<const int> labels) {
    const int n = matrix.n_samples();
    const int n1 = static_cast<int>(std::count(labels.begin(), labels.end(), 1));
    const int n2 = n - n1;
    if (n1 < 2 || n2 < 2) {
        throw std::invalid_argument("two_sample_t: each class needs at least 2 samples");
    }
    const double inv_n1 = 1.0 / n1;
    const double inv_n2 = 1.0 / n2;
    const double se_factor = std::sqrt(inv_n1 + inv_n2);
    const double df = static_cast<double>(n - 2);

    PooledT out;
    out.t.resize(static_cast<std::size_t>(matrix.n_genes()));
    for (int i = 0; i < matrix.n_genes(); ++i) {
        const auto row = matrix.row(i);
        double sum1 = 0.0, sum2 = 0.0;
        for (int j = 0; j < n; ++j) {
            if (labels[static_cast<std::size_t>(j)] == 1) {
                sum1 += row[static_cast<std::size_t>(j)];
            } else {
                sum2 += row[static_cast<std::size_t>(j)];
            }
        }
        const double mean1 = sum1 * inv_n1;
        const double mean2 = sum2 * inv_n2;
        double ss = 0.0;
        for (int j = 0; j < n; ++j) {
            const double d = row[static_cast<std::size_t>(j)] -
                             (labels[static_cast<std::size_t>(j)] == 1 ? mean1 : mean2);
            ss += d * d;
        }
        const double sp = std::sqrt(ss / df);
        if (sp == 0.0) {
            out.t[static_cast<std::size_t>(i)] = std::numeric_limits<double>::quiet_NaN();
            out.zero_variance.push_back(i);
        } else {
            out.t[static_cast<std::size_t>(i)] = (mean2 - mean1) / (sp * se_factor);
        }
    }
    return out;
}

}  // namespace

namespace detail {

// Permutation-loop variant: zero-variance genes become NaN instead of
// throwing, so a single degenerate relabeling cannot abort a whole run.
std::vector<double> two_sample_t_permissive(const ExpressionMatrix& matrix,
                                            std::span<const int> labels) {
    return pooled_t_raw(matrix, labels).t;
}

}  // namespace detail

std::vector<double> two_sample_t(const ExpressionMatrix& matrix,
                                 const TwoSampleOptions& options) {
    auto raw = pooled_t_raw(matrix, matrix.labels);
    if (raw.zero_variance.empty()) return std::move(raw.t);

    if (!options.variance_floor) {
        std::string names;
        for (std::size_t k = 0; k < raw.zero_variance.size() && k < 5; ++k) {
            if (k > 0) names += ", ";
            names += matrix.gene_ids[static_cast<std::size_t>(raw.zero_variance[k])];
        }
        throw DegenerateStatisticError(
            "two_sample_t: zero pooled variance for " + std::to_string(raw.zero_variance.size()) +
            " gene(s): " + names +
            (raw.zero_variance.size() > 5 ? ", ..." : "") +
            " (enable the variance floor to proceed)");
    }

    // Recompute floored t for the degenerate genes. The floor is relative
    // to the median nonzero pooled sd across genes.
    const int n = matrix.n_samples();
    const int n1 = matrix.class_size(1);
    const int n2 = n - n1;
    const double se_factor = std::sqrt(1.0 / n1 + 1.0 / n2);
    const double df = static_cast<double>(n - 2);

    std::vector<double> nonzero_sp;
    nonzero_sp.reserve(static_cast<std::size_t>(matrix.n_genes()));
    std::vector<double> sp_all(static_cast<std::size_t>(matrix.n_genes()));
    std::vector<double> diff_all(static_cast<std::size_t>(matrix.n_genes()));
    for (int i = 0; i < matrix.n_genes(); ++i) {
        const auto row = matrix.row(i);
        double sum1 = 0.0, sum2 = 0.0;
        for (int j = 0; j < n; ++j) {
            (matrix.labels[static_cast<std::size_t>(j)] == 1 ? sum1 : sum2) +=
                row[static_cast<std::size_t>(j)];
        }
        const double mean1 = sum1 / n1;
        const double mean2 = sum2 / n2;
        double ss = 0.0;
        for (int j = 0; j < n; ++j) {
            const double d = row[static_cast<std::size_t>(j)] -
                             (matrix.labels[static_cast<std::size_t>(j)] == 1 ? mean1 : mean2);
            ss += d * d;
        }
        sp_all[static_cast<std::size_t>(i)] = std::sqrt(ss / df);
        diff_all[static_cast<std::size_t>(i)] = mean2 - mean1;
        if (sp_all[static_cast<std::size_t>(i)] > 0.0) {
            nonzero_sp.push_back(sp_all[static_cast<std::size_t>(i)]);
        }
    }
    if (nonzero_sp.empty()) {
        throw DegenerateStatisticError("two_sample_t: every gene has zero pooled variance");
    }
    const double floor = 1e-8 * percentile(nonzero_sp, 0.5);
    for (int i = 0; i < matrix.n_genes(); ++i) {
        const double sp = std::max(sp_all[static_cast<std::size_t>(i)], floor);
        raw.t[static_cast<std::size_t>(i)] = diff_all[static_cast<std::size_t>(i)] / (sp * se_factor);
    }
    return std::move(raw.t);
}

std::vector<double> t_to_z(std::span<const double> t, int df) {
    if (df < 1) {
        throw std::invalid_argument("t_to_z: degrees of freedom must be >= 1");
    }
    std::vector<double> z(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (std::isnan(t[i])) {
            z[i] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        const double p = std::clamp(t_cdf(t[i], df), 1e-15, 1.0 - 1e-15);
        z[i] = normal_quantile(p);
    }
    return z;
}

GeneScores compute_gene_scores(const ExpressionMatrix& matrix, const TwoSampleOptions& options) {
    GeneScores scores;
    scores.df = matrix.n_samples() - 2;
    scores.t = two_sample_t(matrix, options);
    scores.z = t_to_z(scores.t, scores.df);
    return scores;
}

std::vector<int> moments_basis(const ResolvedCatalog& resolved, int n_genes, MomentsMode mode) {
    std::vector<int> basis;
    if (mode == MomentsMode::all_genes) {
        basis.resize(static_cast<std::size_t>(n_genes));
        std::iota(basis.begin(), basis.end(), 0);
        return basis;
    }
    for (const auto& set : resolved.sets) {
        basis.insert(basis.end(), set.row_indices.begin(), set.row_indices.end());
    }
    return basis;
}

Moments catalog_score_moments(std::span<const double> s, const ResolvedCatalog& resolved,
                              MomentsMode mode) {
    const auto basis = moments_basis(resolved, static_cast<int>(s.size()), mode);
    if (basis.size() < 2) {
        throw std::invalid_argument("catalog_score_moments: basis smaller than 2");
    }
    std::vector<double> values;
    values.reserve(basis.size());
    for (int idx : basis) values.push_back(s[static_cast<std::size_t>(idx)]);
    return sample_moments(values);
}

}  // namespace gsa
