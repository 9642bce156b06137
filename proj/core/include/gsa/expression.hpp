#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gsa {

// Two-class expression data: N genes by n samples, row-major. Class labels
// take values 1 and 2; immutable after construction.
struct ExpressionMatrix {
    std::vector<std::string> gene_ids;    // N, unique
    std::vector<std::string> sample_ids;  // n
    std::vector<int> labels;              // n, values in {1, 2}
    std::vector<double> values;           // N x n, row-major

    int n_genes() const { return static_cast<int>(gene_ids.size()); }
    int n_samples() const { return static_cast<int>(sample_ids.size()); }

    double at(int gene, int sample) const {
        return values[static_cast<std::size_t>(gene) * sample_ids.size()
                      + static_cast<std::size_t>(sample)];
    }
    std::span<const double> row(int gene) const {
        return {values.data() + static_cast<std::size_t>(gene) * sample_ids.size(),
                sample_ids.size()};
    }

    int class_size(int cls) const;

    // Enforces the structural invariants (N >= 1, n >= 4, unique gene ids,
    // both classes with >= 2 samples, rectangular values). Throws LoadError.
    void validate() const;
};

// Reads a tab-delimited expression table: header row "gene_id" followed by
// sample ids, one gene per row. Labels come either from a separate
// two-column file (sample_id TAB class) or from an inline second header row
// whose first cell is "class". Class tokens are coerced to {1, 2} in order
// of first appearance in the labels input.
ExpressionMatrix load_expression_tsv(const std::filesystem::path& expression_path,
                                     const std::optional<std::filesystem::path>& labels_path);

// Writers used to materialize generated datasets; values round-trip exactly.
void write_expression_tsv(const ExpressionMatrix& matrix, const std::filesystem::path& path,
                          bool inline_labels = false);
void write_labels_tsv(const ExpressionMatrix& matrix, const std::filesystem::path& path);

}  // namespace gsa
