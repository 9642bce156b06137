#pragma once

#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace gsa {

struct ExpressionMatrix;

struct GeneSet {
    std::string name;
    std::string description;
    std::vector<std::string> members;  // unique within the set
};

struct GeneSetCatalog {
    std::vector<GeneSet> sets;                // names unique, sets nonempty
    int duplicate_members_collapsed = 0;      // across all sets at load time
};

// A catalog resolved against a matrix: members become row indices.
struct ResolvedSet {
    std::string name;
    std::vector<int> row_indices;  // unique, valid rows
    int dropped = 0;               // members absent from the matrix

    int size() const { return static_cast<int>(row_indices.size()); }
};

struct ExcludedSet {
    std::string name;
    int resolved_size = 0;
};

struct ResolvedCatalog {
    std::vector<ResolvedSet> sets;      // catalog order preserved
    std::vector<ExcludedSet> excluded;  // outside [min_size, max_size]
    int min_size = 2;
    int max_size = std::numeric_limits<int>::max();
    int total_dropped = 0;
};

// GMT reader: one set per line, "name TAB description TAB member...".
// Blank lines are skipped; duplicate members within a line are collapsed
// and counted. Duplicate set names or lines with fewer than 3 fields are
// load errors citing the line number.
GeneSetCatalog load_gmt(const std::filesystem::path& path);

void write_gmt(const GeneSetCatalog& catalog, const std::filesystem::path& path);

// Drops members absent from the matrix and excludes sets whose resolved
// size falls outside [min_size, max_size]. Errors if nothing survives.
ResolvedCatalog resolve_catalog(const GeneSetCatalog& catalog, const ExpressionMatrix& matrix,
                                int min_size = 2,
                                int max_size = std::numeric_limits<int>::max());

}  // namespace gsa
