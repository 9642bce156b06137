#include "gsa/catalog.hpp"

#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "gsa/errors.hpp"
#include "gsa/expression.hpp"

namespace gsa {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

}  // namespace

GeneSetCatalog load_gmt(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw LoadError("GMT file not found: " + path.string());
    }

    GeneSetCatalog catalog;
    std::unordered_set<std::string> names;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        const auto fields = split_tabs(line);
        if (fields.size() < 3) {
            throw LoadError("GMT line " + std::to_string(line_no) +
                            ": expected name, description and at least one member");
        }
        if (!names.insert(fields[0]).second) {
            throw LoadError("GMT line " + std::to_string(line_no) + ": duplicate set name \"" +
                            fields[0] + "\"");
        }

        GeneSet set;
        set.name = fields[0];
        set.description = fields[1];
        std::unordered_set<std::string> seen;
        for (std::size_t i = 2; i < fields.size(); ++i) {
            if (fields[i].empty()) continue;
            if (seen.insert(fields[i]).second) {
                set.members.push_back(fields[i]);
            } else {
                ++catalog.duplicate_members_collapsed;
            }
        }
        if (set.members.empty()) {
            throw LoadError("GMT line " + std::to_string(line_no) + ": set \"" + set.name +
                            "\" has no members");
        }
        catalog.sets.push_back(std::move(set));
    }
    return catalog;
}

void write_gmt(const GeneSetCatalog& catalog, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write GMT file: " + path.string());
    for (const auto& set : catalog.sets) {
        out << set.name << '\t' << set.description;
        for (const auto& member : set.members) out << '\t' << member;
        out << '\n';
    }
}

ResolvedCatalog resolve_catalog(const GeneSetCatalog& catalog, const ExpressionMatrix& matrix,
                                int min_size, int max_size) {
    if (min_size < 1 || max_size < min_size) {
        throw std::invalid_argument("resolve_catalog: need 1 <= min_size <= max_size");
    }

    std::unordered_map<std::string, int> gene_index;
    gene_index.reserve(matrix.gene_ids.size() * 2);
    for (int i = 0; i < matrix.n_genes(); ++i) gene_index.emplace(matrix.gene_ids[i], i);

    ResolvedCatalog resolved;
    resolved.min_size = min_size;
    resolved.max_size = max_size;
    for (const auto& set : catalog.sets) {
        ResolvedSet r;
        r.name = set.name;
        for (const auto& member : set.members) {
            const auto it = gene_index.find(member);
            if (it == gene_index.end()) {
                ++r.dropped;
            } else {
                r.row_indices.push_back(it->second);
            }
        }
        resolved.total_dropped += r.dropped;
        if (r.size() < min_size || r.size() > max_size) {
            resolved.excluded.push_back({r.name, r.size()});
        } else {
            resolved.sets.push_back(std::move(r));
        }
    }

    if (resolved.sets.empty()) {
        throw LoadError("no gene-sets survive resolution with size filter [" +
                        std::to_string(min_size) + ", " +
                        (max_size == std::numeric_limits<int>::max() ? std::string("inf")
                                                                     : std::to_string(max_size)) +
                        "]");
    }
    return resolved;
}

}  // namespace gsa
