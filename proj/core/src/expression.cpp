#include "gsa/expression.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "gsa/errors.hpp"

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

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

bool parse_double(const std::string& cell, double& out) {
    const char* first = cell.data();
    const char* last = first + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && std::isfinite(out);
}

// Maps class tokens to {1, 2} in order of first appearance.
class ClassCoercer {
public:
    int coerce(const std::string& token, const std::string& where) {
        auto it = mapping_.find(token);
        if (it != mapping_.end()) return it->second;
        if (mapping_.size() >= 2) {
            throw LoadError("labels: more than two distinct classes (saw \"" + token +
                            "\" " + where + ")");
        }
        const int cls = static_cast<int>(mapping_.size()) + 1;
        mapping_.emplace(token, cls);
        return cls;
    }

private:
    std::unordered_map<std::string, int> mapping_;
};

std::vector<int> read_labels_file(const std::filesystem::path& path,
                                  const std::vector<std::string>& sample_ids) {
    std::ifstream in(path);
    if (!in) {
        throw LoadError("labels file not found: " + path.string());
    }
    std::unordered_map<std::string, std::size_t> sample_index;
    for (std::size_t j = 0; j < sample_ids.size(); ++j) sample_index.emplace(sample_ids[j], j);

    std::vector<int> labels(sample_ids.size(), 0);
    std::vector<bool> seen(sample_ids.size(), false);
    ClassCoercer coercer;

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_tabs(line);
        if (line_no == 1 && fields.size() == 2 && fields[0] == "sample_id" && fields[1] == "class") {
            continue;  // optional header
        }
        if (fields.size() != 2) {
            throw LoadError("labels file line " + std::to_string(line_no) +
                            ": expected 2 tab-separated fields, got " +
                            std::to_string(fields.size()));
        }
        const auto it = sample_index.find(fields[0]);
        if (it == sample_index.end()) {
            throw LoadError("labels file line " + std::to_string(line_no) +
                            ": unknown sample \"" + fields[0] + "\"");
        }
        if (seen[it->second]) {
            throw LoadError("labels file line " + std::to_string(line_no) +
                            ": duplicate sample \"" + fields[0] + "\"");
        }
        seen[it->second] = true;
        labels[it->second] = coercer.coerce(fields[1], "at line " + std::to_string(line_no));
    }
    for (std::size_t j = 0; j < sample_ids.size(); ++j) {
        if (!seen[j]) {
            throw LoadError("labels file: no class given for sample \"" + sample_ids[j] + "\"");
        }
    }
    return labels;
}

}  // namespace

int ExpressionMatrix::class_size(int cls) const {
    return static_cast<int>(std::count(labels.begin(), labels.end(), cls));
}

void ExpressionMatrix::validate() const {
    const std::size_t n_g = gene_ids.size();
    const std::size_t n_s = sample_ids.size();
    if (n_g < 1) throw LoadError("expression matrix: no genes");
    if (n_s < 4) throw LoadError("expression matrix: need at least 4 samples, got " +
                                 std::to_string(n_s));
    if (labels.size() != n_s) throw LoadError("expression matrix: labels/sample count mismatch");
    if (values.size() != n_g * n_s) throw LoadError("expression matrix: value count mismatch");

    std::unordered_set<std::string> ids(gene_ids.begin(), gene_ids.end());
    if (ids.size() != n_g) throw LoadError("expression matrix: duplicate gene ids");

    const int n1 = class_size(1);
    const int n2 = class_size(2);
    if (n1 + n2 != static_cast<int>(n_s)) {
        throw LoadError("expression matrix: labels outside {1, 2}");
    }
    if (n1 < 2 || n2 < 2) {
        throw LoadError("expression matrix: each class needs at least 2 samples (got " +
                        std::to_string(n1) + " and " + std::to_string(n2) + ")");
    }
}

ExpressionMatrix load_expression_tsv(const std::filesystem::path& expression_path,
                                     const std::optional<std::filesystem::path>& labels_path) {
    std::ifstream in(expression_path);
    if (!in) {
        throw LoadError("expression file not found: " + expression_path.string());
    }

    ExpressionMatrix m;
    std::string line;
    if (!std::getline(in, line)) {
        throw LoadError("expression file is empty: " + expression_path.string());
    }
    line = strip_cr(line);
    auto header = split_tabs(line);
    if (header.size() < 2 || header[0] != "gene_id") {
        throw LoadError("expression header must start with \"gene_id\" followed by sample ids");
    }
    m.sample_ids.assign(header.begin() + 1, header.end());
    const std::size_t n_s = m.sample_ids.size();

    std::optional<std::vector<int>> inline_labels;
    int gene_row = 0;  // 1-based index over data rows
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_tabs(line);

        // Optional inline label row directly after the header.
        if (gene_row == 0 && !inline_labels && fields[0] == "class") {
            if (fields.size() != n_s + 1) {
                throw LoadError("inline class row: expected " + std::to_string(n_s) +
                                " labels, got " + std::to_string(fields.size() - 1));
            }
            ClassCoercer coercer;
            std::vector<int> labels;
            labels.reserve(n_s);
            for (std::size_t j = 1; j < fields.size(); ++j) {
                labels.push_back(coercer.coerce(fields[j], "in inline class row"));
            }
            inline_labels = std::move(labels);
            continue;
        }

        ++gene_row;
        if (fields.size() != n_s + 1) {
            throw LoadError("expression gene row " + std::to_string(gene_row) + " (\"" +
                            fields[0] + "\"): expected " + std::to_string(n_s + 1) +
                            " fields, got " + std::to_string(fields.size()));
        }
        m.gene_ids.push_back(fields[0]);
        for (std::size_t j = 1; j < fields.size(); ++j) {
            double v;
            if (!parse_double(fields[j], v)) {
                throw LoadError("expression: non-numeric cell at gene row " +
                                std::to_string(gene_row) + ", sample column " +
                                std::to_string(j) + " (gene \"" + fields[0] + "\", sample \"" +
                                m.sample_ids[j - 1] + "\")");
            }
            m.values.push_back(v);
        }
    }

    if (labels_path) {
        m.labels = read_labels_file(*labels_path, m.sample_ids);
    } else if (inline_labels) {
        m.labels = std::move(*inline_labels);
    } else {
        throw LoadError("no class labels: supply a labels file or an inline class row");
    }

    m.validate();
    return m;
}

namespace {

std::string format_value(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

void write_expression_tsv(const ExpressionMatrix& matrix, const std::filesystem::path& path,
                          bool inline_labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write expression file: " + path.string());

    out << "gene_id";
    for (const auto& s : matrix.sample_ids) out << '\t' << s;
    out << '\n';
    if (inline_labels) {
        out << "class";
        for (int label : matrix.labels) out << '\t' << label;
        out << '\n';
    }
    for (int i = 0; i < matrix.n_genes(); ++i) {
        out << matrix.gene_ids[i];
        const auto r = matrix.row(i);
        for (double v : r) out << '\t' << format_value(v);
        out << '\n';
    }
}

void write_labels_tsv(const ExpressionMatrix& matrix, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write labels file: " + path.string());
    out << "sample_id\tclass\n";
    for (int j = 0; j < matrix.n_samples(); ++j) {
        out << matrix.sample_ids[j] << '\t' << matrix.labels[j] << '\n';
    }
}

}  // namespace gsa
