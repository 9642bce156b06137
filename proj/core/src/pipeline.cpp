#include "gsa/pipeline.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "gsa/catalog.hpp"
#include "gsa/errors.hpp"
#include "gsa/expression.hpp"
#include "gsa/table_io.hpp"
#include "gsa/version.hpp"

namespace gsa {

namespace {

const char* to_string(MomentsMode mode) {
    return mode == MomentsMode::multiplicity ? "multiplicity" : "all_genes";
}
const char* to_string(StandardizationMode mode) {
    return mode == StandardizationMode::restandardized ? "restandardized" : "raw";
}
const char* to_string(PermutationMomentsScope scope) {
    return scope == PermutationMomentsScope::per_permutation ? "per_permutation" : "pooled";
}
const char* to_string(PValueConvention convention) {
    return convention == PValueConvention::weak ? "weak" : "add_one";
}

MomentsMode parse_moments_mode(const std::string& s) {
    if (s == "multiplicity") return MomentsMode::multiplicity;
    if (s == "all_genes") return MomentsMode::all_genes;
    throw LoadError("unknown moments mode: " + s);
}
StandardizationMode parse_standardization(const std::string& s) {
    if (s == "restandardized") return StandardizationMode::restandardized;
    if (s == "raw") return StandardizationMode::raw;
    throw LoadError("unknown standardization mode: " + s);
}
PermutationMomentsScope parse_scope(const std::string& s) {
    if (s == "per_permutation") return PermutationMomentsScope::per_permutation;
    if (s == "pooled") return PermutationMomentsScope::pooled;
    throw LoadError("unknown permutation-moments scope: " + s);
}
PValueConvention parse_convention(const std::string& s) {
    if (s == "weak") return PValueConvention::weak;
    if (s == "add_one") return PValueConvention::add_one;
    throw LoadError("unknown p-value convention: " + s);
}

std::string result_stem(const std::filesystem::path& gmt_path,
                        std::unordered_map<std::string, int>& used) {
    std::string stem = gmt_path.stem().string();
    const int count = ++used[stem];
    if (count > 1) stem += "_" + std::to_string(count);
    return stem;
}

void write_results_tsv(const SetScoreTable& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write results file: " + path.string());
    out << "name\tm\tS\tS_prime\tside\tp\tp_lo\tp_hi\tq\n";
    for (const auto& row : table.rows) {
        out << row.name << '\t' << row.m << '\t' << format_real(row.raw) << '\t'
            << format_real(row.s_prime) << '\t' << to_string(row.side) << '\t'
            << format_real(row.p) << '\t' << format_real(row.p_lo) << '\t'
            << format_real(row.p_hi) << '\t' << format_real(row.q) << '\n';
    }
}

void write_results_json(const SetScoreTable& table, const std::filesystem::path& path) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows) {
        rows.push_back({{"name", row.name},
                        {"m", row.m},
                        {"S", row.raw},
                        {"S_prime", row.s_prime},
                        {"side", to_string(row.side)},
                        {"p", row.p},
                        {"p_lo", row.p_lo},
                        {"p_hi", row.p_hi},
                        {"q", row.q}});
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write results file: " + path.string());
    out << rows.dump(2) << '\n';
}

void write_gene_scores_tsv(const ExpressionMatrix& matrix, const GeneScores& scores,
                           const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write gene scores file: " + path.string());
    out << "gene_id\tt\tz\n";
    for (int i = 0; i < matrix.n_genes(); ++i) {
        out << matrix.gene_ids[static_cast<std::size_t>(i)] << '\t'
            << format_real(scores.t[static_cast<std::size_t>(i)]) << '\t'
            << format_real(scores.z[static_cast<std::size_t>(i)]) << '\n';
    }
}

void write_gene_scores_json(const ExpressionMatrix& matrix, const GeneScores& scores,
                            const std::filesystem::path& path) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < matrix.n_genes(); ++i) {
        rows.push_back({{"gene_id", matrix.gene_ids[static_cast<std::size_t>(i)]},
                        {"t", scores.t[static_cast<std::size_t>(i)]},
                        {"z", scores.z[static_cast<std::size_t>(i)]}});
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write gene scores file: " + path.string());
    out << rows.dump(2) << '\n';
}

}  // namespace

AnalysisOptions to_analysis_options(const RunConfig& config) {
    AnalysisOptions options;
    options.permutations = config.permutations;
    options.seed = config.seed;
    options.moments_mode = config.moments_mode;
    options.standardization = config.standardization;
    options.moments_scope = config.moments_scope;
    options.pvalue_convention = config.pvalue_convention;
    options.q_cut = config.q_cut;
    options.ks_randomization_draws = config.ks_randomization_draws;
    options.threads = config.threads;
    options.gene_score_options.variance_floor = config.variance_floor;
    return options;
}

RunSummary run_to_files(const RunConfig& config) {
    if (config.expression_path.empty()) throw LoadError("run: no expression file given");
    if (config.gmt_paths.empty()) throw LoadError("run: no gene-set catalog given");
    if (config.permutations < 1) throw LoadError("run: need at least one permutation");

    const std::filesystem::path out_dir = config.out_dir;
    std::filesystem::create_directories(out_dir);

    const std::optional<std::filesystem::path> labels =
        config.labels_path.empty() ? std::nullopt
                                   : std::optional<std::filesystem::path>(config.labels_path);
    const ExpressionMatrix matrix = load_expression_tsv(config.expression_path, labels);
    const AnalysisOptions options = to_analysis_options(config);
    const GeneScores scores = compute_gene_scores(matrix, options.gene_score_options);

    RunSummary summary;
    summary.gene_scores_file = out_dir / "gene_scores.tsv";
    write_gene_scores_tsv(matrix, scores, summary.gene_scores_file);
    if (config.json_mirror) {
        write_gene_scores_json(matrix, scores, out_dir / "gene_scores.json");
    }

    const int max_size = config.max_size > 0 ? config.max_size
                                             : std::numeric_limits<int>::max();

    // Catalog bookkeeping for the metadata file, keyed by output stem.
    struct CatalogInfo {
        std::string stem;
        int sets_loaded = 0;
        int sets_kept = 0;
        int sets_excluded = 0;
        int members_dropped = 0;
        int duplicates_collapsed = 0;
        int degenerate_cells = 0;
    };
    std::vector<CatalogInfo> infos;
    std::unordered_map<std::string, int> stems_used;

    for (const auto& gmt_path : config.gmt_paths) {
        const GeneSetCatalog catalog = load_gmt(gmt_path);
        const ResolvedCatalog resolved = resolve_catalog(catalog, matrix, config.min_size,
                                                         max_size);
        const SetScoreTable table = analyze(matrix, resolved, config.statistic, options);

        CatalogInfo info;
        info.stem = result_stem(gmt_path, stems_used);
        info.sets_loaded = static_cast<int>(catalog.sets.size());
        info.sets_kept = static_cast<int>(resolved.sets.size());
        info.sets_excluded = static_cast<int>(resolved.excluded.size());
        info.members_dropped = resolved.total_dropped;
        info.duplicates_collapsed = catalog.duplicate_members_collapsed;
        info.degenerate_cells = table.degenerate_cells;
        summary.degenerate_cells += table.degenerate_cells;

        const auto result_path = out_dir / (info.stem + "_results.tsv");
        write_results_tsv(table, result_path);
        if (config.json_mirror) {
            write_results_json(table, out_dir / (info.stem + "_results.json"));
        }
        summary.result_files.push_back(result_path);
        infos.push_back(std::move(info));
    }

    // Metadata: every tunable that affects the numbers, plus run counts.
    summary.metadata_file = out_dir / "run_metadata.tsv";
    std::ofstream meta(summary.metadata_file, std::ios::binary);
    if (!meta) throw LoadError("cannot write metadata file: " + summary.metadata_file.string());
    meta << "version\t" << kVersion << '\n';
    meta << "command\trun\n";
    meta << "expression\t" << config.expression_path << '\n';
    meta << "labels\t" << config.labels_path << '\n';
    for (const auto& gmt : config.gmt_paths) meta << "gmt\t" << gmt << '\n';
    meta << "statistic\t" << to_string(config.statistic) << '\n';
    meta << "permutations\t" << config.permutations << '\n';
    meta << "seed\t" << config.seed << '\n';
    meta << "min_size\t" << config.min_size << '\n';
    meta << "max_size\t" << config.max_size << '\n';
    meta << "moments_mode\t" << to_string(config.moments_mode) << '\n';
    meta << "standardization\t" << to_string(config.standardization) << '\n';
    meta << "perm_moments\t" << to_string(config.moments_scope) << '\n';
    meta << "pvalue\t" << to_string(config.pvalue_convention) << '\n';
    meta << "q_cut\t" << format_real(config.q_cut) << '\n';
    meta << "ks_draws\t" << config.ks_randomization_draws << '\n';
    meta << "threads\t" << config.threads << '\n';
    meta << "variance_floor\t" << (config.variance_floor ? 1 : 0) << '\n';
    meta << "json\t" << (config.json_mirror ? 1 : 0) << '\n';
    meta << "out_dir\t" << config.out_dir << '\n';
    meta << "n_genes\t" << matrix.n_genes() << '\n';
    meta << "n_samples\t" << matrix.n_samples() << '\n';
    meta << "n_class1\t" << matrix.class_size(1) << '\n';
    meta << "n_class2\t" << matrix.class_size(2) << '\n';
    for (const auto& info : infos) {
        meta << "catalog." << info.stem << ".sets_loaded\t" << info.sets_loaded << '\n';
        meta << "catalog." << info.stem << ".sets_kept\t" << info.sets_kept << '\n';
        meta << "catalog." << info.stem << ".sets_excluded\t" << info.sets_excluded << '\n';
        meta << "catalog." << info.stem << ".members_dropped\t" << info.members_dropped << '\n';
        meta << "catalog." << info.stem << ".duplicate_members_collapsed\t"
             << info.duplicates_collapsed << '\n';
        meta << "catalog." << info.stem << ".degenerate_cells\t" << info.degenerate_cells << '\n';
    }
    return summary;
}

RunConfig run_config_from_metadata(const std::filesystem::path& metadata_path) {
    std::ifstream in(metadata_path);
    if (!in) throw LoadError("metadata file not found: " + metadata_path.string());

    RunConfig config;
    config.gmt_paths.clear();
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw LoadError("metadata: malformed line \"" + line + "\"");
        }
        const std::string key = line.substr(0, tab);
        const std::string value = line.substr(tab + 1);
        if (key == "expression") config.expression_path = value;
        else if (key == "labels") config.labels_path = value;
        else if (key == "gmt") config.gmt_paths.push_back(value);
        else if (key == "statistic") {
            const auto kind = parse_set_statistic(value);
            if (!kind) throw LoadError("metadata: unknown statistic " + value);
            config.statistic = *kind;
        } else if (key == "permutations") config.permutations = std::stoi(value);
        else if (key == "seed") config.seed = std::stoull(value);
        else if (key == "min_size") config.min_size = std::stoi(value);
        else if (key == "max_size") config.max_size = std::stoi(value);
        else if (key == "moments_mode") config.moments_mode = parse_moments_mode(value);
        else if (key == "standardization") config.standardization = parse_standardization(value);
        else if (key == "perm_moments") config.moments_scope = parse_scope(value);
        else if (key == "pvalue") config.pvalue_convention = parse_convention(value);
        else if (key == "q_cut") config.q_cut = std::stod(value);
        else if (key == "ks_draws") config.ks_randomization_draws = std::stoi(value);
        else if (key == "threads") config.threads = std::stoi(value);
        else if (key == "variance_floor") config.variance_floor = value == "1";
        else if (key == "json") config.json_mirror = value == "1";
        else if (key == "out_dir") config.out_dir = value;
        // run counts and version lines are informational, not config
    }
    return config;
}

void simulate_to_stream(const SimulateConfig& config, std::ostream& out) {
    if (config.scenario_ids.empty()) throw LoadError("simulate: no scenarios given");
    if (config.statistics.empty()) throw LoadError("simulate: no statistics given");

    AnalysisOptions base;
    base.threads = config.threads;
    base.ks_randomization_draws = config.ks_randomization_draws;

    out << "scenario";
    for (const auto kind : config.statistics) {
        out << '\t' << to_string(kind) << "_mean_p" << '\t' << to_string(kind) << "_se_p";
    }
    out << '\n';

    for (std::size_t s = 0; s < config.scenario_ids.size(); ++s) {
        const auto& id = config.scenario_ids[s];
        const auto preset = scenario_preset(id);
        if (!preset) throw LoadError("unknown scenario id: " + id);

        const std::uint64_t scenario_seed =
            RandomStream(config.seed, 0x7363656EULL).derive(s).next_u64();
        const auto results = run_scenario_study(*preset, config.statistics,
                                                config.permutations, config.reps,
                                                scenario_seed, base);
        out << id;
        for (const auto& res : results) {
            out << '\t' << format_real(res.mean_p) << '\t'
                << (res.se_p ? format_real(*res.se_p) : std::string("NA"));
        }
        out << '\n';
    }
}

void power_to_stream(const PowerConfig& config, std::ostream& out) {
    const auto cells = power_grid(config.grid, config.seed);
    out << "statistic\tb\tg\tpower\tmc_se\n";
    for (const auto& cell : cells) {
        out << to_string(cell.statistic) << '\t' << format_real(cell.b) << '\t'
            << format_real(cell.g) << '\t' << format_real(cell.power) << '\t'
            << format_real(cell.mc_se) << '\n';
    }
}

std::vector<std::string> expand_scenario_list(const std::string& arg) {
    std::vector<std::string> ids;
    std::stringstream ss(arg);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        const std::size_t dots = token.find("..");
        if (dots != std::string::npos) {
            int lo = 0, hi = 0;
            try {
                lo = std::stoi(token.substr(0, dots));
                hi = std::stoi(token.substr(dots + 2));
            } catch (const std::exception&) {
                throw LoadError("simulate: malformed scenario range \"" + token + "\"");
            }
            if (lo > hi) throw LoadError("simulate: empty scenario range \"" + token + "\"");
            for (int i = lo; i <= hi; ++i) ids.push_back("scenario" + std::to_string(i));
            continue;
        }
        bool all_digits = !token.empty();
        for (char c : token) all_digits = all_digits && c >= '0' && c <= '9';
        if (all_digits) {
            ids.push_back("scenario" + token);
        } else {
            ids.push_back(token);
        }
    }
    for (const auto& id : ids) {
        if (!scenario_preset(id)) throw LoadError("unknown scenario id: " + id);
    }
    if (ids.empty()) throw LoadError("simulate: no scenarios given");
    return ids;
}

std::vector<SetStatisticKind> parse_statistics_list(const std::string& arg) {
    std::vector<SetStatisticKind> kinds;
    std::stringstream ss(arg);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        const auto kind = parse_set_statistic(token);
        if (!kind) throw LoadError("unknown statistic: " + token);
        kinds.push_back(*kind);
    }
    if (kinds.empty()) throw LoadError("no statistics given");
    return kinds;
}

std::vector<PowerStatistic> parse_power_statistics_list(const std::string& arg) {
    std::vector<PowerStatistic> stats;
    std::stringstream ss(arg);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        const auto stat = parse_power_statistic(token);
        if (!stat) throw LoadError("unknown power statistic: " + token);
        stats.push_back(*stat);
    }
    if (stats.empty()) throw LoadError("no power statistics given");
    return stats;
}

std::vector<double> parse_grid_values(const std::string& arg) {
    std::vector<double> values;
    std::stringstream ss(arg);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        double v = 0.0;
        const char* first = token.data();
        const char* last = first + token.size();
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last) {
            throw LoadError("malformed grid value \"" + token + "\"");
        }
        values.push_back(v);
    }
    if (values.empty()) throw LoadError("empty grid");
    return values;
}

}  // namespace gsa
