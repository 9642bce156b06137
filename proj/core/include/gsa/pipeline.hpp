#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gsa/inference.hpp"
#include "gsa/simulation.hpp"

namespace gsa {

// ---------------------------------------------------------------------------
// run: expression + catalogs -> score tables on disk
// ---------------------------------------------------------------------------

struct RunConfig {
    std::string expression_path;
    std::string labels_path;             // empty: expect an inline class row
    std::vector<std::string> gmt_paths;  // one result table per catalog
    SetStatisticKind statistic = SetStatisticKind::maxmean;
    int permutations = 1000;
    std::uint64_t seed = 12345;
    int min_size = 2;
    int max_size = 0;  // 0 = unbounded
    MomentsMode moments_mode = MomentsMode::multiplicity;
    StandardizationMode standardization = StandardizationMode::restandardized;
    PermutationMomentsScope moments_scope = PermutationMomentsScope::per_permutation;
    PValueConvention pvalue_convention = PValueConvention::weak;
    double q_cut = 0.10;
    int ks_randomization_draws = 200;
    int threads = 0;  // 0 = hardware concurrency
    bool variance_floor = false;
    bool json_mirror = false;
    std::string out_dir = ".";

    bool operator==(const RunConfig&) const = default;
};

AnalysisOptions to_analysis_options(const RunConfig& config);

struct RunSummary {
    std::vector<std::filesystem::path> result_files;
    std::filesystem::path gene_scores_file;
    std::filesystem::path metadata_file;
    int degenerate_cells = 0;
};

// Full run: loads inputs, analyzes every catalog, writes per-catalog result
// tables (sorted by p, then name), one shared gene-level table, and a
// metadata file that records every tunable. All outputs are UTF-8, LF,
// tab-delimited, reals at 12 significant digits.
RunSummary run_to_files(const RunConfig& config);

// The emitted metadata round-trips: parsing it back yields the exact
// configuration of the run that wrote it.
RunConfig run_config_from_metadata(const std::filesystem::path& metadata_path);

// ---------------------------------------------------------------------------
// simulate: scenario studies in Table-3 layout
// ---------------------------------------------------------------------------

struct SimulateConfig {
    std::vector<std::string> scenario_ids;  // preset names
    std::vector<SetStatisticKind> statistics = {
        SetStatisticKind::mean, SetStatisticKind::mean_abs, SetStatisticKind::maxmean,
        SetStatisticKind::ks_signed};
    int permutations = 200;
    int reps = 20;
    std::uint64_t seed = 12345;
    int threads = 0;
    int ks_randomization_draws = 200;
};

// Wide table: one row per scenario, a mean-p and se-p column per statistic.
void simulate_to_stream(const SimulateConfig& config, std::ostream& out);

// ---------------------------------------------------------------------------
// power: Monte Carlo power grids in long format
// ---------------------------------------------------------------------------

struct PowerConfig {
    PowerGridSpec grid;
    std::uint64_t seed = 12345;
};

// Long table: statistic, b, g, power, mc_se.
void power_to_stream(const PowerConfig& config, std::ostream& out);

// ---------------------------------------------------------------------------
// CLI argument helpers
// ---------------------------------------------------------------------------

// Expands "1..5" / "2" / "scenario3" / "example1" (comma-separated) into
// preset ids; throws LoadError on anything unknown.
std::vector<std::string> expand_scenario_list(const std::string& arg);

std::vector<SetStatisticKind> parse_statistics_list(const std::string& arg);
std::vector<PowerStatistic> parse_power_statistics_list(const std::string& arg);
std::vector<double> parse_grid_values(const std::string& arg);

}  // namespace gsa
