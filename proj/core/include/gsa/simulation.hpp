#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gsa/catalog.hpp"
#include "gsa/expression.hpp"
#include "gsa/inference.hpp"

namespace gsa {

// ---------------------------------------------------------------------------
// Synthetic two-class data with block gene-sets
// ---------------------------------------------------------------------------

// A mean shift applied to class-2 samples of part of one gene-set.
struct EffectBlock {
    int set_index = 0;   // 0-based set
    int first_gene = 0;  // offset within the set
    int gene_count = 0;
    double shift = 0.0;  // signed; added to class-2 values
};

// Background entries are i.i.d. standard normal; gene-sets are consecutive
// nonoverlapping blocks of `set_size` genes.
struct ScenarioSpec {
    int n_genes = 1000;
    int n_per_class = 50;
    int set_size = 20;
    int n_sets = 50;
    std::vector<EffectBlock> effects;
    std::uint64_t seed = 0;
};

// Built-in presets: "example1", "example2" (25 samples per class, first 10
// genes of one / every set shifted by +2.5) and "scenario1".."scenario5"
// (50 per class; one-sided shifts of 0.2/0.3/0.4/0.6 on 20/15/10/5 genes of
// set 1, plus the mixed +-0.4 two-sided case). Returns nothing for unknown
// ids; the preset's seed is left at 0 for the caller to fill.
std::optional<ScenarioSpec> scenario_preset(const std::string& id);
std::vector<std::string> scenario_preset_names();

std::pair<ExpressionMatrix, GeneSetCatalog> generate_scenario(const ScenarioSpec& spec);

// ---------------------------------------------------------------------------
// Scenario study (mean / se of gene-set 1's p-value over replicates)
// ---------------------------------------------------------------------------

struct StudyStatResult {
    SetStatisticKind kind = SetStatisticKind::maxmean;
    double mean_p = 1.0;
    std::optional<double> se_p;  // absent for a single replicate
    std::vector<double> rep_p;
};

// For each replicate: fresh data from the scenario, the full pipeline, and
// gene-set 1's restandardized p-value; reported as mean and standard error
// across replicates for every requested statistic.
std::vector<StudyStatResult> run_scenario_study(const ScenarioSpec& scenario,
                                                std::span<const SetStatisticKind> statistics,
                                                int permutations, int reps, std::uint64_t seed,
                                                const AnalysisOptions& base_options = {});

// ---------------------------------------------------------------------------
// Power grids
// ---------------------------------------------------------------------------

// Statistics compared on m i.i.d. z-draws (no expression matrix involved).
enum class PowerStatistic {
    abs_mean,  // |mean z|
    mean_abs,  // mean |z|
    maxmean,   // max of part averages
    ks,        // one-sample KS distance to the standard normal c.d.f.
};

const char* to_string(PowerStatistic statistic);
std::optional<PowerStatistic> parse_power_statistic(const std::string& name);

enum class ShiftMode {
    all,   // every z ~ N(b, g^2)
    half,  // half the z's ~ N(+b, g^2), half ~ N(-b, g^2)
};

struct PowerGridSpec {
    int m = 25;
    std::vector<double> b_grid = {0.0, 0.2, 0.4, 0.6, 0.8};
    std::vector<double> g_grid = {1.0, 1.25, 1.5, 2.0};
    ShiftMode shift_mode = ShiftMode::all;
    double level = 0.95;
    int null_draws = 40000;  // sets each statistic's critical value
    int alt_draws = 10000;   // per grid cell
    std::vector<PowerStatistic> statistics = {PowerStatistic::abs_mean, PowerStatistic::mean_abs,
                                              PowerStatistic::maxmean, PowerStatistic::ks};
};

struct PowerCell {
    PowerStatistic statistic = PowerStatistic::maxmean;
    double b = 0.0;
    double g = 1.0;
    double power = 0.0;
    double mc_se = 0.0;
};

// Tests reject for large statistic values only; the critical value is the
// `level` percentile of the null draws. Grid cells use derived streams, so
// the table is deterministic in (spec, seed).
std::vector<PowerCell> power_grid(const PowerGridSpec& spec, std::uint64_t seed);

}  // namespace gsa
