#include "gsa/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gsa/errors.hpp"
#include "gsa/numerics.hpp"
#include "gsa/set_statistics.hpp"

namespace gsa {

namespace {

constexpr std::uint64_t kDataStream = 0x64617461ULL;      // matrix values
constexpr std::uint64_t kRepDataTag = 0x7265706461ULL;    // per-replicate data seed
constexpr std::uint64_t kRepPlanTag = 0x726570706CULL;    // per-replicate plan seed
constexpr std::uint64_t kNullStream = 0x6E756C6CULL;      // power null draws
constexpr std::uint64_t kAltStreamBase = 0x616C740000ULL; // power alternative cells

std::string zero_pad(int value, int width) {
    std::string s = std::to_string(value);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

int digits(int n) {
    int d = 1;
    while (n >= 10) {
        n /= 10;
        ++d;
    }
    return d;
}

}  // namespace

std::optional<ScenarioSpec> scenario_preset(const std::string& id) {
    ScenarioSpec spec;
    if (id == "example1" || id == "example2") {
        spec.n_per_class = 25;
        const int top = id == "example1" ? 1 : spec.n_sets;
        for (int k = 0; k < top; ++k) {
            spec.effects.push_back({k, 0, 10, 2.5});
        }
        return spec;
    }
    if (id == "scenario1") {
        spec.effects = {{0, 0, 20, 0.2}};
        return spec;
    }
    if (id == "scenario2") {
        spec.effects = {{0, 0, 15, 0.3}};
        return spec;
    }
    if (id == "scenario3") {
        spec.effects = {{0, 0, 10, 0.4}};
        return spec;
    }
    if (id == "scenario4") {
        spec.effects = {{0, 0, 5, 0.6}};
        return spec;
    }
    if (id == "scenario5") {
        spec.effects = {{0, 0, 10, 0.4}, {0, 10, 10, -0.4}};
        return spec;
    }
    return std::nullopt;
}

std::vector<std::string> scenario_preset_names() {
    return {"example1", "example2", "scenario1", "scenario2", "scenario3", "scenario4",
            "scenario5"};
}

std::pair<ExpressionMatrix, GeneSetCatalog> generate_scenario(const ScenarioSpec& spec) {
    if (spec.n_genes < 1 || spec.n_per_class < 2 || spec.set_size < 1 || spec.n_sets < 1) {
        throw std::invalid_argument("generate_scenario: nonpositive dimensions");
    }
    if (spec.n_sets * spec.set_size > spec.n_genes) {
        throw std::invalid_argument("generate_scenario: blocks exceed the gene count");
    }
    for (const auto& e : spec.effects) {
        if (e.set_index < 0 || e.set_index >= spec.n_sets || e.first_gene < 0 ||
            e.gene_count < 1 || e.first_gene + e.gene_count > spec.set_size) {
            throw std::invalid_argument("generate_scenario: effect block outside its set");
        }
    }

    const int n = 2 * spec.n_per_class;
    ExpressionMatrix matrix;
    matrix.gene_ids.reserve(static_cast<std::size_t>(spec.n_genes));
    const int gene_width = digits(spec.n_genes);
    for (int i = 0; i < spec.n_genes; ++i) {
        matrix.gene_ids.push_back("g" + zero_pad(i + 1, gene_width));
    }
    const int sample_width = digits(n);
    for (int j = 0; j < n; ++j) {
        matrix.sample_ids.push_back("s" + zero_pad(j + 1, sample_width));
        matrix.labels.push_back(j < spec.n_per_class ? 1 : 2);
    }

    RandomStream stream(spec.seed, kDataStream);
    matrix.values.resize(static_cast<std::size_t>(spec.n_genes) * n);
    for (double& v : matrix.values) v = stream.next_normal();

    for (const auto& e : spec.effects) {
        const int gene0 = e.set_index * spec.set_size + e.first_gene;
        for (int g = gene0; g < gene0 + e.gene_count; ++g) {
            double* row = matrix.values.data() + static_cast<std::size_t>(g) * n;
            for (int j = spec.n_per_class; j < n; ++j) row[j] += e.shift;
        }
    }

    GeneSetCatalog catalog;
    const int set_width = digits(spec.n_sets);
    for (int k = 0; k < spec.n_sets; ++k) {
        GeneSet set;
        set.name = "set" + zero_pad(k + 1, set_width);
        set.description = "block " + std::to_string(k + 1);
        for (int g = k * spec.set_size; g < (k + 1) * spec.set_size; ++g) {
            set.members.push_back(matrix.gene_ids[static_cast<std::size_t>(g)]);
        }
        catalog.sets.push_back(std::move(set));
    }
    return {std::move(matrix), std::move(catalog)};
}

std::vector<StudyStatResult> run_scenario_study(const ScenarioSpec& scenario,
                                                std::span<const SetStatisticKind> statistics,
                                                int permutations, int reps, std::uint64_t seed,
                                                const AnalysisOptions& base_options) {
    if (reps < 1) {
        throw std::invalid_argument("run_scenario_study: need at least one replicate");
    }
    if (statistics.empty()) {
        throw std::invalid_argument("run_scenario_study: no statistics requested");
    }

    std::vector<StudyStatResult> results(statistics.size());
    for (std::size_t t = 0; t < statistics.size(); ++t) {
        results[t].kind = statistics[t];
        results[t].rep_p.reserve(static_cast<std::size_t>(reps));
    }

    for (int r = 0; r < reps; ++r) {
        try {
            const RandomStream rep_stream(seed, static_cast<std::uint64_t>(r));
            ScenarioSpec rep_spec = scenario;
            rep_spec.seed = rep_stream.derive(kRepDataTag).next_u64();

            auto [matrix, catalog] = generate_scenario(rep_spec);
            const auto resolved = resolve_catalog(catalog, matrix, 1);

            AnalysisOptions options = base_options;
            options.permutations = permutations;
            options.seed = rep_stream.derive(kRepPlanTag).next_u64();

            const auto tables = analyze_multi(matrix, resolved, statistics, options);
            const std::string& first_set = catalog.sets.front().name;
            for (std::size_t t = 0; t < tables.size(); ++t) {
                const auto it = std::find_if(tables[t].rows.begin(), tables[t].rows.end(),
                                             [&](const auto& row) { return row.name == first_set; });
                if (it == tables[t].rows.end()) {
                    throw std::runtime_error("gene-set 1 missing from results");
                }
                results[t].rep_p.push_back(it->p);
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("scenario study replicate " + std::to_string(r + 1) + ": " +
                                     e.what());
        }
    }

    for (auto& res : results) {
        double sum = 0.0;
        for (double p : res.rep_p) sum += p;
        res.mean_p = sum / static_cast<double>(reps);
        if (reps > 1) {
            double ss = 0.0;
            for (double p : res.rep_p) ss += (p - res.mean_p) * (p - res.mean_p);
            res.se_p = std::sqrt(ss / (static_cast<double>(reps) - 1.0) /
                                 static_cast<double>(reps));
        }
    }
    return results;
}

// ---------------------------------------------------------------------------
// Power grids
// ---------------------------------------------------------------------------

const char* to_string(PowerStatistic statistic) {
    switch (statistic) {
        case PowerStatistic::abs_mean: return "abs_mean";
        case PowerStatistic::mean_abs: return "mean_abs";
        case PowerStatistic::maxmean: return "maxmean";
        case PowerStatistic::ks: return "ks";
    }
    return "?";
}

std::optional<PowerStatistic> parse_power_statistic(const std::string& name) {
    if (name == "abs_mean") return PowerStatistic::abs_mean;
    if (name == "mean_abs") return PowerStatistic::mean_abs;
    if (name == "maxmean") return PowerStatistic::maxmean;
    if (name == "ks") return PowerStatistic::ks;
    return std::nullopt;
}

namespace {

// One-sample KS distance between the empirical c.d.f. of z and N(0, 1).
double ks_to_normal(std::vector<double>& z) {
    std::sort(z.begin(), z.end());
    const double n = static_cast<double>(z.size());
    double best = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double phi = normal_cdf(z[i]);
        const double lo = phi - static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n - phi;
        best = std::max({best, lo, hi});
    }
    return best;
}

double evaluate_statistic(PowerStatistic statistic, std::span<const double> z,
                          std::vector<double>& scratch) {
    switch (statistic) {
        case PowerStatistic::abs_mean: {
            double sum = 0.0;
            for (double v : z) sum += v;
            return std::fabs(sum / static_cast<double>(z.size()));
        }
        case PowerStatistic::mean_abs:
            return set_mean(z, ScoreFunctionKind::absolute);
        case PowerStatistic::maxmean:
            return set_maxmean(z).value;
        case PowerStatistic::ks:
            scratch.assign(z.begin(), z.end());
            return ks_to_normal(scratch);
    }
    return 0.0;
}

}  // namespace

std::vector<PowerCell> power_grid(const PowerGridSpec& spec, std::uint64_t seed) {
    if (spec.b_grid.empty() || spec.g_grid.empty() || spec.statistics.empty()) {
        throw std::invalid_argument("power_grid: empty grid");
    }
    if (!(spec.level > 0.0 && spec.level < 1.0)) {
        throw std::invalid_argument("power_grid: level must lie in (0, 1)");
    }
    if (spec.m < 1) {
        throw std::invalid_argument("power_grid: set size must be >= 1");
    }
    if (spec.null_draws < 1000 || spec.alt_draws < 1000) {
        throw std::invalid_argument("power_grid: need at least 1000 null and alternative draws");
    }
    for (double b : spec.b_grid) {
        if (b < 0.0) throw std::invalid_argument("power_grid: shifts must be >= 0");
    }
    for (double g : spec.g_grid) {
        if (g < 1.0) throw std::invalid_argument("power_grid: scales must be >= 1");
    }

    const std::size_t n_stats = spec.statistics.size();
    std::vector<double> z(static_cast<std::size_t>(spec.m));
    std::vector<double> scratch;

    // Null reference: each statistic's critical value at the given level.
    std::vector<std::vector<double>> null_stats(n_stats);
    for (auto& v : null_stats) v.reserve(static_cast<std::size_t>(spec.null_draws));
    {
        RandomStream stream(seed, kNullStream);
        for (int d = 0; d < spec.null_draws; ++d) {
            for (auto& v : z) v = stream.next_normal();
            for (std::size_t t = 0; t < n_stats; ++t) {
                null_stats[t].push_back(evaluate_statistic(spec.statistics[t], z, scratch));
            }
        }
    }
    std::vector<double> critical(n_stats);
    for (std::size_t t = 0; t < n_stats; ++t) {
        critical[t] = percentile(null_stats[t], spec.level);
    }

    const int half_up = (spec.m + 1) / 2;
    std::vector<PowerCell> cells;
    cells.reserve(n_stats * spec.b_grid.size() * spec.g_grid.size());
    std::vector<std::vector<int>> exceed(n_stats);

    for (std::size_t bi = 0; bi < spec.b_grid.size(); ++bi) {
        for (std::size_t gi = 0; gi < spec.g_grid.size(); ++gi) {
            const double b = spec.b_grid[bi];
            const double g = spec.g_grid[gi];
            const std::uint64_t cell_id = kAltStreamBase +
                                          static_cast<std::uint64_t>(bi) * spec.g_grid.size() + gi;
            RandomStream stream(seed, cell_id);

            std::vector<int> count(n_stats, 0);
            for (int d = 0; d < spec.alt_draws; ++d) {
                for (int i = 0; i < spec.m; ++i) {
                    const double shift =
                        spec.shift_mode == ShiftMode::all ? b : (i < half_up ? b : -b);
                    z[static_cast<std::size_t>(i)] = shift + g * stream.next_normal();
                }
                for (std::size_t t = 0; t < n_stats; ++t) {
                    if (evaluate_statistic(spec.statistics[t], z, scratch) > critical[t]) {
                        ++count[t];
                    }
                }
            }
            for (std::size_t t = 0; t < n_stats; ++t) {
                PowerCell cell;
                cell.statistic = spec.statistics[t];
                cell.b = b;
                cell.g = g;
                cell.power = static_cast<double>(count[t]) / spec.alt_draws;
                cell.mc_se = std::sqrt(cell.power * (1.0 - cell.power) / spec.alt_draws);
                cells.push_back(cell);
            }
        }
    }

    // statistic-major ordering for the emitted table
    std::stable_sort(cells.begin(), cells.end(), [](const PowerCell& a, const PowerCell& b) {
        return static_cast<int>(a.statistic) < static_cast<int>(b.statistic);
    });
    return cells;
}

}  // namespace gsa
