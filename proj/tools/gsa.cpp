// gsa: gene-set analysis over two-class expression data.
//
// Subcommands:
//   run       score gene-set catalogs against an expression matrix
//   simulate  scenario studies (mean / se of gene-set 1's p-value)
//   power     Monte Carlo power grids for the set statistics
//
// Exit codes: 0 success, 1 load/validation failure, 2 degenerate statistic.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gsa/errors.hpp"
#include "gsa/pipeline.hpp"
#include "gsa/version.hpp"

namespace {

std::uint64_t env_seed_default() {
    if (const char* env = std::getenv("GSA_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            std::cerr << "warning: ignoring malformed GSA_SEED\n";
        }
    }
    return 12345;
}

int env_threads_default() {
    if (const char* env = std::getenv("GSA_THREADS")) {
        try {
            return std::stoi(env);
        } catch (const std::exception&) {
            std::cerr << "warning: ignoring malformed GSA_THREADS\n";
        }
    }
    return 0;
}

// Writes a table either to stdout ("-") or to a file.
template <typename Fn>
void emit(const std::string& out_path, Fn&& write) {
    if (out_path == "-") {
        write(std::cout);
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw gsa::LoadError("cannot write output file: " + out_path);
    write(out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gene-set analysis with the maxmean statistic and restandardized "
                 "permutation inference"};
    app.set_version_flag("--version", std::string(gsa::kVersion));
    app.require_subcommand(1);

    const std::uint64_t default_seed = env_seed_default();
    const int default_threads = env_threads_default();

    // --- run ---------------------------------------------------------------
    gsa::RunConfig run_config;
    run_config.seed = default_seed;
    run_config.threads = default_threads;
    std::string run_statistic = "maxmean";
    std::string run_moments = "multiplicity";
    std::string run_standardization = "restandardized";
    std::string run_scope = "per_permutation";
    std::string run_pvalue = "weak";

    auto* run = app.add_subcommand("run", "Score gene-set catalogs on expression data");
    run->add_option("--expression", run_config.expression_path,
                    "Expression TSV (gene_id header + sample columns)")->required();
    run->add_option("--labels", run_config.labels_path,
                    "Two-column labels TSV (sample_id TAB class); omit for an inline class row");
    run->add_option("--gmt", run_config.gmt_paths, "Gene-set catalog in GMT format (repeatable)")
        ->required();
    run->add_option("--statistic", run_statistic, "mean | mean_abs | maxmean | ks")
        ->capture_default_str();
    run->add_option("--permutations,-B", run_config.permutations, "Number of permutations")
        ->capture_default_str();
    run->add_option("--seed", run_config.seed, "Random seed")->capture_default_str();
    run->add_option("--min-size", run_config.min_size, "Smallest resolved set kept")
        ->capture_default_str();
    run->add_option("--max-size", run_config.max_size, "Largest resolved set kept (0 = unbounded)")
        ->capture_default_str();
    run->add_option("--moments", run_moments, "Score-moment basis: multiplicity | all_genes")
        ->capture_default_str();
    run->add_option("--standardization", run_standardization, "restandardized | raw")
        ->capture_default_str();
    run->add_option("--perm-moments", run_scope,
                    "Permutation-side moments: per_permutation | pooled")
        ->capture_default_str();
    run->add_option("--pvalue", run_pvalue, "weak | add_one")->capture_default_str();
    run->add_option("--qcut", run_config.q_cut, "BH rejection level")->capture_default_str();
    run->add_option("--ks-draws", run_config.ks_randomization_draws,
                    "Row-randomization draws for ks moments")->capture_default_str();
    run->add_option("--threads", run_config.threads, "Worker threads (0 = all cores)")
        ->capture_default_str();
    run->add_flag("--variance-floor", run_config.variance_floor,
                  "Floor zero pooled variances instead of erroring");
    run->add_flag("--json", run_config.json_mirror, "Also emit JSON mirrors of the tables");
    run->add_option("--out", run_config.out_dir, "Output directory")->capture_default_str();

    // --- simulate ------------------------------------------------------------
    gsa::SimulateConfig sim_config;
    sim_config.seed = default_seed;
    sim_config.threads = default_threads;
    std::string sim_scenarios = "1..5";
    std::string sim_stats = "mean,mean_abs,maxmean,ks";
    std::string sim_out = "-";

    auto* simulate = app.add_subcommand("simulate", "Scenario studies for gene-set 1's p-value");
    simulate->add_option("--scenarios", sim_scenarios,
                         "Comma list: 1..5, scenario3, example1, ...")->capture_default_str();
    simulate->add_option("--stats", sim_stats, "Comma list of statistics")->capture_default_str();
    simulate->add_option("--permutations,-B", sim_config.permutations, "Permutations per replicate")
        ->capture_default_str();
    simulate->add_option("--reps", sim_config.reps, "Replicates per scenario")
        ->capture_default_str();
    simulate->add_option("--seed", sim_config.seed, "Random seed")->capture_default_str();
    simulate->add_option("--threads", sim_config.threads, "Worker threads (0 = all cores)")
        ->capture_default_str();
    simulate->add_option("--ks-draws", sim_config.ks_randomization_draws,
                         "Row-randomization draws for ks moments")->capture_default_str();
    simulate->add_option("--out", sim_out, "Output TSV path (- for stdout)")
        ->capture_default_str();

    // --- power --------------------------------------------------------------
    gsa::PowerConfig power_config;
    power_config.seed = default_seed;
    std::string power_b = "0,0.2,0.4,0.6,0.8";
    std::string power_g = "1,1.25,1.5,2";
    std::string power_stats = "abs_mean,mean_abs,maxmean,ks";
    std::string power_shift = "all";
    std::string power_out = "-";

    auto* power = app.add_subcommand("power", "Monte Carlo power grids");
    power->add_option("--b", power_b, "Comma list of location shifts b")->capture_default_str();
    power->add_option("--g", power_g, "Comma list of scales g")->capture_default_str();
    power->add_option("--m", power_config.grid.m, "Genes per set")->capture_default_str();
    power->add_option("--level", power_config.grid.level, "Critical-value level")
        ->capture_default_str();
    power->add_option("--null-draws", power_config.grid.null_draws, "Null draws (critical values)")
        ->capture_default_str();
    power->add_option("--alt-draws", power_config.grid.alt_draws, "Alternative draws per cell")
        ->capture_default_str();
    power->add_option("--shift-mode", power_shift, "all | half")->capture_default_str();
    power->add_option("--stats", power_stats, "Comma list: abs_mean, mean_abs, maxmean, ks")
        ->capture_default_str();
    power->add_option("--seed", power_config.seed, "Random seed")->capture_default_str();
    power->add_option("--out", power_out, "Output TSV path (- for stdout)")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (run->parsed()) {
            const auto statistic = gsa::parse_set_statistic(run_statistic);
            if (!statistic) throw gsa::LoadError("unknown statistic: " + run_statistic);
            run_config.statistic = *statistic;
            if (run_moments == "multiplicity") {
                run_config.moments_mode = gsa::MomentsMode::multiplicity;
            } else if (run_moments == "all_genes") {
                run_config.moments_mode = gsa::MomentsMode::all_genes;
            } else {
                throw gsa::LoadError("unknown moments mode: " + run_moments);
            }
            if (run_standardization == "restandardized") {
                run_config.standardization = gsa::StandardizationMode::restandardized;
            } else if (run_standardization == "raw") {
                run_config.standardization = gsa::StandardizationMode::raw;
            } else {
                throw gsa::LoadError("unknown standardization mode: " + run_standardization);
            }
            if (run_scope == "per_permutation") {
                run_config.moments_scope = gsa::PermutationMomentsScope::per_permutation;
            } else if (run_scope == "pooled") {
                run_config.moments_scope = gsa::PermutationMomentsScope::pooled;
            } else {
                throw gsa::LoadError("unknown permutation-moments scope: " + run_scope);
            }
            if (run_pvalue == "weak") {
                run_config.pvalue_convention = gsa::PValueConvention::weak;
            } else if (run_pvalue == "add_one") {
                run_config.pvalue_convention = gsa::PValueConvention::add_one;
            } else {
                throw gsa::LoadError("unknown p-value convention: " + run_pvalue);
            }

            const auto summary = gsa::run_to_files(run_config);
            std::cerr << "wrote " << summary.result_files.size() << " result table(s) to "
                      << run_config.out_dir << "\n";
            if (summary.degenerate_cells > 0) {
                std::cerr << "warning: " << summary.degenerate_cells
                          << " degenerate permutation cell(s) excluded from p-value denominators\n";
            }
            return 0;
        }
        if (simulate->parsed()) {
            sim_config.scenario_ids = gsa::expand_scenario_list(sim_scenarios);
            sim_config.statistics = gsa::parse_statistics_list(sim_stats);
            emit(sim_out, [&](std::ostream& out) { gsa::simulate_to_stream(sim_config, out); });
            return 0;
        }
        if (power->parsed()) {
            power_config.grid.b_grid = gsa::parse_grid_values(power_b);
            power_config.grid.g_grid = gsa::parse_grid_values(power_g);
            power_config.grid.statistics = gsa::parse_power_statistics_list(power_stats);
            if (power_shift == "all") {
                power_config.grid.shift_mode = gsa::ShiftMode::all;
            } else if (power_shift == "half") {
                power_config.grid.shift_mode = gsa::ShiftMode::half;
            } else {
                throw gsa::LoadError("unknown shift mode: " + power_shift);
            }
            emit(power_out, [&](std::ostream& out) { gsa::power_to_stream(power_config, out); });
            return 0;
        }
    } catch (const gsa::DegenerateStatisticError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
