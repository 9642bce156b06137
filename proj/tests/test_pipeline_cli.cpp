#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gsa/catalog.hpp"
#include "gsa/errors.hpp"
#include "gsa/expression.hpp"
#include "gsa/pipeline.hpp"
#include "gsa/simulation.hpp"
#include "test_util.hpp"

using namespace gsa;
using testutil::TempDir;
using testutil::read_file;

namespace {

// Materializes the example1 preset (shrunk) as run inputs.
struct Dataset {
    TempDir dir;
    std::filesystem::path expression, labels, gmt;

    explicit Dataset(int n_genes = 200, int n_sets = 10, int n_per_class = 10,
                     std::uint64_t seed = 5) {
        ScenarioSpec spec;
        spec.n_genes = n_genes;
        spec.n_sets = n_sets;
        spec.n_per_class = n_per_class;
        spec.effects = {{0, 0, 10, 2.5}};
        spec.seed = seed;
        const auto [matrix, catalog] = generate_scenario(spec);
        expression = dir.file("expr.tsv");
        labels = dir.file("labels.tsv");
        gmt = dir.file("sets.gmt");
        write_expression_tsv(matrix, expression);
        write_labels_tsv(matrix, labels);
        write_gmt(catalog, gmt);
    }
};

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string token;
    while (std::getline(ss, token, sep)) out.push_back(token);
    return out;
}

std::vector<std::vector<std::string>> read_tsv(const std::filesystem::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) rows.push_back(split(line, '\t'));
    }
    return rows;
}

const char* tool_path() { return std::getenv("GSA_TOOL"); }

int run_tool(const std::string& args) {
    const char* tool = tool_path();
    REQUIRE(tool != nullptr);
    const int status = std::system((std::string(tool) + " " + args).c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_SUITE("pipeline_cli") {

TEST_CASE("run_to_files: tables, ordering, metadata round-trip") {
    Dataset data;
    TempDir out;

    RunConfig config;
    config.expression_path = data.expression.string();
    config.labels_path = data.labels.string();
    config.gmt_paths = {data.gmt.string()};
    config.permutations = 60;
    config.seed = 99;
    config.threads = 1;
    config.out_dir = out.path().string();

    const auto summary = run_to_files(config);
    REQUIRE(summary.result_files.size() == 1);

    const auto rows = read_tsv(summary.result_files[0]);
    REQUIRE(rows.size() == 11);  // header + 10 sets
    CHECK(rows[0] == std::vector<std::string>{"name", "m", "S", "S_prime", "side", "p", "p_lo",
                                              "p_hi", "q"});
    // the shifted set tops the table
    CHECK(rows[1][0] == "set01");
    // sorted by p then name
    for (std::size_t i = 2; i < rows.size(); ++i) {
        const double prev = std::stod(rows[i - 1][5]);
        const double cur = std::stod(rows[i][5]);
        CHECK(prev <= cur);
        if (prev == cur) CHECK(rows[i - 1][0] < rows[i][0]);
    }

    const auto genes = read_tsv(summary.gene_scores_file);
    CHECK(genes.size() == 201);
    CHECK(genes[0] == std::vector<std::string>{"gene_id", "t", "z"});

    const RunConfig parsed = run_config_from_metadata(summary.metadata_file);
    CHECK(parsed == config);
}

TEST_CASE("run_to_files: two catalogs share the gene table") {
    Dataset data;
    // a second catalog: coarser blocks over the same matrix
    GeneSetCatalog coarse;
    {
        ScenarioSpec spec;
        spec.n_genes = 200;
        spec.n_sets = 5;
        spec.set_size = 40;
        spec.n_per_class = 10;
        auto [m, catalog] = generate_scenario(spec);
        coarse = catalog;
    }
    const auto gmt2 = data.dir.file("coarse.gmt");
    write_gmt(coarse, gmt2);

    TempDir out;
    RunConfig config;
    config.expression_path = data.expression.string();
    config.labels_path = data.labels.string();
    config.gmt_paths = {data.gmt.string(), gmt2.string()};
    config.permutations = 40;
    config.seed = 2;
    config.threads = 1;
    config.out_dir = out.path().string();

    const auto summary = run_to_files(config);
    REQUIRE(summary.result_files.size() == 2);
    CHECK(summary.result_files[0].filename() == "sets_results.tsv");
    CHECK(summary.result_files[1].filename() == "coarse_results.tsv");
    CHECK(read_tsv(summary.result_files[1]).size() == 6);
    CHECK(std::filesystem::exists(summary.gene_scores_file));
}

TEST_CASE("run_to_files: empty resolution and json mirror") {
    Dataset data;
    TempDir out;
    RunConfig config;
    config.expression_path = data.expression.string();
    config.labels_path = data.labels.string();
    config.gmt_paths = {data.gmt.string()};
    config.permutations = 10;
    config.min_size = 50;  // every set has 20 members
    config.out_dir = out.path().string();
    CHECK_THROWS_AS(run_to_files(config), LoadError);

    config.min_size = 2;
    config.json_mirror = true;
    config.threads = 1;
    const auto summary = run_to_files(config);
    CHECK(std::filesystem::exists(out.path() / "sets_results.json"));
    CHECK(std::filesystem::exists(out.path() / "gene_scores.json"));
    (void)summary;
}

TEST_CASE("argument helpers") {
    CHECK(expand_scenario_list("1..5") ==
          std::vector<std::string>{"scenario1", "scenario2", "scenario3", "scenario4",
                                   "scenario5"});
    CHECK(expand_scenario_list("example1,3") ==
          std::vector<std::string>{"example1", "scenario3"});
    CHECK_THROWS_AS(expand_scenario_list("scenario7"), LoadError);
    CHECK_THROWS_AS(expand_scenario_list("5..1"), LoadError);

    const auto kinds = parse_statistics_list("mean,mean_abs,maxmean,ks");
    REQUIRE(kinds.size() == 4);
    CHECK(kinds[3] == SetStatisticKind::ks_signed);
    CHECK_THROWS_AS(parse_statistics_list("median"), LoadError);

    CHECK(parse_grid_values("0,0.3,0.6") == std::vector<double>{0.0, 0.3, 0.6});
    CHECK_THROWS_AS(parse_grid_values("0,x"), LoadError);

    const auto stats = parse_power_statistics_list("abs_mean,ks");
    REQUIRE(stats.size() == 2);
    CHECK(stats[0] == PowerStatistic::abs_mean);
}

TEST_CASE("simulate_to_stream: table shape") {
    SimulateConfig config;
    config.scenario_ids = {"scenario3", "scenario4"};
    config.statistics = {SetStatisticKind::maxmean, SetStatisticKind::mean};
    config.permutations = 20;
    config.reps = 2;
    config.seed = 4;
    config.threads = 1;

    std::ostringstream out;
    simulate_to_stream(config, out);
    const auto lines = split(out.str(), '\n');
    REQUIRE(lines.size() >= 3);
    CHECK(split(lines[0], '\t') ==
          std::vector<std::string>{"scenario", "maxmean_mean_p", "maxmean_se_p", "mean_mean_p",
                                   "mean_se_p"});
    CHECK(split(lines[1], '\t')[0] == "scenario3");
    CHECK(split(lines[2], '\t')[0] == "scenario4");
}

TEST_CASE("cli: run writes outputs and determinism holds across threads") {
    Dataset data;
    TempDir out1, out2;
    const std::string common = "run --expression " + data.expression.string() + " --labels " +
                               data.labels.string() + " --gmt " + data.gmt.string() +
                               " --permutations 50 --seed 7";
    CHECK(run_tool(common + " --threads 1 --out " + out1.path().string() +
                   " 2>/dev/null") == 0);
    CHECK(run_tool(common + " --threads 4 --out " + out2.path().string() +
                   " 2>/dev/null") == 0);

    CHECK(read_file(out1.path() / "sets_results.tsv") ==
          read_file(out2.path() / "sets_results.tsv"));
    CHECK(read_file(out1.path() / "gene_scores.tsv") ==
          read_file(out2.path() / "gene_scores.tsv"));
}

TEST_CASE("cli: simulate is byte-deterministic under a fixed seed") {
    TempDir out;
    const std::string args = "simulate --scenarios 3 --stats maxmean --permutations 20 --reps 2"
                             " --seed 21 --threads 2 --out ";
    CHECK(run_tool(args + (out.path() / "a.tsv").string()) == 0);
    CHECK(run_tool(args + (out.path() / "b.tsv").string()) == 0);
    const auto a = read_file(out.path() / "a.tsv");
    CHECK(a == read_file(out.path() / "b.tsv"));
    CHECK(a.find("scenario3") != std::string::npos);
}

TEST_CASE("cli: simulate produces the full scenario-by-statistic grid") {
    TempDir out;
    const auto path = out.path() / "grid.tsv";
    CHECK(run_tool("simulate --scenarios 1..5 --stats mean,mean_abs,maxmean,ks"
                   " --permutations 10 --reps 1 --seed 6 --threads 2 --out " +
                   path.string()) == 0);
    const auto rows = read_tsv(path);
    REQUIRE(rows.size() == 6);  // header + 5 scenarios
    CHECK(rows[0].size() == 1 + 2 * 4);
    CHECK(rows[0][1] == "mean_mean_p");
    CHECK(rows[0][8] == "ks_se_p");
    for (int sc = 1; sc <= 5; ++sc) {
        CHECK(rows[static_cast<std::size_t>(sc)][0] == "scenario" + std::to_string(sc));
        CHECK(rows[static_cast<std::size_t>(sc)][2] == "NA");  // single rep: no se
    }
}

TEST_CASE("cli: GSA_SEED environment override matches the explicit flag") {
    TempDir out;
    const std::string tail = " --stats maxmean --permutations 20 --reps 2 --threads 1 --out ";
    CHECK(run_tool("simulate --scenarios 2 --seed 777" + tail +
                   (out.path() / "flag.tsv").string()) == 0);
    const char* tool = tool_path();
    REQUIRE(tool != nullptr);
    const int status = std::system(("GSA_SEED=777 " + std::string(tool) +
                                    " simulate --scenarios 2" + tail +
                                    (out.path() / "env.tsv").string()).c_str());
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(read_file(out.path() / "flag.tsv") == read_file(out.path() / "env.tsv"));
}

TEST_CASE("cli: power table and size column") {
    TempDir out;
    const auto path = out.path() / "power.tsv";
    CHECK(run_tool("power --b 0 --g 1 --null-draws 2000 --alt-draws 1000 --stats maxmean,ks"
                   " --seed 3 --out " + path.string()) == 0);
    const auto rows = read_tsv(path);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<std::string>{"statistic", "b", "g", "power", "mc_se"});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double power = std::stod(rows[i][3]);
        CHECK(power > 0.0);
        CHECK(power < 0.12);
    }
}

TEST_CASE("cli: failure exit codes") {
    Dataset data;
    // unknown scenario
    CHECK(run_tool("simulate --scenarios 9 2>/dev/null") == 1);
    // malformed grid flag
    CHECK(run_tool("power --b 0,zzz 2>/dev/null") == 1);
    // unknown flag
    CHECK(run_tool("power --nope 2>/dev/null") == 1);
    // missing input file
    CHECK(run_tool("run --expression /nonexistent.tsv --gmt " + data.gmt.string() +
                   " 2>/dev/null") == 1);
    // empty catalog after the size filter
    CHECK(run_tool("run --expression " + data.expression.string() + " --labels " +
                   data.labels.string() + " --gmt " + data.gmt.string() +
                   " --min-size 50 2>/dev/null") == 1);

    // degenerate statistic aborts with exit 2: constant matrix
    ExpressionMatrix constant;
    constant.gene_ids = {"g1", "g2"};
    constant.sample_ids = {"a", "b", "c", "d"};
    constant.labels = {1, 1, 2, 2};
    constant.values.assign(8, 3.0);
    write_expression_tsv(constant, data.dir.file("const.tsv"), /*inline_labels=*/true);
    GeneSetCatalog catalog;
    catalog.sets.push_back({"S", "", {"g1", "g2"}});
    write_gmt(catalog, data.dir.file("const.gmt"));
    CHECK(run_tool("run --expression " + data.dir.file("const.tsv").string() + " --gmt " +
                   data.dir.file("const.gmt").string() + " 2>/dev/null") == 2);
}

}  // TEST_SUITE
