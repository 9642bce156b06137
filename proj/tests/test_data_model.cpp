#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "gsa/catalog.hpp"
#include "gsa/errors.hpp"
#include "gsa/expression.hpp"
#include "gsa/random.hpp"
#include "test_util.hpp"

using namespace gsa;
using testutil::TempDir;
using testutil::write_file;

namespace {

const char* kSmallExpression =
    "gene_id\ts1\ts2\ts3\ts4\ts5\ts6\n"
    "g1\t0.1\t0.2\t0.3\t1.1\t1.2\t1.3\n"
    "g2\t-0.5\t0.5\t0\t0.25\t-0.25\t1\n"
    "g3\t2\t2.5\t3\t1\t1.5\t2\n"
    "g4\t0\t0\t1\t1\t0\t1\n";

const char* kSmallLabels =
    "sample_id\tclass\n"
    "s1\tcontrol\n"
    "s2\tcontrol\n"
    "s3\tcontrol\n"
    "s4\ttreated\n"
    "s5\ttreated\n"
    "s6\ttreated\n";

ExpressionMatrix load_small(const TempDir& dir) {
    write_file(dir.file("expr.tsv"), kSmallExpression);
    write_file(dir.file("labels.tsv"), kSmallLabels);
    return load_expression_tsv(dir.file("expr.tsv"), dir.file("labels.tsv"));
}

}  // namespace

TEST_SUITE("data_model") {

TEST_CASE("expression loader: well-formed file") {
    TempDir dir;
    const auto m = load_small(dir);
    CHECK(m.n_genes() == 4);
    CHECK(m.n_samples() == 6);
    CHECK(m.gene_ids[0] == "g1");
    CHECK(m.at(0, 0) == 0.1);
    CHECK(m.at(2, 5) == 2.0);
    // first-seen class token becomes class 1
    CHECK(m.labels == std::vector<int>{1, 1, 1, 2, 2, 2});
    CHECK(m.class_size(1) == 3);
    CHECK(m.class_size(2) == 3);
}

TEST_CASE("expression loader: inline class row") {
    TempDir dir;
    write_file(dir.file("expr.tsv"),
               "gene_id\ts1\ts2\ts3\ts4\n"
               "class\tA\tA\tB\tB\n"
               "g1\t1\t2\t3\t4\n"
               "g2\t4\t3\t2\t1\n");
    const auto m = load_expression_tsv(dir.file("expr.tsv"), std::nullopt);
    CHECK(m.labels == std::vector<int>{1, 1, 2, 2});
}

TEST_CASE("expression loader: non-numeric cell is located") {
    TempDir dir;
    write_file(dir.file("expr.tsv"),
               "gene_id\ts1\ts2\ts3\ts4\n"
               "g1\t1\t2\t3\t4\n"
               "g2\t1\t2\toops\t4\n"
               "g3\t1\t2\t3\t4\n");
    write_file(dir.file("labels.tsv"), "s1\t1\ns2\t1\ns3\t2\ns4\t2\n");
    try {
        load_expression_tsv(dir.file("expr.tsv"), dir.file("labels.tsv"));
        FAIL("expected LoadError");
    } catch (const LoadError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("gene row 2") != std::string::npos);
        CHECK(msg.find("sample column 3") != std::string::npos);
    }
}

TEST_CASE("expression loader: ragged row rejected") {
    TempDir dir;
    write_file(dir.file("expr.tsv"),
               "gene_id\ts1\ts2\ts3\ts4\n"
               "g1\t1\t2\t3\t4\n"
               "g2\t1\t2\t3\n");
    write_file(dir.file("labels.tsv"), "s1\t1\ns2\t1\ns3\t2\ns4\t2\n");
    CHECK_THROWS_AS(load_expression_tsv(dir.file("expr.tsv"), dir.file("labels.tsv")), LoadError);
}

TEST_CASE("expression loader: labels file missing a sample names it") {
    TempDir dir;
    write_file(dir.file("expr.tsv"), kSmallExpression);
    write_file(dir.file("labels.tsv"),
               "s1\t1\ns2\t1\ns3\t1\ns4\t2\ns5\t2\n");  // s6 missing
    try {
        load_expression_tsv(dir.file("expr.tsv"), dir.file("labels.tsv"));
        FAIL("expected LoadError");
    } catch (const LoadError& e) {
        CHECK(std::string(e.what()).find("s6") != std::string::npos);
    }
}

TEST_CASE("expression loader: unknown sample and lopsided classes rejected") {
    TempDir dir;
    write_file(dir.file("expr.tsv"), kSmallExpression);
    write_file(dir.file("bad.tsv"), "s1\t1\nsX\t1\ns3\t1\ns4\t2\ns5\t2\ns6\t2\n");
    CHECK_THROWS_AS(load_expression_tsv(dir.file("expr.tsv"), dir.file("bad.tsv")), LoadError);

    write_file(dir.file("lop.tsv"), "s1\t1\ns2\t2\ns3\t2\ns4\t2\ns5\t2\ns6\t2\n");
    CHECK_THROWS_AS(load_expression_tsv(dir.file("expr.tsv"), dir.file("lop.tsv")), LoadError);
}

TEST_CASE("expression writer round-trips exactly") {
    TempDir dir;
    ExpressionMatrix m;
    m.gene_ids = {"g1", "g2"};
    m.sample_ids = {"a", "b", "c", "d"};
    m.labels = {1, 2, 1, 2};
    RandomStream stream(3, 1);
    for (int i = 0; i < 8; ++i) m.values.push_back(stream.next_normal() * 1e3);

    write_expression_tsv(m, dir.file("m.tsv"));
    write_labels_tsv(m, dir.file("l.tsv"));
    const auto back = load_expression_tsv(dir.file("m.tsv"), dir.file("l.tsv"));
    CHECK(back.values == m.values);
    CHECK(back.gene_ids == m.gene_ids);
    CHECK(back.labels == m.labels);

    write_expression_tsv(m, dir.file("inline.tsv"), /*inline_labels=*/true);
    const auto back2 = load_expression_tsv(dir.file("inline.tsv"), std::nullopt);
    CHECK(back2.values == m.values);
    CHECK(back2.labels == m.labels);
}

TEST_CASE("gmt loader: format, duplicates, validation") {
    TempDir dir;
    write_file(dir.file("sets.gmt"),
               "S1\tdesc\tg1\tg2\n"
               "\n"
               "S2\tother\tg2\tg3\tg2\tg4\n");
    const auto catalog = load_gmt(dir.file("sets.gmt"));
    CHECK(catalog.sets.size() == 2);
    CHECK(catalog.sets[0].name == "S1");
    CHECK(catalog.sets[0].members == std::vector<std::string>{"g1", "g2"});
    CHECK(catalog.sets[1].members == std::vector<std::string>{"g2", "g3", "g4"});
    CHECK(catalog.duplicate_members_collapsed == 1);

    write_file(dir.file("short.gmt"), "S1\tdesc\n");
    try {
        load_gmt(dir.file("short.gmt"));
        FAIL("expected LoadError");
    } catch (const LoadError& e) {
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }

    write_file(dir.file("dup.gmt"), "S1\tdesc\tg1\nS1\tdesc\tg2\n");
    CHECK_THROWS_AS(load_gmt(dir.file("dup.gmt")), LoadError);
}

TEST_CASE("gmt writer round-trips byte-exactly") {
    TempDir dir;
    GeneSetCatalog catalog;
    catalog.sets.push_back({"alpha", "first block", {"g1", "g2", "g9"}});
    catalog.sets.push_back({"beta", "second", {"g3"}});
    write_gmt(catalog, dir.file("out.gmt"));
    CHECK(testutil::read_file(dir.file("out.gmt")) ==
          "alpha\tfirst block\tg1\tg2\tg9\nbeta\tsecond\tg3\n");
    const auto back = load_gmt(dir.file("out.gmt"));
    CHECK(back.sets.size() == 2);
    CHECK(back.sets[1].members == std::vector<std::string>{"g3"});
}

TEST_CASE("resolve_catalog: size filter and dropped members") {
    TempDir dir;
    const auto m = load_small(dir);

    GeneSetCatalog catalog;
    catalog.sets.push_back({"keep", "", {"g1", "g2", "gX"}});  // gX absent
    catalog.sets.push_back({"small", "", {"g3"}});             // below min_size 2
    catalog.sets.push_back({"full", "", {"g1", "g2", "g3", "g4"}});

    const auto resolved = resolve_catalog(catalog, m, 2);
    CHECK(resolved.sets.size() == 2);
    CHECK(resolved.sets[0].name == "keep");
    CHECK(resolved.sets[0].size() == 2);
    CHECK(resolved.sets[0].dropped == 1);
    CHECK(resolved.sets[1].name == "full");
    CHECK(resolved.excluded.size() == 1);
    CHECK(resolved.excluded[0].name == "small");
    CHECK(resolved.total_dropped == 1);

    CHECK_THROWS_AS(resolve_catalog(catalog, m, 10), LoadError);
}

TEST_CASE("resolve_catalog: membership accounting and idempotence") {
    TempDir dir;
    const auto m = load_small(dir);

    RandomStream stream(11, 0);
    GeneSetCatalog catalog;
    const std::vector<std::string> universe{"g1", "g2", "g3", "g4", "gA", "gB"};
    for (int s = 0; s < 12; ++s) {
        GeneSet set;
        set.name = "S" + std::to_string(s);
        const int size = 1 + static_cast<int>(stream.uniform_below(5));
        const auto idx =
            stream.sample_without_replacement(static_cast<int>(universe.size()), size);
        for (int i : idx) set.members.push_back(universe[static_cast<std::size_t>(i)]);
        catalog.sets.push_back(std::move(set));
    }

    const auto resolved = resolve_catalog(catalog, m, 1);
    int listed = 0;
    for (const auto& rs : resolved.sets) {
        const auto it = std::find_if(catalog.sets.begin(), catalog.sets.end(),
                                     [&](const auto& s) { return s.name == rs.name; });
        REQUIRE(it != catalog.sets.end());
        CHECK(rs.size() + rs.dropped == static_cast<int>(it->members.size()));
        listed += static_cast<int>(it->members.size());
    }
    int accounted = 0;
    for (const auto& rs : resolved.sets) accounted += rs.size() + rs.dropped;
    CHECK(accounted == listed);

    // resolving the survivors again yields identical indices
    GeneSetCatalog survivors;
    for (const auto& rs : resolved.sets) {
        GeneSet set;
        set.name = rs.name;
        for (int idx : rs.row_indices) {
            set.members.push_back(m.gene_ids[static_cast<std::size_t>(idx)]);
        }
        survivors.sets.push_back(std::move(set));
    }
    const auto again = resolve_catalog(survivors, m, 1);
    REQUIRE(again.sets.size() == resolved.sets.size());
    for (std::size_t k = 0; k < again.sets.size(); ++k) {
        CHECK(again.sets[k].row_indices == resolved.sets[k].row_indices);
        CHECK(again.sets[k].dropped == 0);
    }
}

TEST_CASE("resolve_catalog: paper-shaped size filter") {
    // 522 sets over 2000 genes with a spread of sizes; min_size 10 keeps
    // exactly the sets with >= 10 resolved members.
    ExpressionMatrix m;
    const int n_genes = 2000;
    for (int i = 0; i < n_genes; ++i) m.gene_ids.push_back("g" + std::to_string(i));
    m.sample_ids = {"a", "b", "c", "d"};
    m.labels = {1, 1, 2, 2};
    m.values.assign(static_cast<std::size_t>(n_genes) * 4, 0.0);

    RandomStream stream(17, 0);
    GeneSetCatalog catalog;
    int expected_kept = 0;
    for (int s = 0; s < 522; ++s) {
        GeneSet set;
        set.name = "S" + std::to_string(s);
        const int size = 1 + static_cast<int>(stream.uniform_below(60));
        const auto idx = stream.sample_without_replacement(n_genes, size);
        for (int i : idx) set.members.push_back(m.gene_ids[static_cast<std::size_t>(i)]);
        if (size >= 10) ++expected_kept;
        catalog.sets.push_back(std::move(set));
    }
    const auto resolved = resolve_catalog(catalog, m, 10);
    CHECK(static_cast<int>(resolved.sets.size()) == expected_kept);
    for (const auto& rs : resolved.sets) CHECK(rs.size() >= 10);
}

}  // TEST_SUITE
