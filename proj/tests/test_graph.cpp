#include <algorithm>
#include <set>

#include "doctest.h"
#include "resgntk/errors.hpp"
#include "resgntk/graph.hpp"
#include "resgntk/text.hpp"
#include "test_support.hpp"

using namespace resgntk;
using resgntk::testing::path_graph;
using resgntk::testing::rows;

namespace {

std::filesystem::path write(const std::filesystem::path& dir, const std::string& name, const std::string& body) {
    auto p = dir / name;
    write_text_file(p, body);
    return p;
}

std::vector<NodeIndex> hood(const LabeledGraph& g, NodeIndex u) {
    auto s = g.closed_neighborhood(u);
    return {s.begin(), s.end()};
}

}  // namespace

TEST_CASE("load_graph builds the smallest nontrivial graph") {
    const auto dir = testing::temp_dir("graph");
    const auto g = load_graph(write(dir, "e.txt", "0 1\n"), write(dir, "x.csv", "1,0\n0,1\n"),
                              write(dir, "y.txt", "0\n1\n"), "tiny");
    CHECK(g.node_count() == 2);
    CHECK(g.feature_dim() == 2);
    CHECK(g.closed_neighborhood(0).size() == 2);
    REQUIRE(g.labels());
    CHECK(*g.labels() == std::vector<ClassId>{0, 1});
}

TEST_CASE("empty edge file gives an isolated node") {
    const auto dir = testing::temp_dir("graph");
    const auto g = load_graph(write(dir, "e.txt", ""), write(dir, "x.csv", "3.5,-1\n"));
    CHECK(g.node_count() == 1);
    CHECK(hood(g, 0) == std::vector<NodeIndex>{0});
    CHECK(g.norm_factor(0) == 1.0);
    CHECK_FALSE(g.has_labels());
}

TEST_CASE("duplicate and reversed edges collapse") {
    const auto a = parse_edges("0 1\n1 0\n");
    const auto b = parse_edges("0 1\n");
    const LabeledGraph ga("a", 2, a, Matrix::Zero(2, 1));
    const LabeledGraph gb("b", 2, b, Matrix::Zero(2, 1));
    CHECK(ga.edges() == gb.edges());
    CHECK(ga.edges().size() == 1);
}

TEST_CASE("edge parser skips comments and blank lines") {
    const auto e = parse_edges("# header\n\n0 2\n  1\t2  \r\n");
    CHECK(e.size() == 2);
}

TEST_CASE("ingestion errors") {
    SUBCASE("malformed edge line reports its line number") {
        try {
            parse_edges("0 1\n0 x\n");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
        }
    }
    SUBCASE("explicit self-loop line is rejected") { CHECK_THROWS_AS(parse_edges("3 3\n"), ParseError); }
    SUBCASE("self-loop through the constructor") {
        CHECK_THROWS_AS(LabeledGraph("g", 2, {{1, 1}}, Matrix::Zero(2, 1)), ArgumentError);
    }
    SUBCASE("edge endpoint beyond the feature rows") {
        const auto dir = testing::temp_dir("graph");
        CHECK_THROWS_AS(load_graph(write(dir, "e.txt", "0 2\n"), write(dir, "x.csv", "1\n2\n")), IndexError);
    }
    SUBCASE("label count mismatch") {
        const auto dir = testing::temp_dir("graph");
        CHECK_THROWS_AS(load_graph(write(dir, "e.txt", "0 1\n"), write(dir, "x.csv", "1\n2\n"),
                                   write(dir, "y.txt", "0\n")),
                        ShapeError);
    }
    SUBCASE("ragged feature rows") { CHECK_THROWS_AS(parse_features("1,2\n3\n"), ParseError); }
    SUBCASE("negative label") { CHECK_THROWS_AS(parse_labels("0\n-1\n"), ParseError); }
    SUBCASE("missing file") { CHECK_THROWS_AS(read_text_file("/nonexistent/file"), IoError); }
}

TEST_CASE("closed neighborhoods") {
    const auto path = path_graph(3, Matrix::Ones(3, 1));
    CHECK(hood(path, 1) == std::vector<NodeIndex>{0, 1, 2});
    CHECK(hood(path, 0) == std::vector<NodeIndex>{0, 1});

    const LabeledGraph star("star", 5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}, Matrix::Ones(5, 1));
    CHECK(hood(star, 0) == std::vector<NodeIndex>{0, 1, 2, 3, 4});
    CHECK(hood(star, 3) == std::vector<NodeIndex>{0, 3});

    CHECK_THROWS_AS(path.closed_neighborhood(3), IndexError);
    CHECK_THROWS_AS(path.norm_factor(7), IndexError);
}

TEST_CASE("norm factors") {
    const auto path = path_graph(3, Matrix::Ones(3, 1));
    CHECK(path.norm_factor(1) == 1.0 / 3.0);
    CHECK(path.norm_factor(1) == 1.0 / 3.0);

    std::vector<Edge> edges;
    for (std::size_t v = 1; v <= 9; ++v) edges.emplace_back(0, v);
    const LabeledGraph hub("hub", 10, edges, Matrix::Ones(10, 1));
    CHECK(hub.norm_factor(0) == 0.1);
}

TEST_CASE("neighborhood invariants on random graphs") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = testing::random_graph(1 + rng() % 25, 0.2, 2, rng);
        for (std::size_t u = 0; u < g.node_count(); ++u) {
            const auto h = hood(g, u);
            CHECK(std::binary_search(h.begin(), h.end(), u));
            CHECK(std::is_sorted(h.begin(), h.end()));
            CHECK(g.norm_factor(u) * static_cast<double>(h.size()) == 1.0);
        }
    }
}

TEST_CASE("BFS partition hand trace on a 4-node path") {
    const auto g = path_graph(4, rows({{0}, {1}, {2}, {3}}), std::vector<ClassId>{0, 0, 1, 1}, "p4");
    const auto parts = partition(g, 2, 0);
    REQUIRE(parts.size() == 2);
    CHECK(parts[0].source_nodes() == std::vector<NodeIndex>{0, 1});
    CHECK(parts[1].source_nodes() == std::vector<NodeIndex>{2, 3});
    CHECK(parts[0].edges().size() == 1);
    CHECK(parts[1].edges().size() == 1);
    CHECK(count_dropped_edges(g, parts) == 1);
    CHECK(parts[1].features()(0, 0) == 2.0);
    CHECK(*parts[1].labels() == std::vector<ClassId>{1, 1});
    CHECK(parts[0].name() == "p4.part0");
}

TEST_CASE("partition edge cases") {
    std::mt19937_64 rng(3);
    const auto g = testing::random_graph(12, 0.3, 3, rng);

    SUBCASE("single part is the whole graph") {
        const auto parts = partition(g, 1, 0);
        REQUIRE(parts.size() == 1);
        CHECK(parts[0].edges() == g.edges());
        CHECK(parts[0].features() == g.features());
        CHECK(count_dropped_edges(g, parts) == 0);
    }
    SUBCASE("one part per node") {
        const auto parts = partition(g, g.node_count(), 0);
        CHECK(parts.size() == g.node_count());
        for (const auto& p : parts) {
            CHECK(p.node_count() == 1);
            CHECK(p.edges().empty());
        }
    }
    SUBCASE("too many parts") { CHECK_THROWS_AS(partition(g, 13, 0), ArgumentError); }
    SUBCASE("zero parts") { CHECK_THROWS_AS(partition(g, 0, 0), ArgumentError); }
}

TEST_CASE("partition properties on random graphs") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 25; ++trial) {
        const auto g = testing::random_graph(5 + rng() % 40, 0.15, 2, rng);
        const std::size_t m = 1 + rng() % g.node_count();
        const std::uint64_t seed = trial % 3 == 0 ? 0 : rng();
        const auto parts = partition(g, m, seed);
        REQUIRE(parts.size() == m);

        std::set<NodeIndex> covered;
        std::size_t lo = g.node_count(), hi = 0;
        std::set<Edge> original(g.edges().begin(), g.edges().end());
        std::vector<std::size_t> owner(g.node_count());
        for (std::size_t k = 0; k < parts.size(); ++k) {
            const auto& p = parts[k];
            lo = std::min(lo, p.node_count());
            hi = std::max(hi, p.node_count());
            for (NodeIndex v : p.source_nodes()) {
                CHECK(covered.insert(v).second);
                owner[v] = k;
            }
            for (auto [a, b] : p.edges()) {
                const NodeIndex u = p.source_nodes()[a], v = p.source_nodes()[b];
                CHECK(original.count({std::min(u, v), std::max(u, v)}) == 1);
            }
        }
        CHECK(covered.size() == g.node_count());
        CHECK(hi - lo <= 1);
        std::size_t dropped = 0;
        for (auto [u, v] : g.edges()) dropped += owner[u] != owner[v];
        CHECK(dropped == count_dropped_edges(g, parts));

        // Same seed, same node sets.
        const auto again = partition(g, m, seed);
        for (std::size_t k = 0; k < m; ++k) CHECK(again[k].source_nodes() == parts[k].source_nodes());
    }
}

TEST_CASE("partition assignment files") {
    const auto dir = testing::temp_dir("assign");
    const auto g = path_graph(3, rows({{1}, {2}, {3}}), std::vector<ClassId>{0, 1, 0});

    SUBCASE("all zeros gives the graph back") {
        const auto parts = load_partition_assignment(g, write(dir, "a.txt", "0\n0\n0\n"));
        REQUIRE(parts.size() == 1);
        CHECK(parts[0].edges() == g.edges());
    }
    SUBCASE("0,0,1 keeps edge (0,1) and isolates node 2") {
        const auto parts = load_partition_assignment(g, write(dir, "a.txt", "0\n0\n1\n"));
        REQUIRE(parts.size() == 2);
        CHECK(parts[0].edges() == std::vector<Edge>{{0, 1}});
        CHECK(parts[1].node_count() == 1);
        CHECK(parts[1].edges().empty());
        CHECK(parts[1].closed_neighborhood(0).size() == 1);
    }
    SUBCASE("gap in part ids") {
        CHECK_THROWS_AS(load_partition_assignment(g, write(dir, "a.txt", "0\n2\n2\n")), ArgumentError);
    }
    SUBCASE("wrong line count") {
        CHECK_THROWS_AS(load_partition_assignment(g, write(dir, "a.txt", "0\n0\n")), ShapeError);
    }
}

TEST_CASE("manifest round trip") {
    std::mt19937_64 rng(9);
    const auto dir = testing::temp_dir("manifest");
    std::vector<ManifestEntry> entries;
    std::vector<LabeledGraph> graphs;
    for (int i = 0; i < 3; ++i) {
        graphs.push_back(testing::random_graph(6 + i, 0.4, 3, rng, "g" + std::to_string(i)));
        entries.push_back(save_graph(graphs.back(), dir / graphs.back().name()));
    }
    write_manifest(entries, dir / "manifest.json");
    const auto ds = load_manifest(dir / "manifest.json");
    REQUIRE(ds.graphs.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(ds.graphs[i].name() == graphs[i].name());
        CHECK(ds.graphs[i].content_hash() == graphs[i].content_hash());
    }
    CHECK(ds.classes() == std::vector<ClassId>{0, 1, 2});
    CHECK(ds.total_nodes() == 6 + 7 + 8);
}

TEST_CASE("dataset with mismatched feature dims") {
    Dataset ds;
    ds.graphs.push_back(path_graph(2, Matrix::Ones(2, 2)));
    ds.graphs.push_back(path_graph(2, Matrix::Ones(2, 3)));
    CHECK_THROWS_AS(ds.check_feature_dims(), ShapeError);
}

TEST_CASE("shortest round-trip number formatting") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng) / (1 + rng() % 1000);
        double back = 0;
        REQUIRE(text::parse_double(text::format_double(v), back));
        CHECK(back == v);
    }
}
