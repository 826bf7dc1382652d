#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "gw/graph.hpp"
#include "testutil.hpp"

using namespace gw;
using gwtest::TempDir;

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

// a -> b -> c, c illicit, one feature column (the time step).
void write_three_node_dataset(const TempDir& dir) {
    write_file(dir.file("features.csv"),
               "1,1\n"
               "2,1\n"
               "3,2\n");
    write_file(dir.file("classes.csv"),
               "txId,class\n"
               "1,2\n"
               "2,unknown\n"
               "3,1\n");
    write_file(dir.file("edges.csv"),
               "txId1,txId2\n"
               "1,2\n"
               "2,3\n");
}

} // namespace

TEST_CASE("label parsing accepts exactly the three class tokens") {
    CHECK(parse_label("1") == NodeLabel::Illicit);
    CHECK(parse_label("2") == NodeLabel::Licit);
    CHECK(parse_label("unknown") == NodeLabel::Unknown);
    CHECK_FALSE(parse_label("3").has_value());
    CHECK_FALSE(parse_label("illicit").has_value());
    CHECK_FALSE(parse_label("").has_value());
}

TEST_CASE("load_graph on a 3-node chain") {
    TempDir dir("load3");
    write_three_node_dataset(dir);
    const TransactionGraph g =
        load_graph(dir.file("features.csv"), dir.file("classes.csv"), dir.file("edges.csv"));

    CHECK(g.node_count() == 3);
    CHECK(g.edge_count() == 2);
    CHECK(g.feature_dim() == 1);
    CHECK(g.label(g.require_index(3)) == NodeLabel::Illicit);
    CHECK(g.label(g.require_index(1)) == NodeLabel::Licit);
    CHECK(g.label(g.require_index(2)) == NodeLabel::Unknown);
    CHECK(g.time_step(g.require_index(3)) == 2);
    CHECK(g.max_time_step() == 2);
}

TEST_CASE("load_graph errors") {
    TempDir dir("loaderr");
    write_three_node_dataset(dir);

    SUBCASE("missing file") {
        CHECK_THROWS(load_graph(dir.file("nope.csv"), dir.file("classes.csv"),
                                dir.file("edges.csv")));
    }
    SUBCASE("edge referencing unknown id") {
        write_file(dir.file("edges.csv"), "txId1,txId2\n1,2\n2,99\n");
        CHECK_THROWS_WITH_AS(load_graph(dir.file("features.csv"), dir.file("classes.csv"),
                                        dir.file("edges.csv")),
                             doctest::Contains("unknown node id"), std::runtime_error);
    }
    SUBCASE("duplicate node id") {
        write_file(dir.file("features.csv"), "1,1\n2,1\n2,1\n3,2\n");
        CHECK_THROWS_WITH_AS(load_graph(dir.file("features.csv"), dir.file("classes.csv"),
                                        dir.file("edges.csv")),
                             doctest::Contains("duplicate node id"), std::runtime_error);
    }
    SUBCASE("non-numeric feature") {
        write_file(dir.file("features.csv"), "1,1\n2,abc\n3,2\n");
        CHECK_THROWS(load_graph(dir.file("features.csv"), dir.file("classes.csv"),
                                dir.file("edges.csv")));
    }
    SUBCASE("wrong column count") {
        write_file(dir.file("features.csv"), "1,1\n2,1,5\n3,2\n");
        CHECK_THROWS(load_graph(dir.file("features.csv"), dir.file("classes.csv"),
                                dir.file("edges.csv")));
    }
    SUBCASE("bad class token") {
        write_file(dir.file("classes.csv"), "txId,class\n1,3\n");
        CHECK_THROWS(load_graph(dir.file("features.csv"), dir.file("classes.csv"),
                                dir.file("edges.csv")));
    }
    SUBCASE("cyclic graph is a hard load error") {
        write_file(dir.file("edges.csv"), "txId1,txId2\n1,2\n2,1\n");
        CHECK_THROWS_WITH_AS(load_graph(dir.file("features.csv"), dir.file("classes.csv"),
                                        dir.file("edges.csv")),
                             doctest::Contains("cyclic"), std::runtime_error);
    }
    SUBCASE("temporal violation is a hard load error") {
        write_file(dir.file("features.csv"), "1,2\n2,1\n3,2\n");  // node 1 newer than 2
        CHECK_THROWS_WITH_AS(load_graph(dir.file("features.csv"), dir.file("classes.csv"),
                                        dir.file("edges.csv")),
                             doctest::Contains("temporal"), std::runtime_error);
    }
}

TEST_CASE("labels default to Unknown with a warning count") {
    TempDir dir("default");
    write_three_node_dataset(dir);
    write_file(dir.file("classes.csv"), "txId,class\n3,1\n");  // 1 and 2 missing
    const TransactionGraph g =
        load_graph(dir.file("features.csv"), dir.file("classes.csv"), dir.file("edges.csv"));
    CHECK(g.label(g.require_index(1)) == NodeLabel::Unknown);
    CHECK(g.label(g.require_index(2)) == NodeLabel::Unknown);
    CHECK(g.labels_defaulted() == 2);
    CHECK(validate(g).labels_defaulted == 2);
}

TEST_CASE("validate reports violations as data") {
    SUBCASE("clean chain") {
        const auto g = gwtest::make_graph(
            {{1, 1, NodeLabel::Licit}, {2, 1, NodeLabel::Licit}, {3, 2, NodeLabel::Illicit}},
            {{1, 2}, {2, 3}});
        const ValidationReport r = validate(g);
        CHECK(r.is_dag);
        CHECK(r.ok());
        CHECK(r.node_count == 3);
        CHECK(r.edge_count == 2);
    }
    SUBCASE("cycle") {
        const auto g = gwtest::make_graph({{1, 1, NodeLabel::Licit}, {2, 1, NodeLabel::Licit}},
                                          {{1, 2}, {2, 1}});
        const ValidationReport r = validate(g);
        CHECK_FALSE(r.is_dag);
        CHECK_FALSE(r.ok());
    }
    SUBCASE("temporal violation") {
        const auto g = gwtest::make_graph({{1, 2, NodeLabel::Licit}, {2, 1, NodeLabel::Licit}},
                                          {{1, 2}});
        const ValidationReport r = validate(g);
        CHECK(r.is_dag);
        CHECK(r.temporal_violations.size() == 1);
        CHECK(r.temporal_violations[0].src == 1);
        CHECK(r.temporal_violations[0].dst == 2);
    }
    SUBCASE("equal time steps on an edge are fine") {
        const auto g = gwtest::make_graph({{1, 1, NodeLabel::Licit}, {2, 1, NodeLabel::Licit}},
                                          {{1, 2}});
        CHECK(validate(g).ok());
    }
    SUBCASE("duplicate edge") {
        const auto g = gwtest::make_graph({{1, 1, NodeLabel::Licit}, {2, 1, NodeLabel::Licit}},
                                          {{1, 2}, {1, 2}});
        const ValidationReport r = validate(g);
        CHECK(r.duplicate_edges.size() == 1);
        CHECK_FALSE(r.ok());
    }
    SUBCASE("self loop") {
        const auto g =
            gwtest::make_graph({{1, 1, NodeLabel::Licit}, {2, 1, NodeLabel::Licit}}, {{1, 1}});
        const ValidationReport r = validate(g);
        CHECK(r.self_loops == std::vector<NodeId>{1});
        CHECK_FALSE(r.is_dag);  // a self loop is also a cycle
    }
}

TEST_CASE("predecessors are the exact transpose in ascending order") {
    const auto g = gwtest::make_graph({{1, 1, NodeLabel::Licit},
                                       {2, 1, NodeLabel::Licit},
                                       {3, 2, NodeLabel::Licit}},
                                      {{1, 3}, {2, 3}});
    CHECK(g.predecessor_ids(3) == std::vector<NodeId>{1, 2});
    CHECK(g.predecessor_ids(1).empty());
    CHECK_THROWS_WITH_AS(g.predecessor_ids(99), doctest::Contains("unknown node id"),
                         std::runtime_error);
}

TEST_CASE("predecessors transpose property on random graphs") {
    SplitMix64 rng(2024);
    for (int trial = 0; trial < 26; ++trial) {
        // mostly small graphs plus one near the 1000-node bound
        const auto parts = trial == 25 ? gwtest::random_dag(rng, 1000, 0.01, 0.1)
                                       : gwtest::random_dag(rng, 40, 0.2, 0.2);
        const auto g = gwtest::to_graph(parts);

        std::size_t pred_total = 0;
        for (std::size_t v = 0; v < g.node_count(); ++v) {
            for (NodeIndex u : g.predecessors(static_cast<NodeIndex>(v))) {
                const auto succs = g.successors(u);
                CHECK(std::find(succs.begin(), succs.end(), static_cast<NodeIndex>(v)) !=
                      succs.end());
            }
            pred_total += g.predecessors(static_cast<NodeIndex>(v)).size();
        }
        CHECK(pred_total == parts.edges.size());

        // every listed edge appears in the predecessor lists
        for (const auto& [src, dst] : parts.edges) {
            const auto preds = g.predecessors(g.require_index(dst));
            CHECK(std::find(preds.begin(), preds.end(), g.require_index(src)) != preds.end());
        }
    }
}

TEST_CASE("valid graphs admit a topological order") {
    SplitMix64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = gwtest::to_graph(gwtest::random_dag(rng, 50, 0.15, 0.1));
        REQUIRE(g.is_dag());
        const auto order = g.topological_order();
        std::vector<std::size_t> position(g.node_count());
        for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = i;
        for (std::size_t v = 0; v < g.node_count(); ++v)
            for (NodeIndex u : g.predecessors(static_cast<NodeIndex>(v)))
                CHECK(position[u] < position[v]);
    }
}

TEST_CASE("temporal_split") {
    const auto g = gwtest::make_graph({{1, 1, NodeLabel::Licit},
                                       {2, 2, NodeLabel::Illicit},
                                       {3, 3, NodeLabel::Licit},
                                       {4, 4, NodeLabel::Illicit},
                                       {5, 2, NodeLabel::Unknown}},
                                      {});

    SUBCASE("cutoff 2 splits 1,2 / 3,4 and drops unknown") {
        const TemporalSplit s = temporal_split(g, 2);
        CHECK(s.train.size() == 2);
        CHECK(s.test.size() == 2);
        for (NodeIndex i : s.train) CHECK(g.time_step(i) <= 2);
        for (NodeIndex i : s.test) CHECK(g.time_step(i) > 2);
    }
    SUBCASE("empty test side is allowed") {
        const auto g2 = gwtest::make_graph(
            {{1, 1, NodeLabel::Licit}, {2, 1, NodeLabel::Illicit}, {3, 3, NodeLabel::Unknown}},
            {});
        const TemporalSplit s = temporal_split(g2, 2);
        CHECK(s.train.size() == 2);
        CHECK(s.test.empty());
    }
    SUBCASE("cutoff out of range") {
        CHECK_THROWS_AS(temporal_split(g, 0), std::out_of_range);
        CHECK_THROWS_AS(temporal_split(g, 4), std::out_of_range);
        CHECK_THROWS_AS(temporal_split(g, 7), std::out_of_range);
    }
}

TEST_CASE("split partition property on random graphs") {
    SplitMix64 rng(5150);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = gwtest::to_graph(gwtest::random_dag(rng, 60, 0.1, 0.3));
        if (g.max_time_step() < 2) continue;
        const int cutoff =
            1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(g.max_time_step() - 1)));
        const TemporalSplit s = temporal_split(g, cutoff);

        std::vector<NodeIndex> both = s.train;
        both.insert(both.end(), s.test.begin(), s.test.end());
        std::sort(both.begin(), both.end());
        CHECK(std::adjacent_find(both.begin(), both.end()) == both.end());  // disjoint

        std::size_t labeled = 0;
        for (std::size_t i = 0; i < g.node_count(); ++i)
            labeled += g.label(static_cast<NodeIndex>(i)) != NodeLabel::Unknown;
        CHECK(both.size() == labeled);
        for (NodeIndex i : s.train) CHECK(g.time_step(i) <= cutoff);
        for (NodeIndex i : s.test) CHECK(g.time_step(i) > cutoff);
    }
}

TEST_CASE("write_graph round-trips exactly") {
    SplitMix64 rng(31337);
    for (int trial = 0; trial < 5; ++trial) {
        auto parts = gwtest::random_dag(rng, 30, 0.2, 0.2);
        // irregular feature values incl. awkward floats
        for (auto& rec : parts.nodes) {
            rec.features.resize(4);
            rec.features[0] = rec.time_step;
            rec.features[1] = rng.normal() * 1e-7;
            rec.features[2] = rng.normal() * 1e9;
            rec.features[3] = rng.unit();
        }
        const auto g = gwtest::to_graph(parts);

        TempDir dir("roundtrip");
        write_graph(g, dir.file("f.csv"), dir.file("c.csv"), dir.file("e.csv"));
        const TransactionGraph g2 = load_graph(dir.file("f.csv"), dir.file("c.csv"),
                                               dir.file("e.csv"));

        REQUIRE(g2.node_count() == g.node_count());
        REQUIRE(g2.edge_count() == g.edge_count());
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            const auto idx = static_cast<NodeIndex>(i);
            CHECK(g2.original_id(idx) == g.original_id(idx));
            CHECK(g2.label(idx) == g.label(idx));
            CHECK(g2.time_step(idx) == g.time_step(idx));
            const auto fa = g.features(idx);
            const auto fb = g2.features(idx);
            REQUIRE(fa.size() == fb.size());
            for (std::size_t k = 0; k < fa.size(); ++k) CHECK(fa[k] == fb[k]);
        }
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            const auto idx = static_cast<NodeIndex>(i);
            const auto pa = g.predecessors(idx);
            const auto pb = g2.predecessors(idx);
            REQUIRE(pa.size() == pb.size());
            for (std::size_t k = 0; k < pa.size(); ++k) CHECK(pa[k] == pb[k]);
        }
    }
}

// Gated on the real dataset; set ELLIPTIC_DIR to its directory to enable.
TEST_CASE("elliptic dataset counts" * doctest::skip(std::getenv("ELLIPTIC_DIR") == nullptr)) {
    const char* dir = std::getenv("ELLIPTIC_DIR");
    REQUIRE(dir != nullptr);
    const std::string base(dir);
    const TransactionGraph g =
        load_graph(base + "/elliptic_txs_features.csv", base + "/elliptic_txs_classes.csv",
                   base + "/elliptic_txs_edgelist.csv");
    CHECK(g.node_count() == 203769);
    CHECK(g.edge_count() == 234355);
    CHECK(g.feature_dim() == 166);
    CHECK(g.min_time_step() == 1);
    CHECK(g.max_time_step() == 49);

    std::size_t illicit = 0;
    std::size_t licit = 0;
    std::size_t unknown = 0;
    std::size_t pred_sum = 0;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        const auto idx = static_cast<NodeIndex>(i);
        switch (g.label(idx)) {
            case NodeLabel::Illicit: ++illicit; break;
            case NodeLabel::Licit: ++licit; break;
            case NodeLabel::Unknown: ++unknown; break;
        }
        pred_sum += g.predecessors(idx).size();
    }
    CHECK(illicit == 4545);
    CHECK(licit == 42019);
    CHECK(unknown == 157205);
    CHECK(pred_sum == 234355);

    const TemporalSplit s = temporal_split(g, 34);
    CHECK(s.train.size() + s.test.size() == 46564);
}
