#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gw/features.hpp"
#include "testutil.hpp"

using namespace gw;

namespace {

SeedWalkStats stats_of(NodeId id, std::vector<std::uint32_t> lengths,
                       std::uint64_t attempts, std::size_t n_terminals) {
    SeedWalkStats s;
    s.seed_id = id;
    s.successful_lengths = std::move(lengths);
    for (std::size_t i = 0; i < n_terminals; ++i)
        s.distinct_terminals.push_back(static_cast<NodeId>(1000 + i));
    s.total_attempts = attempts;
    return s;
}

} // namespace

TEST_CASE("summarize: two lengths") {
    const GwFeatureRow row = summarize(stats_of(7, {2, 4}, 4, 1), 2);
    CHECK(row.node_id == 7);
    CHECK(row.min == 2.0);
    CHECK(row.max == 4.0);
    CHECK(row.mean == 3.0);
    CHECK(row.std_dev == 1.0);
    CHECK(row.median == 3.0);
    CHECK(row.q25 == 2.5);
    CHECK(row.q75 == 3.5);
    CHECK(row.hit == 0.5);
    CHECK(row.illicit == 1);
    CHECK(row.reachable);
}

TEST_CASE("summarize: constant lengths") {
    const GwFeatureRow row = summarize(stats_of(1, {3, 3, 3, 3}, 4, 1), 4);
    CHECK(row.min == 3.0);
    CHECK(row.max == 3.0);
    CHECK(row.mean == 3.0);
    CHECK(row.median == 3.0);
    CHECK(row.q25 == 3.0);
    CHECK(row.q75 == 3.0);
    CHECK(row.std_dev == 0.0);
    CHECK(row.hit == 1.0);
}

TEST_CASE("summarize: five distinct lengths, hand-computed") {
    const GwFeatureRow row = summarize(stats_of(2, {5, 1, 4, 2, 3}, 10, 3), 5);
    CHECK(row.min == 1.0);
    CHECK(row.max == 5.0);
    CHECK(row.mean == 3.0);
    CHECK(row.std_dev == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(row.median == 3.0);
    CHECK(row.q25 == 2.0);
    CHECK(row.q75 == 4.0);
    CHECK(row.hit == 0.5);
    CHECK(row.illicit == 3);
}

TEST_CASE("summarize rejects empty or mismatched stats") {
    CHECK_THROWS_AS(summarize(stats_of(1, {}, 10, 0), 5), std::invalid_argument);
    CHECK_THROWS_AS(summarize(stats_of(1, {1, 2}, 10, 1), 5), std::invalid_argument);
}

TEST_CASE("fill row matches the fixed fill contract") {
    const GwFeatureRow row = fill_unreachable(42);
    CHECK(row.node_id == 42);
    CHECK(row.min == -1.0);
    CHECK(row.max == -1.0);
    CHECK(row.mean == -1.0);
    CHECK(row.std_dev == -1.0);
    CHECK(row.median == -1.0);
    CHECK(row.q25 == -1.0);
    CHECK(row.q75 == -1.0);
    CHECK(row.hit == 0.0);
    CHECK(row.illicit == -1);
    CHECK_FALSE(row.reachable);

    // identical across ids apart from the id itself
    const GwFeatureRow other = fill_unreachable(7);
    CHECK(other.min == row.min);
    CHECK(other.hit == row.hit);
    CHECK(other.illicit == row.illicit);
}

TEST_CASE("build_feature_table mixes summarized and fill rows in id order") {
    const std::vector<SeedWalkStats> stats = {stats_of(5, {1, 2}, 4, 2)};
    const auto rows = build_feature_table(stats, {9, 5, 3}, 2);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].node_id == 3);
    CHECK_FALSE(rows[0].reachable);
    CHECK(rows[1].node_id == 5);
    CHECK(rows[1].reachable);
    CHECK(rows[1].mean == 1.5);
    CHECK(rows[2].node_id == 9);
    CHECK_FALSE(rows[2].reachable);
}

TEST_CASE("build_feature_table: empty seed list, wrong k, truncated stats") {
    CHECK(build_feature_table({}, {}, 5).empty());

    SUBCASE("wrong k is an error") {
        const std::vector<SeedWalkStats> stats = {stats_of(1, {1, 2, 3}, 6, 1)};
        CHECK_THROWS_AS(build_feature_table(stats, {1}, 5), std::invalid_argument);
    }
    SUBCASE("truncated stats become fill rows") {
        SeedWalkStats t = stats_of(1, {1, 2}, 50, 1);
        t.truncated = true;
        const auto rows = build_feature_table({t}, {1}, 5);
        REQUIRE(rows.size() == 1);
        CHECK_FALSE(rows[0].reachable);
        CHECK(rows[0].hit == 0.0);
    }
}

TEST_CASE("order statistics match the brute-force oracle on 1000 random multisets") {
    SplitMix64 rng(0x5EED);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng.below(40);
        std::vector<std::uint32_t> lengths(n);
        for (auto& v : lengths) v = 1 + static_cast<std::uint32_t>(rng.below(30));
        const std::uint64_t attempts = n + rng.below(3 * n + 1);
        const std::size_t terminals = 1 + rng.below(n);

        const GwFeatureRow row =
            summarize(stats_of(trial, lengths, attempts, terminals), static_cast<std::uint32_t>(n));
        const gwtest::BruteStats oracle = gwtest::brute_stats(lengths);

        CHECK(row.min == doctest::Approx(oracle.min).epsilon(1e-12));
        CHECK(row.max == doctest::Approx(oracle.max).epsilon(1e-12));
        CHECK(row.mean == doctest::Approx(oracle.mean).epsilon(1e-12));
        CHECK(row.std_dev == doctest::Approx(oracle.std_dev).epsilon(1e-12));
        CHECK(row.median == doctest::Approx(oracle.median).epsilon(1e-12));
        CHECK(row.q25 == doctest::Approx(oracle.q25).epsilon(1e-12));
        CHECK(row.q75 == doctest::Approx(oracle.q75).epsilon(1e-12));
        CHECK(row.hit * static_cast<double>(attempts) ==
              doctest::Approx(static_cast<double>(n)).epsilon(1e-12));
        CHECK(row.illicit == static_cast<std::int64_t>(terminals));

        // ordering chain and variance identity
        CHECK(row.min <= row.q25);
        CHECK(row.q25 <= row.median);
        CHECK(row.median <= row.q75);
        CHECK(row.q75 <= row.max);
        CHECK(row.min <= row.mean);
        CHECK(row.mean <= row.max);
        double sq = 0.0;
        double sum = 0.0;
        for (auto v : lengths) {
            sq += static_cast<double>(v) * v;
            sum += v;
        }
        const double var_alt = sq / static_cast<double>(n) - (sum / n) * (sum / n);
        CHECK(row.std_dev * row.std_dev ==
              doctest::Approx(var_alt).epsilon(1e-9));
    }
}

TEST_CASE("summarize is permutation invariant") {
    SplitMix64 rng(88);
    std::vector<std::uint32_t> lengths(17);
    for (auto& v : lengths) v = 1 + static_cast<std::uint32_t>(rng.below(9));
    const GwFeatureRow a = summarize(stats_of(1, lengths, 40, 2), 17);

    for (int shuffle = 0; shuffle < 5; ++shuffle) {
        for (std::size_t i = lengths.size(); i > 1; --i)
            std::swap(lengths[i - 1], lengths[rng.below(i)]);
        const GwFeatureRow b = summarize(stats_of(1, lengths, 40, 2), 17);
        CHECK(a.min == b.min);
        CHECK(a.max == b.max);
        CHECK(a.mean == b.mean);
        CHECK(a.std_dev == b.std_dev);
        CHECK(a.median == b.median);
        CHECK(a.q25 == b.q25);
        CHECK(a.q75 == b.q75);
    }
}

TEST_CASE("feature table csv round-trips exactly") {
    SplitMix64 rng(3);
    std::vector<GwFeatureRow> rows;
    for (int i = 0; i < 50; ++i) {
        if (i % 3 == 0) {
            rows.push_back(fill_unreachable(i));
            continue;
        }
        const std::size_t n = 1 + rng.below(20);
        std::vector<std::uint32_t> lengths(n);
        for (auto& v : lengths) v = 1 + static_cast<std::uint32_t>(rng.below(12));
        rows.push_back(summarize(stats_of(i, lengths, n + rng.below(50), 1 + rng.below(n)),
                                 static_cast<std::uint32_t>(n)));
    }

    gwtest::TempDir dir("gwfcsv");
    write_feature_table(dir.file("gwf.csv"), rows);
    const auto loaded = read_feature_table(dir.file("gwf.csv"));
    REQUIRE(loaded.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(loaded[i].node_id == rows[i].node_id);
        for (std::size_t c = 0; c < 9; ++c)
            CHECK(gw_feature_value(loaded[i], c) == gw_feature_value(rows[i], c));
        CHECK(loaded[i].reachable == rows[i].reachable);
    }

    // writing the loaded rows again reproduces the file byte for byte
    write_feature_table(dir.file("gwf2.csv"), loaded);
    CHECK(gwtest::read_file(dir.file("gwf.csv")) == gwtest::read_file(dir.file("gwf2.csv")));
}
