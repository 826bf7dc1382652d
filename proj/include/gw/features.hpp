#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gw/walker.hpp"

namespace gw {

// The nine walk-summary features of one seed node. Unreachable seeds carry
// the fixed fill row: every length statistic and the terminal count are -1
// (outside the valid range of all of them) and hit is 0.
struct GwFeatureRow {
    NodeId node_id = 0;
    double min = -1.0;
    double max = -1.0;
    double mean = -1.0;
    double std_dev = -1.0;
    double median = -1.0;
    double q25 = -1.0;
    double q75 = -1.0;
    double hit = 0.0;             // successful / total attempts
    std::int64_t illicit = -1;    // distinct illicit terminals
    bool reachable = false;
};

inline constexpr std::array<const char*, 9> kGwFeatureNames = {
    "min", "max", "mean", "std", "median", "q25", "q75", "hit", "illicit"};

// The value of a named feature column; order matches kGwFeatureNames.
double gw_feature_value(const GwFeatureRow& row, std::size_t column);

// Order statistics over the successful walk lengths. Quantiles interpolate
// linearly between closest ranks; std uses the population (n) denominator.
// Requires |successful_lengths| == k > 0.
GwFeatureRow summarize(const SeedWalkStats& stats, std::uint32_t k);

GwFeatureRow fill_unreachable(NodeId node_id);

// One row per seed id in ascending order: reachable seeds summarized,
// truncated or absent seeds filled. stats must be sorted ascending by
// seed_id with keys a subset of all_seed_ids.
std::vector<GwFeatureRow> build_feature_table(const std::vector<SeedWalkStats>& stats,
                                              const std::vector<NodeId>& all_seed_ids,
                                              std::uint32_t k);

// CSV with header txId,min,max,mean,std,median,q25,q75,hit,illicit,reachable.
// Floats use 17 significant digits so a reload reproduces the values exactly.
void write_feature_table(const std::string& path, const std::vector<GwFeatureRow>& rows);
std::vector<GwFeatureRow> read_feature_table(const std::string& path);

} // namespace gw
