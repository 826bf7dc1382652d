#include "gw/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "gw/csv.hpp"

namespace gw {

double gw_feature_value(const GwFeatureRow& row, std::size_t column) {
    switch (column) {
        case 0: return row.min;
        case 1: return row.max;
        case 2: return row.mean;
        case 3: return row.std_dev;
        case 4: return row.median;
        case 5: return row.q25;
        case 6: return row.q75;
        case 7: return row.hit;
        case 8: return static_cast<double>(row.illicit);
    }
    throw std::out_of_range("gw feature column out of range");
}

namespace {

// Linear interpolation between closest ranks on sorted values.
double quantile_sorted(const std::vector<std::uint32_t>& sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double pos = q * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= n) return sorted[n - 1];
    return static_cast<double>(sorted[lo]) +
           frac * (static_cast<double>(sorted[lo + 1]) - static_cast<double>(sorted[lo]));
}

} // namespace

GwFeatureRow summarize(const SeedWalkStats& stats, std::uint32_t k) {
    if (stats.successful_lengths.empty())
        throw std::invalid_argument("summarize requires successful walks; emit a fill row");
    if (stats.successful_lengths.size() != k)
        throw std::invalid_argument("stats for seed " + std::to_string(stats.seed_id) +
                                    " hold " + std::to_string(stats.successful_lengths.size()) +
                                    " walks, expected k=" + std::to_string(k));

    std::vector<std::uint32_t> sorted = stats.successful_lengths;
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());

    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::uint32_t len : sorted) {
        sum += len;
        sum_sq += static_cast<double>(len) * static_cast<double>(len);
    }
    const double mean = sum / n;
    const double variance = std::max(0.0, sum_sq / n - mean * mean);

    GwFeatureRow row;
    row.node_id = stats.seed_id;
    row.min = sorted.front();
    row.max = sorted.back();
    row.mean = mean;
    row.std_dev = std::sqrt(variance);
    row.median = quantile_sorted(sorted, 0.5);
    row.q25 = quantile_sorted(sorted, 0.25);
    row.q75 = quantile_sorted(sorted, 0.75);
    row.hit = static_cast<double>(k) / static_cast<double>(stats.total_attempts);
    row.illicit = static_cast<std::int64_t>(stats.distinct_terminals.size());
    row.reachable = true;
    return row;
}

GwFeatureRow fill_unreachable(NodeId node_id) {
    GwFeatureRow row;
    row.node_id = node_id;
    return row;
}

std::vector<GwFeatureRow> build_feature_table(const std::vector<SeedWalkStats>& stats,
                                              const std::vector<NodeId>& all_seed_ids,
                                              std::uint32_t k) {
    std::vector<NodeId> ids = all_seed_ids;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    std::vector<GwFeatureRow> rows;
    rows.reserve(ids.size());
    std::size_t si = 0;
    for (NodeId id : ids) {
        while (si < stats.size() && stats[si].seed_id < id) ++si;
        if (si < stats.size() && stats[si].seed_id == id) {
            const SeedWalkStats& s = stats[si];
            // Truncated seeds carry incomplete walk sets; treat them like
            // unreachable ones rather than summarizing biased statistics.
            if (s.truncated)
                rows.push_back(fill_unreachable(id));
            else
                rows.push_back(summarize(s, k));
        } else {
            rows.push_back(fill_unreachable(id));
        }
    }
    return rows;
}

void write_feature_table(const std::string& path, const std::vector<GwFeatureRow>& rows) {
    std::string out = "txId,min,max,mean,std,median,q25,q75,hit,illicit,reachable\n";
    for (const GwFeatureRow& row : rows) {
        out += std::to_string(row.node_id);
        for (std::size_t c = 0; c < 8; ++c) {
            out += ',';
            csv::append_double(out, gw_feature_value(row, c));
        }
        out += ',';
        out += std::to_string(row.illicit);
        out += ',';
        out += row.reachable ? '1' : '0';
        out += '\n';
    }
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open file for writing: " + path);
    const std::size_t written = std::fwrite(out.data(), 1, out.size(), f);
    std::fclose(f);
    if (written != out.size()) throw std::runtime_error("write failed: " + path);
}

std::vector<GwFeatureRow> read_feature_table(const std::string& path) {
    std::vector<GwFeatureRow> rows;
    std::vector<std::string_view> cols;
    csv::for_each_line(path, [&](std::size_t line_no, std::string_view line) {
        if (line_no == 1) {
            if (csv::strip(line) != "txId,min,max,mean,std,median,q25,q75,hit,illicit,reachable")
                throw std::runtime_error(path + ": unexpected feature table header");
            return;
        }
        csv::split_line(line, cols);
        if (cols.size() != 11)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 11 columns");
        GwFeatureRow row;
        double vals[8];
        std::int64_t illicit = 0;
        std::int64_t reachable = 0;
        bool ok = csv::parse_int64(cols[0], row.node_id);
        for (std::size_t c = 0; c < 8 && ok; ++c) ok = csv::parse_double(cols[1 + c], vals[c]);
        ok = ok && csv::parse_int64(cols[9], illicit) && csv::parse_int64(cols[10], reachable);
        if (!ok)
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed row");
        row.min = vals[0];
        row.max = vals[1];
        row.mean = vals[2];
        row.std_dev = vals[3];
        row.median = vals[4];
        row.q25 = vals[5];
        row.q75 = vals[6];
        row.hit = vals[7];
        row.illicit = illicit;
        row.reachable = reachable != 0;
        rows.push_back(row);
    });
    return rows;
}

} // namespace gw
