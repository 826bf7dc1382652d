#pragma once

#include <cstdint>
#include <vector>

#include "gw/graph.hpp"
#include "gw/reachability.hpp"
#include "gw/rng.hpp"

namespace gw {

struct WalkConfig {
    std::uint32_t k_successful = 100;
    std::uint64_t rng_seed = 0;
    std::uint64_t max_attempts_per_seed = 0;  // 0 = unbounded
    LabelPolicy policy;
};

struct WalkOutcome {
    bool success = false;
    std::uint32_t length = 0;  // edges traversed
    NodeIndex terminal = 0;    // illicit terminal, valid when success
};

struct SeedWalkStats {
    NodeId seed_id = 0;
    std::vector<std::uint32_t> successful_lengths;  // |.| == k unless truncated
    std::vector<NodeId> distinct_terminals;         // sorted ascending
    std::uint64_t total_attempts = 0;
    bool truncated = false;
};

// One backward walk from the seed. Each step moves to a uniformly chosen
// predecessor; the walk stops at the first illicit node found after the seed
// (the seed's own label never triggers the stop) or dead-ends at a node
// with no predecessors.
WalkOutcome sample_walk(const TransactionGraph& graph, NodeIndex seed,
                        const std::vector<std::uint8_t>& illicit, SplitMix64& rng);

// Like sample_walk but records the visited node sequence (seed first).
WalkOutcome sample_walk_traced(const TransactionGraph& graph, NodeIndex seed,
                               const std::vector<std::uint8_t>& illicit, SplitMix64& rng,
                               std::vector<NodeIndex>& trace);

// Repeats sample_walk until k successes (or the attempt cap). The walk
// stream is derived from (rng_seed, seed id), so results do not depend on
// which worker runs the seed. With an unbounded cap the seed must be able
// to reach an illicit node; this is verified and rejected otherwise.
SeedWalkStats collect_walks(const TransactionGraph& graph, NodeIndex seed,
                            const WalkConfig& config,
                            const std::vector<std::uint8_t>& illicit);

// Walk statistics for every reachable seed, sorted ascending by seed id.
// Unreachable seeds are skipped (they get fill rows downstream). Output is
// identical for any worker count.
std::vector<SeedWalkStats> run_all(const TransactionGraph& graph,
                                   const std::vector<NodeIndex>& seeds,
                                   const WalkConfig& config, const ReachabilityMap& reach,
                                   int workers = 0);
std::vector<SeedWalkStats> run_all_serial(const TransactionGraph& graph,
                                          const std::vector<NodeIndex>& seeds,
                                          const WalkConfig& config,
                                          const ReachabilityMap& reach);

} // namespace gw
