#include "gw/walker.hpp"

#include <omp.h>

#include <algorithm>
#include <stdexcept>

namespace gw {

WalkOutcome sample_walk(const TransactionGraph& graph, NodeIndex seed,
                        const std::vector<std::uint8_t>& illicit, SplitMix64& rng) {
    WalkOutcome out;
    NodeIndex cur = seed;
    while (true) {
        const auto preds = graph.predecessors(cur);
        if (preds.empty()) return out;  // dead end, out.length edges walked
        cur = preds[rng.below(preds.size())];
        ++out.length;
        if (illicit[cur]) {
            out.success = true;
            out.terminal = cur;
            return out;
        }
    }
}

WalkOutcome sample_walk_traced(const TransactionGraph& graph, NodeIndex seed,
                               const std::vector<std::uint8_t>& illicit, SplitMix64& rng,
                               std::vector<NodeIndex>& trace) {
    trace.clear();
    trace.push_back(seed);
    WalkOutcome out;
    NodeIndex cur = seed;
    while (true) {
        const auto preds = graph.predecessors(cur);
        if (preds.empty()) return out;
        cur = preds[rng.below(preds.size())];
        trace.push_back(cur);
        ++out.length;
        if (illicit[cur]) {
            out.success = true;
            out.terminal = cur;
            return out;
        }
    }
}

namespace {

void check_config(const WalkConfig& config) {
    if (config.k_successful < 1) throw std::invalid_argument("k_successful must be >= 1");
    if (config.max_attempts_per_seed != 0 &&
        config.max_attempts_per_seed < config.k_successful)
        throw std::invalid_argument("max_attempts_per_seed must be >= k_successful");
}

// Backward BFS from the seed looking for an illicit strict ancestor.
bool has_illicit_ancestor(const TransactionGraph& graph, NodeIndex seed,
                          const std::vector<std::uint8_t>& illicit) {
    std::vector<std::uint8_t> seen(graph.node_count(), 0);
    std::vector<NodeIndex> stack{seed};
    seen[seed] = 1;
    while (!stack.empty()) {
        const NodeIndex v = stack.back();
        stack.pop_back();
        for (NodeIndex u : graph.predecessors(v)) {
            if (illicit[u]) return true;
            if (!seen[u]) {
                seen[u] = 1;
                stack.push_back(u);
            }
        }
    }
    return false;
}

SplitMix64 seed_stream(const WalkConfig& config, NodeId seed_id) {
    // Per-seed stream: rng_seed XOR hash(seed id).
    return SplitMix64(config.rng_seed ^ hash64(static_cast<std::uint64_t>(seed_id)));
}

SeedWalkStats collect_walks_prechecked(const TransactionGraph& graph, NodeIndex seed,
                                       const WalkConfig& config,
                                       const std::vector<std::uint8_t>& illicit) {
    SeedWalkStats stats;
    stats.seed_id = graph.original_id(seed);
    SplitMix64 rng = seed_stream(config, stats.seed_id);

    std::vector<NodeIndex> terminals;
    stats.successful_lengths.reserve(config.k_successful);
    while (stats.successful_lengths.size() < config.k_successful) {
        if (config.max_attempts_per_seed != 0 &&
            stats.total_attempts >= config.max_attempts_per_seed) {
            stats.truncated = true;
            break;
        }
        ++stats.total_attempts;
        const WalkOutcome o = sample_walk(graph, seed, illicit, rng);
        if (o.success) {
            stats.successful_lengths.push_back(o.length);
            terminals.push_back(o.terminal);
        }
    }

    std::sort(terminals.begin(), terminals.end());
    terminals.erase(std::unique(terminals.begin(), terminals.end()), terminals.end());
    stats.distinct_terminals.reserve(terminals.size());
    for (NodeIndex t : terminals) stats.distinct_terminals.push_back(graph.original_id(t));
    return stats;
}

} // namespace

SeedWalkStats collect_walks(const TransactionGraph& graph, NodeIndex seed,
                            const WalkConfig& config,
                            const std::vector<std::uint8_t>& illicit) {
    check_config(config);
    if (seed >= graph.node_count()) throw std::runtime_error("unknown seed index");
    if (config.max_attempts_per_seed == 0 && !has_illicit_ancestor(graph, seed, illicit))
        throw std::runtime_error("seed " + std::to_string(graph.original_id(seed)) +
                                 " cannot reach an illicit node; unbounded collection "
                                 "would not terminate");
    return collect_walks_prechecked(graph, seed, config, illicit);
}

namespace {

std::vector<NodeIndex> reachable_seeds(const std::vector<NodeIndex>& seeds,
                                       const ReachabilityMap& reach) {
    std::vector<NodeIndex> out;
    out.reserve(seeds.size());
    for (NodeIndex s : seeds)
        if (reach.reachable(s)) out.push_back(s);
    std::sort(out.begin(), out.end());  // id order == index order
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace

std::vector<SeedWalkStats> run_all(const TransactionGraph& graph,
                                   const std::vector<NodeIndex>& seeds,
                                   const WalkConfig& config, const ReachabilityMap& reach,
                                   int workers) {
    check_config(config);
    const std::vector<std::uint8_t> illicit = illicit_flags(graph, config.policy);
    const std::vector<NodeIndex> todo = reachable_seeds(seeds, reach);

    std::vector<SeedWalkStats> out(todo.size());
    const int nt = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for num_threads(nt) schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(todo.size()); ++i) {
        out[static_cast<std::size_t>(i)] = collect_walks_prechecked(
            graph, todo[static_cast<std::size_t>(i)], config, illicit);
    }
    return out;
}

std::vector<SeedWalkStats> run_all_serial(const TransactionGraph& graph,
                                          const std::vector<NodeIndex>& seeds,
                                          const WalkConfig& config,
                                          const ReachabilityMap& reach) {
    check_config(config);
    const std::vector<std::uint8_t> illicit = illicit_flags(graph, config.policy);
    const std::vector<NodeIndex> todo = reachable_seeds(seeds, reach);

    std::vector<SeedWalkStats> out;
    out.reserve(todo.size());
    for (NodeIndex s : todo)
        out.push_back(collect_walks_prechecked(graph, s, config, illicit));
    return out;
}

} // namespace gw
