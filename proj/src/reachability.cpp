#include "gw/reachability.hpp"

#include <omp.h>

#include <algorithm>
#include <stdexcept>

namespace gw {

std::vector<std::uint8_t> illicit_flags(const TransactionGraph& graph,
                                        const LabelPolicy& policy) {
    std::vector<std::uint8_t> flags(graph.node_count(), 0);
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        const auto idx = static_cast<NodeIndex>(i);
        flags[i] = policy.counts_as_illicit(graph.label(idx), graph.time_step(idx)) ? 1 : 0;
    }
    return flags;
}

std::vector<NodeIndex> illicit_set(const TransactionGraph& graph, const LabelPolicy& policy) {
    std::vector<NodeIndex> out;
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        const auto idx = static_cast<NodeIndex>(i);
        if (policy.counts_as_illicit(graph.label(idx), graph.time_step(idx)))
            out.push_back(idx);
    }
    return out;
}

namespace {

ReachabilityMap finish(std::vector<std::uint8_t> reach) {
    ReachabilityMap map;
    map.reachable_count = 0;
    for (std::uint8_t f : reach) map.reachable_count += f;
    map.can_reach_illicit = std::move(reach);
    return map;
}

void require_dag(const TransactionGraph& graph) {
    if (!graph.is_dag())
        throw std::invalid_argument("reachability requires an acyclic graph");
}

// reach(v) = OR over predecessors u of (illicit(u) || reach(u)); a single
// pass in topological order settles every node.
std::vector<std::uint8_t> propagate_in_order(const TransactionGraph& graph,
                                             const std::vector<std::uint8_t>& illicit) {
    std::vector<std::uint8_t> reach(graph.node_count(), 0);
    for (NodeIndex v : graph.topological_order()) {
        std::uint8_t r = 0;
        for (NodeIndex u : graph.predecessors(v)) {
            if (illicit[u] | reach[u]) {
                r = 1;
                break;
            }
        }
        reach[v] = r;
    }
    return reach;
}

} // namespace

ReachabilityMap compute_reachability_serial(const TransactionGraph& graph,
                                            const LabelPolicy& policy) {
    require_dag(graph);
    return finish(propagate_in_order(graph, illicit_flags(graph, policy)));
}

ReachabilityMap compute_reachability(const TransactionGraph& graph, const LabelPolicy& policy,
                                     int workers) {
    require_dag(graph);
    const std::size_t n = graph.node_count();
    if (n == 0) return finish({});

    const std::vector<std::uint8_t> illicit = illicit_flags(graph, policy);

    // Group nodes into topological levels: every predecessor sits in a
    // strictly earlier level, so each level is embarrassingly parallel.
    std::vector<std::uint32_t> level(n, 0);
    std::uint32_t max_level = 0;
    for (NodeIndex v : graph.topological_order()) {
        std::uint32_t lv = 0;
        for (NodeIndex u : graph.predecessors(v)) lv = std::max(lv, level[u] + 1);
        level[v] = lv;
        max_level = std::max(max_level, lv);
    }
    std::vector<std::size_t> level_off(max_level + 2, 0);
    for (std::size_t i = 0; i < n; ++i) ++level_off[level[i] + 1];
    for (std::size_t l = 0; l + 1 < level_off.size(); ++l) level_off[l + 1] += level_off[l];
    std::vector<NodeIndex> by_level(n);
    {
        std::vector<std::size_t> fill(level_off.begin(), level_off.end() - 1);
        for (NodeIndex v : graph.topological_order()) by_level[fill[level[v]]++] = v;
    }

    std::vector<std::uint8_t> reach(n, 0);
    const int nt = workers > 0 ? workers : omp_get_max_threads();
    for (std::uint32_t lv = 0; lv <= max_level; ++lv) {
        const auto begin = static_cast<std::ptrdiff_t>(level_off[lv]);
        const auto end = static_cast<std::ptrdiff_t>(level_off[lv + 1]);
#pragma omp parallel for num_threads(nt) schedule(static)
        for (std::ptrdiff_t i = begin; i < end; ++i) {
            const NodeIndex v = by_level[static_cast<std::size_t>(i)];
            std::uint8_t r = 0;
            for (NodeIndex u : graph.predecessors(v)) {
                if (illicit[u] | reach[u]) {
                    r = 1;
                    break;
                }
            }
            reach[v] = r;
        }
    }
    return finish(std::move(reach));
}

} // namespace gw
