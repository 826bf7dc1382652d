#pragma once

#include <cstdint>
#include <vector>

#include "gw/graph.hpp"

namespace gw {

// Which labels count as "known illicit" when walking and pre-filtering.
struct LabelPolicy {
    enum class Kind : std::uint8_t { AllPastLabels, TrainOnlyLabels };

    Kind kind = Kind::AllPastLabels;
    int cutoff_step = 0;  // TrainOnlyLabels only

    static LabelPolicy all_past() { return {}; }
    static LabelPolicy train_only(int cutoff) {
        return {Kind::TrainOnlyLabels, cutoff};
    }

    bool counts_as_illicit(NodeLabel label, int time_step) const {
        if (label != NodeLabel::Illicit) return false;
        return kind == Kind::AllPastLabels || time_step <= cutoff_step;
    }
};

// Per-node flag vector for the policy's illicit predicate.
std::vector<std::uint8_t> illicit_flags(const TransactionGraph& graph, const LabelPolicy& policy);

// Node indices satisfying the policy's illicit predicate, ascending.
std::vector<NodeIndex> illicit_set(const TransactionGraph& graph, const LabelPolicy& policy);

struct ReachabilityMap {
    std::vector<std::uint8_t> can_reach_illicit;  // one flag per node
    std::size_t reachable_count = 0;

    bool reachable(NodeIndex i) const { return can_reach_illicit[i] != 0; }
};

// can_reach_illicit(v) == v has an illicit strict ancestor under the policy.
// Requires a DAG. Both variants produce the identical map; the default one
// runs the topological levels in parallel.
ReachabilityMap compute_reachability(const TransactionGraph& graph, const LabelPolicy& policy,
                                     int workers = 0);
ReachabilityMap compute_reachability_serial(const TransactionGraph& graph,
                                            const LabelPolicy& policy);

} // namespace gw
