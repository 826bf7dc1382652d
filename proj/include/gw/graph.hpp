#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gw {

using NodeId = std::int64_t;      // external id, as found in the files
using NodeIndex = std::uint32_t;  // dense internal index, ascending by NodeId

enum class NodeLabel : std::uint8_t { Illicit, Licit, Unknown };

const char* to_string(NodeLabel label);
// Accepts exactly "1", "2", "unknown".
std::optional<NodeLabel> parse_label(std::string_view token);

struct NodeRecord {
    NodeId id = 0;
    int time_step = 0;
    NodeLabel label = NodeLabel::Unknown;
    std::vector<double> features;  // f1 is the time step for file-backed graphs
};

struct EdgeRef {
    NodeId src = 0;
    NodeId dst = 0;
};

struct ValidationReport {
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    bool is_dag = false;
    std::vector<EdgeRef> temporal_violations;  // time_step(src) > time_step(dst)
    std::vector<EdgeRef> duplicate_edges;
    std::vector<NodeId> self_loops;
    std::size_t labels_defaulted = 0;  // ids absent from the classes file; warning only

    bool ok() const {
        return is_dag && temporal_violations.empty() && duplicate_edges.empty() &&
               self_loops.empty();
    }
};

// Immutable temporal transaction graph. Edges point from older to newer
// nodes; walks traverse them backward via the precomputed predecessor lists.
// Internal indices are assigned in ascending NodeId order, so index order
// and id order agree everywhere.
class TransactionGraph {
public:
    // Builds adjacency without enforcing the DAG/temporal invariants
    // (validate() reports those). Throws on duplicate node ids and on edges
    // referencing unknown ids.
    static TransactionGraph from_parts(std::vector<NodeRecord> nodes,
                                       const std::vector<std::pair<NodeId, NodeId>>& edges);

    std::size_t node_count() const { return time_steps_.size(); }
    std::size_t edge_count() const { return edge_dst_.size(); }
    std::size_t feature_dim() const { return feature_dim_; }
    int max_time_step() const { return max_time_step_; }
    int min_time_step() const { return min_time_step_; }
    std::size_t labels_defaulted() const { return labels_defaulted_; }

    NodeId original_id(NodeIndex i) const { return ids_[i]; }
    std::optional<NodeIndex> index_of(NodeId id) const;
    NodeIndex require_index(NodeId id) const;  // throws on unknown id

    NodeLabel label(NodeIndex i) const { return labels_[i]; }
    int time_step(NodeIndex i) const { return time_steps_[i]; }
    std::span<const double> features(NodeIndex i) const {
        return {features_.data() + static_cast<std::size_t>(i) * feature_dim_, feature_dim_};
    }

    std::span<const NodeIndex> predecessors(NodeIndex i) const {
        return {pred_adj_.data() + pred_off_[i], pred_off_[i + 1] - pred_off_[i]};
    }
    std::span<const NodeIndex> successors(NodeIndex i) const {
        return {succ_adj_.data() + succ_off_[i], succ_off_[i + 1] - succ_off_[i]};
    }

    // Predecessor ids in ascending order (the sampling order of the walker).
    std::vector<NodeId> predecessor_ids(NodeId id) const;

    // Empty when the graph is cyclic.
    std::span<const NodeIndex> topological_order() const { return topo_order_; }
    bool is_dag() const { return topo_order_.size() == node_count(); }

    std::vector<EdgeRef> edge_list() const;  // ascending (src id, dst id)

private:
    friend TransactionGraph load_graph(const std::string&, const std::string&,
                                       const std::string&);

    std::vector<NodeId> ids_;
    std::vector<int> time_steps_;
    std::vector<NodeLabel> labels_;
    std::vector<double> features_;  // row-major, node_count x feature_dim
    std::size_t feature_dim_ = 0;

    std::vector<std::size_t> pred_off_;  // CSR over incoming edges
    std::vector<NodeIndex> pred_adj_;
    std::vector<std::size_t> succ_off_;  // CSR over outgoing edges
    std::vector<NodeIndex> succ_adj_;
    std::vector<NodeIndex> edge_dst_;  // parallel to succ_adj_ order; kept for edge_count only

    std::vector<NodeIndex> topo_order_;
    std::unordered_map<NodeId, NodeIndex> id_to_index_;
    int max_time_step_ = 0;
    int min_time_step_ = 0;
    std::size_t labels_defaulted_ = 0;
};

// Loads the three-file dataset (headerless features; classes and edges with
// a one-line header) and returns a fully validated graph. Throws on I/O or
// parse errors and on any invariant violation found by validate().
TransactionGraph load_graph(const std::string& features_path,
                            const std::string& classes_path,
                            const std::string& edges_path);

// Structural checks; violations are reported, never thrown.
ValidationReport validate(const TransactionGraph& graph);

// Writes the graph back in the three-file dataset format. Nodes emit in
// ascending id order; floats keep 17 significant digits so a reload is exact.
void write_graph(const TransactionGraph& graph,
                 const std::string& features_path,
                 const std::string& classes_path,
                 const std::string& edges_path);

struct TemporalSplit {
    int cutoff_step = 0;
    std::vector<NodeIndex> train;  // labeled, time_step <= cutoff; ascending
    std::vector<NodeIndex> test;   // labeled, time_step > cutoff; ascending
};

// Labeled-node split at the cutoff; Unknown nodes land in neither side.
// Requires 1 <= cutoff_step < max time step.
TemporalSplit temporal_split(const TransactionGraph& graph, int cutoff_step);

} // namespace gw
