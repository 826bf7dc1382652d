#include "gw/graph.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "gw/csv.hpp"

namespace gw {

const char* to_string(NodeLabel label) {
    switch (label) {
        case NodeLabel::Illicit: return "1";
        case NodeLabel::Licit: return "2";
        case NodeLabel::Unknown: return "unknown";
    }
    return "unknown";
}

std::optional<NodeLabel> parse_label(std::string_view token) {
    if (token == "1") return NodeLabel::Illicit;
    if (token == "2") return NodeLabel::Licit;
    if (token == "unknown") return NodeLabel::Unknown;
    return std::nullopt;
}

TransactionGraph TransactionGraph::from_parts(
    std::vector<NodeRecord> nodes, const std::vector<std::pair<NodeId, NodeId>>& edges) {
    std::sort(nodes.begin(), nodes.end(),
              [](const NodeRecord& a, const NodeRecord& b) { return a.id < b.id; });

    TransactionGraph g;
    const std::size_t n = nodes.size();
    g.ids_.reserve(n);
    g.time_steps_.reserve(n);
    g.labels_.reserve(n);
    g.id_to_index_.reserve(n);
    g.feature_dim_ = n == 0 ? 0 : nodes.front().features.size();
    g.features_.reserve(n * g.feature_dim_);

    for (std::size_t i = 0; i < n; ++i) {
        const NodeRecord& rec = nodes[i];
        if (i > 0 && rec.id == nodes[i - 1].id)
            throw std::runtime_error("duplicate node id: " + std::to_string(rec.id));
        if (rec.features.size() != g.feature_dim_)
            throw std::runtime_error("inconsistent feature vector length for node id " +
                                     std::to_string(rec.id));
        g.ids_.push_back(rec.id);
        g.time_steps_.push_back(rec.time_step);
        g.labels_.push_back(rec.label);
        g.features_.insert(g.features_.end(), rec.features.begin(), rec.features.end());
        g.id_to_index_.emplace(rec.id, static_cast<NodeIndex>(i));
    }

    if (n > 0) {
        g.min_time_step_ = *std::min_element(g.time_steps_.begin(), g.time_steps_.end());
        g.max_time_step_ = *std::max_element(g.time_steps_.begin(), g.time_steps_.end());
    }

    // Resolve endpoints, then build both CSR directions with neighbor lists
    // sorted ascending (predecessor order is part of the walker contract).
    std::vector<std::pair<NodeIndex, NodeIndex>> idx_edges;
    idx_edges.reserve(edges.size());
    for (const auto& [src, dst] : edges) {
        const auto si = g.index_of(src);
        const auto di = g.index_of(dst);
        if (!si || !di)
            throw std::runtime_error("edge references unknown node id: " +
                                     std::to_string(si ? dst : src));
        idx_edges.emplace_back(*si, *di);
    }

    g.pred_off_.assign(n + 1, 0);
    g.succ_off_.assign(n + 1, 0);
    for (const auto& [s, d] : idx_edges) {
        ++g.succ_off_[s + 1];
        ++g.pred_off_[d + 1];
    }
    for (std::size_t i = 0; i < n; ++i) {
        g.succ_off_[i + 1] += g.succ_off_[i];
        g.pred_off_[i + 1] += g.pred_off_[i];
    }
    g.succ_adj_.resize(idx_edges.size());
    g.pred_adj_.resize(idx_edges.size());
    {
        std::vector<std::size_t> sfill(g.succ_off_.begin(), g.succ_off_.end() - 1);
        std::vector<std::size_t> pfill(g.pred_off_.begin(), g.pred_off_.end() - 1);
        for (const auto& [s, d] : idx_edges) {
            g.succ_adj_[sfill[s]++] = d;
            g.pred_adj_[pfill[d]++] = s;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::sort(g.succ_adj_.begin() + static_cast<std::ptrdiff_t>(g.succ_off_[i]),
                  g.succ_adj_.begin() + static_cast<std::ptrdiff_t>(g.succ_off_[i + 1]));
        std::sort(g.pred_adj_.begin() + static_cast<std::ptrdiff_t>(g.pred_off_[i]),
                  g.pred_adj_.begin() + static_cast<std::ptrdiff_t>(g.pred_off_[i + 1]));
    }
    g.edge_dst_.assign(g.succ_adj_.begin(), g.succ_adj_.end());

    // Kahn's algorithm; a short order means a cycle exists somewhere.
    std::vector<std::size_t> indeg(n);
    for (std::size_t i = 0; i < n; ++i) indeg[i] = g.pred_off_[i + 1] - g.pred_off_[i];
    std::vector<NodeIndex> queue;
    queue.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        if (indeg[i] == 0) queue.push_back(static_cast<NodeIndex>(i));
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const NodeIndex u = queue[head];
        for (NodeIndex v : g.successors(u))
            if (--indeg[v] == 0) queue.push_back(v);
    }
    if (queue.size() == n) g.topo_order_ = std::move(queue);

    return g;
}

std::optional<NodeIndex> TransactionGraph::index_of(NodeId id) const {
    const auto it = id_to_index_.find(id);
    if (it == id_to_index_.end()) return std::nullopt;
    return it->second;
}

NodeIndex TransactionGraph::require_index(NodeId id) const {
    const auto idx = index_of(id);
    if (!idx) throw std::runtime_error("unknown node id: " + std::to_string(id));
    return *idx;
}

std::vector<NodeId> TransactionGraph::predecessor_ids(NodeId id) const {
    const NodeIndex i = require_index(id);
    std::vector<NodeId> out;
    const auto preds = predecessors(i);
    out.reserve(preds.size());
    for (NodeIndex p : preds) out.push_back(ids_[p]);
    return out;  // already ascending: index order == id order
}

std::vector<EdgeRef> TransactionGraph::edge_list() const {
    std::vector<EdgeRef> out;
    out.reserve(edge_count());
    for (std::size_t i = 0; i < node_count(); ++i)
        for (NodeIndex d : successors(static_cast<NodeIndex>(i)))
            out.push_back({ids_[i], ids_[d]});
    return out;
}

namespace {

struct ParsedClasses {
    std::unordered_map<NodeId, NodeLabel> labels;
};

ParsedClasses parse_classes(const std::string& path) {
    ParsedClasses out;
    std::vector<std::string_view> cols;
    csv::for_each_line(path, [&](std::size_t line_no, std::string_view line) {
        if (line_no == 1) return;  // header: txId,class
        csv::split_line(line, cols);
        if (cols.size() != 2)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 2 columns");
        NodeId id = 0;
        if (!csv::parse_int64(cols[0], id))
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad node id");
        const auto label = parse_label(csv::strip(cols[1]));
        if (!label)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": bad class token '" + std::string(csv::strip(cols[1])) +
                                     "'");
        if (!out.labels.emplace(id, *label).second)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": duplicate class row for id " + std::to_string(id));
    });
    return out;
}

} // namespace

TransactionGraph load_graph(const std::string& features_path,
                            const std::string& classes_path,
                            const std::string& edges_path) {
    const ParsedClasses classes = parse_classes(classes_path);

    std::vector<NodeRecord> nodes;
    std::size_t expected_cols = 0;
    std::size_t defaulted = 0;
    {
        std::vector<std::string_view> cols;
        csv::for_each_line(features_path, [&](std::size_t line_no, std::string_view line) {
            csv::split_line(line, cols);
            if (cols.size() < 2)
                throw std::runtime_error(features_path + ":" + std::to_string(line_no) +
                                         ": expected id plus at least one feature column");
            if (expected_cols == 0) expected_cols = cols.size();
            if (cols.size() != expected_cols)
                throw std::runtime_error(features_path + ":" + std::to_string(line_no) +
                                         ": wrong column count");
            NodeRecord rec;
            if (!csv::parse_int64(cols[0], rec.id))
                throw std::runtime_error(features_path + ":" + std::to_string(line_no) +
                                         ": bad node id");
            rec.features.resize(cols.size() - 1);
            for (std::size_t c = 1; c < cols.size(); ++c) {
                if (!csv::parse_double(cols[c], rec.features[c - 1]))
                    throw std::runtime_error(features_path + ":" + std::to_string(line_no) +
                                             ": non-numeric feature in column " +
                                             std::to_string(c + 1));
            }
            rec.time_step = static_cast<int>(rec.features[0]);
            const auto it = classes.labels.find(rec.id);
            if (it != classes.labels.end()) {
                rec.label = it->second;
            } else {
                rec.label = NodeLabel::Unknown;
                ++defaulted;
            }
            nodes.push_back(std::move(rec));
        });
    }

    std::vector<std::pair<NodeId, NodeId>> edges;
    {
        std::vector<std::string_view> cols;
        csv::for_each_line(edges_path, [&](std::size_t line_no, std::string_view line) {
            if (line_no == 1) return;  // header: txId1,txId2
            csv::split_line(line, cols);
            if (cols.size() != 2)
                throw std::runtime_error(edges_path + ":" + std::to_string(line_no) +
                                         ": expected 2 columns");
            NodeId s = 0;
            NodeId d = 0;
            if (!csv::parse_int64(cols[0], s) || !csv::parse_int64(cols[1], d))
                throw std::runtime_error(edges_path + ":" + std::to_string(line_no) +
                                         ": bad edge endpoint");
            edges.emplace_back(s, d);
        });
    }

    TransactionGraph g = TransactionGraph::from_parts(std::move(nodes), edges);
    g.labels_defaulted_ = defaulted;

    const ValidationReport report = validate(g);
    if (!report.is_dag) throw std::runtime_error("graph is cyclic; walks would not terminate");
    if (!report.temporal_violations.empty()) {
        const auto& e = report.temporal_violations.front();
        throw std::runtime_error("temporal violation: edge " + std::to_string(e.src) + "->" +
                                 std::to_string(e.dst) + " goes backward in time (" +
                                 std::to_string(report.temporal_violations.size()) + " total)");
    }
    if (!report.duplicate_edges.empty()) {
        const auto& e = report.duplicate_edges.front();
        throw std::runtime_error("duplicate edge: " + std::to_string(e.src) + "->" +
                                 std::to_string(e.dst) + " (" +
                                 std::to_string(report.duplicate_edges.size()) + " total)");
    }
    if (!report.self_loops.empty())
        throw std::runtime_error("self-loop on node id " +
                                 std::to_string(report.self_loops.front()));
    return g;
}

ValidationReport validate(const TransactionGraph& graph) {
    ValidationReport report;
    report.node_count = graph.node_count();
    report.edge_count = graph.edge_count();
    report.labels_defaulted = graph.labels_defaulted();
    report.is_dag = graph.is_dag();

    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        const auto u = static_cast<NodeIndex>(i);
        const auto succs = graph.successors(u);
        for (std::size_t j = 0; j < succs.size(); ++j) {
            const NodeIndex v = succs[j];
            if (v == u) report.self_loops.push_back(graph.original_id(u));
            if (graph.time_step(u) > graph.time_step(v))
                report.temporal_violations.push_back(
                    {graph.original_id(u), graph.original_id(v)});
            if (j > 0 && succs[j - 1] == v)
                report.duplicate_edges.push_back({graph.original_id(u), graph.original_id(v)});
        }
    }
    return report;
}

void write_graph(const TransactionGraph& graph,
                 const std::string& features_path,
                 const std::string& classes_path,
                 const std::string& edges_path) {
    const auto write_file = [](const std::string& path, const std::string& content) {
        FILE* f = std::fopen(path.c_str(), "wb");
        if (!f) throw std::runtime_error("cannot open file for writing: " + path);
        const std::size_t written = std::fwrite(content.data(), 1, content.size(), f);
        std::fclose(f);
        if (written != content.size()) throw std::runtime_error("write failed: " + path);
    };

    std::string features;
    std::string classes = "txId,class\n";
    std::string edges = "txId1,txId2\n";
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        const auto idx = static_cast<NodeIndex>(i);
        features += std::to_string(graph.original_id(idx));
        for (double v : graph.features(idx)) {
            features += ',';
            csv::append_double(features, v);
        }
        features += '\n';
        classes += std::to_string(graph.original_id(idx));
        classes += ',';
        classes += to_string(graph.label(idx));
        classes += '\n';
    }
    for (const EdgeRef& e : graph.edge_list()) {
        edges += std::to_string(e.src);
        edges += ',';
        edges += std::to_string(e.dst);
        edges += '\n';
    }
    write_file(features_path, features);
    write_file(classes_path, classes);
    write_file(edges_path, edges);
}

TemporalSplit temporal_split(const TransactionGraph& graph, int cutoff_step) {
    if (cutoff_step < 1 || cutoff_step >= graph.max_time_step())
        throw std::out_of_range("cutoff_step " + std::to_string(cutoff_step) +
                                " outside [1, " + std::to_string(graph.max_time_step()) + ")");
    TemporalSplit split;
    split.cutoff_step = cutoff_step;
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        const auto idx = static_cast<NodeIndex>(i);
        if (graph.label(idx) == NodeLabel::Unknown) continue;
        if (graph.time_step(idx) <= cutoff_step)
            split.train.push_back(idx);
        else
            split.test.push_back(idx);
    }
    return split;
}

} // namespace gw
