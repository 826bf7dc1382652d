#include "gw/synth.hpp"

#include <algorithm>
#include <stdexcept>

#include "gw/rng.hpp"

namespace gw {

namespace {

void check_config(const SynthConfig& c) {
    if (c.n_nodes < 2) throw std::invalid_argument("n_nodes must be >= 2");
    if (c.n_timesteps < 1) throw std::invalid_argument("n_timesteps must be >= 1");
    if (!(c.illicit_fraction > 0.0) || !(c.illicit_fraction < 1.0))
        throw std::invalid_argument("illicit_fraction must lie in (0, 1)");
    if (c.illicit_fraction * static_cast<double>(c.n_nodes) < 1.0)
        throw std::invalid_argument("illicit_fraction * n_nodes is below one node");
    if (c.cluster_bias < 0.0 || c.cluster_bias > 1.0)
        throw std::invalid_argument("cluster_bias must lie in [0, 1]");
    if (c.feature_dim < 1) throw std::invalid_argument("feature_dim must be >= 1");
}

} // namespace

SynthDataset generate_dataset(const SynthConfig& config) {
    check_config(config);
    const std::size_t n = config.n_nodes;

    SplitMix64 label_rng(derive_seed(config.rng_seed, "synth/labels"));
    SplitMix64 edge_rng(derive_seed(config.rng_seed, "synth/edges"));

    std::vector<std::uint8_t> illicit(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        illicit[i] = label_rng.unit() < config.illicit_fraction ? 1 : 0;
    // Training needs both classes; nudge the extremes rather than erroring
    // on an unlucky draw.
    if (std::count(illicit.begin(), illicit.end(), std::uint8_t{1}) == 0) illicit[0] = 1;
    if (std::count(illicit.begin(), illicit.end(), std::uint8_t{1}) ==
        static_cast<std::ptrdiff_t>(n))
        illicit[n - 1] = 0;

    // Node index order respects time, so drawing predecessors from smaller
    // indices keeps the graph acyclic and the edges older -> newer.
    SynthDataset out;
    out.nodes.resize(n);
    std::vector<std::uint8_t> guilty(n, 0);  // illicit or downstream of one
    std::vector<std::uint32_t> guilty_pool;
    std::vector<std::uint32_t> clean_pool;
    std::vector<std::uint32_t> preds;

    for (std::size_t i = 0; i < n; ++i) {
        preds.clear();
        if (i > 0) {
            const std::size_t want = 1 + static_cast<std::size_t>(edge_rng.below(3));
            const std::size_t degree = std::min(want, i);
            for (std::size_t e = 0; e < degree; ++e) {
                std::uint32_t cand = 0;
                bool found = false;
                for (int attempt = 0; attempt < 8 && !found; ++attempt) {
                    const bool biased = edge_rng.unit() < config.cluster_bias;
                    const auto& pool = illicit[i] ? guilty_pool : clean_pool;
                    if (biased && !pool.empty())
                        cand = pool[edge_rng.below(pool.size())];
                    else
                        cand = static_cast<std::uint32_t>(edge_rng.below(i));
                    found = std::find(preds.begin(), preds.end(), cand) == preds.end();
                }
                if (found) preds.push_back(cand);
            }
        }

        guilty[i] = illicit[i];
        for (std::uint32_t p : preds) {
            guilty[i] |= guilty[p];
            out.edges.emplace_back(static_cast<NodeId>(p) + 1, static_cast<NodeId>(i) + 1);
        }
        (guilty[i] ? guilty_pool : clean_pool).push_back(static_cast<std::uint32_t>(i));

        NodeRecord& rec = out.nodes[i];
        rec.id = static_cast<NodeId>(i) + 1;
        rec.time_step = 1 + static_cast<int>((i * static_cast<std::size_t>(config.n_timesteps)) / n);
        rec.label = illicit[i] ? NodeLabel::Illicit : NodeLabel::Licit;
        rec.features.resize(config.feature_dim);
        rec.features[0] = static_cast<double>(rec.time_step);
        SplitMix64 feat_rng(
            hash64(derive_seed(config.rng_seed, "synth/features") ^ hash64(i)));
        const double shift = illicit[i] ? config.feature_signal : 0.0;
        for (std::size_t d = 1; d < config.feature_dim; ++d)
            rec.features[d] = shift + feat_rng.normal();
    }
    return out;
}

void write_dataset(const SynthDataset& dataset, const std::string& dir) {
    const TransactionGraph graph = TransactionGraph::from_parts(dataset.nodes, dataset.edges);
    write_graph(graph, dir + "/features.csv", dir + "/classes.csv", dir + "/edges.csv");
}

} // namespace gw
