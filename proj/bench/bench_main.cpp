// Timing comparison of the serial reference kernels against the OpenMP
// variants on a generated dataset, with a bitwise equality check so the
// numbers always describe identical work.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "gw/features.hpp"
#include "gw/forest.hpp"
#include "gw/metrics.hpp"
#include "gw/synth.hpp"
#include "gw/walker.hpp"

using namespace gw;
using Clock = std::chrono::steady_clock;

namespace {

template <typename Fn>
double time_s(Fn&& fn) {
    const auto t0 = Clock::now();
    fn();
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void row(const char* label, double serial_s, double parallel_s, bool identical) {
    std::printf("%-28s %9.3fs %9.3fs %7.2fx   %s\n", label, serial_s, parallel_s,
                serial_s / parallel_s, identical ? "identical" : "MISMATCH");
}

} // namespace

int main(int argc, char** argv) {
    std::size_t n_nodes = 60000;
    if (argc > 1) n_nodes = std::stoull(argv[1]);
    const int threads = omp_get_max_threads();
    std::printf("nodes=%zu threads=%d\n", n_nodes, threads);
    std::printf("%-28s %10s %10s %8s\n", "kernel", "serial", "openmp", "speedup");

    SynthConfig synth_config;
    synth_config.n_nodes = n_nodes;
    synth_config.n_timesteps = 20;
    synth_config.illicit_fraction = 0.08;
    synth_config.cluster_bias = 0.6;
    synth_config.feature_dim = 24;
    synth_config.feature_signal = 0.6;
    synth_config.rng_seed = 1;
    const SynthDataset data = generate_dataset(synth_config);
    const TransactionGraph graph = TransactionGraph::from_parts(data.nodes, data.edges);

    // reachability
    const LabelPolicy policy = LabelPolicy::all_past();
    ReachabilityMap reach_serial;
    ReachabilityMap reach_par;
    const double reach_s = time_s([&] { reach_serial = compute_reachability_serial(graph, policy); });
    const double reach_p = time_s([&] { reach_par = compute_reachability(graph, policy); });
    row("reachability", reach_s, reach_p,
        reach_serial.can_reach_illicit == reach_par.can_reach_illicit);

    // walker
    WalkConfig walk_config;
    walk_config.k_successful = 100;
    walk_config.rng_seed = 7;
    std::vector<NodeIndex> seeds(graph.node_count());
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = static_cast<NodeIndex>(i);
    std::vector<SeedWalkStats> walks_serial;
    std::vector<SeedWalkStats> walks_par;
    const double walk_s =
        time_s([&] { walks_serial = run_all_serial(graph, seeds, walk_config, reach_par); });
    const double walk_p =
        time_s([&] { walks_par = run_all(graph, seeds, walk_config, reach_par); });
    bool walks_same = walks_serial.size() == walks_par.size();
    for (std::size_t i = 0; walks_same && i < walks_serial.size(); ++i)
        walks_same = walks_serial[i].seed_id == walks_par[i].seed_id &&
                     walks_serial[i].successful_lengths == walks_par[i].successful_lengths &&
                     walks_serial[i].total_attempts == walks_par[i].total_attempts;
    row("walker (k=100)", walk_s, walk_p, walks_same);

    // forest on the assembled af+gwf matrix
    std::vector<NodeId> ids(graph.node_count());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = graph.original_id(seeds[i]);
    const auto table = build_feature_table(walks_par, ids, walk_config.k_successful);
    const TemporalSplit split = temporal_split(graph, 14);
    const std::size_t width = graph.feature_dim() + 9;
    DataMatrix X(split.train.size(), width);
    std::vector<int> y(split.train.size());
    for (std::size_t r = 0; r < split.train.size(); ++r) {
        const NodeIndex idx = split.train[r];
        const auto feats = graph.features(idx);
        for (std::size_t c = 0; c < feats.size(); ++c) X.at(r, c) = feats[c];
        for (std::size_t c = 0; c < 9; ++c)
            X.at(r, feats.size() + c) = gw_feature_value(table[idx], c);
        y[r] = graph.label(idx) == NodeLabel::Illicit ? 1 : 0;
    }
    ForestConfig forest_config;
    forest_config.rng_seed = 3;
    ForestModel model_serial;
    ForestModel model_par;
    const double fit_s = time_s([&] { model_serial = fit_serial(X, y, forest_config); });
    const double fit_p = time_s([&] { model_par = fit(X, y, forest_config); });
    const auto scores_serial = predict_proba(model_serial, X);
    const auto scores_par = predict_proba(model_par, X);
    row("forest fit (50 trees)", fit_s, fit_p, scores_serial == scores_par);

    // permutation importance over the gw columns
    std::vector<std::string> names;
    for (std::size_t c = 0; c < graph.feature_dim(); ++c)
        names.push_back("f" + std::to_string(c + 1));
    for (const char* n : kGwFeatureNames) names.emplace_back(n);
    std::vector<std::size_t> gw_cols;
    for (std::size_t c = 0; c < 9; ++c) gw_cols.push_back(graph.feature_dim() + c);
    ImportanceReport imp_serial;
    ImportanceReport imp_par;
    const double imp_s = time_s([&] {
        imp_serial = permutation_importance_serial(model_par, X, y, names, 3, 5, gw_cols);
    });
    const double imp_p = time_s(
        [&] { imp_par = permutation_importance(model_par, X, y, names, 3, 5, gw_cols); });
    bool imp_same = imp_serial.entries.size() == imp_par.entries.size();
    for (std::size_t i = 0; imp_same && i < imp_serial.entries.size(); ++i)
        imp_same = imp_serial.entries[i].name == imp_par.entries[i].name &&
                   imp_serial.entries[i].mean_f1_drop == imp_par.entries[i].mean_f1_drop;
    row("permutation importance", imp_s, imp_p, imp_same);

    return 0;
}
