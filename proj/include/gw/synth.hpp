#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gw/graph.hpp"

namespace gw {

// Desk-scale dataset generator. Produces a temporal DAG in the three-file
// dataset format: labels planted at illicit_fraction, graph structure
// correlated with labels through cluster_bias, and feature columns drawn
// from class-conditional normals separated by feature_signal.
struct SynthConfig {
    std::size_t n_nodes = 2000;
    int n_timesteps = 10;
    double illicit_fraction = 0.1;
    // Probability that a node picks predecessors from the pool matching its
    // own class: illicit nodes prefer "guilty" ancestors (illicit or
    // downstream of one), licit nodes prefer clean ones. 0 = uniform wiring,
    // independent of labels.
    double cluster_bias = 0.5;
    std::size_t feature_dim = 8;  // columns incl. the leading time step
    double feature_signal = 1.0;  // mean shift of illicit feature columns
    std::uint64_t rng_seed = 0;
};

struct SynthDataset {
    std::vector<NodeRecord> nodes;
    std::vector<std::pair<NodeId, NodeId>> edges;
};

// Deterministic for a fixed rng_seed. Throws on infeasible configs
// (fractional counts below one node, empty dimensions).
SynthDataset generate_dataset(const SynthConfig& config);

// Writes <dir>/features.csv, <dir>/classes.csv, <dir>/edges.csv.
void write_dataset(const SynthDataset& dataset, const std::string& dir);

} // namespace gw
