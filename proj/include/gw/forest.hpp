#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gw {

// Row-major dense matrix of feature values.
struct DataMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    DataMatrix() = default;
    DataMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
};

struct ForestConfig {
    int n_trees = 50;
    int max_split_features = 50;  // features considered per split, clamped to width
    int min_samples_split = 2;
    int max_depth = 0;  // 0 = unlimited
    bool bootstrap = true;
    std::uint64_t rng_seed = 0;
};

// Binary tree in a flat array; feature < 0 marks a leaf. Internal nodes
// route x[feature] < threshold to left, otherwise right.
struct TreeNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double positive_fraction = 0.0;  // leaf payload

    bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes;

    double predict(std::span<const double> x) const {
        std::int32_t i = 0;
        while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
            const TreeNode& n = nodes[static_cast<std::size_t>(i)];
            i = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(i)].positive_fraction;
    }
};

struct ForestModel {
    ForestConfig config;
    std::size_t feature_count = 0;
    double class_prior = 0.0;  // positive fraction of the training set
    std::vector<DecisionTree> trees;
};

// CART with Gini impurity: bootstrap resample per tree, a fresh uniform
// feature subset per split, thresholds at midpoints of adjacent distinct
// values, ties broken toward the lowest feature index then lowest threshold.
// Per-tree RNG streams keep the model identical for any worker count.
// Requires both classes present and finite values.
ForestModel fit(const DataMatrix& X, const std::vector<int>& y, const ForestConfig& config,
                int workers = 0);
ForestModel fit_serial(const DataMatrix& X, const std::vector<int>& y,
                       const ForestConfig& config);

// Mean leaf positive fraction over trees, in [0, 1].
std::vector<double> predict_proba(const ForestModel& model, const DataMatrix& X,
                                  int workers = 0);
// score >= threshold => 1
std::vector<int> predict(const ForestModel& model, const DataMatrix& X,
                         double threshold = 0.5, int workers = 0);

// Versioned text format with hexfloat values; round-trips bit-exactly.
void save_model(const std::string& path, const ForestModel& model);
ForestModel load_model(const std::string& path);

} // namespace gw
