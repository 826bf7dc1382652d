#include "gw/forest.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "gw/rng.hpp"

namespace gw {

namespace {

double gini(std::size_t n, std::size_t pos) {
    if (n == 0) return 0.0;
    const double p = static_cast<double>(pos) / static_cast<double>(n);
    return 2.0 * p * (1.0 - p);  // 1 - p^2 - (1-p)^2
}

struct BestSplit {
    double gain = 0.0;
    std::int32_t feature = -1;
    double threshold = 0.0;
};

// One (value, label) pair per sample reaching the node; resorted per feature.
struct Scratch {
    std::vector<std::pair<double, int>> pairs;
    std::vector<std::uint32_t> feature_pool;
    std::vector<std::uint32_t> chosen;
    std::vector<std::uint32_t> left_idx;
    std::vector<std::uint32_t> right_idx;
};

BestSplit find_best_split(const DataMatrix& X, const std::vector<int>& y,
                          const std::vector<std::uint32_t>& samples, std::size_t pos_count,
                          std::size_t mtry, SplitMix64& rng, Scratch& scratch) {
    const std::size_t n = samples.size();
    const std::size_t width = X.cols;

    // Partial Fisher-Yates, then ascending order so equal gains resolve to
    // the lowest feature index.
    auto& pool = scratch.feature_pool;
    pool.resize(width);
    for (std::size_t i = 0; i < width; ++i) pool[i] = static_cast<std::uint32_t>(i);
    auto& chosen = scratch.chosen;
    chosen.clear();
    for (std::size_t j = 0; j < mtry; ++j) {
        const std::size_t pick = j + static_cast<std::size_t>(rng.below(width - j));
        std::swap(pool[j], pool[pick]);
        chosen.push_back(pool[j]);
    }
    std::sort(chosen.begin(), chosen.end());

    const double parent = gini(n, pos_count);
    const double n_inv = 1.0 / static_cast<double>(n);

    BestSplit best;
    auto& pairs = scratch.pairs;
    for (std::uint32_t f : chosen) {
        pairs.clear();
        for (std::uint32_t s : samples) pairs.emplace_back(X.at(s, f), y[s]);
        std::sort(pairs.begin(), pairs.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        if (pairs.front().first == pairs.back().first) continue;  // constant column

        std::size_t left_n = 0;
        std::size_t left_pos = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            ++left_n;
            left_pos += static_cast<std::size_t>(pairs[i].second);
            const double v = pairs[i].first;
            const double next = pairs[i + 1].first;
            if (v == next) continue;
            double threshold = v + 0.5 * (next - v);
            if (!(threshold > v)) threshold = next;  // adjacent doubles

            const std::size_t right_n = n - left_n;
            const std::size_t right_pos = pos_count - left_pos;
            const double weighted = (static_cast<double>(left_n) * gini(left_n, left_pos) +
                                     static_cast<double>(right_n) * gini(right_n, right_pos)) *
                                    n_inv;
            const double gain = parent - weighted;
            if (gain > best.gain) {
                best.gain = gain;
                best.feature = static_cast<std::int32_t>(f);
                best.threshold = threshold;
            }
        }
    }
    return best;
}

DecisionTree grow_tree(const DataMatrix& X, const std::vector<int>& y,
                       const ForestConfig& config, std::size_t mtry,
                       std::uint64_t tree_seed) {
    SplitMix64 rng(tree_seed);
    const std::size_t n = X.rows;

    std::vector<std::uint32_t> root_samples(n);
    if (config.bootstrap) {
        for (std::size_t i = 0; i < n; ++i)
            root_samples[i] = static_cast<std::uint32_t>(rng.below(n));
    } else {
        for (std::size_t i = 0; i < n; ++i) root_samples[i] = static_cast<std::uint32_t>(i);
    }

    DecisionTree tree;
    Scratch scratch;

    struct Task {
        std::vector<std::uint32_t> samples;
        std::int32_t node;
        int depth;
    };
    std::vector<Task> stack;
    tree.nodes.emplace_back();
    stack.push_back({std::move(root_samples), 0, 0});

    while (!stack.empty()) {
        Task task = std::move(stack.back());
        stack.pop_back();

        std::size_t pos = 0;
        for (std::uint32_t s : task.samples) pos += static_cast<std::size_t>(y[s]);
        const std::size_t cnt = task.samples.size();
        TreeNode& node = tree.nodes[static_cast<std::size_t>(task.node)];
        node.positive_fraction = static_cast<double>(pos) / static_cast<double>(cnt);

        const bool pure = pos == 0 || pos == cnt;
        const bool too_small = cnt < static_cast<std::size_t>(config.min_samples_split);
        const bool too_deep = config.max_depth > 0 && task.depth >= config.max_depth;
        if (pure || too_small || too_deep) continue;

        const BestSplit split =
            find_best_split(X, y, task.samples, pos, mtry, rng, scratch);
        if (split.feature < 0 || !(split.gain > 0.0)) continue;

        scratch.left_idx.clear();
        scratch.right_idx.clear();
        for (std::uint32_t s : task.samples) {
            if (X.at(s, static_cast<std::size_t>(split.feature)) < split.threshold)
                scratch.left_idx.push_back(s);
            else
                scratch.right_idx.push_back(s);
        }

        const auto left_id = static_cast<std::int32_t>(tree.nodes.size());
        const auto right_id = left_id + 1;
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        TreeNode& parent = tree.nodes[static_cast<std::size_t>(task.node)];
        parent.feature = split.feature;
        parent.threshold = split.threshold;
        parent.left = left_id;
        parent.right = right_id;

        // Right pushed first so the left child is processed next (pre-order).
        stack.push_back({scratch.right_idx, right_id, task.depth + 1});
        stack.push_back({scratch.left_idx, left_id, task.depth + 1});
    }
    return tree;
}

void check_training_input(const DataMatrix& X, const std::vector<int>& y,
                          const ForestConfig& config) {
    if (config.n_trees < 1) throw std::invalid_argument("n_trees must be >= 1");
    if (config.max_split_features < 1)
        throw std::invalid_argument("max_split_features must be >= 1");
    if (config.min_samples_split < 2)
        throw std::invalid_argument("min_samples_split must be >= 2");
    if (X.rows < 2) throw std::invalid_argument("need at least 2 training rows");
    if (X.rows != y.size()) throw std::invalid_argument("X/y row count mismatch");
    if (X.cols == 0) throw std::invalid_argument("X has no feature columns");

    bool has_pos = false;
    bool has_neg = false;
    for (int v : y) {
        if (v != 0 && v != 1) throw std::invalid_argument("labels must be 0 or 1");
        (v == 1 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) throw std::invalid_argument("single-class training set");

    for (double v : X.values)
        if (!std::isfinite(v))
            throw std::invalid_argument("non-finite value in training matrix");
}

ForestModel fit_impl(const DataMatrix& X, const std::vector<int>& y,
                     const ForestConfig& config, int workers, bool parallel) {
    check_training_input(X, y, config);

    ForestModel model;
    model.config = config;
    model.feature_count = X.cols;
    std::size_t pos = 0;
    for (int v : y) pos += static_cast<std::size_t>(v);
    model.class_prior = static_cast<double>(pos) / static_cast<double>(y.size());

    const std::size_t mtry =
        std::min<std::size_t>(static_cast<std::size_t>(config.max_split_features), X.cols);
    const std::uint64_t forest_seed = derive_seed(config.rng_seed, "forest");

    model.trees.resize(static_cast<std::size_t>(config.n_trees));
    if (parallel) {
        const int nt = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for num_threads(nt) schedule(dynamic)
        for (int t = 0; t < config.n_trees; ++t) {
            model.trees[static_cast<std::size_t>(t)] =
                grow_tree(X, y, config, mtry,
                          hash64(forest_seed ^ hash64(static_cast<std::uint64_t>(t))));
        }
    } else {
        for (int t = 0; t < config.n_trees; ++t) {
            model.trees[static_cast<std::size_t>(t)] =
                grow_tree(X, y, config, mtry,
                          hash64(forest_seed ^ hash64(static_cast<std::uint64_t>(t))));
        }
    }
    return model;
}

} // namespace

ForestModel fit(const DataMatrix& X, const std::vector<int>& y, const ForestConfig& config,
                int workers) {
    return fit_impl(X, y, config, workers, true);
}

ForestModel fit_serial(const DataMatrix& X, const std::vector<int>& y,
                       const ForestConfig& config) {
    return fit_impl(X, y, config, 0, false);
}

std::vector<double> predict_proba(const ForestModel& model, const DataMatrix& X, int workers) {
    if (X.cols != model.feature_count)
        throw std::invalid_argument("matrix width " + std::to_string(X.cols) +
                                    " does not match model feature count " +
                                    std::to_string(model.feature_count));
    std::vector<double> scores(X.rows, 0.0);
    const double inv = 1.0 / static_cast<double>(model.trees.size());
    const int nt = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for num_threads(nt) schedule(static)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(X.rows); ++r) {
        double sum = 0.0;
        const auto row = X.row(static_cast<std::size_t>(r));
        for (const DecisionTree& tree : model.trees) sum += tree.predict(row);
        scores[static_cast<std::size_t>(r)] = sum * inv;
    }
    return scores;
}

std::vector<int> predict(const ForestModel& model, const DataMatrix& X, double threshold,
                         int workers) {
    const std::vector<double> scores = predict_proba(model, X, workers);
    std::vector<int> labels(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) labels[i] = scores[i] >= threshold ? 1 : 0;
    return labels;
}

void save_model(const std::string& path, const ForestModel& model) {
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open file for writing: " + path);
    std::fprintf(f, "gwforest 1\n");
    std::fprintf(f, "feature_count %zu\n", model.feature_count);
    std::fprintf(f, "class_prior %a\n", model.class_prior);
    std::fprintf(f, "config %d %d %d %d %d %llu\n", model.config.n_trees,
                 model.config.max_split_features, model.config.min_samples_split,
                 model.config.max_depth, model.config.bootstrap ? 1 : 0,
                 static_cast<unsigned long long>(model.config.rng_seed));
    std::fprintf(f, "trees %zu\n", model.trees.size());
    for (const DecisionTree& tree : model.trees) {
        std::fprintf(f, "tree %zu\n", tree.nodes.size());
        for (const TreeNode& n : tree.nodes) {
            if (n.is_leaf())
                std::fprintf(f, "l %a\n", n.positive_fraction);
            else
                std::fprintf(f, "n %d %a %d %d\n", n.feature, n.threshold, n.left, n.right);
        }
    }
    std::fclose(f);
}

ForestModel load_model(const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("cannot open model file: " + path);
    const auto fail = [&](const char* what) {
        std::fclose(f);
        throw std::runtime_error(path + ": " + what);
    };

    ForestModel model;
    char line[256];
    int version = 0;
    if (!std::fgets(line, sizeof(line), f) || std::sscanf(line, "gwforest %d", &version) != 1 ||
        version != 1)
        fail("not a gwforest v1 file");
    if (!std::fgets(line, sizeof(line), f) ||
        std::sscanf(line, "feature_count %zu", &model.feature_count) != 1)
        fail("bad feature_count");
    if (!std::fgets(line, sizeof(line), f) ||
        std::sscanf(line, "class_prior %la", &model.class_prior) != 1)
        fail("bad class_prior");
    {
        int bootstrap = 0;
        unsigned long long seed = 0;
        if (!std::fgets(line, sizeof(line), f) ||
            std::sscanf(line, "config %d %d %d %d %d %llu", &model.config.n_trees,
                        &model.config.max_split_features, &model.config.min_samples_split,
                        &model.config.max_depth, &bootstrap, &seed) != 6)
            fail("bad config line");
        model.config.bootstrap = bootstrap != 0;
        model.config.rng_seed = seed;
    }
    std::size_t n_trees = 0;
    if (!std::fgets(line, sizeof(line), f) || std::sscanf(line, "trees %zu", &n_trees) != 1)
        fail("bad trees line");
    model.trees.resize(n_trees);
    for (DecisionTree& tree : model.trees) {
        std::size_t n_nodes = 0;
        if (!std::fgets(line, sizeof(line), f) || std::sscanf(line, "tree %zu", &n_nodes) != 1)
            fail("bad tree header");
        tree.nodes.resize(n_nodes);
        for (TreeNode& node : tree.nodes) {
            if (!std::fgets(line, sizeof(line), f)) fail("truncated tree");
            if (line[0] == 'l') {
                if (std::sscanf(line, "l %la", &node.positive_fraction) != 1)
                    fail("bad leaf line");
                node.feature = -1;
            } else if (line[0] == 'n') {
                if (std::sscanf(line, "n %d %la %d %d", &node.feature, &node.threshold,
                                &node.left, &node.right) != 4)
                    fail("bad node line");
                if (node.feature < 0 ||
                    static_cast<std::size_t>(node.feature) >= model.feature_count)
                    fail("node feature index out of range");
            } else {
                fail("unknown node tag");
            }
        }
    }
    std::fclose(f);
    return model;
}

} // namespace gw
