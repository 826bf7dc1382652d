#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gw/features.hpp"
#include "gw/forest.hpp"
#include "gw/graph.hpp"
#include "gw/metrics.hpp"
#include "gw/reachability.hpp"
#include "gw/rng.hpp"
#include "gw/synth.hpp"
#include "gw/walker.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct DatasetArgs {
    std::string edges;
    std::string classes;
    std::string features;
};

struct ColumnRef {
    bool from_gwf = false;
    std::size_t index = 0;  // graph feature column or kGwFeatureNames index
    std::string name;
};

// The five-feature preset kept after importance filtering.
const std::vector<std::string> kGwfStarColumns = {"hit", "std", "illicit", "max", "mean"};

std::optional<std::size_t> gw_column_index(const std::string& name) {
    for (std::size_t i = 0; i < gw::kGwFeatureNames.size(); ++i)
        if (name == gw::kGwFeatureNames[i]) return i;
    return std::nullopt;
}

std::vector<ColumnRef> resolve_columns(const std::string& feature_set,
                                       const std::vector<std::string>& custom,
                                       std::size_t graph_feature_dim) {
    std::vector<ColumnRef> cols;
    const auto add_af = [&] {
        for (std::size_t i = 0; i < graph_feature_dim; ++i)
            cols.push_back({false, i, "f" + std::to_string(i + 1)});
    };
    const auto add_gwf_all = [&] {
        for (std::size_t i = 0; i < gw::kGwFeatureNames.size(); ++i)
            cols.push_back({true, i, gw::kGwFeatureNames[i]});
    };

    if (feature_set == "af") {
        add_af();
    } else if (feature_set == "gwf") {
        add_gwf_all();
    } else if (feature_set == "af+gwf") {
        add_af();
        add_gwf_all();
    } else if (feature_set == "af+gwf*") {
        add_af();
        for (const std::string& name : kGwfStarColumns)
            cols.push_back({true, *gw_column_index(name), name});
    } else if (feature_set == "custom") {
        for (const std::string& name : custom) {
            if (const auto gw_idx = gw_column_index(name)) {
                cols.push_back({true, *gw_idx, name});
                continue;
            }
            if (name.size() > 1 && name[0] == 'f') {
                std::size_t k = 0;
                bool numeric = true;
                for (std::size_t i = 1; i < name.size() && numeric; ++i) {
                    if (name[i] < '0' || name[i] > '9') numeric = false;
                    k = k * 10 + static_cast<std::size_t>(name[i] - '0');
                }
                if (numeric && k >= 1 && k <= graph_feature_dim) {
                    cols.push_back({false, k - 1, name});
                    continue;
                }
            }
            throw std::invalid_argument("unknown column '" + name + "' (expected f1..f" +
                                        std::to_string(graph_feature_dim) +
                                        " or a gw feature name)");
        }
        if (cols.empty()) throw std::invalid_argument("custom feature set resolved to nothing");
    } else {
        throw std::invalid_argument("unknown feature set '" + feature_set + "'");
    }
    return cols;
}

bool needs_gwf(const std::vector<ColumnRef>& cols) {
    return std::any_of(cols.begin(), cols.end(), [](const ColumnRef& c) { return c.from_gwf; });
}

struct Assembled {
    gw::DataMatrix X_train;
    gw::DataMatrix X_test;
    std::vector<int> y_train;
    std::vector<int> y_test;
    std::vector<int> steps_test;
    std::vector<std::string> column_names;
    std::vector<std::size_t> gwf_columns;  // positions of gw columns in the matrix
};

Assembled assemble(const gw::TransactionGraph& graph, const gw::TemporalSplit& split,
                   const std::vector<ColumnRef>& cols,
                   const std::map<gw::NodeId, gw::GwFeatureRow>& gwf_rows) {
    Assembled out;
    for (const ColumnRef& c : cols) {
        out.column_names.push_back(c.name);
        if (c.from_gwf) out.gwf_columns.push_back(out.column_names.size() - 1);
    }

    const auto fill = [&](const std::vector<gw::NodeIndex>& nodes, gw::DataMatrix& X,
                          std::vector<int>& y, std::vector<int>* steps) {
        X = gw::DataMatrix(nodes.size(), cols.size());
        y.reserve(nodes.size());
        for (std::size_t r = 0; r < nodes.size(); ++r) {
            const gw::NodeIndex idx = nodes[r];
            const gw::GwFeatureRow* row = nullptr;
            for (std::size_t c = 0; c < cols.size(); ++c) {
                if (cols[c].from_gwf) {
                    if (!row) {
                        const auto it = gwf_rows.find(graph.original_id(idx));
                        if (it == gwf_rows.end())
                            throw std::runtime_error(
                                "gw feature row missing for node " +
                                std::to_string(graph.original_id(idx)) +
                                "; re-run extract over all labeled nodes");
                        row = &it->second;
                    }
                    X.at(r, c) = gw::gw_feature_value(*row, cols[c].index);
                } else {
                    X.at(r, c) = graph.features(idx)[cols[c].index];
                }
            }
            y.push_back(graph.label(idx) == gw::NodeLabel::Illicit ? 1 : 0);
            if (steps) steps->push_back(graph.time_step(idx));
        }
    };
    fill(split.train, out.X_train, out.y_train, nullptr);
    fill(split.test, out.X_test, out.y_test, &out.steps_test);
    return out;
}

std::map<gw::NodeId, gw::GwFeatureRow> load_gwf_map(const std::string& path) {
    std::map<gw::NodeId, gw::GwFeatureRow> out;
    for (const gw::GwFeatureRow& row : gw::read_feature_table(path)) out[row.node_id] = row;
    return out;
}

std::vector<gw::NodeIndex> labeled_nodes(const gw::TransactionGraph& graph) {
    std::vector<gw::NodeIndex> out;
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        const auto idx = static_cast<gw::NodeIndex>(i);
        if (graph.label(idx) != gw::NodeLabel::Unknown) out.push_back(idx);
    }
    return out;
}

// ---- extract ----

struct ExtractArgs {
    DatasetArgs data;
    std::uint32_t walks = 100;
    std::string label_policy = "all-past";
    int train_cutoff = 34;
    std::uint64_t max_attempts = 0;
    std::uint64_t rng_seed = 0;
    int workers = 0;
    std::string out;
};

int cmd_extract(const ExtractArgs& args) {
    gw::TransactionGraph graph;
    try {
        graph = gw::load_graph(args.data.features, args.data.classes, args.data.edges);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }

    const auto t0 = std::chrono::steady_clock::now();
    gw::WalkConfig config;
    config.k_successful = args.walks;
    config.rng_seed = args.rng_seed;
    config.max_attempts_per_seed = args.max_attempts;
    config.policy = args.label_policy == "train-only"
                        ? gw::LabelPolicy::train_only(args.train_cutoff)
                        : gw::LabelPolicy::all_past();

    const std::vector<gw::NodeIndex> seeds = labeled_nodes(graph);
    const gw::ReachabilityMap reach =
        gw::compute_reachability(graph, config.policy, args.workers);
    const std::vector<gw::SeedWalkStats> stats =
        gw::run_all(graph, seeds, config, reach, args.workers);

    std::vector<gw::NodeId> seed_ids;
    seed_ids.reserve(seeds.size());
    for (gw::NodeIndex s : seeds) seed_ids.push_back(graph.original_id(s));
    const std::vector<gw::GwFeatureRow> table =
        gw::build_feature_table(stats, seed_ids, config.k_successful);
    gw::write_feature_table(args.out, table);

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::uint64_t attempts = 0;
    for (const gw::SeedWalkStats& s : stats) attempts += s.total_attempts;
    std::printf("extract: seeds=%zu reachable=%zu mean_attempts=%.2f wall=%.2fs -> %s\n",
                seeds.size(), stats.size(),
                stats.empty() ? 0.0
                              : static_cast<double>(attempts) / static_cast<double>(stats.size()),
                wall, args.out.c_str());
    return 0;
}

// ---- train-eval ----

struct TrainEvalArgs {
    DatasetArgs data;
    std::string gwf_path;
    std::string feature_set;
    std::vector<std::string> columns;
    int cutoff = 34;
    int trees = 50;
    int max_split_features = 50;
    double threshold = 0.5;
    std::uint64_t rng_seed = 0;
    int workers = 0;
    std::string report_path;
    std::string per_timestep_path;
    std::string roc_path;
    std::string model_path;
};

struct TrainedEval {
    gw::EvaluationReport report;
    gw::ForestModel model;
    Assembled data;
};

TrainedEval run_train_eval(const TrainEvalArgs& args, const gw::TransactionGraph& graph) {
    const std::vector<ColumnRef> cols =
        resolve_columns(args.feature_set, args.columns, graph.feature_dim());

    std::map<gw::NodeId, gw::GwFeatureRow> gwf_rows;
    if (needs_gwf(cols)) {
        if (args.gwf_path.empty())
            throw std::invalid_argument("feature set '" + args.feature_set +
                                        "' needs --gwf <file> from a prior extract run");
        gwf_rows = load_gwf_map(args.gwf_path);
    }

    const gw::TemporalSplit split = gw::temporal_split(graph, args.cutoff);
    if (split.test.empty()) throw std::invalid_argument("empty test split at this cutoff");
    if (split.train.empty()) throw std::invalid_argument("empty train split at this cutoff");

    TrainedEval out;
    out.data = assemble(graph, split, cols, gwf_rows);

    gw::ForestConfig config;
    config.n_trees = args.trees;
    config.max_split_features = args.max_split_features;
    config.rng_seed = args.rng_seed;
    out.model = gw::fit(out.data.X_train, out.data.y_train, config, args.workers);

    const std::vector<double> scores =
        gw::predict_proba(out.model, out.data.X_test, args.workers);
    out.report = gw::evaluate(out.data.y_test, scores, out.data.steps_test, args.threshold);
    return out;
}

void print_report(const gw::EvaluationReport& r) {
    std::printf("precision_illicit=%.4f recall_illicit=%.4f f1_illicit=%.4f\n",
                r.precision_illicit, r.recall_illicit, r.f1_illicit);
    std::printf("micro_f1=%.4f auc=%.4f recall@1%%=%.4f recall@5%%=%.4f recall@10%%=%.4f\n",
                r.micro_f1, r.auc, r.recall_at_fpr_1, r.recall_at_fpr_5, r.recall_at_fpr_10);
    std::printf("confusion: tp=%llu fp=%llu tn=%llu fn=%llu\n",
                static_cast<unsigned long long>(r.confusion.tp),
                static_cast<unsigned long long>(r.confusion.fp),
                static_cast<unsigned long long>(r.confusion.tn),
                static_cast<unsigned long long>(r.confusion.fn));
}

int cmd_train_eval(const TrainEvalArgs& args) {
    gw::TransactionGraph graph;
    try {
        graph = gw::load_graph(args.data.features, args.data.classes, args.data.edges);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }

    TrainedEval result;
    try {
        result = run_train_eval(args, graph);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::out_of_range& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }

    print_report(result.report);
    if (!args.report_path.empty()) gw::write_report_json(args.report_path, result.report);
    if (!args.per_timestep_path.empty())
        gw::write_per_timestep_csv(args.per_timestep_path, result.report.per_step);
    if (!args.roc_path.empty()) gw::write_roc_csv(args.roc_path, result.report.roc);
    if (!args.model_path.empty()) gw::save_model(args.model_path, result.model);
    return 0;
}

// ---- importance ----

struct ImportanceArgs {
    TrainEvalArgs base;
    int repeats = 5;
    int top = 0;  // 0 = keep every positive-drop feature
    std::string out;
};

int cmd_importance(const ImportanceArgs& args) {
    gw::TransactionGraph graph;
    try {
        graph = gw::load_graph(args.base.data.features, args.base.data.classes,
                               args.base.data.edges);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }

    TrainedEval result;
    try {
        result = run_train_eval(args.base, graph);
        if (result.data.gwf_columns.empty())
            throw std::invalid_argument("feature set '" + args.base.feature_set +
                                        "' has no gw columns to assess");
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::out_of_range& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }

    gw::ImportanceReport report = gw::permutation_importance(
        result.model, result.data.X_test, result.data.y_test, result.data.column_names,
        args.repeats, args.base.rng_seed, result.data.gwf_columns, args.base.workers);
    if (args.top > 0 && report.selected.size() > static_cast<std::size_t>(args.top))
        report.selected.resize(static_cast<std::size_t>(args.top));

    std::printf("baseline_f1=%.4f\n", report.baseline_f1);
    for (const gw::FeatureImportance& e : report.entries)
        std::printf("%-8s mean_f1_drop=%+.5f std=%.5f\n", e.name.c_str(), e.mean_f1_drop,
                    e.std_over_repeats);
    std::string selected;
    for (const std::string& name : report.selected) {
        if (!selected.empty()) selected += ',';
        selected += name;
    }
    std::printf("selected=%s\n", selected.c_str());
    if (!args.out.empty()) gw::write_importance_csv(args.out, report);
    return 0;
}

// ---- synth ----

struct SynthArgs {
    gw::SynthConfig config;
    std::string out_dir;
};

int cmd_synth(const SynthArgs& args) {
    gw::SynthDataset dataset;
    try {
        dataset = gw::generate_dataset(args.config);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    std::filesystem::create_directories(args.out_dir);
    gw::write_dataset(dataset, args.out_dir);
    std::size_t illicit = 0;
    for (const gw::NodeRecord& n : dataset.nodes)
        illicit += n.label == gw::NodeLabel::Illicit ? 1 : 0;
    std::printf("synth: nodes=%zu edges=%zu illicit=%zu -> %s\n", dataset.nodes.size(),
                dataset.edges.size(), illicit, args.out_dir.c_str());
    return 0;
}

void add_dataset_options(CLI::App* cmd, DatasetArgs& args) {
    cmd->add_option("--edges", args.edges, "edge list csv (txId1,txId2)")->required();
    cmd->add_option("--classes", args.classes, "classes csv (txId,class)")->required();
    cmd->add_option("--features", args.features, "headerless features csv")->required();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "guiltywalker: distance-to-illicit walk features and licit/illicit "
        "classification on temporal transaction graphs"};
    app.require_subcommand(1);

    ExtractArgs extract_args;
    auto* extract = app.add_subcommand(
        "extract", "sample backward walks and write the per-node feature table");
    add_dataset_options(extract, extract_args.data);
    extract->add_option("--walks", extract_args.walks, "successful walks per seed")
        ->default_val(100)
        ->check(CLI::PositiveNumber);
    extract->add_option("--label-policy", extract_args.label_policy,
                        "labels visible to walks")
        ->default_val("all-past")
        ->check(CLI::IsMember({"all-past", "train-only"}));
    extract->add_option("--train-cutoff", extract_args.train_cutoff,
                        "cutoff step for train-only policy")
        ->default_val(34);
    extract->add_option("--max-attempts", extract_args.max_attempts,
                        "attempt cap per seed (0 = unbounded)")
        ->default_val(0);
    extract->add_option("--rng-seed", extract_args.rng_seed, "global rng seed")->default_val(0);
    extract->add_option("--workers", extract_args.workers, "worker threads (0 = all cores)")
        ->default_val(0);
    extract->add_option("--out", extract_args.out, "output feature table csv")->required();

    TrainEvalArgs te_args;
    auto* train_eval = app.add_subcommand(
        "train-eval", "train the random forest on the temporal split and report metrics");
    add_dataset_options(train_eval, te_args.data);
    train_eval->add_option("--gwf", te_args.gwf_path, "feature table from extract");
    train_eval->add_option("--feature-set", te_args.feature_set, "af|gwf|af+gwf|af+gwf*|custom")
        ->required()
        ->check(CLI::IsMember({"af", "gwf", "af+gwf", "af+gwf*", "custom"}));
    train_eval->add_option("--columns", te_args.columns,
                           "column names for --feature-set custom (comma separated)")
        ->delimiter(',');
    train_eval->add_option("--cutoff", te_args.cutoff, "last train time step")->default_val(34);
    train_eval->add_option("--trees", te_args.trees, "number of trees")
        ->default_val(50)
        ->check(CLI::PositiveNumber);
    train_eval
        ->add_option("--max-split-features", te_args.max_split_features,
                     "features considered per split")
        ->default_val(50)
        ->check(CLI::PositiveNumber);
    train_eval->add_option("--threshold", te_args.threshold, "decision threshold")
        ->default_val(0.5);
    train_eval->add_option("--rng-seed", te_args.rng_seed, "global rng seed")->default_val(0);
    train_eval->add_option("--workers", te_args.workers, "worker threads (0 = all cores)")
        ->default_val(0);
    train_eval->add_option("--report", te_args.report_path, "write metrics json here");
    train_eval->add_option("--per-timestep", te_args.per_timestep_path,
                           "write per-step f1 csv here");
    train_eval->add_option("--roc", te_args.roc_path, "write roc points csv here");
    train_eval->add_option("--save-model", te_args.model_path, "write the trained forest here");

    ImportanceArgs imp_args;
    imp_args.base.feature_set = "af+gwf";
    auto* importance = app.add_subcommand(
        "importance", "rank gw feature columns by permutation importance");
    add_dataset_options(importance, imp_args.base.data);
    importance->add_option("--gwf", imp_args.base.gwf_path, "feature table from extract");
    importance
        ->add_option("--feature-set", imp_args.base.feature_set,
                     "af+gwf|gwf|af+gwf*|custom (must contain gw columns)")
        ->default_val("af+gwf")
        ->check(CLI::IsMember({"af", "gwf", "af+gwf", "af+gwf*", "custom"}));
    importance->add_option("--columns", imp_args.base.columns,
                           "column names for --feature-set custom")
        ->delimiter(',');
    importance->add_option("--cutoff", imp_args.base.cutoff, "last train time step")
        ->default_val(34);
    importance->add_option("--trees", imp_args.base.trees, "number of trees")
        ->default_val(50)
        ->check(CLI::PositiveNumber);
    importance
        ->add_option("--max-split-features", imp_args.base.max_split_features,
                     "features considered per split")
        ->default_val(50)
        ->check(CLI::PositiveNumber);
    importance->add_option("--repeats", imp_args.repeats, "shuffles per column")
        ->default_val(5)
        ->check(CLI::PositiveNumber);
    importance->add_option("--top", imp_args.top,
                           "keep only the N best columns in the selected list (0 = all "
                           "positive-drop columns)")
        ->default_val(0);
    importance->add_option("--rng-seed", imp_args.base.rng_seed, "global rng seed")
        ->default_val(0);
    importance->add_option("--workers", imp_args.base.workers, "worker threads (0 = all cores)")
        ->default_val(0);
    importance->add_option("--out", imp_args.out, "write ranked importance csv here");

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset in Elliptic format");
    synth->add_option("--nodes", synth_args.config.n_nodes, "node count")->default_val(2000);
    synth->add_option("--timesteps", synth_args.config.n_timesteps, "time step count")
        ->default_val(10);
    synth->add_option("--illicit-frac", synth_args.config.illicit_fraction,
                      "illicit label probability")
        ->default_val(0.1);
    synth->add_option("--cluster-bias", synth_args.config.cluster_bias,
                      "class-matched predecessor bias in [0,1]")
        ->default_val(0.5);
    synth->add_option("--feature-dim", synth_args.config.feature_dim,
                      "feature columns incl. time step")
        ->default_val(8);
    synth->add_option("--feature-signal", synth_args.config.feature_signal,
                      "class-conditional feature mean separation")
        ->default_val(1.0);
    synth->add_option("--rng-seed", synth_args.config.rng_seed, "global rng seed")
        ->default_val(0);
    synth->add_option("--out-dir", synth_args.out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*extract) return cmd_extract(extract_args);
        if (*train_eval) return cmd_train_eval(te_args);
        if (*importance) return cmd_importance(imp_args);
        if (*synth) return cmd_synth(synth_args);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitUsage;
}
