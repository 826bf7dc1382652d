#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gw/forest.hpp"

namespace gw {

// Illicit is the positive class everywhere.
struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }
};

ConfusionMatrix confusion(const std::vector<int>& labels, const std::vector<int>& predictions);

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Degenerate denominators yield 0 by convention, never an error.
Prf precision_recall_f1(const ConfusionMatrix& cm);
double f1_score(double precision, double recall);

// Micro-averaged F1 over both classes; equals accuracy for single-label
// binary classification.
double micro_f1(const std::vector<int>& labels, const std::vector<int>& predictions);

struct RocPoint {
    double threshold = 0.0;  // predict positive when score >= threshold
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;  // from (0,0) to (1,1), tied scores grouped
    double auc = 0.0;              // trapezoidal
};

// Requires both classes present.
RocCurve roc_and_auc(const std::vector<int>& labels, const std::vector<double>& scores);

// Maximum TPR among ROC points with FPR <= fpr_cap.
double recall_at_fpr(const RocCurve& curve, double fpr_cap);
double recall_at_fpr(const std::vector<int>& labels, const std::vector<double>& scores,
                     double fpr_cap);

struct PerTimestepF1 {
    std::map<int, double> f1_by_step;
    std::set<int> steps_without_illicit;  // mapped to 0 and flagged
};

PerTimestepF1 per_timestep_f1(const std::vector<int>& labels,
                              const std::vector<int>& predictions,
                              const std::vector<int>& time_steps);

struct TpDiff {
    std::vector<std::size_t> gained;  // label 1, b correct where a missed
    std::vector<std::size_t> lost;    // label 1, a correct where b missed
};

TpDiff tp_diff(const std::vector<int>& labels, const std::vector<int>& preds_a,
               const std::vector<int>& preds_b);

struct EvaluationReport {
    double precision_illicit = 0.0;
    double recall_illicit = 0.0;
    double f1_illicit = 0.0;
    double micro_f1 = 0.0;
    double auc = 0.0;
    double recall_at_fpr_1 = 0.0;
    double recall_at_fpr_5 = 0.0;
    double recall_at_fpr_10 = 0.0;
    ConfusionMatrix confusion;
    RocCurve roc;
    PerTimestepF1 per_step;
};

// All test-set metrics in one pass over scores at the given decision
// threshold. Requires both classes in labels.
EvaluationReport evaluate(const std::vector<int>& labels, const std::vector<double>& scores,
                          const std::vector<int>& time_steps, double threshold = 0.5);

void write_report_json(const std::string& path, const EvaluationReport& report);
void write_roc_csv(const std::string& path, const RocCurve& curve);
void write_per_timestep_csv(const std::string& path, const PerTimestepF1& per_step);

struct FeatureImportance {
    std::string name;
    std::size_t column = 0;
    double mean_f1_drop = 0.0;
    double std_over_repeats = 0.0;
};

struct ImportanceReport {
    double baseline_f1 = 0.0;
    std::vector<FeatureImportance> entries;  // ranked by drop, descending
    std::vector<std::string> selected;       // entries with positive mean drop
};

// Permutation importance on the illicit F1 at threshold 0.5: shuffle one
// column of X (a fresh permutation per repeat), re-score, record the drop
// versus the unshuffled baseline. columns selects which features to assess
// (empty = all). Deterministic for a fixed rng_seed, any worker count.
ImportanceReport permutation_importance(const ForestModel& model, const DataMatrix& X,
                                        const std::vector<int>& y,
                                        const std::vector<std::string>& feature_names,
                                        int repeats, std::uint64_t rng_seed,
                                        const std::vector<std::size_t>& columns = {},
                                        int workers = 0);
ImportanceReport permutation_importance_serial(const ForestModel& model, const DataMatrix& X,
                                               const std::vector<int>& y,
                                               const std::vector<std::string>& feature_names,
                                               int repeats, std::uint64_t rng_seed,
                                               const std::vector<std::size_t>& columns = {});

void write_importance_csv(const std::string& path, const ImportanceReport& report);

} // namespace gw
