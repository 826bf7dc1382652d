#include "gw/metrics.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "gw/csv.hpp"
#include "gw/rng.hpp"

namespace gw {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
    if (a != b)
        throw std::invalid_argument(std::string(what) + ": length mismatch (" +
                                    std::to_string(a) + " vs " + std::to_string(b) + ")");
}

void write_text_file(const std::string& path, const std::string& content) {
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open file for writing: " + path);
    const std::size_t written = std::fwrite(content.data(), 1, content.size(), f);
    std::fclose(f);
    if (written != content.size()) throw std::runtime_error("write failed: " + path);
}

} // namespace

ConfusionMatrix confusion(const std::vector<int>& labels, const std::vector<int>& predictions) {
    require_same_length(labels.size(), predictions.size(), "confusion");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1)
            (predictions[i] == 1 ? cm.tp : cm.fn)++;
        else
            (predictions[i] == 1 ? cm.fp : cm.tn)++;
    }
    return cm;
}

double f1_score(double precision, double recall) {
    const double denom = precision + recall;
    return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

Prf precision_recall_f1(const ConfusionMatrix& cm) {
    Prf out;
    const std::uint64_t pred_pos = cm.tp + cm.fp;
    const std::uint64_t actual_pos = cm.tp + cm.fn;
    out.precision = pred_pos > 0 ? static_cast<double>(cm.tp) / static_cast<double>(pred_pos) : 0.0;
    out.recall = actual_pos > 0 ? static_cast<double>(cm.tp) / static_cast<double>(actual_pos) : 0.0;
    out.f1 = f1_score(out.precision, out.recall);
    return out;
}

double micro_f1(const std::vector<int>& labels, const std::vector<int>& predictions) {
    require_same_length(labels.size(), predictions.size(), "micro_f1");
    if (labels.empty()) return 0.0;
    // Micro-aggregated counts over both classes. Every miss is one FP for
    // the predicted class and one FN for the true class, so micro precision
    // and recall coincide.
    std::uint64_t tp_sum = 0;
    std::uint64_t fp_sum = 0;
    std::uint64_t fn_sum = 0;
    for (int cls : {0, 1}) {
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const bool is_cls = labels[i] == cls;
            const bool pred_cls = predictions[i] == cls;
            if (is_cls && pred_cls) ++tp_sum;
            if (!is_cls && pred_cls) ++fp_sum;
            if (is_cls && !pred_cls) ++fn_sum;
        }
    }
    // Aggregate form 2TP/(2TP+FP+FN): one rounding only, so the accuracy
    // identity for single-label binary tasks holds bit-exactly.
    return static_cast<double>(2 * tp_sum) /
           static_cast<double>(2 * tp_sum + fp_sum + fn_sum);
}

RocCurve roc_and_auc(const std::vector<int>& labels, const std::vector<double>& scores) {
    require_same_length(labels.size(), scores.size(), "roc_and_auc");
    std::uint64_t n_pos = 0;
    for (int l : labels) n_pos += static_cast<std::uint64_t>(l == 1);
    const std::uint64_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("roc_and_auc requires both classes");

    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });

    RocCurve curve;
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        // Samples sharing a score move across the threshold together.
        while (i < order.size() && scores[order[i]] == s) {
            if (labels[order[i]] == 1)
                ++tp;
            else
                ++fp;
            ++i;
        }
        curve.points.push_back({s, static_cast<double>(fp) / static_cast<double>(n_neg),
                                static_cast<double>(tp) / static_cast<double>(n_pos)});
    }

    double auc = 0.0;
    for (std::size_t p = 1; p < curve.points.size(); ++p) {
        const RocPoint& a = curve.points[p - 1];
        const RocPoint& b = curve.points[p];
        auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
    }
    curve.auc = auc;
    return curve;
}

double recall_at_fpr(const RocCurve& curve, double fpr_cap) {
    if (fpr_cap <= 0.0 || fpr_cap >= 1.0)
        throw std::invalid_argument("fpr_cap must lie in (0, 1)");
    double best = 0.0;
    for (const RocPoint& p : curve.points)
        if (p.fpr <= fpr_cap) best = std::max(best, p.tpr);
    return best;
}

double recall_at_fpr(const std::vector<int>& labels, const std::vector<double>& scores,
                     double fpr_cap) {
    return recall_at_fpr(roc_and_auc(labels, scores), fpr_cap);
}

PerTimestepF1 per_timestep_f1(const std::vector<int>& labels,
                              const std::vector<int>& predictions,
                              const std::vector<int>& time_steps) {
    require_same_length(labels.size(), predictions.size(), "per_timestep_f1");
    require_same_length(labels.size(), time_steps.size(), "per_timestep_f1 steps");

    std::map<int, ConfusionMatrix> by_step;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ConfusionMatrix& cm = by_step[time_steps[i]];
        if (labels[i] == 1)
            (predictions[i] == 1 ? cm.tp : cm.fn)++;
        else
            (predictions[i] == 1 ? cm.fp : cm.tn)++;
    }

    PerTimestepF1 out;
    for (const auto& [step, cm] : by_step) {
        out.f1_by_step[step] = precision_recall_f1(cm).f1;
        if (cm.tp + cm.fn == 0) out.steps_without_illicit.insert(step);
    }
    return out;
}

TpDiff tp_diff(const std::vector<int>& labels, const std::vector<int>& preds_a,
               const std::vector<int>& preds_b) {
    require_same_length(labels.size(), preds_a.size(), "tp_diff");
    require_same_length(labels.size(), preds_b.size(), "tp_diff");
    TpDiff out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 1) continue;
        if (preds_b[i] == 1 && preds_a[i] == 0) out.gained.push_back(i);
        if (preds_a[i] == 1 && preds_b[i] == 0) out.lost.push_back(i);
    }
    return out;
}

EvaluationReport evaluate(const std::vector<int>& labels, const std::vector<double>& scores,
                          const std::vector<int>& time_steps, double threshold) {
    require_same_length(labels.size(), scores.size(), "evaluate");
    if (labels.empty()) throw std::invalid_argument("evaluate: empty test set");

    std::vector<int> preds(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) preds[i] = scores[i] >= threshold ? 1 : 0;

    EvaluationReport report;
    report.confusion = confusion(labels, preds);
    const Prf prf = precision_recall_f1(report.confusion);
    report.precision_illicit = prf.precision;
    report.recall_illicit = prf.recall;
    report.f1_illicit = prf.f1;
    report.micro_f1 = micro_f1(labels, preds);
    report.roc = roc_and_auc(labels, scores);
    report.auc = report.roc.auc;
    report.recall_at_fpr_1 = recall_at_fpr(report.roc, 0.01);
    report.recall_at_fpr_5 = recall_at_fpr(report.roc, 0.05);
    report.recall_at_fpr_10 = recall_at_fpr(report.roc, 0.10);
    report.per_step = per_timestep_f1(labels, preds, time_steps);
    return report;
}

void write_report_json(const std::string& path, const EvaluationReport& report) {
    nlohmann::ordered_json j;
    j["precision_illicit"] = report.precision_illicit;
    j["recall_illicit"] = report.recall_illicit;
    j["f1_illicit"] = report.f1_illicit;
    j["micro_f1"] = report.micro_f1;
    j["auc"] = report.auc;
    j["recall_at_fpr_1"] = report.recall_at_fpr_1;
    j["recall_at_fpr_5"] = report.recall_at_fpr_5;
    j["recall_at_fpr_10"] = report.recall_at_fpr_10;
    j["tp"] = report.confusion.tp;
    j["fp"] = report.confusion.fp;
    j["tn"] = report.confusion.tn;
    j["fn"] = report.confusion.fn;
    write_text_file(path, j.dump(2) + "\n");
}

void write_roc_csv(const std::string& path, const RocCurve& curve) {
    std::string out = "threshold,fpr,tpr\n";
    for (const RocPoint& p : curve.points) {
        csv::append_double(out, p.threshold);
        out += ',';
        csv::append_double(out, p.fpr);
        out += ',';
        csv::append_double(out, p.tpr);
        out += '\n';
    }
    write_text_file(path, out);
}

void write_per_timestep_csv(const std::string& path, const PerTimestepF1& per_step) {
    std::string out = "time_step,f1_illicit\n";
    for (const auto& [step, f1] : per_step.f1_by_step) {
        out += std::to_string(step);
        out += ',';
        csv::append_double(out, f1);
        out += '\n';
    }
    write_text_file(path, out);
}

namespace {

double illicit_f1_at_half(const ForestModel& model, const DataMatrix& X,
                          const std::vector<int>& y) {
    const std::vector<int> preds = predict(model, X, 0.5, 1);
    return precision_recall_f1(confusion(y, preds)).f1;
}

ImportanceReport importance_impl(const ForestModel& model, const DataMatrix& X,
                                 const std::vector<int>& y,
                                 const std::vector<std::string>& feature_names, int repeats,
                                 std::uint64_t rng_seed,
                                 const std::vector<std::size_t>& columns, int workers,
                                 bool parallel) {
    if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
    require_same_length(X.rows, y.size(), "permutation_importance");
    require_same_length(X.cols, feature_names.size(), "permutation_importance names");
    if (X.cols != model.feature_count)
        throw std::invalid_argument("matrix width does not match model feature count");

    std::vector<std::size_t> cols = columns;
    if (cols.empty()) {
        cols.resize(X.cols);
        std::iota(cols.begin(), cols.end(), 0);
    }
    for (std::size_t c : cols)
        if (c >= X.cols) throw std::invalid_argument("importance column out of range");

    ImportanceReport report;
    report.baseline_f1 = illicit_f1_at_half(model, X, y);

    const std::uint64_t imp_seed = derive_seed(rng_seed, "importance");
    std::vector<FeatureImportance> entries(cols.size());

    const auto assess_one = [&](std::size_t ci) {
        const std::size_t col = cols[ci];
        DataMatrix Xp = X;
        std::vector<double> original(X.rows);
        for (std::size_t r = 0; r < X.rows; ++r) original[r] = X.at(r, col);

        double sum = 0.0;
        double sum_sq = 0.0;
        std::vector<double> shuffled(X.rows);
        for (int rep = 0; rep < repeats; ++rep) {
            SplitMix64 rng(hash64(hash64(imp_seed ^ col) ^ static_cast<std::uint64_t>(rep)));
            shuffled = original;
            for (std::size_t r = X.rows; r > 1; --r)
                std::swap(shuffled[r - 1], shuffled[rng.below(r)]);
            for (std::size_t r = 0; r < X.rows; ++r) Xp.at(r, col) = shuffled[r];
            const double drop = report.baseline_f1 - illicit_f1_at_half(model, Xp, y);
            sum += drop;
            sum_sq += drop * drop;
        }
        const double mean = sum / repeats;
        const double variance = std::max(0.0, sum_sq / repeats - mean * mean);
        entries[ci] = {feature_names[col], col, mean, std::sqrt(variance)};
    };

    if (parallel) {
        const int nt = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for num_threads(nt) schedule(dynamic)
        for (std::ptrdiff_t ci = 0; ci < static_cast<std::ptrdiff_t>(cols.size()); ++ci)
            assess_one(static_cast<std::size_t>(ci));
    } else {
        for (std::size_t ci = 0; ci < cols.size(); ++ci) assess_one(ci);
    }

    std::sort(entries.begin(), entries.end(),
              [](const FeatureImportance& a, const FeatureImportance& b) {
                  if (a.mean_f1_drop != b.mean_f1_drop) return a.mean_f1_drop > b.mean_f1_drop;
                  return a.column < b.column;
              });
    for (const FeatureImportance& e : entries)
        if (e.mean_f1_drop > 0.0) report.selected.push_back(e.name);
    report.entries = std::move(entries);
    return report;
}

} // namespace

ImportanceReport permutation_importance(const ForestModel& model, const DataMatrix& X,
                                        const std::vector<int>& y,
                                        const std::vector<std::string>& feature_names,
                                        int repeats, std::uint64_t rng_seed,
                                        const std::vector<std::size_t>& columns, int workers) {
    return importance_impl(model, X, y, feature_names, repeats, rng_seed, columns, workers,
                           true);
}

ImportanceReport permutation_importance_serial(const ForestModel& model, const DataMatrix& X,
                                               const std::vector<int>& y,
                                               const std::vector<std::string>& feature_names,
                                               int repeats, std::uint64_t rng_seed,
                                               const std::vector<std::size_t>& columns) {
    return importance_impl(model, X, y, feature_names, repeats, rng_seed, columns, 0, false);
}

void write_importance_csv(const std::string& path, const ImportanceReport& report) {
    std::string out = "feature,mean_f1_drop,std_over_repeats,selected\n";
    for (const FeatureImportance& e : report.entries) {
        const bool selected = std::find(report.selected.begin(), report.selected.end(),
                                        e.name) != report.selected.end();
        out += e.name;
        out += ',';
        csv::append_double(out, e.mean_f1_drop);
        out += ',';
        csv::append_double(out, e.std_over_repeats);
        out += ',';
        out += selected ? '1' : '0';
        out += '\n';
    }
    write_text_file(path, out);
}

} // namespace gw
