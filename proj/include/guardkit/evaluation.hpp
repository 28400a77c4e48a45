#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "guardkit/task_views.hpp"

namespace guardkit {

// ---------------------------------------------------------------------------
// Multi-view evaluation harness: label normalization, multi-label
// binarization, accuracy plus micro/macro/weighted F1 with per-label
// breakdowns, and whole-dataset evaluation over any view.
// ---------------------------------------------------------------------------

struct EvalExample {
    GuardInput input;
    std::set<std::string> gold;
    std::string dataset;
    std::string split_view;
};

// 0/1 matrix; column order equals label-universe order.
struct BinarizedMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> cells;  // row-major

    BinarizedMatrix() = default;
    BinarizedMatrix(std::size_t r, std::size_t c)
        : rows(r), cols(c), cells(r * c, 0) {}

    std::uint8_t& at(std::size_t r, std::size_t c) { return cells[r * cols + c]; }
    std::uint8_t at(std::size_t r, std::size_t c) const {
        return cells[r * cols + c];
    }
};

struct PerLabelMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct MetricsReport {
    double accuracy = 0.0;
    double f1_micro = 0.0;
    double f1_macro = 0.0;
    double f1_weighted = 0.0;
    std::map<std::string, PerLabelMetrics> per_label;
    std::map<std::string, std::size_t> predicted_count;
    std::map<std::string, std::size_t> gold_count;
    // Dataset-evaluation bookkeeping.
    std::size_t evaluated_count = 0;
    std::vector<std::size_t> skipped_indices;
};

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

inline const std::map<std::string, std::string>& default_safety_aliases() {
    static const std::map<std::string, std::string> kAliases = {
        {"safe", "safe"},           {"unsafe", "unsafe"},
        {"harmful", "unsafe"},      {"unharmful", "safe"},
        {"benign", "safe"},         {"harmless", "safe"},
        {"toxic", "unsafe"},        {"non-toxic", "safe"},
        {"nontoxic", "safe"},       {"malicious", "unsafe"},
        {"jailbreak", "unsafe"},    {"injection", "unsafe"},
        {"adversarial", "unsafe"},  {"ok", "safe"},
    };
    return kAliases;
}

// Case-insensitive mapping of dataset-specific label strings onto the
// binary safe/unsafe pair.
inline std::string normalize_safety(
    const std::string& raw,
    const std::map<std::string, std::string>& aliases = default_safety_aliases()) {
    if (raw.empty()) throw Error("cannot normalize an empty label");
    std::string folded;
    folded.reserve(raw.size());
    for (unsigned char c : raw)
        folded.push_back(static_cast<char>(std::tolower(c)));
    auto it = aliases.find(folded);
    if (it == aliases.end()) throw NormalizationError(raw);
    return it->second;
}

// ---------------------------------------------------------------------------
// Binarization and the F1 suite
// ---------------------------------------------------------------------------

inline std::pair<BinarizedMatrix, BinarizedMatrix> binarize(
    const std::vector<std::set<std::string>>& pred_sets,
    const std::vector<std::set<std::string>>& gold_sets,
    const LabelSet& universe) {
    if (pred_sets.size() != gold_sets.size())
        throw Error("prediction/gold list length mismatch");
    BinarizedMatrix pred(pred_sets.size(), universe.size());
    BinarizedMatrix gold(gold_sets.size(), universe.size());
    const auto fill = [&](BinarizedMatrix& m,
                          const std::vector<std::set<std::string>>& sets) {
        for (std::size_t r = 0; r < sets.size(); ++r) {
            for (const auto& label : sets[r]) {
                const auto idx = universe.index_of(label);
                if (!idx)
                    throw Error("label '" + label + "' not in the universe");
                m.at(r, *idx) = 1;
            }
        }
    };
    fill(pred, pred_sets);
    fill(gold, gold_sets);
    return {std::move(pred), std::move(gold)};
}

// Accuracy here is exact-set match per row. Precision, recall and F1 fall
// back to 0 whenever their denominator is 0.
inline MetricsReport f1_suite(const BinarizedMatrix& pred,
                              const BinarizedMatrix& gold,
                              const LabelSet& universe) {
    if (pred.rows != gold.rows || pred.cols != gold.cols)
        throw Error("prediction/gold matrix shape mismatch");
    if (pred.cols != universe.size())
        throw Error("matrix width does not match the label universe");

    MetricsReport report;
    const std::size_t cols = pred.cols;
    std::vector<std::size_t> tp(cols, 0), fp(cols, 0), fn(cols, 0);
    std::size_t exact = 0;
    for (std::size_t r = 0; r < pred.rows; ++r) {
        bool match = true;
        for (std::size_t c = 0; c < cols; ++c) {
            const bool p = pred.at(r, c) != 0;
            const bool g = gold.at(r, c) != 0;
            if (p && g) ++tp[c];
            if (p && !g) ++fp[c];
            if (!p && g) ++fn[c];
            if (p != g) match = false;
        }
        if (match) ++exact;
    }

    const auto ratio = [](double num, double den) {
        return den == 0.0 ? 0.0 : num / den;
    };
    const auto f1_of = [&](double p, double r) {
        return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    };

    std::size_t tp_sum = 0, fp_sum = 0, fn_sum = 0, support_sum = 0;
    double macro_sum = 0.0, weighted_sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
        PerLabelMetrics m;
        m.support = tp[c] + fn[c];
        m.precision = ratio(static_cast<double>(tp[c]),
                            static_cast<double>(tp[c] + fp[c]));
        m.recall = ratio(static_cast<double>(tp[c]),
                         static_cast<double>(tp[c] + fn[c]));
        m.f1 = f1_of(m.precision, m.recall);
        macro_sum += m.f1;
        weighted_sum += m.f1 * static_cast<double>(m.support);
        tp_sum += tp[c];
        fp_sum += fp[c];
        fn_sum += fn[c];
        support_sum += m.support;

        const auto& name = universe.labels[c];
        report.per_label[name] = m;
        report.predicted_count[name] = tp[c] + fp[c];
        report.gold_count[name] = m.support;
    }

    const double micro_p = ratio(static_cast<double>(tp_sum),
                                 static_cast<double>(tp_sum + fp_sum));
    const double micro_r = ratio(static_cast<double>(tp_sum),
                                 static_cast<double>(tp_sum + fn_sum));
    report.f1_micro = f1_of(micro_p, micro_r);
    report.f1_macro = cols == 0 ? 0.0 : macro_sum / static_cast<double>(cols);
    report.f1_weighted =
        support_sum == 0 ? 0.0 : weighted_sum / static_cast<double>(support_sum);
    report.accuracy = pred.rows == 0
                          ? 0.0
                          : static_cast<double>(exact) /
                                static_cast<double>(pred.rows);
    report.evaluated_count = pred.rows;
    return report;
}

// ---------------------------------------------------------------------------
// Dataset evaluation
// ---------------------------------------------------------------------------

namespace detail_eval {

inline bool is_safety_binary_universe(const LabelSet& labels) {
    return labels.size() == 2 && labels.contains("safe") &&
           labels.contains("unsafe");
}

}  // namespace detail_eval

// Runs the view over every example, binarizes predictions against the
// view's label universe, and computes the full metric suite. Examples that
// fail (classification error, gold labels outside the universe) are skipped
// and recorded by index; evaluation continues over the remainder.
inline MetricsReport evaluate_dataset(const TaskView& view,
                                      const std::vector<EvalExample>& examples,
                                      const EncoderConfig& encoder,
                                      std::size_t parallelism = 1) {
    if (examples.empty()) throw Error("cannot evaluate an empty dataset");

    const bool normalize_gold =
        detail_eval::is_safety_binary_universe(view.labels);

    std::vector<std::size_t> skipped;
    std::vector<std::size_t> kept;
    std::vector<std::set<std::string>> gold_sets;
    std::vector<GuardInput> inputs;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        std::set<std::string> gold;
        bool ok = !examples[i].gold.empty() || view.mode == DecodingMode::multi_label;
        if (ok) {
            try {
                for (const auto& g : examples[i].gold)
                    gold.insert(normalize_gold ? normalize_safety(g) : g);
                for (const auto& g : gold)
                    if (!view.labels.contains(g)) throw Error("gold label '" + g +
                                                              "' outside universe");
            } catch (const std::exception&) {
                ok = false;
            }
        }
        if (!ok) {
            skipped.push_back(i);
            continue;
        }
        kept.push_back(i);
        gold_sets.push_back(std::move(gold));
        inputs.push_back(examples[i].input);
    }
    if (inputs.empty()) throw Error("no evaluable examples in the dataset");

    auto collected =
        detail_views::run_batch_collect(view, inputs, encoder, parallelism);
    std::vector<std::set<std::string>> pred_sets;
    std::vector<std::set<std::string>> gold_kept;
    for (std::size_t k = 0; k < collected.size(); ++k) {
        if (std::holds_alternative<detail_views::ItemFailure>(collected[k])) {
            skipped.push_back(kept[k]);
            continue;
        }
        const auto& result = std::get<ClassificationResult>(collected[k]);
        std::set<std::string> preds;
        for (const auto& p : result.predictions) preds.insert(p.label);
        pred_sets.push_back(std::move(preds));
        gold_kept.push_back(gold_sets[k]);
    }
    if (pred_sets.empty()) throw Error("every example failed evaluation");

    auto [pred, gold] = binarize(pred_sets, gold_kept, view.labels);
    MetricsReport report = f1_suite(pred, gold, view.labels);
    std::sort(skipped.begin(), skipped.end());
    report.skipped_indices = std::move(skipped);
    return report;
}

// Re-derives emissions from cached per-label scores at a new threshold.
// Together with ClassificationResult::all_scores this makes threshold
// sweeps free of any re-encoding.
inline std::set<std::string> emit_at_threshold(
    const std::map<std::string, double>& all_scores, double threshold) {
    if (threshold < 0.0 || threshold > 1.0)
        throw Error("threshold must lie in [0, 1]");
    std::set<std::string> out;
    for (const auto& [label, score] : all_scores)
        if (score >= threshold) out.insert(label);
    return out;
}

// Metric suite over cached score maps, one threshold at a time.
inline MetricsReport evaluate_cached_scores(
    const std::vector<std::map<std::string, double>>& score_maps,
    const std::vector<std::set<std::string>>& gold_sets,
    const LabelSet& universe, double threshold) {
    if (score_maps.size() != gold_sets.size())
        throw Error("score/gold list length mismatch");
    std::vector<std::set<std::string>> pred_sets;
    pred_sets.reserve(score_maps.size());
    for (const auto& scores : score_maps)
        pred_sets.push_back(emit_at_threshold(scores, threshold));
    auto [pred, gold] = binarize(pred_sets, gold_sets, universe);
    return f1_suite(pred, gold, universe);
}

inline nlohmann::json metrics_to_json(const MetricsReport& report) {
    nlohmann::json per_label = nlohmann::json::object();
    for (const auto& [label, m] : report.per_label)
        per_label[label] = {{"precision", m.precision},
                            {"recall", m.recall},
                            {"f1", m.f1},
                            {"support", m.support}};
    return nlohmann::json{{"accuracy", report.accuracy},
                          {"f1_micro", report.f1_micro},
                          {"f1_macro", report.f1_macro},
                          {"f1_weighted", report.f1_weighted},
                          {"per_label", per_label},
                          {"predicted_count", report.predicted_count},
                          {"gold_count", report.gold_count},
                          {"evaluated_count", report.evaluated_count},
                          {"skipped_indices", report.skipped_indices}};
}

}  // namespace guardkit
