#pragma once

#include <map>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "guardkit/detail/rng.hpp"
#include "guardkit/encoder.hpp"
#include "guardkit/scoring.hpp"
#include "guardkit/taxonomy.hpp"

namespace guardkit {

// ---------------------------------------------------------------------------
// A task view binds a label schema, a decoding mode, and input formatting
// into one named classification task. Built-in views: safety_binary,
// toxicity, jailbreak, categorization. Any custom LabelSet works the same
// way; candidate labels are supplied at inference time.
// ---------------------------------------------------------------------------

enum class InputKind { prompt, response, pair };

struct GuardInput {
    InputKind kind = InputKind::prompt;
    std::optional<std::string> prompt;
    std::optional<std::string> response;

    static GuardInput from_prompt(std::string text) {
        return {InputKind::prompt, std::move(text), std::nullopt};
    }
    static GuardInput from_response(std::string text) {
        return {InputKind::response, std::nullopt, std::move(text)};
    }
    static GuardInput from_pair(std::string prompt, std::string response) {
        return {InputKind::pair, std::move(prompt), std::move(response)};
    }
};

enum class DecodingMode { single_label, multi_label };

struct TaskView {
    std::string name;
    DecodingMode mode = DecodingMode::multi_label;
    LabelSet labels;
    double threshold = 0.5;  // multi_label only
    PoolingMode text_pooling = PoolingMode::average();
    PoolingMode label_pooling = PoolingMode::first_token();
    Scorer scorer = Scorer::dot_product();
};

struct ClassificationResult {
    std::string view;
    std::vector<Prediction> predictions;        // emitted labels
    std::map<std::string, double> all_scores;   // every candidate, any threshold
    std::string input_digest;
};

// Serializes a guard input to the exact text the encoder sees. The pair
// template is fixed and treated as bit-exact by downstream consumers:
//   "USER: {prompt}\nASSISTANT: {response}"
inline std::string format_input(const GuardInput& input) {
    switch (input.kind) {
        case InputKind::prompt:
            if (!input.prompt) throw Error("prompt input is missing its prompt");
            return *input.prompt;
        case InputKind::response:
            if (!input.response)
                throw Error("response input is missing its response");
            return *input.response;
        case InputKind::pair:
            if (!input.prompt || !input.response)
                throw Error("pair input requires both prompt and response");
            return "USER: " + *input.prompt + "\nASSISTANT: " + *input.response;
    }
    throw Error("unreachable input kind");
}

// ---------------------------------------------------------------------------
// Built-in views
// ---------------------------------------------------------------------------

inline TaskView make_safety_binary_view() {
    TaskView v;
    v.name = "safety_binary";
    v.mode = DecodingMode::single_label;
    v.labels = LabelSet({"safe", "unsafe"});
    return v;
}

// Multi-label over the six level-2 toxicity categories.
inline TaskView make_toxicity_view(const Taxonomy& tax, double threshold = 0.5) {
    TaskView v;
    v.name = "toxicity";
    v.mode = DecodingMode::multi_label;
    v.labels = slice(tax, SliceSelector::children_of("toxicity"));
    v.threshold = threshold;
    return v;
}

// The ten LLM-specific attack behaviors scored as independent labels.
inline const std::vector<std::string>& jailbreak_labels() {
    static const std::vector<std::string> kLabels = {
        "instruction_hierarchy_attacks",
        "secret_or_context_exfiltration",
        "tool_and_connector_abuse",
        "obfuscation_and_prompt_smuggling",
        "social_engineering_attacks",
        "indirect_prompt_injection",
        "automation_abuse",
        "unsafe_autonomy",
        "tool_use_risk",
        "robustness_or_monitoring_failure",
    };
    return kLabels;
}

inline TaskView make_jailbreak_view(double threshold = 0.5) {
    TaskView v;
    v.name = "jailbreak";
    v.mode = DecodingMode::multi_label;
    v.labels = LabelSet(jailbreak_labels());
    v.threshold = threshold;
    return v;
}

// Multi-label over the sixteen level-1 taxonomy categories.
inline TaskView make_categorization_view(const Taxonomy& tax,
                                         double threshold = 0.5) {
    TaskView v;
    v.name = "categorization";
    v.mode = DecodingMode::multi_label;
    v.labels = slice(tax, SliceSelector::level1());
    v.threshold = threshold;
    return v;
}

inline TaskView make_custom_view(std::string name, LabelSet labels,
                                 DecodingMode mode, double threshold = 0.5) {
    TaskView v;
    v.name = std::move(name);
    v.mode = mode;
    v.labels = std::move(labels);
    v.threshold = threshold;
    return v;
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

inline std::string input_digest(const std::string& formatted) {
    static const char* hex = "0123456789abcdef";
    const std::uint64_t h = detail::fnv1a64(formatted);
    std::string out(16, '0');
    for (int i = 0; i < 16; ++i)
        out[15 - i] = hex[(h >> (4 * i)) & 0xF];
    return out;
}

// encode -> pool -> score -> decode, per the view's decoding mode.
// all_scores is always fully populated (sigmoid probabilities for
// multi-label views, softmax probabilities for single-label views) so
// callers can sweep thresholds without re-encoding.
inline ClassificationResult run_view(const TaskView& view,
                                     const GuardInput& input,
                                     const EncoderConfig& encoder) {
    const std::string formatted = format_input(input);
    const JointEncoding enc = encode(formatted, view.labels, encoder);
    const LogitVector logits =
        score_all(enc, view.text_pooling, view.label_pooling, view.scorer);

    ClassificationResult result;
    result.view = view.name;
    result.input_digest = input_digest(formatted);

    if (view.mode == DecodingMode::multi_label) {
        for (std::size_t i = 0; i < logits.size(); ++i)
            result.all_scores[view.labels.labels[i]] = sigmoid(logits.values[i]);
        result.predictions = decode_multilabel(logits, view.labels, view.threshold);
    } else {
        const auto probs = softmax(logits.values);
        for (std::size_t i = 0; i < logits.size(); ++i)
            result.all_scores[view.labels.labels[i]] = probs[i];
        result.predictions = {decode_singlelabel(logits, view.labels)};
    }
    return result;
}

namespace detail_views {

struct ItemFailure {
    std::size_t index;
    std::string message;
};

// Strided parallel map. Items are pure, so any interleaving produces the
// same per-index results; output order always equals input order.
inline std::vector<std::variant<ClassificationResult, ItemFailure>>
run_batch_collect(const TaskView& view, const std::vector<GuardInput>& inputs,
                  const EncoderConfig& encoder, std::size_t parallelism) {
    std::vector<std::variant<ClassificationResult, ItemFailure>> out(
        inputs.size(), ItemFailure{0, "not run"});
    const auto work = [&](std::size_t worker, std::size_t stride) {
        for (std::size_t i = worker; i < inputs.size(); i += stride) {
            try {
                out[i] = run_view(view, inputs[i], encoder);
            } catch (const std::exception& e) {
                out[i] = ItemFailure{i, e.what()};
            }
        }
    };
    if (parallelism <= 1 || inputs.size() <= 1) {
        work(0, 1);
    } else {
        const std::size_t n = std::min<std::size_t>(parallelism, inputs.size());
        std::vector<std::thread> threads;
        threads.reserve(n);
        for (std::size_t w = 0; w < n; ++w)
            threads.emplace_back(work, w, n);
        for (auto& t : threads) t.join();
    }
    return out;
}

}  // namespace detail_views

// Classifies a batch. Output order equals input order and results are
// identical to sequential run_view calls at any parallelism level. The
// first failing item (by index) aborts the batch with that index attached.
inline std::vector<ClassificationResult> run_batch(
    const TaskView& view, const std::vector<GuardInput>& inputs,
    const EncoderConfig& encoder, std::size_t parallelism = 1) {
    if (inputs.empty()) throw Error("run_batch requires a non-empty input list");
    if (parallelism == 0) throw Error("parallelism must be >= 1");

    auto collected =
        detail_views::run_batch_collect(view, inputs, encoder, parallelism);
    std::vector<ClassificationResult> results;
    results.reserve(collected.size());
    for (auto& slot : collected) {
        if (auto* fail = std::get_if<detail_views::ItemFailure>(&slot))
            throw BatchItemError(fail->message, fail->index);
        results.push_back(std::move(std::get<ClassificationResult>(slot)));
    }
    return results;
}

}  // namespace guardkit
