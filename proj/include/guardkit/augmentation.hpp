#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "guardkit/detail/rng.hpp"
#include "guardkit/records.hpp"
#include "guardkit/taxonomy.hpp"

namespace guardkit {

// ---------------------------------------------------------------------------
// Post-training augmentation: probabilistic per-record transforms (label
// dropout, random label addition, synonym replacement, description
// insertion, few-shot insertion, text splicing) plus distractor injection
// for prompt-injection robustness. Everything is deterministic under
// (input, config, seed), and gold labels survive every transform: the
// true-label set is never emptied and never escapes all_labels.
// ---------------------------------------------------------------------------

struct AugmentationConfig {
    double p_drop_labels = 0.15;
    double p_add_random_labels = 0.15;
    double p_splice_text = 0.15;
    double p_synonym_replace = 0.15;
    double p_insert_descriptions = 0.15;
    double p_insert_fewshot = 0.15;
    LabelSet label_pool;                     // also carries synonyms/descriptions
    std::vector<TrainingRecord> example_pool;
    std::uint64_t seed = 0;

    void validate() const {
        for (double p : {p_drop_labels, p_add_random_labels, p_splice_text,
                         p_synonym_replace, p_insert_descriptions,
                         p_insert_fewshot})
            if (p < 0.0 || p > 1.0)
                throw Error("augmentation probabilities must lie in [0, 1]");
    }
};

struct InjectionMetadata {
    std::size_t offset = 0;  // byte offset of the inserted distractor
    std::string source;      // identifier of the sampled distractor row
};

inline constexpr const char* kInjectionOffsetKey = "injection_offset";
inline constexpr const char* kInjectionSourceKey = "injection_source";
inline constexpr const char* kAugmentAppliedKey = "augmentation_applied";
inline constexpr const char* kAugmentSkippedKey = "augmentation_skipped";

inline std::optional<InjectionMetadata> injection_metadata(
    const TrainingRecord& rec) {
    auto off = rec.metadata.find(kInjectionOffsetKey);
    auto src = rec.metadata.find(kInjectionSourceKey);
    if (off == rec.metadata.end() || src == rec.metadata.end())
        return std::nullopt;
    return InjectionMetadata{std::stoull(off->second), src->second};
}

namespace detail_augment {

inline bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

inline bool shares_true_label(const TrainingRecord& a, const TrainingRecord& b) {
    for (const auto& t : a.true_labels)
        if (contains(b.true_labels, t)) return true;
    return false;
}

inline void rename_label(TrainingRecord& rec, std::size_t index,
                         const std::string& replacement) {
    const std::string old = rec.all_labels[index];
    rec.all_labels[index] = replacement;
    for (auto& t : rec.true_labels)
        if (t == old) t = replacement;
}

}  // namespace detail_augment

// Applies the enabled transforms in a fixed order (drop, add, synonym,
// descriptions, few-shot, splice); each fires independently under its
// probability. A firing transform whose inputs are unavailable (empty
// pools, no synonyms) is skipped and the reason recorded in metadata.
inline TrainingRecord augment_record(const TrainingRecord& input,
                                     const AugmentationConfig& cfg) {
    cfg.validate();
    validate_record(input);
    TrainingRecord rec = input;
    detail::Rng rng(cfg.seed);
    std::vector<std::string> applied;
    std::vector<std::string> skipped;

    // drop_labels: each candidate dropped with probability 1/2, except the
    // last remaining true label and the last remaining label overall.
    if (rng.bernoulli(cfg.p_drop_labels)) {
        std::vector<std::string> kept_all;
        std::vector<std::string> kept_true;
        std::size_t true_remaining = rec.true_labels.size();
        for (const auto& label : rec.all_labels) {
            const bool is_true = detail_augment::contains(rec.true_labels, label);
            bool drop = rng.bernoulli(0.5);
            if (is_true && true_remaining == 1) drop = false;
            if (drop && kept_all.empty() &&
                &label == &rec.all_labels.back())
                drop = false;
            if (drop) {
                if (is_true) --true_remaining;
            } else {
                kept_all.push_back(label);
                if (is_true) kept_true.push_back(label);
            }
        }
        rec.all_labels = std::move(kept_all);
        rec.true_labels = std::move(kept_true);
        applied.push_back("drop_labels");
    }

    // add_random_labels: 1-3 pool labels not already present.
    if (rng.bernoulli(cfg.p_add_random_labels)) {
        std::vector<std::string> candidates;
        for (const auto& l : cfg.label_pool.labels)
            if (!detail_augment::contains(rec.all_labels, l))
                candidates.push_back(l);
        if (candidates.empty()) {
            skipped.push_back("add_random_labels:no_unused_pool_labels");
        } else {
            std::size_t count = 1 + rng.next_below(3);
            count = std::min(count, candidates.size());
            for (std::size_t k = 0; k < count; ++k) {
                const std::size_t pick = rng.next_below(candidates.size());
                rec.all_labels.push_back(candidates[pick]);
                candidates.erase(candidates.begin() +
                                 static_cast<std::ptrdiff_t>(pick));
            }
            applied.push_back("add_random_labels");
        }
    }

    // synonym_replace: each label with pool synonyms swapped with
    // probability 1/2, skipping swaps that would duplicate a label.
    if (rng.bernoulli(cfg.p_synonym_replace)) {
        bool any_eligible = false;
        bool any_replaced = false;
        for (std::size_t i = 0; i < rec.all_labels.size(); ++i) {
            auto it = cfg.label_pool.synonyms.find(rec.all_labels[i]);
            if (it == cfg.label_pool.synonyms.end() || it->second.empty())
                continue;
            any_eligible = true;
            if (!rng.bernoulli(0.5)) continue;
            const auto& choice = it->second[rng.next_below(it->second.size())];
            if (detail_augment::contains(rec.all_labels, choice)) continue;
            detail_augment::rename_label(rec, i, choice);
            any_replaced = true;
        }
        if (any_replaced)
            applied.push_back("synonym_replace");
        else if (!any_eligible)
            skipped.push_back("synonym_replace:no_synonyms_in_pool");
    }

    // insert_descriptions: render "label: description" on the label side.
    if (rng.bernoulli(cfg.p_insert_descriptions)) {
        bool any = false;
        for (std::size_t i = 0; i < rec.all_labels.size(); ++i) {
            auto it = cfg.label_pool.descriptions.find(rec.all_labels[i]);
            if (it == cfg.label_pool.descriptions.end()) continue;
            detail_augment::rename_label(rec, i,
                                         rec.all_labels[i] + ": " + it->second);
            any = true;
        }
        if (any)
            applied.push_back("insert_descriptions");
        else
            skipped.push_back("insert_descriptions:no_descriptions_in_pool");
    }

    // insert_fewshot: append 1-2 pool examples sharing at least one true label.
    if (rng.bernoulli(cfg.p_insert_fewshot)) {
        std::vector<std::size_t> eligible;
        for (std::size_t i = 0; i < cfg.example_pool.size(); ++i)
            if (detail_augment::shares_true_label(rec, cfg.example_pool[i]))
                eligible.push_back(i);
        if (eligible.empty()) {
            skipped.push_back("insert_fewshot:no_overlapping_pool_examples");
        } else {
            std::size_t count = 1 + rng.next_below(2);
            count = std::min(count, eligible.size());
            for (std::size_t k = 0; k < count; ++k) {
                const std::size_t pick = rng.next_below(eligible.size());
                rec.text += "\n\nExample: " + cfg.example_pool[eligible[pick]].text;
                eligible.erase(eligible.begin() +
                               static_cast<std::ptrdiff_t>(pick));
            }
            applied.push_back("insert_fewshot");
        }
    }

    // splice_text: prepend or append text from a pool record sharing no
    // true labels with this one.
    if (rng.bernoulli(cfg.p_splice_text)) {
        std::vector<std::size_t> eligible;
        for (std::size_t i = 0; i < cfg.example_pool.size(); ++i)
            if (!detail_augment::shares_true_label(rec, cfg.example_pool[i]))
                eligible.push_back(i);
        if (eligible.empty()) {
            skipped.push_back("splice_text:no_non_overlapping_pool_examples");
        } else {
            const auto& donor =
                cfg.example_pool[eligible[rng.next_below(eligible.size())]];
            if (rng.bernoulli(0.5))
                rec.text = donor.text + "\n" + rec.text;
            else
                rec.text = rec.text + "\n" + donor.text;
            applied.push_back("splice_text");
        }
    }

    const auto join = [](const std::vector<std::string>& parts) {
        std::string out;
        for (const auto& p : parts) {
            if (!out.empty()) out += ",";
            out += p;
        }
        return out;
    };
    if (!applied.empty()) rec.metadata[kAugmentAppliedKey] = join(applied);
    if (!skipped.empty()) rec.metadata[kAugmentSkippedKey] = join(skipped);

    validate_record(rec);
    return rec;
}

// Inserts one safe-looking distractor string at a seeded byte offset.
// Gold labels are untouched; the insertion point and source row are kept
// in metadata so downstream tooling can audit the perturbation.
inline TrainingRecord inject_distractor(const TrainingRecord& input,
                                        const std::vector<std::string>& pool,
                                        std::uint64_t seed) {
    if (pool.empty()) throw Error("distractor pool must be non-empty");
    validate_record(input);
    TrainingRecord rec = input;
    detail::Rng rng(seed);
    const std::size_t source = rng.next_below(pool.size());
    const std::size_t offset = rng.next_below(rec.text.size() + 1);
    rec.text.insert(offset, pool[source]);
    rec.metadata[kInjectionOffsetKey] = std::to_string(offset);
    rec.metadata[kInjectionSourceKey] = std::to_string(source);
    return rec;
}

// Deterministic sample of floor(fraction * N) records without replacement.
template <typename T>
std::vector<T> sample_posttraining(const std::vector<T>& records,
                                   double fraction, std::uint64_t seed) {
    if (records.empty()) throw Error("cannot sample from an empty list");
    if (fraction <= 0.0 || fraction > 1.0)
        throw Error("sample fraction must lie in (0, 1]");
    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    detail::Rng rng(seed);
    for (std::size_t i = order.size() - 1; i > 0; --i)
        std::swap(order[i], order[rng.next_below(i + 1)]);
    // Nudge before flooring so decimal fractions of exact multiples
    // (0.3 * 10) do not land one below the mathematical floor.
    const auto count = static_cast<std::size_t>(
        fraction * static_cast<double>(records.size()) + 1e-9);
    std::vector<T> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(records[order[i]]);
    return out;
}

}  // namespace guardkit
