#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "guardkit/detail/rng.hpp"
#include "guardkit/error.hpp"
#include "guardkit/records.hpp"

namespace guardkit {

// ---------------------------------------------------------------------------
// Loss and continual-learning primitives: two-sided focal loss, online EWC
// penalty with decayed Fisher updates, deterministic train/eval splitting,
// and replay mixing. No optimizer lives here; callers own the training loop.
// ---------------------------------------------------------------------------

inline constexpr const char* kSourceKey = "source";

enum class Reduction { none, mean, sum };

struct FocalParams {
    double alpha = 0.7;
    // The default gamma is negative, matching the training configuration
    // this library mirrors; negative values up-weight easy examples instead
    // of down-weighting them. Pass gamma >= 0 for the conventional behavior.
    double gamma = -1.0;
    Reduction reduction = Reduction::none;

    void validate() const {
        if (alpha < 0.0 || alpha > 1.0) throw Error("focal alpha must lie in [0, 1]");
    }
};

inline constexpr double kProbClamp = 1e-7;

namespace detail_training {

inline double clamp_prob(double p) {
    return std::min(std::max(p, kProbClamp), 1.0 - kProbClamp);
}

}  // namespace detail_training

// Per-element focal loss over probabilities:
//   target 1: -alpha * (1-p)^gamma * log(p)
//   target 0: -(1-alpha) * p^gamma * log(1-p)
// Probabilities are clamped to [1e-7, 1-1e-7] before any log or power, so
// the loss is finite for every input including saturated ones.
inline std::vector<double> focal_loss_elements(const std::vector<double>& probs,
                                               const std::vector<int>& targets,
                                               const FocalParams& params) {
    params.validate();
    if (probs.size() != targets.size())
        throw Error("probs/targets length mismatch");
    std::vector<double> out(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = detail_training::clamp_prob(probs[i]);
        if (targets[i] != 0)
            out[i] = -params.alpha * std::pow(1.0 - p, params.gamma) * std::log(p);
        else
            out[i] = -(1.0 - params.alpha) * std::pow(p, params.gamma) *
                     std::log(1.0 - p);
    }
    return out;
}

// Scalar form for mean/sum reductions; the unreduced loss is
// focal_loss_elements itself.
inline double focal_loss(const std::vector<double>& probs,
                         const std::vector<int>& targets,
                         const FocalParams& params) {
    if (params.reduction == Reduction::none)
        throw Error("reduction 'none' has no scalar form; use focal_loss_elements");
    const auto elems = focal_loss_elements(probs, targets, params);
    double sum = 0.0;
    for (double v : elems) sum += v;
    if (params.reduction == Reduction::mean && !elems.empty())
        return sum / static_cast<double>(elems.size());
    return sum;
}

// Analytic d(loss_i)/d(p_i). Zero inside the clamped region's boundary
// (where the loss is locally constant in p).
inline std::vector<double> focal_loss_grad(const std::vector<double>& probs,
                                           const std::vector<int>& targets,
                                           const FocalParams& params) {
    params.validate();
    if (probs.size() != targets.size())
        throw Error("probs/targets length mismatch");
    std::vector<double> out(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= kProbClamp || probs[i] >= 1.0 - kProbClamp) {
            out[i] = 0.0;
            continue;
        }
        const double p = probs[i];
        const double a = params.alpha;
        const double g = params.gamma;
        if (targets[i] != 0)
            out[i] = a * g * std::pow(1.0 - p, g - 1.0) * std::log(p) -
                     a * std::pow(1.0 - p, g) / p;
        else
            out[i] = -(1.0 - a) * g * std::pow(p, g - 1.0) * std::log(1.0 - p) +
                     (1.0 - a) * std::pow(p, g) / (1.0 - p);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Online EWC
// ---------------------------------------------------------------------------

struct EwcState {
    std::vector<double> anchor_params;  // theta* the penalty anchors to
    std::vector<double> fisher;         // nonnegative, same length
    double lambda = 100.0;
    double decay = 0.95;
    bool normalize = true;

    void validate() const {
        if (anchor_params.size() != fisher.size())
            throw Error("anchor/fisher length mismatch");
        if (lambda < 0.0) throw Error("ewc lambda must be >= 0");
        if (decay < 0.0 || decay > 1.0) throw Error("ewc decay must lie in [0, 1]");
        for (double f : fisher)
            if (f < 0.0) throw Error("fisher entries must be >= 0");
    }
};

// (lambda / 2) * sum_i F_i * (theta_i - theta*_i)^2
inline double ewc_penalty(const std::vector<double>& current,
                          const EwcState& state) {
    state.validate();
    if (current.size() != state.anchor_params.size())
        throw Error("parameter length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < current.size(); ++i) {
        const double d = current[i] - state.anchor_params[i];
        acc += state.fisher[i] * d * d;
    }
    return 0.5 * state.lambda * acc;
}

// F <- decay * F + (1 - decay) * g^2, then scaled so max(F) == 1 when
// normalization is on and any entry is positive.
inline EwcState fisher_update(const EwcState& state,
                              const std::vector<double>& grads) {
    state.validate();
    if (grads.size() != state.fisher.size())
        throw Error("gradient length mismatch");
    EwcState next = state;
    for (std::size_t i = 0; i < grads.size(); ++i)
        next.fisher[i] =
            state.decay * state.fisher[i] + (1.0 - state.decay) * grads[i] * grads[i];
    if (next.normalize) {
        const double m = next.fisher.empty()
                             ? 0.0
                             : *std::max_element(next.fisher.begin(),
                                                 next.fisher.end());
        if (m > 0.0)
            for (auto& f : next.fisher) f /= m;
    }
    return next;
}

// ---------------------------------------------------------------------------
// Splitting and replay
// ---------------------------------------------------------------------------

namespace detail_training {

template <typename T>
std::vector<T> shuffled(const std::vector<T>& records, std::uint64_t seed) {
    std::vector<T> out = records;
    detail::Rng rng(seed);
    for (std::size_t i = out.size(); i > 1; --i)
        std::swap(out[i - 1], out[rng.next_below(i)]);
    return out;
}

}  // namespace detail_training

// Deterministic shuffle, then split at floor(train_fraction * N). The two
// halves partition the input as a multiset.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> split_train_eval(
    const std::vector<T>& records, double train_fraction, std::uint64_t seed) {
    if (records.empty()) throw Error("cannot split an empty record list");
    if (train_fraction <= 0.0 || train_fraction >= 1.0)
        throw Error("train fraction must lie strictly inside (0, 1)");
    auto all = detail_training::shuffled(records, seed);
    const auto cut = static_cast<std::size_t>(
        train_fraction * static_cast<double>(all.size()) + 1e-9);
    std::vector<T> train(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(cut));
    std::vector<T> eval(all.begin() + static_cast<std::ptrdiff_t>(cut), all.end());
    return {std::move(train), std::move(eval)};
}

// Concatenates the replay set onto the main set, tags each record's
// provenance in metadata, and shuffles deterministically.
inline std::vector<TrainingRecord> mix_replay(
    const std::vector<TrainingRecord>& main,
    const std::vector<TrainingRecord>& replay, std::uint64_t seed) {
    if (main.empty()) throw Error("main record list must be non-empty");
    std::vector<TrainingRecord> combined;
    combined.reserve(main.size() + replay.size());
    for (const auto& r : main) {
        combined.push_back(r);
        combined.back().metadata[kSourceKey] = "main";
    }
    for (const auto& r : replay) {
        combined.push_back(r);
        combined.back().metadata[kSourceKey] = "replay";
    }
    return detail_training::shuffled(combined, seed);
}

}  // namespace guardkit
