#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "guardkit/encoder.hpp"
#include "guardkit/error.hpp"

namespace guardkit {

// ---------------------------------------------------------------------------
// Pooling collapses a token span into one vector; a scorer turns a
// (text, label) vector pair into a logit; decoding maps logits to emitted
// labels, sigmoid+threshold for multi-label and softmax argmax for
// single-label.
// ---------------------------------------------------------------------------

struct PoolingMode {
    enum class Kind { average, first_token, last_token, max, attention };

    Kind kind = Kind::average;
    std::vector<double> query;  // attention only, length = encoder dimension

    static PoolingMode average() { return {Kind::average, {}}; }
    static PoolingMode first_token() { return {Kind::first_token, {}}; }
    static PoolingMode last_token() { return {Kind::last_token, {}}; }
    static PoolingMode max() { return {Kind::max, {}}; }
    static PoolingMode attention(std::vector<double> q) {
        return {Kind::attention, std::move(q)};
    }
};

struct Scorer {
    enum class Kind { dot_product, bilinear, cosine, learned_head };

    Kind kind = Kind::dot_product;
    Matrix bilinear_weights;          // bilinear: d x d
    double cosine_scale = 1.0;        // cosine: > 0
    std::vector<double> head_weights; // learned_head: length 2d
    double head_bias = 0.0;

    static Scorer dot_product() { return {}; }
    static Scorer bilinear(Matrix w) {
        Scorer s;
        s.kind = Kind::bilinear;
        s.bilinear_weights = std::move(w);
        return s;
    }
    static Scorer cosine(double scale) {
        if (scale <= 0.0) throw Error("cosine scale must be > 0");
        Scorer s;
        s.kind = Kind::cosine;
        s.cosine_scale = scale;
        return s;
    }
    static Scorer learned_head(std::vector<double> weights, double bias = 0.0) {
        Scorer s;
        s.kind = Kind::learned_head;
        s.head_weights = std::move(weights);
        s.head_bias = bias;
        return s;
    }
};

// One logit per candidate label, in LabelSet order.
struct LogitVector {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

struct Prediction {
    std::string label;
    double score = 0.0;  // probability in [0, 1]
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline std::vector<double> softmax(const std::vector<double>& logits) {
    if (logits.empty()) throw Error("softmax of empty vector");
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - m);
        sum += out[i];
    }
    for (auto& v : out) v /= sum;
    return out;
}

// ---------------------------------------------------------------------------
// Pooling
// ---------------------------------------------------------------------------

namespace detail_scoring {

inline std::vector<double> pool_span(const JointEncoding& enc, const Span& span,
                                     const PoolingMode& mode) {
    if (span.size() == 0) throw Error("cannot pool an empty span");
    const std::size_t d = enc.dimension();
    std::vector<double> out(d, 0.0);

    switch (mode.kind) {
        case PoolingMode::Kind::average: {
            for (std::size_t i = span.start; i < span.end; ++i) {
                auto row = enc.vectors.row(i);
                for (std::size_t j = 0; j < d; ++j) out[j] += row[j];
            }
            const double inv = 1.0 / static_cast<double>(span.size());
            for (auto& v : out) v *= inv;
            break;
        }
        case PoolingMode::Kind::first_token: {
            auto row = enc.vectors.row(span.start);
            out.assign(row.begin(), row.end());
            break;
        }
        case PoolingMode::Kind::last_token: {
            auto row = enc.vectors.row(span.end - 1);
            out.assign(row.begin(), row.end());
            break;
        }
        case PoolingMode::Kind::max: {
            auto first = enc.vectors.row(span.start);
            out.assign(first.begin(), first.end());
            for (std::size_t i = span.start + 1; i < span.end; ++i) {
                auto row = enc.vectors.row(i);
                for (std::size_t j = 0; j < d; ++j)
                    out[j] = std::max(out[j], row[j]);
            }
            break;
        }
        case PoolingMode::Kind::attention: {
            if (mode.query.size() != d)
                throw Error("attention query dimension mismatch");
            std::vector<double> scores(span.size());
            for (std::size_t i = 0; i < span.size(); ++i) {
                auto row = enc.vectors.row(span.start + i);
                scores[i] = std::inner_product(row.begin(), row.end(),
                                               mode.query.begin(), 0.0);
            }
            const auto weights = softmax(scores);
            for (std::size_t i = 0; i < span.size(); ++i) {
                auto row = enc.vectors.row(span.start + i);
                for (std::size_t j = 0; j < d; ++j) out[j] += weights[i] * row[j];
            }
            break;
        }
    }
    return out;
}

}  // namespace detail_scoring

inline std::vector<double> pool_text(const JointEncoding& enc,
                                     const PoolingMode& mode) {
    return detail_scoring::pool_span(enc, enc.text_span, mode);
}

inline std::vector<double> pool_label(const JointEncoding& enc,
                                      std::size_t label_index,
                                      const PoolingMode& mode) {
    if (label_index >= enc.label_spans.size())
        throw Error("label index " + std::to_string(label_index) +
                    " out of range (have " +
                    std::to_string(enc.label_spans.size()) + " labels)");
    return detail_scoring::pool_span(enc, enc.label_spans[label_index], mode);
}

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

inline double score_pair(const std::vector<double>& z_text,
                         const std::vector<double>& z_label,
                         const Scorer& scorer) {
    if (z_text.size() != z_label.size())
        throw Error("text/label vector dimension mismatch");
    const std::size_t d = z_text.size();

    switch (scorer.kind) {
        case Scorer::Kind::dot_product:
            return std::inner_product(z_text.begin(), z_text.end(),
                                      z_label.begin(), 0.0);
        case Scorer::Kind::bilinear: {
            if (scorer.bilinear_weights.rows() != d ||
                scorer.bilinear_weights.cols() != d)
                throw Error("bilinear weight shape mismatch");
            double acc = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                auto row = scorer.bilinear_weights.row(i);
                const double wz = std::inner_product(row.begin(), row.end(),
                                                     z_label.begin(), 0.0);
                acc += z_text[i] * wz;
            }
            return acc;
        }
        case Scorer::Kind::cosine: {
            const double nt = std::sqrt(std::inner_product(
                z_text.begin(), z_text.end(), z_text.begin(), 0.0));
            const double nl = std::sqrt(std::inner_product(
                z_label.begin(), z_label.end(), z_label.begin(), 0.0));
            // Zero-norm inputs score 0, which sits at sigmoid's neutral point.
            if (nt == 0.0 || nl == 0.0) return 0.0;
            const double dot = std::inner_product(z_text.begin(), z_text.end(),
                                                  z_label.begin(), 0.0);
            return scorer.cosine_scale * dot / (nt * nl);
        }
        case Scorer::Kind::learned_head: {
            if (scorer.head_weights.size() != 2 * d)
                throw Error("learned head expects weights of length 2*dimension");
            double acc = scorer.head_bias;
            for (std::size_t j = 0; j < d; ++j) acc += scorer.head_weights[j] * z_text[j];
            for (std::size_t j = 0; j < d; ++j)
                acc += scorer.head_weights[d + j] * z_label[j];
            return acc;
        }
    }
    throw Error("unreachable scorer kind");
}

inline LogitVector score_all(const JointEncoding& enc,
                             const PoolingMode& text_mode,
                             const PoolingMode& label_mode,
                             const Scorer& scorer) {
    LogitVector logits;
    const auto z_text = pool_text(enc, text_mode);
    logits.values.reserve(enc.label_spans.size());
    for (std::size_t i = 0; i < enc.label_spans.size(); ++i)
        logits.values.push_back(
            score_pair(z_text, pool_label(enc, i, label_mode), scorer));
    return logits;
}

// ---------------------------------------------------------------------------
// Decoding
// ---------------------------------------------------------------------------

// Sigmoid per label, emit when p >= threshold. The boundary is inclusive so
// threshold 0 means "emit everything". Output is sorted by descending score;
// ties keep LabelSet order. May be empty.
inline std::vector<Prediction> decode_multilabel(const LogitVector& logits,
                                                 const LabelSet& labels,
                                                 double threshold) {
    if (threshold < 0.0 || threshold > 1.0)
        throw Error("threshold must lie in [0, 1]");
    if (logits.size() != labels.size())
        throw Error("logit/label count mismatch");
    std::vector<Prediction> out;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double p = sigmoid(logits.values[i]);
        if (p >= threshold) out.push_back({labels.labels[i], p});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Prediction& a, const Prediction& b) {
                         return a.score > b.score;
                     });
    return out;
}

// Softmax over all logits, return the argmax label with its probability.
// Ties break toward the earlier LabelSet index.
inline Prediction decode_singlelabel(const LogitVector& logits,
                                     const LabelSet& labels) {
    if (labels.size() < 2)
        throw Error("single-label decoding needs at least 2 labels");
    if (logits.size() != labels.size())
        throw Error("logit/label count mismatch");
    const auto probs = softmax(logits.values);
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i)
        if (probs[i] > probs[best]) best = i;
    return {labels.labels[best], probs[best]};
}

}  // namespace guardkit
