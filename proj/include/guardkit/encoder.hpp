#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <vector>

#include "guardkit/detail/rng.hpp"
#include "guardkit/error.hpp"
#include "guardkit/matrix.hpp"
#include "guardkit/taxonomy.hpp"

namespace guardkit {

// ---------------------------------------------------------------------------
// Joint label+text encoding. Candidate labels and the input text are packed
// into one token sequence and encoded together; downstream pooling and
// scoring read per-span contextual vectors out of the result.
//
// The built-in encoder is a deterministic reference implementation:
// whitespace/punctuation tokenization, seeded-hash base vectors, and one
// pass of within-span neighbor averaging for contextualization. It carries
// no trained weights; any encoder producing the same JointEncoding shape
// can be swapped in behind run_view.
// ---------------------------------------------------------------------------

struct EncoderConfig {
    std::size_t dimension = 64;
    // 4096 matches the task-input budget; 1024 mirrors the training setup.
    std::size_t max_sequence_length = 4096;
    std::uint64_t seed = 0;
};

struct TokenSequence {
    std::vector<std::uint64_t> ids;

    std::size_t length() const { return ids.size(); }
};

// Half-open token range [start, end).
struct Span {
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - start; }
    bool operator==(const Span&) const = default;
};

struct JointEncoding {
    Matrix vectors;                 // (total_tokens x dimension)
    std::vector<Span> label_spans;  // one per candidate label, input order
    Span text_span;

    std::size_t dimension() const { return vectors.cols(); }
};

// Reserved token ids; hashed token ids have the top bit set so they can
// never collide with these.
inline constexpr std::uint64_t kPadTokenId = 0;
inline constexpr std::uint64_t kSepTokenId = 1;

// Splits on whitespace; each ASCII punctuation character is its own token.
inline std::vector<std::string> tokenize_text(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    const auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    };
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            flush();
        } else if (std::ispunct(c)) {
            flush();
            tokens.emplace_back(1, static_cast<char>(c));
        } else {
            current.push_back(static_cast<char>(c));
        }
    }
    flush();
    return tokens;
}

inline std::uint64_t token_id(const std::string& token) {
    return detail::fnv1a64(token) | 0x8000000000000000ULL;
}

inline TokenSequence tokenize(const std::string& text) {
    TokenSequence seq;
    for (const auto& t : tokenize_text(text)) seq.ids.push_back(token_id(t));
    return seq;
}

namespace detail_encoder {

// Base vector component for (seed, token, dim index), uniform in [-1, 1).
inline double base_component(std::uint64_t seed, std::uint64_t token,
                             std::size_t j) {
    const std::uint64_t h = detail::mix(detail::mix(seed, token), j);
    return 2.0 * (static_cast<double>(h >> 11) * 0x1.0p-53) - 1.0;
}

inline void fill_base_vector(std::uint64_t seed, std::uint64_t token,
                             std::span<double> out) {
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = base_component(seed, token, j);
}

// One pass of neighbor averaging, restricted to [span.start, span.end) so
// label and text representations never bleed into each other.
inline void contextualize_span(Matrix& m, const Span& span) {
    if (span.size() < 2) return;
    const std::size_t d = m.cols();
    Matrix src(span.size(), d);
    for (std::size_t i = 0; i < span.size(); ++i) {
        auto from = m.row(span.start + i);
        auto to = src.row(i);
        for (std::size_t j = 0; j < d; ++j) to[j] = from[j];
    }
    for (std::size_t i = 0; i < span.size(); ++i) {
        const std::size_t lo = (i == 0) ? i : i - 1;
        const std::size_t hi = (i + 1 == span.size()) ? i : i + 1;
        const double inv = 1.0 / static_cast<double>(hi - lo + 1);
        auto out = m.row(span.start + i);
        for (std::size_t j = 0; j < d; ++j) {
            double acc = 0.0;
            for (std::size_t k = lo; k <= hi; ++k) acc += src.at(k, j);
            out[j] = acc * inv;
        }
    }
}

}  // namespace detail_encoder

// Packs labels then text into one sequence:
//   [label1..] SEP [label2..] SEP ... [labelK..] SEP [text..]
// Label-first packing keeps label spans independent of text truncation;
// truncation drops text tail tokens only. Empty text encodes as a single
// padding token so the text span is never empty. One slot past the label
// block is always reserved for that token.
inline JointEncoding encode(const std::string& text, const LabelSet& labels,
                            const EncoderConfig& config) {
    if (config.dimension == 0) throw Error("encoder dimension must be >= 1");
    labels.validate();

    std::vector<std::vector<std::uint64_t>> label_tokens;
    std::size_t label_block = 0;
    for (const auto& label : labels.labels) {
        auto toks = tokenize(label).ids;
        if (toks.empty()) toks.push_back(kPadTokenId);
        label_block += toks.size() + 1;  // + separator
        label_tokens.push_back(std::move(toks));
    }
    if (label_block + 1 > config.max_sequence_length)
        throw CapacityError(
            "candidate labels occupy " + std::to_string(label_block) +
            " tokens; max_sequence_length " +
            std::to_string(config.max_sequence_length) +
            " leaves no room for text");

    auto text_tokens = tokenize(text).ids;
    if (text_tokens.empty()) text_tokens.push_back(kPadTokenId);
    const std::size_t text_budget = config.max_sequence_length - label_block;
    if (text_tokens.size() > text_budget) text_tokens.resize(text_budget);

    JointEncoding enc;
    enc.vectors = Matrix(label_block + text_tokens.size(), config.dimension);

    std::size_t pos = 0;
    const auto emit = [&](std::uint64_t tok) {
        detail_encoder::fill_base_vector(config.seed, tok, enc.vectors.row(pos));
        ++pos;
    };
    for (const auto& toks : label_tokens) {
        Span span{pos, pos + toks.size()};
        for (auto t : toks) emit(t);
        emit(kSepTokenId);
        enc.label_spans.push_back(span);
    }
    enc.text_span = {pos, pos + text_tokens.size()};
    for (auto t : text_tokens) emit(t);

    for (const auto& span : enc.label_spans)
        detail_encoder::contextualize_span(enc.vectors, span);
    detail_encoder::contextualize_span(enc.vectors, enc.text_span);
    return enc;
}

}  // namespace guardkit
