#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "guardkit/detail/rng.hpp"
#include "guardkit/task_views.hpp"

namespace guardkit {

// ---------------------------------------------------------------------------
// Latency/throughput harness. For each target sequence length it generates
// seeded synthetic inputs of exactly that many text tokens, runs the
// classify backend, and reports samples/s plus p50/p95 per-request latency
// in milliseconds. Timing covers classification only, never input synthesis.
// ---------------------------------------------------------------------------

struct BenchConfig {
    std::vector<std::size_t> sequence_lengths = {64, 256, 512, 1024};
    std::size_t warmup_iterations = 3;
    std::size_t measured_iterations = 20;
    std::size_t batch_size = 1;   // requests timed per iteration
    std::size_t label_count = 2;  // synthetic candidate labels
    // Parallel request workers. 1 keeps per-request latency meaningful;
    // larger values measure throughput and are labeled in the backend field.
    std::size_t workers = 1;
    std::uint64_t seed = 42;
    std::string model = "reference_encoder";
    std::string backend = "in_process";

    void validate() const {
        if (sequence_lengths.empty()) throw Error("no sequence lengths given");
        for (auto len : sequence_lengths)
            if (len == 0) throw Error("sequence lengths must be positive");
        if (measured_iterations == 0)
            throw Error("measured_iterations must be >= 1");
        if (batch_size == 0) throw Error("batch_size must be >= 1");
        if (label_count == 0) throw Error("label_count must be >= 1");
        if (workers == 0) throw Error("workers must be >= 1");
    }
};

// One bench log row; field set matches the latency log schema exactly.
struct LatencyReport {
    std::string model;
    std::string backend;
    std::size_t seq_len = 0;
    double throughput = 0.0;  // samples per second
    double p50 = 0.0;         // milliseconds
    double p95 = 0.0;         // milliseconds
};

struct BenchRowError {
    std::size_t seq_len = 0;
    std::string message;
};

struct BenchRun {
    std::vector<LatencyReport> reports;
    std::vector<BenchRowError> errors;
};

// Linear-interpolation percentile on the sorted samples:
// rank = q/100 * (n-1), interpolated between neighbors.
inline double percentile(const std::vector<double>& samples, double q) {
    if (samples.empty()) throw Error("percentile of an empty sample set");
    if (q < 0.0 || q > 100.0) throw Error("percentile q must lie in [0, 100]");
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    const double rank = q / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(rank);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// Synthetic text of exactly `tokens` whitespace-delimited words.
inline std::string synthetic_text(std::size_t tokens, std::uint64_t seed) {
    detail::Rng rng(seed);
    std::string out;
    out.reserve(tokens * 6);
    for (std::size_t i = 0; i < tokens; ++i) {
        if (i > 0) out += ' ';
        out += 'w';
        out += std::to_string(rng.next_below(10000));
    }
    return out;
}

using ClassifyFn = std::function<ClassificationResult(const GuardInput&)>;

// Runs the harness; a backend failure aborts only that sequence-length row.
inline BenchRun run_bench(const ClassifyFn& classify, const BenchConfig& cfg) {
    cfg.validate();
    using Clock = std::chrono::steady_clock;
    BenchRun run;

    for (std::size_t row = 0; row < cfg.sequence_lengths.size(); ++row) {
        const std::size_t seq_len = cfg.sequence_lengths[row];
        const std::size_t total = cfg.measured_iterations * cfg.batch_size;

        std::vector<GuardInput> requests;
        requests.reserve(total);
        for (std::size_t i = 0; i < total; ++i)
            requests.push_back(GuardInput::from_prompt(synthetic_text(
                seq_len, detail::mix(cfg.seed, (row << 20) + i))));

        try {
            for (std::size_t i = 0; i < cfg.warmup_iterations; ++i)
                classify(requests[i % requests.size()]);

            std::vector<double> samples_ms(total, 0.0);
            const auto t_start = Clock::now();
            if (cfg.workers <= 1) {
                for (std::size_t i = 0; i < total; ++i) {
                    const auto t0 = Clock::now();
                    classify(requests[i]);
                    const auto t1 = Clock::now();
                    samples_ms[i] =
                        std::chrono::duration<double, std::milli>(t1 - t0).count();
                }
            } else {
                std::exception_ptr failure;
                std::mutex failure_mutex;
                std::vector<std::thread> threads;
                const std::size_t n = std::min(cfg.workers, total);
                for (std::size_t w = 0; w < n; ++w)
                    threads.emplace_back([&, w] {
                        try {
                            for (std::size_t i = w; i < total; i += n) {
                                const auto t0 = Clock::now();
                                classify(requests[i]);
                                const auto t1 = Clock::now();
                                samples_ms[i] =
                                    std::chrono::duration<double, std::milli>(t1 -
                                                                              t0)
                                        .count();
                            }
                        } catch (...) {
                            std::scoped_lock lock(failure_mutex);
                            if (!failure) failure = std::current_exception();
                        }
                    });
                for (auto& t : threads) t.join();
                if (failure) std::rethrow_exception(failure);
            }
            const auto t_end = Clock::now();
            const double wall_s =
                std::chrono::duration<double>(t_end - t_start).count();

            LatencyReport report;
            report.model = cfg.model;
            report.backend = cfg.workers > 1
                                 ? cfg.backend + "[workers=" +
                                       std::to_string(cfg.workers) + "]"
                                 : cfg.backend;
            report.seq_len = seq_len;
            report.throughput =
                wall_s > 0.0 ? static_cast<double>(total) / wall_s : 0.0;
            report.p50 = percentile(samples_ms, 50.0);
            report.p95 = percentile(samples_ms, 95.0);
            run.reports.push_back(std::move(report));
        } catch (const std::exception& e) {
            run.errors.push_back({seq_len, e.what()});
        }
    }
    return run;
}

// Convenience backend: the reference encoder behind a fixed zero-shot view.
inline ClassifyFn reference_backend(const EncoderConfig& encoder,
                                    std::size_t label_count) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < label_count; ++i)
        names.push_back("label_" + std::to_string(i));
    TaskView view = make_custom_view("bench", LabelSet(std::move(names)),
                                     DecodingMode::multi_label);
    return [view, encoder](const GuardInput& input) {
        return run_view(view, input, encoder);
    };
}

inline nlohmann::json latency_report_to_json(const LatencyReport& r) {
    return nlohmann::json{{"model", r.model},   {"backend", r.backend},
                          {"seq_len", r.seq_len}, {"throughput", r.throughput},
                          {"p50", r.p50},       {"p95", r.p95}};
}

// One line-delimited record per row, exactly the six log fields.
inline void write_bench_log(std::ostream& out,
                            const std::vector<LatencyReport>& reports) {
    for (const auto& r : reports) out << latency_report_to_json(r).dump() << "\n";
}

}  // namespace guardkit
