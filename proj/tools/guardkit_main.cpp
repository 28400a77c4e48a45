// guardkit command-line front end: classify, evaluate, bench, augment,
// split, mix, and taxonomy inspection over the canonical file formats.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "guardkit/guardkit.hpp"

namespace {

using namespace guardkit;

struct EncoderFlags {
    std::size_t dimension = 64;
    std::size_t max_length = 4096;
    std::uint64_t seed = 0;

    EncoderConfig config() const { return {dimension, max_length, seed}; }

    void attach(CLI::App* cmd) {
        cmd->add_option("--dim", dimension, "Encoder dimension")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--max-len", max_length, "Maximum sequence length")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--seed", seed, "Encoder seed");
    }
};

struct ViewFlags {
    std::string view_name;
    std::vector<std::string> custom_labels;
    std::string taxonomy_path;
    double threshold = 0.5;

    void attach(CLI::App* cmd) {
        cmd->add_option("--view", view_name,
                        "Built-in view: safety_binary, toxicity, jailbreak, "
                        "categorization");
        cmd->add_option("--labels", custom_labels,
                        "Comma-separated zero-shot label list")
            ->delimiter(',');
        cmd->add_option("--taxonomy", taxonomy_path,
                        "Taxonomy file (needed by toxicity/categorization)");
        cmd->add_option("--threshold", threshold,
                        "Multi-label emission threshold")
            ->check(CLI::Range(0.0, 1.0));
    }

    TaskView resolve() const {
        if (!custom_labels.empty())
            return make_custom_view("custom", LabelSet(custom_labels),
                                    DecodingMode::multi_label, threshold);
        if (view_name == "safety_binary") return make_safety_binary_view();
        if (view_name == "jailbreak") return make_jailbreak_view(threshold);
        if (view_name == "toxicity" || view_name == "categorization") {
            if (taxonomy_path.empty())
                throw Error("view '" + view_name + "' requires --taxonomy");
            const auto tax = load_taxonomy_file(taxonomy_path);
            return view_name == "toxicity"
                       ? make_toxicity_view(tax, threshold)
                       : make_categorization_view(tax, threshold);
        }
        if (view_name.empty())
            throw Error("provide --view or a --labels list");
        throw Error("unknown view: " + view_name);
    }
};

GuardInput guard_input_from_json(const nlohmann::json& j) {
    const bool has_prompt = j.contains("prompt") && !j.at("prompt").is_null();
    const bool has_response =
        j.contains("response") && !j.at("response").is_null();
    if (has_prompt && has_response)
        return GuardInput::from_pair(j.at("prompt").get<std::string>(),
                                     j.at("response").get<std::string>());
    if (has_prompt)
        return GuardInput::from_prompt(j.at("prompt").get<std::string>());
    if (has_response)
        return GuardInput::from_response(j.at("response").get<std::string>());
    throw Error("input record needs 'prompt' and/or 'response'");
}

nlohmann::json result_to_json(const ClassificationResult& result) {
    auto predictions = nlohmann::json::array();
    for (const auto& p : result.predictions)
        predictions.push_back({{"label", p.label}, {"score", p.score}});
    return nlohmann::json{{"view", result.view},
                          {"predictions", predictions},
                          {"all_scores", result.all_scores},
                          {"input_digest", result.input_digest}};
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

LabelSet label_pool_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open label pool: " + path);
    nlohmann::json j;
    in >> j;
    LabelSet pool;
    if (j.is_array()) {
        pool.labels = j.get<std::vector<std::string>>();
    } else {
        pool.labels = j.at("labels").get<std::vector<std::string>>();
        if (j.contains("descriptions"))
            pool.descriptions =
                j.at("descriptions")
                    .get<std::map<std::string, std::string>>();
        if (j.contains("synonyms"))
            pool.synonyms =
                j.at("synonyms")
                    .get<std::map<std::string, std::vector<std::string>>>();
    }
    pool.validate();
    return pool;
}

// ---------------------------------------------------------------------------

int cmd_classify(const ViewFlags& view_flags, const EncoderFlags& enc_flags,
                 const std::string& text, const std::string& input_path,
                 const std::string& output_path, std::size_t parallelism) {
    const TaskView view = view_flags.resolve();

    std::vector<GuardInput> inputs;
    if (!text.empty()) {
        inputs.push_back(GuardInput::from_prompt(text));
    } else if (!input_path.empty()) {
        for (const auto& line : read_lines(input_path))
            inputs.push_back(guard_input_from_json(nlohmann::json::parse(line)));
    } else {
        throw Error("provide --text or --input");
    }

    const auto results =
        run_batch(view, inputs, enc_flags.config(), parallelism);

    std::ofstream file;
    if (!output_path.empty()) {
        file.open(output_path, std::ios::trunc);
        if (!file) throw Error("cannot write output: " + output_path);
    }
    std::ostream& out = output_path.empty() ? std::cout : file;
    for (const auto& result : results)
        out << result_to_json(result).dump() << "\n";
    if (!output_path.empty())
        std::cout << "wrote " << results.size() << " results to " << output_path
                  << "\n";
    return 0;
}

int cmd_evaluate(const ViewFlags& view_flags, const EncoderFlags& enc_flags,
                 const std::string& dataset_path, const std::string& report_path,
                 std::size_t parallelism) {
    TaskView view = view_flags.resolve();
    const auto examples = read_eval_examples(dataset_path);
    if (examples.empty()) throw Error("dataset is empty: " + dataset_path);
    const auto report =
        evaluate_dataset(view, examples, enc_flags.config(), parallelism);

    char line[256];
    std::snprintf(line, sizeof(line),
                  "accuracy %.4f | f1_micro %.4f | f1_macro %.4f | "
                  "f1_weighted %.4f",
                  report.accuracy, report.f1_micro, report.f1_macro,
                  report.f1_weighted);
    std::cout << line << "\n";
    if (!report.skipped_indices.empty())
        std::cout << "skipped " << report.skipped_indices.size()
                  << " examples\n";

    if (!report_path.empty()) {
        nlohmann::json doc{{"view", view.name},
                           {"threshold", view.threshold},
                           {"dataset", dataset_path},
                           {"encoder",
                            {{"dimension", enc_flags.dimension},
                             {"max_sequence_length", enc_flags.max_length},
                             {"seed", enc_flags.seed}}},
                           {"metrics", metrics_to_json(report)}};
        std::ofstream out(report_path, std::ios::trunc);
        if (!out) throw Error("cannot write report: " + report_path);
        out << doc.dump(1) << "\n";
        std::cout << "report written to " << report_path << "\n";
    }
    return 0;
}

int cmd_bench(const BenchConfig& cfg, const EncoderFlags& enc_flags,
              const std::string& output_path) {
    const auto backend =
        reference_backend(enc_flags.config(), cfg.label_count);
    const auto run = run_bench(backend, cfg);
    for (const auto& err : run.errors)
        std::cerr << "seq_len " << err.seq_len << " failed: " << err.message
                  << "\n";

    if (!output_path.empty()) {
        std::ofstream out(output_path, std::ios::trunc);
        if (!out) throw Error("cannot write bench log: " + output_path);
        write_bench_log(out, run.reports);
        std::cout << "wrote " << run.reports.size() << " rows to "
                  << output_path << "\n";
    } else {
        write_bench_log(std::cout, run.reports);
    }
    return run.errors.empty() ? 0 : 1;
}

int cmd_taxonomy_validate(const std::string& path) {
    const auto tax = load_taxonomy_file(path);
    std::cout << tax.count_at_level(1) << " / " << tax.count_at_level(2)
              << " / " << tax.count_at_level(3) << " / " << tax.size() << "\n";
    for (const auto& root : tax.roots()) {
        const auto [l2, l3] = subtree_counts(tax, root);
        std::cout << root << " " << l2 << " " << l3 << "\n";
    }
    return 0;
}

int cmd_taxonomy_slice(const std::string& path, bool level1,
                       const std::string& children_of) {
    const auto tax = load_taxonomy_file(path);
    const auto labels =
        level1 ? slice(tax, SliceSelector::level1())
               : slice(tax, SliceSelector::children_of(children_of));
    for (const auto& label : labels.labels) std::cout << label << "\n";
    return 0;
}

int cmd_taxonomy_path(const std::string& path, const std::string& leaf) {
    const auto tax = load_taxonomy_file(path);
    const auto names = leaf_path(tax, leaf);
    std::cout << names[0] << " > " << names[1] << " > " << names[2] << "\n";
    return 0;
}

struct AugmentFlags {
    std::string input_path;
    std::string output_path;
    std::uint64_t seed = 0;
    double p_drop = 0.15, p_add = 0.15, p_splice = 0.15, p_synonym = 0.15,
           p_descriptions = 0.15, p_fewshot = 0.15;
    std::string label_pool_path;
    std::string example_pool_path;
    std::string distractor_pool_path;
};

int cmd_augment(const AugmentFlags& flags) {
    const auto records = read_records(flags.input_path);
    if (records.empty()) throw Error("no records in " + flags.input_path);

    AugmentationConfig cfg;
    cfg.p_drop_labels = flags.p_drop;
    cfg.p_add_random_labels = flags.p_add;
    cfg.p_splice_text = flags.p_splice;
    cfg.p_synonym_replace = flags.p_synonym;
    cfg.p_insert_descriptions = flags.p_descriptions;
    cfg.p_insert_fewshot = flags.p_fewshot;
    if (!flags.label_pool_path.empty()) {
        cfg.label_pool = label_pool_from_file(flags.label_pool_path);
    } else {
        // Default pool: every label seen in the input records.
        for (const auto& rec : records)
            for (const auto& label : rec.all_labels)
                if (!cfg.label_pool.contains(label))
                    cfg.label_pool.labels.push_back(label);
    }
    cfg.example_pool = flags.example_pool_path.empty()
                           ? records
                           : read_records(flags.example_pool_path);

    std::vector<std::string> distractors;
    if (!flags.distractor_pool_path.empty())
        distractors = read_lines(flags.distractor_pool_path);

    std::vector<TrainingRecord> augmented;
    augmented.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        cfg.seed = detail::item_seed(flags.seed, i);
        auto rec = augment_record(records[i], cfg);
        if (!distractors.empty())
            rec = inject_distractor(rec, distractors,
                                    detail::item_seed(~flags.seed, i));
        augmented.push_back(std::move(rec));
    }
    const auto manifest =
        write_records_with_manifest(augmented, flags.output_path);
    std::cout << "augmented " << manifest.record_count << " records -> "
              << flags.output_path << "\n";
    return 0;
}

int cmd_split(const std::string& input_path, const std::string& train_path,
              const std::string& eval_path, double fraction,
              std::uint64_t seed) {
    const auto records = read_records(input_path);
    const auto [train, eval] = split_train_eval(records, fraction, seed);
    write_records_with_manifest(train, train_path);
    write_records_with_manifest(eval, eval_path);
    std::cout << "split " << records.size() << " records into " << train.size()
              << " train / " << eval.size() << " eval\n";
    return 0;
}

int cmd_mix(const std::string& main_path, const std::string& replay_path,
            const std::string& output_path, std::uint64_t seed) {
    const auto main_records = read_records(main_path);
    const auto replay_records =
        replay_path.empty() ? std::vector<TrainingRecord>{}
                            : read_records(replay_path);
    const auto mixed = mix_replay(main_records, replay_records, seed);
    write_records_with_manifest(mixed, output_path);
    std::cout << "mixed " << main_records.size() << " main + "
              << replay_records.size() << " replay -> " << mixed.size()
              << " records\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"guardkit: zero-shot guardrail classification toolkit"};
    app.require_subcommand(1);

    // classify
    auto* classify = app.add_subcommand(
        "classify", "Classify text against a task view or label list");
    ViewFlags classify_view;
    EncoderFlags classify_enc;
    std::string classify_text, classify_input, classify_output;
    std::size_t classify_parallelism = 1;
    classify_view.attach(classify);
    classify_enc.attach(classify);
    classify->add_option("--text", classify_text, "Single input text");
    classify->add_option("--input", classify_input,
                         "Line-delimited JSON inputs (prompt/response fields)");
    classify->add_option("--output", classify_output,
                         "Write results here instead of stdout");
    classify->add_option("--parallelism", classify_parallelism,
                         "Worker threads for batch inputs")
        ->check(CLI::PositiveNumber);

    // evaluate
    auto* evaluate =
        app.add_subcommand("evaluate", "Evaluate a dataset against a view");
    ViewFlags eval_view;
    EncoderFlags eval_enc;
    std::string eval_dataset, eval_report;
    std::size_t eval_parallelism = 1;
    eval_view.attach(evaluate);
    eval_enc.attach(evaluate);
    evaluate->add_option("--dataset", eval_dataset,
                         "Line-delimited evaluation dataset")
        ->required();
    evaluate->add_option("--report", eval_report, "Write the full report here");
    evaluate->add_option("--parallelism", eval_parallelism, "Worker threads")
        ->check(CLI::PositiveNumber);

    // bench
    auto* bench = app.add_subcommand("bench", "Latency/throughput benchmark");
    BenchConfig bench_cfg;
    EncoderFlags bench_enc;
    bench_enc.max_length = 2048;
    std::string bench_output;
    bench->add_option("--seq-lens", bench_cfg.sequence_lengths,
                      "Target sequence lengths")
        ->delimiter(',');
    bench->add_option("--warmup", bench_cfg.warmup_iterations,
                      "Warmup iterations");
    bench->add_option("--iterations", bench_cfg.measured_iterations,
                      "Measured iterations")
        ->check(CLI::PositiveNumber);
    bench->add_option("--batch-size", bench_cfg.batch_size,
                      "Requests per iteration")
        ->check(CLI::PositiveNumber);
    bench->add_option("--label-count", bench_cfg.label_count,
                      "Synthetic candidate labels")
        ->check(CLI::PositiveNumber);
    bench->add_option("--workers", bench_cfg.workers,
                      "Parallel request workers (throughput mode)")
        ->check(CLI::PositiveNumber);
    bench->add_option("--bench-seed", bench_cfg.seed, "Synthetic input seed");
    bench->add_option("--model-name", bench_cfg.model, "Model tag in the log");
    bench->add_option("--backend-name", bench_cfg.backend,
                      "Backend tag in the log");
    bench->add_option("--output", bench_output, "Bench log path");
    bench_enc.attach(bench);

    // taxonomy
    auto* taxonomy =
        app.add_subcommand("taxonomy", "Inspect a taxonomy document");
    taxonomy->require_subcommand(1);
    std::string tax_file;

    auto* tax_validate =
        taxonomy->add_subcommand("validate", "Validate and print level counts");
    tax_validate->add_option("--file", tax_file, "Taxonomy file")->required();

    auto* tax_slice = taxonomy->add_subcommand("slice", "Print a label slice");
    bool slice_level1 = false;
    std::string slice_children;
    tax_slice->add_option("--file", tax_file, "Taxonomy file")->required();
    tax_slice->add_flag("--level1", slice_level1, "All level-1 labels");
    tax_slice->add_option("--children-of", slice_children,
                          "Level-2 children of a level-1 node");

    auto* tax_path =
        taxonomy->add_subcommand("path", "Print the root-to-leaf path");
    std::string path_leaf;
    tax_path->add_option("--file", tax_file, "Taxonomy file")->required();
    tax_path->add_option("--leaf", path_leaf, "Leaf node id")->required();

    // augment
    auto* augment =
        app.add_subcommand("augment", "Augment a training record file");
    AugmentFlags augment_flags;
    augment->add_option("--input", augment_flags.input_path)->required();
    augment->add_option("--output", augment_flags.output_path)->required();
    augment->add_option("--seed", augment_flags.seed, "Augmentation seed")
        ->required();
    augment->add_option("--p-drop", augment_flags.p_drop)
        ->check(CLI::Range(0.0, 1.0));
    augment->add_option("--p-add", augment_flags.p_add)
        ->check(CLI::Range(0.0, 1.0));
    augment->add_option("--p-splice", augment_flags.p_splice)
        ->check(CLI::Range(0.0, 1.0));
    augment->add_option("--p-synonym", augment_flags.p_synonym)
        ->check(CLI::Range(0.0, 1.0));
    augment->add_option("--p-descriptions", augment_flags.p_descriptions)
        ->check(CLI::Range(0.0, 1.0));
    augment->add_option("--p-fewshot", augment_flags.p_fewshot)
        ->check(CLI::Range(0.0, 1.0));
    augment->add_option("--label-pool", augment_flags.label_pool_path,
                        "Label pool file (JSON)");
    augment->add_option("--example-pool", augment_flags.example_pool_path,
                        "Example pool records (defaults to --input)");
    augment->add_option("--distractor-pool",
                        augment_flags.distractor_pool_path,
                        "Distractor strings, one per line; enables injection");

    // split
    auto* split = app.add_subcommand("split", "Deterministic train/eval split");
    std::string split_input, split_train, split_eval;
    double split_fraction = 0.9;
    std::uint64_t split_seed = 0;
    split->add_option("--input", split_input)->required();
    split->add_option("--train-output", split_train)->required();
    split->add_option("--eval-output", split_eval)->required();
    split->add_option("--fraction", split_fraction, "Train fraction");
    split->add_option("--seed", split_seed, "Shuffle seed")->required();

    // mix
    auto* mix = app.add_subcommand("mix", "Mix replay data into a main set");
    std::string mix_main, mix_replay, mix_output;
    std::uint64_t mix_seed = 0;
    mix->add_option("--main", mix_main)->required();
    mix->add_option("--replay", mix_replay);
    mix->add_option("--output", mix_output)->required();
    mix->add_option("--seed", mix_seed, "Shuffle seed")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (classify->parsed())
            return cmd_classify(classify_view, classify_enc, classify_text,
                                classify_input, classify_output,
                                classify_parallelism);
        if (evaluate->parsed())
            return cmd_evaluate(eval_view, eval_enc, eval_dataset, eval_report,
                                eval_parallelism);
        if (bench->parsed()) return cmd_bench(bench_cfg, bench_enc, bench_output);
        if (taxonomy->parsed()) {
            if (tax_validate->parsed()) return cmd_taxonomy_validate(tax_file);
            if (tax_slice->parsed()) {
                if (!slice_level1 && slice_children.empty())
                    throw Error("slice needs --level1 or --children-of");
                return cmd_taxonomy_slice(tax_file, slice_level1,
                                          slice_children);
            }
            if (tax_path->parsed()) return cmd_taxonomy_path(tax_file, path_leaf);
        }
        if (augment->parsed()) return cmd_augment(augment_flags);
        if (split->parsed())
            return cmd_split(split_input, split_train, split_eval,
                             split_fraction, split_seed);
        if (mix->parsed()) return cmd_mix(mix_main, mix_replay, mix_output,
                                          mix_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
