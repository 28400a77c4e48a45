#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "guardkit/error.hpp"
#include "guardkit/evaluation.hpp"
#include "guardkit/records.hpp"

namespace guardkit {

// ---------------------------------------------------------------------------
// Line-delimited record files. One JSON object per line so million-record
// files stream without full-file buffering. A manifest with the record
// count is emitted alongside every written file.
// ---------------------------------------------------------------------------

struct DatasetManifest {
    std::string name;
    std::string path;
    std::size_t record_count = 0;
    std::string view;
    std::optional<std::string> language;
};

struct LineIssue {
    std::size_t line = 0;  // 1-based
    std::string message;
};

struct ReadResult {
    std::vector<TrainingRecord> records;
    std::vector<LineIssue> issues;  // malformed lines that were skipped
};

// Reads records, reporting malformed lines by number. Parsing aborts with a
// ParseError once more than `error_budget` lines have failed.
inline ReadResult read_records_tolerant(const std::string& path,
                                        std::size_t error_budget) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open record file: " + path);
    ReadResult result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            result.records.push_back(
                record_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            result.issues.push_back({line_no, e.what()});
            if (result.issues.size() > error_budget)
                throw ParseError(std::string("error budget exhausted: ") +
                                     e.what(),
                                 line_no);
        }
    }
    return result;
}

// Strict read: any malformed line is an error.
inline std::vector<TrainingRecord> read_records(const std::string& path) {
    return read_records_tolerant(path, 0).records;
}

inline DatasetManifest write_records(const std::vector<TrainingRecord>& records,
                                     const std::string& path,
                                     std::optional<std::string> language =
                                         std::nullopt) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write record file: " + path);
    for (const auto& rec : records) {
        validate_record(rec);
        out << record_to_json(rec).dump() << "\n";
    }
    out.flush();
    if (!out) throw Error("write failed: " + path);

    DatasetManifest manifest;
    manifest.name = std::filesystem::path(path).stem().string();
    manifest.path = path;
    manifest.record_count = records.size();
    std::string view;
    for (const auto& rec : records) {
        if (view.empty())
            view = rec.task;
        else if (view != rec.task)
            view = "mixed";
    }
    manifest.view = view;
    manifest.language = std::move(language);
    return manifest;
}

inline nlohmann::json manifest_to_json(const DatasetManifest& m) {
    nlohmann::json j{{"name", m.name},
                     {"path", m.path},
                     {"record_count", m.record_count},
                     {"view", m.view}};
    if (m.language) j["language"] = *m.language;
    return j;
}

// Writes records plus a sibling "<path>.manifest.json".
inline DatasetManifest write_records_with_manifest(
    const std::vector<TrainingRecord>& records, const std::string& path,
    std::optional<std::string> language = std::nullopt) {
    auto manifest = write_records(records, path, std::move(language));
    std::ofstream mout(path + ".manifest.json", std::ios::trunc);
    if (!mout) throw Error("cannot write manifest for: " + path);
    mout << manifest_to_json(manifest).dump(1) << "\n";
    return manifest;
}

// ---------------------------------------------------------------------------
// Evaluation dataset files: line-delimited {prompt and/or response, gold
// label list, dataset name, view name}. The input kind is inferred from
// which text fields are present.
// ---------------------------------------------------------------------------

inline EvalExample eval_example_from_json(const nlohmann::json& j) {
    EvalExample ex;
    const bool has_prompt = j.contains("prompt") && !j.at("prompt").is_null();
    const bool has_response = j.contains("response") && !j.at("response").is_null();
    if (has_prompt && has_response)
        ex.input = GuardInput::from_pair(j.at("prompt").get<std::string>(),
                                         j.at("response").get<std::string>());
    else if (has_prompt)
        ex.input = GuardInput::from_prompt(j.at("prompt").get<std::string>());
    else if (has_response)
        ex.input = GuardInput::from_response(j.at("response").get<std::string>());
    else
        throw Error("eval example needs 'prompt' and/or 'response'");
    for (const auto& g : j.at("gold"))
        ex.gold.insert(g.get<std::string>());
    ex.dataset = j.value("dataset", std::string{});
    ex.split_view = j.value("view", std::string{});
    return ex;
}

inline nlohmann::json eval_example_to_json(const EvalExample& ex) {
    nlohmann::json j;
    if (ex.input.prompt) j["prompt"] = *ex.input.prompt;
    if (ex.input.response) j["response"] = *ex.input.response;
    j["gold"] = ex.gold;
    j["dataset"] = ex.dataset;
    j["view"] = ex.split_view;
    return j;
}

inline std::vector<EvalExample> read_eval_examples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open eval dataset: " + path);
    std::vector<EvalExample> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(eval_example_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    return out;
}

}  // namespace guardkit
