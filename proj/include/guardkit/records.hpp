#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "guardkit/error.hpp"

namespace guardkit {

// One training example in the canonical record schema shared by the
// augmentation, training-utility, and dataset-io modules.
struct TrainingRecord {
    std::string text;
    std::vector<std::string> all_labels;   // candidate set, ordered
    std::vector<std::string> true_labels;  // gold subset of all_labels
    std::string task;
    std::map<std::string, std::string> metadata;

    bool operator==(const TrainingRecord&) const = default;
};

inline void validate_record(const TrainingRecord& rec) {
    if (rec.text.empty()) throw Error("record text must be non-empty");
    for (const auto& t : rec.true_labels)
        if (std::find(rec.all_labels.begin(), rec.all_labels.end(), t) ==
            rec.all_labels.end())
            throw Error("true label '" + t + "' not present in all_labels");
}

inline nlohmann::json record_to_json(const TrainingRecord& rec) {
    return nlohmann::json{{"text", rec.text},
                          {"all_labels", rec.all_labels},
                          {"true_labels", rec.true_labels},
                          {"task", rec.task},
                          {"metadata", rec.metadata}};
}

inline TrainingRecord record_from_json(const nlohmann::json& j) {
    TrainingRecord rec;
    rec.text = j.at("text").get<std::string>();
    rec.all_labels = j.at("all_labels").get<std::vector<std::string>>();
    rec.true_labels = j.at("true_labels").get<std::vector<std::string>>();
    rec.task = j.value("task", std::string{});
    if (j.contains("metadata"))
        rec.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
    validate_record(rec);
    return rec;
}

}  // namespace guardkit
