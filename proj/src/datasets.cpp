#include "woc/datasets.hpp"

#include <cmath>
#include <set>

#include "woc/errors.hpp"
#include "woc/util.hpp"

namespace woc {

namespace {

constexpr std::string_view kSystemMustAnswer = "You must provide a final answer.";
constexpr std::string_view kSystemMakeGuess =
    "You must provide a final answer. If you don't have enough information, just make a guess.";
constexpr std::string_view kFormatBlock =
    "You have to use the following format\n"
    "Reasoning: [Your step-by-step reasoning]\n"
    "Final answer: [A number. No other text or explanation]";

std::string surname(const std::string& full_name) {
    const auto pos = full_name.find_last_of(' ');
    return pos == std::string::npos ? full_name : full_name.substr(pos + 1);
}

} // namespace

std::string dataset_name(Dataset d) {
    switch (d) {
    case Dataset::Marbles: return "MARBLES";
    case Dataset::Future: return "FUTURE";
    case Dataset::Elecpred: return "ELECPRED";
    case Dataset::GenericElection: return "GENERIC_ELECTION";
    }
    return "UNKNOWN";
}

std::optional<Dataset> dataset_from_name(std::string_view name) {
    for (Dataset d : {Dataset::Marbles, Dataset::Future, Dataset::Elecpred,
                      Dataset::GenericElection}) {
        if (dataset_name(d) == name) return d;
    }
    return std::nullopt;
}

bool is_election_dataset(Dataset d) {
    return d == Dataset::Elecpred || d == Dataset::GenericElection;
}

int GuesstimationQuestion::electoral_votes() const {
    if (metadata.contains("electoral_votes") && metadata["electoral_votes"].is_number_integer()) {
        return metadata["electoral_votes"].get<int>();
    }
    return 0;
}

std::string format_history_line(const ElectionHistoryEntry& e) {
    return std::to_string(e.year) + ":  " + e.dem_candidate + " (Democrat) versus  " +
           e.rep_candidate + " (Republican). " + surname(e.dem_candidate) +
           " (the Democrat) received " + std::to_string(e.dem_percent) +
           " percent of the vote.";
}

namespace {

void add_finding(ValidationReport& report, const std::string& qid, const std::string& field,
                 const std::string& message) {
    report.findings.push_back(ValidationFinding{qid, field, message});
}

// Invariant checks shared by the lenient loader and validate_dataset.
void check_question(const GuesstimationQuestion& q, ValidationReport& report) {
    if (q.id.empty()) add_finding(report, q.id, "id", "empty id");
    if (q.body.empty()) add_finding(report, q.id, "body", "empty body");
    if (!(q.ground_truth > 0.0) || !std::isfinite(q.ground_truth)) {
        add_finding(report, q.id, "ground_truth", "nonpositive truth");
    }
    if (is_election_dataset(q.dataset)) {
        if (q.electoral_votes() < 1) {
            add_finding(report, q.id, "metadata.electoral_votes",
                        "election question requires electoral_votes >= 1");
        }
        if (q.history.empty()) {
            add_finding(report, q.id, "history", "election question requires a vote history");
        }
        int prev_year = 0;
        for (const auto& e : q.history) {
            if (e.year <= prev_year) {
                add_finding(report, q.id, "history",
                            "history years must be strictly increasing (at " +
                                std::to_string(e.year) + ")");
            }
            prev_year = e.year;
            if (e.dem_percent < 0 || e.dem_percent > 100) {
                add_finding(report, q.id, "history",
                            "dem_percent out of [0, 100] in " + std::to_string(e.year));
            }
            // The body embeds the rendered history; a drifted line means the
            // structured history and the prompt text disagree.
            if (q.body.find(format_history_line(e)) == std::string::npos) {
                add_finding(report, q.id, "body",
                            "history entry for " + std::to_string(e.year) +
                                " not found verbatim in body");
            }
        }
    }
}

GuesstimationQuestion parse_question(const nlohmann::json& j, Dataset dataset, std::size_t index,
                                     ValidationReport& report, bool& usable) {
    usable = true;
    GuesstimationQuestion q;
    q.dataset = dataset;
    const std::string where = "questions[" + std::to_string(index) + "]";

    if (!j.is_object()) {
        add_finding(report, "", where, "record is not an object");
        usable = false;
        return q;
    }
    if (!j.contains("id") || !j["id"].is_string()) {
        add_finding(report, "", where + ".id", "missing or non-string id");
        usable = false;
    } else {
        q.id = j["id"].get<std::string>();
    }
    if (!j.contains("body") || !j["body"].is_string()) {
        add_finding(report, q.id, where + ".body", "missing or non-string body");
        usable = false;
    } else {
        q.body = j["body"].get<std::string>();
    }
    if (!j.contains("ground_truth") || !j["ground_truth"].is_number()) {
        add_finding(report, q.id, where + ".ground_truth", "missing or non-numeric ground_truth");
        usable = false;
    } else {
        q.ground_truth = j["ground_truth"].get<double>();
    }
    if (j.contains("category")) {
        if (!j["category"].is_string()) {
            add_finding(report, q.id, where + ".category", "category must be a string");
        } else {
            q.category = j["category"].get<std::string>();
        }
    }
    if (j.contains("metadata")) {
        if (!j["metadata"].is_object()) {
            add_finding(report, q.id, where + ".metadata", "metadata must be an object");
        } else {
            q.metadata = j["metadata"];
        }
    }
    if (j.contains("history")) {
        if (!j["history"].is_array()) {
            add_finding(report, q.id, where + ".history", "history must be an array");
        } else {
            for (const auto& h : j["history"]) {
                if (!h.is_object() || !h.contains("year") || !h["year"].is_number_integer() ||
                    !h.contains("dem_candidate") || !h["dem_candidate"].is_string() ||
                    !h.contains("rep_candidate") || !h["rep_candidate"].is_string() ||
                    !h.contains("dem_percent") || !h["dem_percent"].is_number_integer()) {
                    add_finding(report, q.id, where + ".history", "malformed history entry");
                    continue;
                }
                q.history.push_back(ElectionHistoryEntry{
                    h["year"].get<int>(), h["dem_candidate"].get<std::string>(),
                    h["rep_candidate"].get<std::string>(), h["dem_percent"].get<int>()});
            }
        }
    }
    return q;
}

} // namespace

std::pair<std::vector<GuesstimationQuestion>, ValidationReport>
load_dataset_lenient(const std::string& path, std::optional<Dataset> expected_schema) {
    ValidationReport report;
    std::vector<GuesstimationQuestion> questions;

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        add_finding(report, "", "file", std::string("JSON parse error: ") + e.what());
        return {questions, report};
    }

    if (!doc.is_object()) {
        add_finding(report, "", "file", "top-level document must be an object");
        return {questions, report};
    }
    if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer() ||
        doc["schema_version"].get<int>() != 1) {
        add_finding(report, "", "schema_version", "expected schema_version 1");
    }

    Dataset dataset = expected_schema.value_or(Dataset::Marbles);
    if (!doc.contains("dataset") || !doc["dataset"].is_string()) {
        add_finding(report, "", "dataset", "missing dataset name");
    } else {
        const auto named = dataset_from_name(doc["dataset"].get<std::string>());
        if (!named) {
            add_finding(report, "", "dataset",
                        "unknown dataset: " + doc["dataset"].get<std::string>());
        } else if (expected_schema && *named != *expected_schema) {
            add_finding(report, "", "dataset",
                        "dataset is " + dataset_name(*named) + ", expected " +
                            dataset_name(*expected_schema));
            dataset = *named;
        } else {
            dataset = *named;
        }
    }

    if (!doc.contains("questions") || !doc["questions"].is_array()) {
        add_finding(report, "", "questions", "missing questions array");
        return {questions, report};
    }
    if (doc["questions"].empty()) {
        add_finding(report, "", "questions", "no records");
        return {questions, report};
    }

    std::set<std::string> seen;
    std::size_t index = 0;
    for (const auto& j : doc["questions"]) {
        bool usable = false;
        GuesstimationQuestion q = parse_question(j, dataset, index, report, usable);
        ++index;
        if (!usable) continue;
        if (!seen.insert(q.id).second) {
            add_finding(report, q.id, "id", "duplicate id");
        }
        check_question(q, report);
        questions.push_back(std::move(q));
    }
    return {questions, report};
}

std::vector<GuesstimationQuestion> load_dataset(const std::string& path, Dataset expected_schema) {
    auto [questions, report] = load_dataset_lenient(path, expected_schema);
    if (!report.ok()) {
        const auto& f = report.findings.front();
        std::string msg = path + ": " + f.field + ": " + f.message;
        if (!f.question_id.empty()) msg += " (question '" + f.question_id + "')";
        if (report.findings.size() > 1) {
            msg += " [+" + std::to_string(report.findings.size() - 1) + " more]";
        }
        throw LoadError(msg);
    }
    return questions;
}

ValidationReport validate_dataset(const std::vector<GuesstimationQuestion>& questions) {
    ValidationReport report;
    std::set<std::string> seen;
    for (const auto& q : questions) {
        if (!seen.insert(q.id).second) add_finding(report, q.id, "id", "duplicate id");
        check_question(q, report);
    }
    return report;
}

std::string serialize_dataset(Dataset d, const std::vector<GuesstimationQuestion>& questions) {
    nlohmann::json doc;
    doc["schema_version"] = 1;
    doc["dataset"] = dataset_name(d);
    auto arr = nlohmann::json::array();
    for (const auto& q : questions) {
        nlohmann::json j;
        j["id"] = q.id;
        j["body"] = q.body;
        j["ground_truth"] = q.ground_truth;
        if (!q.category.empty()) j["category"] = q.category;
        if (!q.metadata.empty()) j["metadata"] = q.metadata;
        if (!q.history.empty()) {
            auto hist = nlohmann::json::array();
            for (const auto& e : q.history) {
                hist.push_back({{"year", e.year},
                                {"dem_candidate", e.dem_candidate},
                                {"rep_candidate", e.rep_candidate},
                                {"dem_percent", e.dem_percent}});
            }
            j["history"] = hist;
        }
        arr.push_back(std::move(j));
    }
    doc["questions"] = std::move(arr);
    return doc.dump(2) + "\n";
}

PromptBundle render_prompt(const GuesstimationQuestion& q) {
    PromptBundle bundle;
    bundle.extraction_suffix = std::string(kExtractionSuffix);
    bundle.system_message = std::string(
        q.dataset == Dataset::Future ? kSystemMakeGuess : kSystemMustAnswer);
    if (is_election_dataset(q.dataset)) {
        if (q.history.empty()) {
            throw Error("render_prompt: election question '" + q.id + "' is missing its history");
        }
        bundle.user_message = q.body + "\nThink step-by-step.\n" + std::string(kFormatBlock);
    } else {
        bundle.user_message = q.body + " Think step-by-step.\n" + std::string(kFormatBlock);
    }
    return bundle;
}

} // namespace woc
