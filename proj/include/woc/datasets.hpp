#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace woc {

enum class Dataset { Marbles, Future, Elecpred, GenericElection };

std::string dataset_name(Dataset d);
std::optional<Dataset> dataset_from_name(std::string_view name);
bool is_election_dataset(Dataset d);

// One prior presidential race as shown in an election question's preamble.
struct ElectionHistoryEntry {
    int year = 0;
    std::string dem_candidate;
    std::string rep_candidate;
    int dem_percent = 0;
};

struct GuesstimationQuestion {
    std::string id;
    Dataset dataset = Dataset::Marbles;
    std::string body;        // full user-facing question text
    double ground_truth = 0; // > 0
    std::string category;    // optional; item/container or state name
    nlohmann::json metadata = nlohmann::json::object();
    std::vector<ElectionHistoryEntry> history; // election datasets only

    int electoral_votes() const; // 0 when absent
};

// The exact messages sent to a backend for one question.
struct PromptBundle {
    std::string system_message;
    std::string user_message;
    std::string extraction_suffix;
};

inline constexpr std::string_view kExtractionSuffix =
    "Therefore the final answer (arabic numerals) is";

struct ValidationFinding {
    std::string question_id; // may be empty for file-level findings
    std::string field;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationFinding> findings;
    bool ok() const { return findings.empty(); }
};

// Strict load: throws LoadError on the first violated invariant
// (malformed record, duplicate id, nonpositive ground truth, ...).
std::vector<GuesstimationQuestion> load_dataset(const std::string& path, Dataset expected_schema);

// Lenient load for the validate command: keeps records whose fields are
// type-correct even when invariants fail, and reports every finding.
std::pair<std::vector<GuesstimationQuestion>, ValidationReport>
load_dataset_lenient(const std::string& path, std::optional<Dataset> expected_schema = {});

// Re-checks all dataset invariants on in-memory records. Never throws.
ValidationReport validate_dataset(const std::vector<GuesstimationQuestion>& questions);

std::string serialize_dataset(Dataset d, const std::vector<GuesstimationQuestion>& questions);

// Renders the chat messages for a question, byte-exact per dataset:
// MARBLES/ELECPRED use the plain must-answer system message, FUTURE appends
// the make-a-guess clause; the user message ends with the fixed
// Reasoning/Final-answer format block.
PromptBundle render_prompt(const GuesstimationQuestion& q);

// "1976:  Jimmy Carter (Democrat) versus  Gerald Ford (Republican). Carter
// (the Democrat) received 56 percent of the vote."
std::string format_history_line(const ElectionHistoryEntry& entry);

} // namespace woc
