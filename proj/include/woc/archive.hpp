#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "woc/aggregation.hpp"
#include "woc/backend.hpp"
#include "woc/extraction.hpp"

namespace woc {

// What replay needs to re-score a question without the dataset file.
struct QuestionSnapshot {
    std::string id;
    double ground_truth = 0.0;
    std::string category;
    int electoral_votes = 0;
};

// Frozen configuration of one run; serialized as run.json. Contains no
// wall-clock data, so identically-seeded simulated runs are byte-identical.
struct RunConfig {
    std::string run_id;
    std::string dataset_name;
    std::string dataset_path;
    std::string backend_kind; // "simulated" | "remote"
    std::string backend_id;
    nlohmann::json backend_spec = nlohmann::json::object();
    SamplingConfig sampling;
    std::uint64_t seed = 0;
    int extraction_max_retries = 3;
    MedianConvention median_convention = MedianConvention::OrderStatistic;
    int bootstrap_samples = 30;
    std::map<std::string, std::uint64_t> tie_break_seeds; // per question, for mode replay
    std::vector<QuestionSnapshot> questions;

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
};

struct ArchivedSample {
    std::string kind; // "sampled" | "greedy"
    ResponseSample sample;

    nlohmann::json to_json() const;
    static ArchivedSample from_json(const nlohmann::json& j);
};

// One derived row: (question, strategy) -> estimate and normalized error.
// present == false marks a missing cell (every extraction failed).
struct DerivedRow {
    std::string question_id;
    Strategy strategy = Strategy::WocMedian;
    bool present = false;
    double estimate = 0.0;
    int n_used = 0;
    bool tie_broken = false;
    double truth = 0.0;
    double epsilon = 0.0;
};

std::string derived_to_csv(const std::vector<DerivedRow>& rows);

// Recomputes all derived rows from raw samples + config (the one code path
// used by both a fresh run and replay).
std::vector<DerivedRow> compute_derived(const RunConfig& config,
                                        const std::vector<ArchivedSample>& samples);

// Archive layout: <dir>/run.json + samples.jsonl + derived.csv.
class ArchiveWriter {
public:
    // Creates the directory, writes run.json and opens samples.jsonl fresh.
    ArchiveWriter(const std::string& dir, const RunConfig& config);

    // Durable append of one sample line; duplicate (kind, question, index)
    // is an error, as is any I/O failure.
    void append_sample(const ArchivedSample& sample);

    void write_derived(const std::vector<DerivedRow>& rows);

    const std::string& dir() const { return dir_; }

private:
    std::string dir_;
    std::string samples_path_;
    std::map<std::string, bool> seen_;
};

struct ArchiveData {
    std::string dir;
    RunConfig config;
    std::vector<ArchivedSample> samples;
    std::string derived_csv; // empty when absent
    int recovered_truncated_lines = 0;
};

// Loads an archive directory. A trailing partial sample line (crash during
// append) is dropped; corruption anywhere else is an error.
ArchiveData load_archive(const std::string& dir);

struct ReplayResult {
    std::vector<DerivedRow> derived;
    std::string derived_csv;
    bool matches_stored = true;
    std::vector<std::string> mismatches;
};

// Recomputes derived values from raw samples and compares them with the
// stored derived.csv. Throws ArchiveError when a tie-break seed is missing.
ReplayResult replay(const ArchiveData& data);

} // namespace woc
