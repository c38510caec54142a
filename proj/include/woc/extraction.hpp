#pragma once

#include <optional>
#include <string>
#include <vector>

#include "woc/backend.hpp"

namespace woc {

enum class ExtractionMethod { FormatParse, TwoStep, Failed };

std::string extraction_method_name(ExtractionMethod m);
ExtractionMethod extraction_method_from_name(std::string_view name);

enum class ParseFailure { NoRegion, NoNumber };

struct ParseResult {
    std::optional<double> value;
    ParseFailure failure = ParseFailure::NoRegion;

    bool ok() const { return value.has_value(); }
};

// Pulls the numeric estimate out of a chain-of-thought response. Looks for
// the last "Final answer:" region (case-insensitive) and takes the last
// numeric literal on that line (falling through to later lines when the
// marker line itself has none). Without a marker, scans the sentence that
// trails the two-step extraction suffix. Pure; same text, same result.
ParseResult parse_final_answer(const std::string& text);

// Parses the completion returned by a two-step extraction follow-up, where
// the model continues "...(arabic numerals) is".
ParseResult parse_continuation(const std::string& text);

// "73,384" -> 73384, "$1,200" -> 1200, "34.1%" -> 34.1, "1e3" -> 1000.
// Thousands separators, currency symbols, and trailing unit words are
// stripped; sign is preserved; overflow fails.
std::optional<double> normalize_numeral(std::string_view token);

// All numeric literals in `text`, in order, already normalized.
std::vector<double> numeric_literals(std::string_view text);

// One extraction attempt: the response text tried plus what each parse saw.
struct AttemptRecord {
    int attempt = 1; // 1-based
    std::string response_text;
    std::optional<double> format_value;
    bool two_step_issued = false;
    std::string two_step_text;
    std::optional<double> two_step_value;
    std::string error; // backend error during this attempt, if any
};

// One sampled reasoning path with its extracted numeric estimate.
struct ResponseSample {
    std::string question_id;
    int sample_index = 0;
    std::string raw_text; // the response the value came from (last tried on failure)
    std::optional<double> value;
    ExtractionMethod extraction_method = ExtractionMethod::Failed;
    int attempts = 1;
    bool negative_flag = false; // parser accepted a negative estimate
    std::vector<AttemptRecord> trail;
    std::string backend_id;
};

// Runs the full extraction pipeline on one raw response: format parse,
// then the two-step follow-up ("<prompt>\n<response>. <suffix>") through
// the same backend, then fresh resamples, up to 1 + max_retries attempts
// in total. Never throws on parse or backend failure; the sample comes
// back with extraction_method == Failed and the attempt trail filled in.
ResponseSample extract_estimate(Backend& backend, const PromptBundle& prompt,
                                const RawResponse& raw, int max_retries = 3,
                                double resample_temperature = 1.0);

} // namespace woc
