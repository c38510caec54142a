#include "woc/extraction.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>

#include "woc/errors.hpp"
#include "woc/util.hpp"

namespace woc {

std::string extraction_method_name(ExtractionMethod m) {
    switch (m) {
    case ExtractionMethod::FormatParse: return "format_parse";
    case ExtractionMethod::TwoStep: return "two_step";
    case ExtractionMethod::Failed: return "failed";
    }
    return "unknown";
}

ExtractionMethod extraction_method_from_name(std::string_view name) {
    if (name == "format_parse") return ExtractionMethod::FormatParse;
    if (name == "two_step") return ExtractionMethod::TwoStep;
    if (name == "failed") return ExtractionMethod::Failed;
    throw ConfigError("unknown extraction method: " + std::string(name));
}

namespace {

constexpr std::string_view kFinalAnswerMarker = "final answer:";

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Consumes one currency symbol at text[i] if present ($, or UTF-8 for
// euro/pound), returning its byte length.
std::size_t currency_len(std::string_view text, std::size_t i) {
    if (text[i] == '$') return 1;
    static constexpr std::string_view kEuro = "\xe2\x82\xac";
    static constexpr std::string_view kPound = "\xc2\xa3";
    for (std::string_view sym : {kEuro, kPound}) {
        if (text.substr(i, sym.size()) == sym) return sym.size();
    }
    return 0;
}

struct LexedNumber {
    std::size_t pos = 0;
    std::size_t len = 0;
    double value = 0.0;
};

// Matches [+-]? [$]? digits(with optional 3-digit comma groups)
// (.digits)? ([eE][+-]?digits)? %? starting at `i`. Returns length 0 on no
// match. Comma groups are accepted only when strictly well-formed, so
// "1,23" lexes as 1 and 23.
std::size_t match_number(std::string_view text, std::size_t i, std::string& cleaned) {
    std::size_t p = i;
    cleaned.clear();
    if (p < text.size() && (text[p] == '+' || text[p] == '-')) {
        cleaned += text[p];
        ++p;
    }
    if (p < text.size()) p += currency_len(text, p);
    if (p >= text.size() || !is_digit(text[p])) return 0;

    // Integer part: leading group of 1-3 digits may be followed by comma
    // groups of exactly 3; otherwise a plain digit run.
    std::size_t run = 0;
    while (p + run < text.size() && is_digit(text[p + run])) ++run;
    for (std::size_t k = 0; k < run; ++k) cleaned += text[p + k];
    p += run;
    if (run <= 3) {
        while (p + 3 < text.size() && text[p] == ',' && is_digit(text[p + 1]) &&
               is_digit(text[p + 2]) && is_digit(text[p + 3]) &&
               (p + 4 >= text.size() || !is_digit(text[p + 4]))) {
            cleaned += text.substr(p + 1, 3);
            p += 4;
        }
    }

    if (p + 1 < text.size() && text[p] == '.' && is_digit(text[p + 1])) {
        cleaned += '.';
        ++p;
        while (p < text.size() && is_digit(text[p])) {
            cleaned += text[p];
            ++p;
        }
    }

    if (p < text.size() && (text[p] == 'e' || text[p] == 'E')) {
        std::size_t q = p + 1;
        if (q < text.size() && (text[q] == '+' || text[q] == '-')) ++q;
        if (q < text.size() && is_digit(text[q])) {
            cleaned += 'e';
            if (text[p + 1] == '+' || text[p + 1] == '-') cleaned += text[p + 1];
            p = q;
            while (p < text.size() && is_digit(text[p])) {
                cleaned += text[p];
                ++p;
            }
        }
    }

    if (p < text.size() && text[p] == '%') ++p; // percent values stay on the 0-100 scale
    return p - i;
}

std::vector<LexedNumber> lex_numbers(std::string_view text) {
    std::vector<LexedNumber> out;
    std::string cleaned;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        const bool sign_start = (c == '+' || c == '-') && i + 1 < text.size();
        if (is_digit(c) || sign_start || currency_len(text, i) > 0) {
            // A sign glued to a preceding digit is punctuation ("3-4"), not
            // a negative number.
            if (sign_start && i > 0 && is_digit(text[i - 1])) {
                ++i;
                continue;
            }
            const std::size_t len = match_number(text, i, cleaned);
            if (len > 0) {
                errno = 0;
                char* end = nullptr;
                const double v = std::strtod(cleaned.c_str(), &end);
                if (errno != ERANGE && std::isfinite(v) && end != cleaned.c_str()) {
                    out.push_back(LexedNumber{i, len, v});
                }
                i += len;
                continue;
            }
        }
        ++i;
    }
    return out;
}

// End of the sentence starting at `begin`: the first newline, '!', '?', or
// a '.' not immediately followed by a digit (so decimals survive).
std::size_t sentence_end(std::string_view text, std::size_t begin) {
    for (std::size_t i = begin; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '\n' || c == '!' || c == '?') return i;
        if (c == '.' && (i + 1 >= text.size() || !is_digit(text[i + 1]))) return i;
    }
    return text.size();
}

std::optional<double> last_literal(std::string_view text) {
    const auto nums = lex_numbers(text);
    if (nums.empty()) return std::nullopt;
    return nums.back().value;
}

// Last literal on the first line of `region` that has one.
std::optional<double> first_numbered_line_last_literal(std::string_view region) {
    std::size_t start = 0;
    while (start <= region.size()) {
        const std::size_t nl = region.find('\n', start);
        const std::string_view line =
            nl == std::string_view::npos ? region.substr(start) : region.substr(start, nl - start);
        if (auto v = last_literal(line)) return v;
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return std::nullopt;
}

} // namespace

std::vector<double> numeric_literals(std::string_view text) {
    std::vector<double> out;
    for (const auto& n : lex_numbers(text)) out.push_back(n.value);
    return out;
}

std::optional<double> normalize_numeral(std::string_view token) {
    const auto nums = lex_numbers(token);
    if (nums.empty()) return std::nullopt;
    return nums.front().value;
}

ParseResult parse_final_answer(const std::string& text) {
    ParseResult result;
    bool region_seen = false;

    const std::size_t marker = ifind_last(text, kFinalAnswerMarker);
    if (marker != std::string::npos) {
        region_seen = true;
        const std::string_view region =
            std::string_view(text).substr(marker + kFinalAnswerMarker.size());
        if (auto v = first_numbered_line_last_literal(region)) {
            result.value = v;
            return result;
        }
    }

    const std::size_t suffix = ifind_last(text, kExtractionSuffix);
    if (suffix != std::string::npos) {
        region_seen = true;
        const std::size_t begin = suffix + kExtractionSuffix.size();
        const std::size_t end = sentence_end(text, begin);
        if (auto v = last_literal(std::string_view(text).substr(begin, end - begin))) {
            result.value = v;
            return result;
        }
    }

    result.failure = region_seen ? ParseFailure::NoNumber : ParseFailure::NoRegion;
    return result;
}

ParseResult parse_continuation(const std::string& text) {
    // The model may restate the full format; prefer that when present.
    ParseResult direct = parse_final_answer(text);
    if (direct.ok()) return direct;

    ParseResult result;
    const std::size_t end = sentence_end(text, 0);
    if (auto v = last_literal(std::string_view(text).substr(0, end))) {
        result.value = v;
        return result;
    }
    const auto nums = lex_numbers(text);
    if (!nums.empty()) {
        result.value = nums.front().value;
        return result;
    }
    result.failure = ParseFailure::NoNumber;
    return result;
}

namespace {

void finish_sample(ResponseSample& sample, const std::string& text, double value,
                   ExtractionMethod method, int attempt) {
    sample.raw_text = text;
    sample.value = value;
    sample.extraction_method = method;
    sample.attempts = attempt;
    sample.negative_flag = value < 0.0;
}

} // namespace

ResponseSample extract_estimate(Backend& backend, const PromptBundle& prompt,
                                const RawResponse& raw, int max_retries,
                                double resample_temperature) {
    if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
    ResponseSample sample;
    sample.question_id = raw.question_id;
    sample.sample_index = raw.sample_index;
    sample.backend_id = raw.backend_id.empty() ? backend.id() : raw.backend_id;
    sample.extraction_method = ExtractionMethod::Failed;

    if (!raw.ok()) {
        AttemptRecord rec;
        rec.attempt = 1;
        rec.error = raw.error;
        sample.trail.push_back(std::move(rec));
        sample.attempts = 1;
        return sample;
    }

    const int total_attempts = 1 + max_retries;
    std::string last_text = raw.text;

    for (int attempt = 1; attempt <= total_attempts; ++attempt) {
        AttemptRecord rec;
        rec.attempt = attempt;

        std::string text;
        if (attempt == 1) {
            text = raw.text;
        } else {
            CompletionRequest req;
            req.system_message = prompt.system_message;
            req.user_message = prompt.user_message;
            req.question_id = raw.question_id;
            req.sample_index = raw.sample_index;
            req.attempt = attempt - 1;
            req.temperature = resample_temperature;
            try {
                text = backend.complete(req).text;
            } catch (const std::exception& e) {
                rec.error = e.what();
                sample.trail.push_back(std::move(rec));
                continue;
            }
        }
        rec.response_text = text;
        last_text = text;

        const ParseResult direct = parse_final_answer(text);
        if (direct.ok()) {
            rec.format_value = direct.value;
            sample.trail.push_back(std::move(rec));
            finish_sample(sample, text, *direct.value, ExtractionMethod::FormatParse, attempt);
            return sample;
        }

        rec.two_step_issued = true;
        CompletionRequest follow_up;
        follow_up.system_message = prompt.system_message;
        follow_up.user_message =
            prompt.user_message + "\n" + text + ". " + prompt.extraction_suffix;
        follow_up.question_id = raw.question_id;
        follow_up.sample_index = raw.sample_index;
        follow_up.attempt = attempt - 1;
        follow_up.temperature = resample_temperature;
        try {
            const std::string continuation = backend.complete(follow_up).text;
            rec.two_step_text = continuation;
            const ParseResult parsed = parse_continuation(continuation);
            if (parsed.ok()) {
                rec.two_step_value = parsed.value;
                sample.trail.push_back(std::move(rec));
                finish_sample(sample, text, *parsed.value, ExtractionMethod::TwoStep, attempt);
                return sample;
            }
        } catch (const std::exception& e) {
            rec.error = e.what();
        }
        sample.trail.push_back(std::move(rec));
    }

    sample.raw_text = last_text;
    sample.attempts = total_attempts;
    return sample;
}

} // namespace woc
