#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "woc/datasets.hpp"

namespace woc {

struct SamplingConfig {
    double temperature = 1.0;
    int n_samples = 30;
    int max_tokens = 1024;
    std::optional<std::uint64_t> seed; // simulated backend only
    int max_in_flight = 4;

    bool greedy() const { return temperature == 0.0 && n_samples == 1; }
    void validate() const; // throws ConfigError
};

struct TokenUsage {
    int prompt_tokens = 0;
    int completion_tokens = 0;
};

struct RawResponse {
    std::string question_id;
    int sample_index = 0;
    std::string text;
    std::string backend_id;
    std::string timestamp; // empty for simulated backends (keeps runs byte-stable)
    std::optional<TokenUsage> token_usage;
    int retries = 0;       // transport retries spent on this sample
    std::string error;     // nonempty = the sample failed

    bool ok() const { return error.empty(); }
};

struct CompletionRequest {
    std::string system_message;
    std::string user_message;
    std::string question_id;
    int sample_index = 0;
    int attempt = 0; // 0 = primary sample; >0 = extraction resample
    double temperature = 1.0;
    int max_tokens = 1024;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string id() const = 0;
    // Returns a filled RawResponse or throws BackendError after the
    // backend's own bounded transport retries.
    virtual RawResponse complete(const CompletionRequest& request) = 0;
};

// Samples cfg.n_samples reasoning paths for one question, at most
// cfg.max_in_flight concurrently. The result is ordered by sample_index;
// per-sample transport failures come back as error records rather than
// exceptions. Throws BackendError only when every sample failed.
std::vector<RawResponse> sample_responses(Backend& backend, const PromptBundle& prompt,
                                          const std::string& question_id,
                                          const SamplingConfig& cfg);

// Single deterministic call at temperature 0. cfg must be in greedy mode.
RawResponse greedy_response(Backend& backend, const PromptBundle& prompt,
                            const std::string& question_id, const SamplingConfig& cfg);

// OpenAI-style chat-completions endpoint over HTTP(S).
struct RemoteConfig {
    std::string base_url = "http://127.0.0.1:8080/v1";
    std::string model;
    std::string api_key_env = "OPENAI_API_KEY";
    int timeout_seconds = 120;
    int max_transport_retries = 3;
    double retry_backoff_seconds = 0.5; // doubles after each failed attempt

    static RemoteConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const; // never includes the key itself
};

class RemoteBackend : public Backend {
public:
    explicit RemoteBackend(RemoteConfig cfg);
    std::string id() const override;
    RawResponse complete(const CompletionRequest& request) override;

private:
    RemoteConfig cfg_;
    std::string scheme_host_;  // e.g. "http://127.0.0.1:8080"
    std::string path_prefix_;  // e.g. "/v1"
    std::string api_key_;
};

} // namespace woc
