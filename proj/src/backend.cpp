#include "woc/backend.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "woc/errors.hpp"
#include "woc/util.hpp"

namespace woc {

void SamplingConfig::validate() const {
    if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
    if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
    if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
    if (max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
}

std::vector<RawResponse> sample_responses(Backend& backend, const PromptBundle& prompt,
                                          const std::string& question_id,
                                          const SamplingConfig& cfg) {
    cfg.validate();
    const int n = cfg.n_samples;
    std::vector<RawResponse> responses(static_cast<std::size_t>(n));

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            CompletionRequest req;
            req.system_message = prompt.system_message;
            req.user_message = prompt.user_message;
            req.question_id = question_id;
            req.sample_index = i;
            req.temperature = cfg.temperature;
            req.max_tokens = cfg.max_tokens;
            try {
                responses[static_cast<std::size_t>(i)] = backend.complete(req);
            } catch (const std::exception& e) {
                RawResponse failed;
                failed.question_id = question_id;
                failed.sample_index = i;
                failed.backend_id = backend.id();
                failed.error = e.what();
                responses[static_cast<std::size_t>(i)] = failed;
            }
        }
    };

    const int workers = std::min(cfg.max_in_flight, n);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    bool any_ok = false;
    for (const auto& r : responses) any_ok = any_ok || r.ok();
    if (!any_ok) {
        throw BackendError("all " + std::to_string(n) + " samples failed for question '" +
                           question_id + "': " + responses.front().error);
    }
    return responses;
}

RawResponse greedy_response(Backend& backend, const PromptBundle& prompt,
                            const std::string& question_id, const SamplingConfig& cfg) {
    if (!cfg.greedy()) {
        throw ConfigError("greedy_response requires temperature 0 and n_samples 1");
    }
    auto responses = sample_responses(backend, prompt, question_id, cfg);
    return responses.front();
}

RemoteConfig RemoteConfig::from_json(const nlohmann::json& j) {
    RemoteConfig cfg;
    if (j.contains("base_url")) cfg.base_url = j["base_url"].get<std::string>();
    if (j.contains("model")) cfg.model = j["model"].get<std::string>();
    if (j.contains("api_key_env")) cfg.api_key_env = j["api_key_env"].get<std::string>();
    if (j.contains("timeout_seconds")) cfg.timeout_seconds = j["timeout_seconds"].get<int>();
    if (j.contains("max_transport_retries")) {
        cfg.max_transport_retries = j["max_transport_retries"].get<int>();
    }
    if (j.contains("retry_backoff_seconds")) {
        cfg.retry_backoff_seconds = j["retry_backoff_seconds"].get<double>();
    }
    return cfg;
}

nlohmann::json RemoteConfig::to_json() const {
    return {{"base_url", base_url},
            {"model", model},
            {"api_key_env", api_key_env},
            {"timeout_seconds", timeout_seconds},
            {"max_transport_retries", max_transport_retries},
            {"retry_backoff_seconds", retry_backoff_seconds}};
}

RemoteBackend::RemoteBackend(RemoteConfig cfg) : cfg_(std::move(cfg)) {
    const auto scheme_end = cfg_.base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("base_url must start with http:// or https://: " + cfg_.base_url);
    }
    const auto path_start = cfg_.base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        scheme_host_ = cfg_.base_url;
    } else {
        scheme_host_ = cfg_.base_url.substr(0, path_start);
        path_prefix_ = cfg_.base_url.substr(path_start);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }
    if (const char* key = std::getenv(cfg_.api_key_env.c_str())) api_key_ = key;
}

std::string RemoteBackend::id() const {
    return cfg_.model.empty() ? "remote" : cfg_.model;
}

RawResponse RemoteBackend::complete(const CompletionRequest& request) {
    nlohmann::json payload = {
        {"model", cfg_.model},
        {"messages",
         nlohmann::json::array({{{"role", "system"}, {"content", request.system_message}},
                                {{"role", "user"}, {"content", request.user_message}}})},
        {"temperature", request.temperature},
        {"max_tokens", request.max_tokens},
    };
    const std::string body = payload.dump();
    const std::string path = path_prefix_ + "/chat/completions";

    std::string last_error;
    int attempts_made = 0;
    for (int attempt = 0; attempt <= cfg_.max_transport_retries; ++attempt) {
        if (attempt > 0 && cfg_.retry_backoff_seconds > 0) {
            const double delay = cfg_.retry_backoff_seconds * std::pow(2.0, attempt - 1);
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        ++attempts_made;

        httplib::Client client(scheme_host_);
        client.set_connection_timeout(cfg_.timeout_seconds);
        client.set_read_timeout(cfg_.timeout_seconds);
        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

        auto res = client.Post(path, headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw BackendError("chat completion failed with HTTP " + std::to_string(res->status) +
                               ": " + res->body.substr(0, 200));
        }

        nlohmann::json j;
        try {
            j = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::parse_error& e) {
            last_error = std::string("bad JSON in response: ") + e.what();
            continue;
        }
        if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty() ||
            !j["choices"][0].contains("message") ||
            !j["choices"][0]["message"].contains("content")) {
            throw BackendError("chat completion response has no message content");
        }

        RawResponse out;
        out.question_id = request.question_id;
        out.sample_index = request.sample_index;
        out.text = j["choices"][0]["message"]["content"].get<std::string>();
        out.backend_id = id();
        out.timestamp = utc_timestamp_now();
        out.retries = attempts_made - 1;
        if (j.contains("usage") && j["usage"].is_object()) {
            TokenUsage usage;
            usage.prompt_tokens = j["usage"].value("prompt_tokens", 0);
            usage.completion_tokens = j["usage"].value("completion_tokens", 0);
            out.token_usage = usage;
        }
        return out;
    }
    throw BackendError("chat completion failed after " + std::to_string(attempts_made) +
                       " attempts: " + last_error);
}

} // namespace woc
