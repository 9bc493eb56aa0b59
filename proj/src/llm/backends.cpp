#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "systemp/llm/gateway.hpp"

namespace systemp::llm {

namespace {

using nlohmann::json;

std::string body_snippet(const std::string& body) {
    constexpr std::size_t kMax = 200;
    if (body.size() <= kMax) {
        return body;
    }
    return body.substr(0, kMax) + "...";
}

FinishReason finish_reason_from(const std::string& value) {
    if (value == "stop" || value == "end_turn" || value == "stop_sequence") {
        return FinishReason::Normal;
    }
    if (value == "length" || value == "max_tokens") {
        return FinishReason::Length;
    }
    if (value == "content_filter" || value == "refusal") {
        return FinishReason::ContentFilter;
    }
    return FinishReason::Unknown;
}

// Shared HTTP plumbing: key resolution, retry with exponential backoff,
// and status classification. Providers fill in the wire format.
class HttpBackend : public Backend {
   public:
    explicit HttpBackend(BackendConfig config) : config_(std::move(config)) {}

    ChatResponse complete(const ChatRequest& request) override {
        request.validate();
        std::string api_key = resolve_api_key();
        std::string body = build_body(request);
        std::string last_failure = "no attempt made";

        for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
            if (attempt > 0) {
                auto delay = std::chrono::milliseconds(
                    config_.retry_backoff_ms * (1 << (attempt - 1)));
                std::this_thread::sleep_for(delay);
            }
            httplib::Client client(*config_.base_url);
            auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
            client.set_connection_timeout(timeout);
            client.set_read_timeout(timeout);
            client.set_write_timeout(timeout);

            auto result = client.Post(endpoint_path(), headers(api_key), body,
                                      "application/json");
            if (!result) {
                last_failure = "connection failure: " +
                               httplib::to_string(result.error());
                continue;
            }
            int status = result->status;
            if (status == 401 || status == 403) {
                throw AuthError("API key rejected (HTTP " +
                                std::to_string(status) + ")");
            }
            if (status == 429 || status >= 500) {
                last_failure = "HTTP " + std::to_string(status) + ": " +
                               body_snippet(result->body);
                continue;
            }
            if (status != 200) {
                throw TransportError("HTTP " + std::to_string(status) + ": " +
                                     body_snippet(result->body));
            }
            return parse_response(result->body);
        }
        throw TransportError("request failed after " +
                             std::to_string(config_.max_retries + 1) +
                             " attempts; last failure: " + last_failure);
    }

   protected:
    BackendConfig config_;

    std::string resolve_api_key() const {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (key == nullptr || *key == '\0') {
            throw AuthError("API key environment variable '" +
                            config_.api_key_env + "' is not set");
        }
        return key;
    }

    ChatResponse parse_response(const std::string& body) const {
        json doc;
        try {
            doc = json::parse(body);
        } catch (const json::exception& e) {
            throw TransportError(std::string("malformed provider response: ") +
                                 e.what());
        }
        try {
            return extract_response(doc);
        } catch (const json::exception& e) {
            throw TransportError(std::string("unexpected provider response "
                                             "shape: ") +
                                 e.what());
        }
    }

    virtual std::string endpoint_path() const = 0;
    virtual httplib::Headers headers(const std::string& api_key) const = 0;
    virtual std::string build_body(const ChatRequest& request) const = 0;
    virtual ChatResponse extract_response(const json& doc) const = 0;
};

class OpenAiBackend final : public HttpBackend {
   public:
    using HttpBackend::HttpBackend;

   private:
    std::string endpoint_path() const override {
        return "/v1/chat/completions";
    }

    httplib::Headers headers(const std::string& api_key) const override {
        return {{"Authorization", "Bearer " + api_key}};
    }

    std::string build_body(const ChatRequest& request) const override {
        json messages = json::array();
        if (!request.system_prompt.empty()) {
            messages.push_back(
                {{"role", "system"}, {"content", request.system_prompt}});
        }
        for (const auto& turn : request.turns) {
            messages.push_back(
                {{"role", turn.role == Role::User ? "user" : "assistant"},
                 {"content", turn.content}});
        }
        json body = {
            {"model", request.model_id.empty() ? config_.model_id
                                               : request.model_id},
            {"messages", std::move(messages)},
            {"temperature", request.temperature},
            {"max_tokens", request.max_output_tokens},
        };
        return body.dump();
    }

    ChatResponse extract_response(const json& doc) const override {
        const auto& choice = doc.at("choices").at(0);
        ChatResponse response;
        response.content = choice.at("message").at("content").get<std::string>();
        response.finish_reason =
            finish_reason_from(choice.value("finish_reason", ""));
        if (doc.contains("usage")) {
            TokenUsage usage;
            usage.input_tokens = doc["usage"].value("prompt_tokens", 0);
            usage.output_tokens = doc["usage"].value("completion_tokens", 0);
            response.usage = usage;
        }
        return response;
    }
};

class AnthropicBackend final : public HttpBackend {
   public:
    using HttpBackend::HttpBackend;

   private:
    std::string endpoint_path() const override { return "/v1/messages"; }

    httplib::Headers headers(const std::string& api_key) const override {
        return {{"x-api-key", api_key},
                {"anthropic-version", "2023-06-01"}};
    }

    std::string build_body(const ChatRequest& request) const override {
        json messages = json::array();
        for (const auto& turn : request.turns) {
            messages.push_back(
                {{"role", turn.role == Role::User ? "user" : "assistant"},
                 {"content", turn.content}});
        }
        json body = {
            {"model", request.model_id.empty() ? config_.model_id
                                               : request.model_id},
            {"messages", std::move(messages)},
            {"temperature", request.temperature},
            {"max_tokens", request.max_output_tokens},
        };
        if (!request.system_prompt.empty()) {
            body["system"] = request.system_prompt;
        }
        return body.dump();
    }

    ChatResponse extract_response(const json& doc) const override {
        ChatResponse response;
        const auto& content = doc.at("content");
        if (!content.empty()) {
            response.content = content.at(0).at("text").get<std::string>();
        }
        response.finish_reason =
            finish_reason_from(doc.value("stop_reason", ""));
        if (doc.contains("usage")) {
            TokenUsage usage;
            usage.input_tokens = doc["usage"].value("input_tokens", 0);
            usage.output_tokens = doc["usage"].value("output_tokens", 0);
            response.usage = usage;
        }
        return response;
    }
};

}  // namespace

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
    switch (config.provider) {
        case Provider::Scripted: {
            if (config.script_path.empty()) {
                throw std::invalid_argument(
                    "scripted provider requires script_path");
            }
            return std::make_unique<ScriptedBackend>(
                load_script(config.script_path));
        }
        case Provider::Replay: {
            if (config.cassette_path.empty()) {
                throw std::invalid_argument(
                    "replay provider requires cassette_path");
            }
            return std::make_unique<ReplayBackend>(config.cassette_path);
        }
        case Provider::OpenAiCompatible:
        case Provider::AnthropicCompatible: {
            if (!config.base_url || config.base_url->empty()) {
                throw std::invalid_argument("HTTP providers require base_url");
            }
            std::unique_ptr<Backend> backend;
            if (config.provider == Provider::OpenAiCompatible) {
                backend = std::make_unique<OpenAiBackend>(config);
            } else {
                backend = std::make_unique<AnthropicBackend>(config);
            }
            if (config.record_path && !config.record_path->empty()) {
                backend = std::make_unique<RecordingBackend>(
                    std::move(backend), *config.record_path);
            }
            return backend;
        }
    }
    throw std::invalid_argument("unknown provider");
}

}  // namespace systemp::llm
