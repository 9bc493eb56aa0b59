#pragma once

#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace systemp::llm {

enum class Role { User, Assistant };

struct Turn {
    Role role = Role::User;
    std::string content;
};

struct TokenUsage {
    int input_tokens = 0;
    int output_tokens = 0;
};

enum class FinishReason { Normal, Length, ContentFilter, Unknown };

struct ChatRequest {
    std::string system_prompt;
    std::vector<Turn> turns;
    std::string model_id;
    double temperature = 0.0;
    int max_output_tokens = 4096;
    // Routing key for the scripted provider: which agent is asking, e.g.
    // "specification", "template", "writer".
    std::string agent;

    // Throws std::invalid_argument when turns is empty, the last turn is
    // not a user turn, temperature is outside [0, 2], or
    // max_output_tokens is not positive.
    void validate() const;
};

struct ChatResponse {
    std::string content;
    FinishReason finish_reason = FinishReason::Normal;
    std::optional<TokenUsage> usage;
};

enum class Provider {
    OpenAiCompatible,
    AnthropicCompatible,
    Scripted,
    Replay,
};

struct BackendConfig {
    Provider provider = Provider::Scripted;
    std::optional<std::string> base_url;
    // Name of the environment variable that holds the API key; resolved at
    // call time so the key itself is never stored or logged.
    std::string api_key_env = "SYSTEMP_API_KEY";
    std::string model_id = "scripted";
    double timeout_seconds = 60.0;
    int max_retries = 2;
    int retry_backoff_ms = 250;
    std::string script_path;
    std::string cassette_path;
    // When set on an HTTP provider, every exchange is appended to this
    // cassette for later replay.
    std::optional<std::string> record_path;
};

class AuthError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class TransportError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class ScriptExhausted : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class CassetteMiss : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Backend {
   public:
    virtual ~Backend() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

// Builds the provider named by the config. Throws std::invalid_argument on
// inconsistent configs (e.g. an HTTP provider without base_url).
std::unique_ptr<Backend> make_backend(const BackendConfig& config);

struct FencedText {
    std::string text;
    // false when no matched fence pair was found and the whole trimmed
    // content was returned instead.
    bool had_fences = false;
};

// Returns the payload between the first matched pair of triple-quote
// fences (''' or ```); idempotent on already-extracted payloads.
FencedText extract_fenced(const std::string& content);

// Stable digest of (system_prompt, turns, model_id); cassette key.
std::string request_fingerprint(const ChatRequest& request);

struct ScriptEntry {
    std::string agent;
    std::string content;
    // "" for a normal reply; "auth" or "transport" to fault-inject the
    // corresponding error.
    std::string error;
};

struct Script {
    std::vector<ScriptEntry> entries;
};

Script load_script(const std::filesystem::path& path);

// Deterministic provider: per-agent FIFO queues of canned responses, one
// consumed per call. Serializes internally so script order is preserved.
class ScriptedBackend : public Backend {
   public:
    explicit ScriptedBackend(Script script);

    ChatResponse complete(const ChatRequest& request) override;

    // Unconsumed entries across all agents.
    std::size_t remaining() const;

   private:
    mutable std::mutex mutex_;
    std::map<std::string, std::deque<ScriptEntry>> queues_;
};

// Replays recorded exchanges by request fingerprint; fails loudly on miss.
class ReplayBackend : public Backend {
   public:
    explicit ReplayBackend(const std::filesystem::path& cassette_path);

    ChatResponse complete(const ChatRequest& request) override;

   private:
    std::map<std::string, std::string> responses_;
};

// Wraps a live provider and appends every exchange to a cassette file.
class RecordingBackend : public Backend {
   public:
    RecordingBackend(std::unique_ptr<Backend> inner,
                     std::filesystem::path cassette_path);

    ChatResponse complete(const ChatRequest& request) override;

   private:
    std::mutex mutex_;
    std::unique_ptr<Backend> inner_;
    std::filesystem::path cassette_path_;
    std::vector<std::pair<std::string, std::string>> entries_;

    void flush_locked();
};

}  // namespace systemp::llm
