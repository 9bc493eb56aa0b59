#include "systemp/llm/gateway.hpp"

#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace systemp::llm {

namespace {

std::string trim(const std::string& text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) {
        ++begin;
    }
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) {
        --end;
    }
    return text.substr(begin, end - begin);
}

struct FencePair {
    std::size_t payload_begin = std::string::npos;
    std::size_t payload_end = std::string::npos;
    std::size_t open_pos = std::string::npos;
};

// Finds the first matched pair of `fence`, skipping a markdown language
// tag directly after a backtick fence (e.g. ```json).
std::optional<FencePair> find_pair(const std::string& content,
                                   const std::string& fence) {
    std::size_t open = content.find(fence);
    if (open == std::string::npos) {
        return std::nullopt;
    }
    std::size_t payload_begin = open + fence.size();
    if (fence == "```") {
        std::size_t tag_end = payload_begin;
        while (tag_end < content.size() &&
               (std::isalnum(static_cast<unsigned char>(content[tag_end])) ||
                content[tag_end] == '_' || content[tag_end] == '+' ||
                content[tag_end] == '#' || content[tag_end] == '-')) {
            ++tag_end;
        }
        if (tag_end > payload_begin && tag_end < content.size() &&
            content[tag_end] == '\n') {
            payload_begin = tag_end + 1;
        }
    }
    std::size_t close = content.find(fence, payload_begin);
    if (close == std::string::npos) {
        return std::nullopt;
    }
    return FencePair{payload_begin, close, open};
}

std::string read_file_or_throw(const std::filesystem::path& path,
                               const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error(std::string("cannot open ") + what + " file: " +
                                 path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

void ChatRequest::validate() const {
    if (turns.empty()) {
        throw std::invalid_argument("chat request needs at least one turn");
    }
    if (turns.back().role != Role::User) {
        throw std::invalid_argument("the last turn must be a user turn");
    }
    if (temperature < 0.0 || temperature > 2.0) {
        throw std::invalid_argument("temperature must be within [0, 2]");
    }
    if (max_output_tokens <= 0) {
        throw std::invalid_argument("max_output_tokens must be positive");
    }
}

FencedText extract_fenced(const std::string& content) {
    auto triple_quote = find_pair(content, "'''");
    auto backtick = find_pair(content, "```");

    const FencePair* chosen = nullptr;
    if (triple_quote && backtick) {
        chosen = triple_quote->open_pos < backtick->open_pos ? &*triple_quote
                                                             : &*backtick;
    } else if (triple_quote) {
        chosen = &*triple_quote;
    } else if (backtick) {
        chosen = &*backtick;
    }

    if (chosen == nullptr) {
        return {trim(content), false};
    }
    return {trim(content.substr(chosen->payload_begin,
                                chosen->payload_end - chosen->payload_begin)),
            true};
}

std::string request_fingerprint(const ChatRequest& request) {
    constexpr std::uint64_t kOffset = 1469598103934665603ull;
    constexpr std::uint64_t kPrime = 1099511628211ull;
    std::uint64_t hash = kOffset;
    auto mix = [&hash](const std::string& text) {
        for (unsigned char c : text) {
            hash ^= c;
            hash *= kPrime;
        }
        hash ^= 0x1f;
        hash *= kPrime;
    };
    mix(request.system_prompt);
    for (const auto& turn : request.turns) {
        hash ^= turn.role == Role::User ? 'u' : 'a';
        hash *= kPrime;
        mix(turn.content);
    }
    mix(request.model_id);

    static const char* kHex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kHex[hash & 0xf];
        hash >>= 4;
    }
    return out;
}

Script load_script(const std::filesystem::path& path) {
    std::string text = read_file_or_throw(path, "script");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("malformed script file " + path.string() +
                                 ": " + e.what());
    }
    const nlohmann::json* entries = &doc;
    if (doc.is_object() && doc.contains("responses")) {
        entries = &doc.at("responses");
    }
    if (!entries->is_array()) {
        throw std::runtime_error("script file " + path.string() +
                                 " must be an array of entries");
    }
    Script script;
    for (const auto& item : *entries) {
        ScriptEntry entry;
        entry.agent = item.value("agent", "");
        entry.content = item.value("content", "");
        entry.error = item.value("error", "");
        if (entry.agent.empty()) {
            throw std::runtime_error("script entry without an \"agent\" key in " +
                                     path.string());
        }
        script.entries.push_back(std::move(entry));
    }
    return script;
}

ScriptedBackend::ScriptedBackend(Script script) {
    for (auto& entry : script.entries) {
        queues_[entry.agent].push_back(std::move(entry));
    }
}

ChatResponse ScriptedBackend::complete(const ChatRequest& request) {
    request.validate();
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = queues_.find(request.agent);
    if (it == queues_.end() || it->second.empty()) {
        throw ScriptExhausted("no scripted response left for agent '" +
                              request.agent + "'");
    }
    ScriptEntry entry = std::move(it->second.front());
    it->second.pop_front();
    if (entry.error == "auth") {
        throw AuthError("scripted auth failure for agent '" + request.agent +
                        "'");
    }
    if (entry.error == "transport") {
        throw TransportError("scripted transport failure for agent '" +
                             request.agent + "'");
    }
    ChatResponse response;
    response.content = std::move(entry.content);
    response.finish_reason = FinishReason::Normal;
    return response;
}

std::size_t ScriptedBackend::remaining() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::size_t count = 0;
    for (const auto& [agent, queue] : queues_) {
        count += queue.size();
    }
    return count;
}

ReplayBackend::ReplayBackend(const std::filesystem::path& cassette_path) {
    std::string text = read_file_or_throw(cassette_path, "cassette");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("malformed cassette file " +
                                 cassette_path.string() + ": " + e.what());
    }
    if (!doc.is_array()) {
        throw std::runtime_error("cassette file " + cassette_path.string() +
                                 " must be a JSON array");
    }
    for (const auto& item : doc) {
        responses_[item.at("key").get<std::string>()] =
            item.at("content").get<std::string>();
    }
}

ChatResponse ReplayBackend::complete(const ChatRequest& request) {
    request.validate();
    std::string key = request_fingerprint(request);
    auto it = responses_.find(key);
    if (it == responses_.end()) {
        throw CassetteMiss("no recorded response for request " + key +
                           " (agent '" + request.agent + "')");
    }
    ChatResponse response;
    response.content = it->second;
    response.finish_reason = FinishReason::Normal;
    return response;
}

RecordingBackend::RecordingBackend(std::unique_ptr<Backend> inner,
                                   std::filesystem::path cassette_path)
    : inner_(std::move(inner)), cassette_path_(std::move(cassette_path)) {
    std::ifstream existing(cassette_path_);
    if (existing) {
        nlohmann::json doc;
        existing >> doc;
        for (const auto& item : doc) {
            entries_.emplace_back(item.at("key").get<std::string>(),
                                  item.at("content").get<std::string>());
        }
    }
}

ChatResponse RecordingBackend::complete(const ChatRequest& request) {
    ChatResponse response = inner_->complete(request);
    std::lock_guard<std::mutex> lock(mutex_);
    entries_.emplace_back(request_fingerprint(request), response.content);
    flush_locked();
    return response;
}

void RecordingBackend::flush_locked() {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& [key, content] : entries_) {
        doc.push_back({{"key", key}, {"content", content}});
    }
    std::ofstream out(cassette_path_, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write cassette file: " +
                                 cassette_path_.string());
    }
    out << doc.dump(2) << '\n';
}

}  // namespace systemp::llm
