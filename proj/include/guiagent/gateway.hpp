#pragma once

#include "guiagent/action_model.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace guiagent {

struct ChatMessage {
    std::string role;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    std::optional<nlohmann::json> tool_schemas;
    double temperature = 0.0;
    int max_tokens = 2048;
    double timeout_s = 120.0;
};

struct Usage {
    int prompt_tokens = 0;
    int completion_tokens = 0;
    int total_tokens = 0;
};

struct ChatResponse {
    std::optional<std::string> text;
    std::optional<std::vector<ToolCall>> tool_calls;
    Usage usage;
    double latency_s = 0.0;
};

class GatewayError : public std::runtime_error {
public:
    enum class Kind { timeout, transport, rate_limited, cassette_miss, script_exhausted, bad_response };

    GatewayError(Kind kind, std::string message) : std::runtime_error(std::move(message)), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

std::string_view to_string(GatewayError::Kind kind);

/// Throws std::invalid_argument on an empty message list or negative temperature.
void check_request(const ChatRequest& req);

/// Stable hash of (model, messages, tool schemas). Temperature, max_tokens
/// and timeout are not part of the key.
std::string request_hash(const ChatRequest& req);

nlohmann::json to_json(const ChatResponse& resp);
ChatResponse response_from_json(const nlohmann::json& j);

/// OpenAI-compatible `POST /v1/chat/completions` body.
nlohmann::json chat_completions_body(const ChatRequest& req);

/// Parses a chat-completions reply body into a response.
ChatResponse parse_chat_completion(const nlohmann::json& body);

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual ChatResponse complete(const ChatRequest& req) = 0;
};

/// Plays back canned responses, either in queue order or keyed by request hash.
class ScriptedBackend : public ChatBackend {
public:
    static std::shared_ptr<ScriptedBackend> sequence(std::vector<ChatResponse> responses);
    static std::shared_ptr<ScriptedBackend> sequence(const std::vector<std::string>& texts);
    static std::shared_ptr<ScriptedBackend> keyed(std::map<std::string, ChatResponse> by_hash);

    ChatResponse complete(const ChatRequest& req) override;

    std::size_t remaining() const;

private:
    std::mutex mutex_;
    std::deque<ChatResponse> queue_;
    std::map<std::string, ChatResponse> keyed_;
    bool keyed_mode_ = false;
};

/// Request-hash -> response map persisted as one JSON file.
class Cassette {
public:
    void put(const std::string& hash, const ChatResponse& resp);
    std::optional<ChatResponse> get(const std::string& hash) const;
    std::size_t size() const;

    static std::shared_ptr<Cassette> load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    nlohmann::json to_json() const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, nlohmann::json> entries_;
};

class ReplayBackend : public ChatBackend {
public:
    explicit ReplayBackend(std::shared_ptr<const Cassette> cassette) : cassette_(std::move(cassette)) {}
    ChatResponse complete(const ChatRequest& req) override;

private:
    std::shared_ptr<const Cassette> cassette_;
};

/// Forwards to `inner` and stores every successful response in the cassette.
class RecordingBackend : public ChatBackend {
public:
    RecordingBackend(std::shared_ptr<ChatBackend> inner, std::shared_ptr<Cassette> cassette)
        : inner_(std::move(inner)), cassette_(std::move(cassette))
    {
    }
    ChatResponse complete(const ChatRequest& req) override;

private:
    std::shared_ptr<ChatBackend> inner_;
    std::shared_ptr<Cassette> cassette_;
};

struct HttpConfig {
    /// Base URL such as `https://api.openai.com`; a path component, when present,
    /// replaces the default `/v1/chat/completions`.
    std::string endpoint = "https://api.openai.com";
    std::string api_key_env = "OPENAI_API_KEY";
    /// `Authorization` sends `Bearer <key>`; any other header name sends the raw key.
    std::string api_key_header = "Authorization";
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{1000};
    std::function<void(std::chrono::milliseconds)> sleep; // defaults to std::this_thread::sleep_for
};

class HttpBackend : public ChatBackend {
public:
    explicit HttpBackend(HttpConfig config);
    ChatResponse complete(const ChatRequest& req) override;

    /// Attempts made by the last `complete` call on this thread.
    static int last_attempts();

private:
    HttpConfig config_;
    std::string scheme_host_port_;
    std::string path_;
};

} // namespace guiagent
