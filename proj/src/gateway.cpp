#include "guiagent/gateway.hpp"

#include "guiagent/hash.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <fstream>
#include <thread>

namespace guiagent {

namespace {

thread_local int t_last_attempts = 0;

nlohmann::json tool_calls_json(const std::vector<ToolCall>& calls)
{
    auto arr = nlohmann::json::array();
    for (const auto& c : calls)
        arr.push_back({{"name", c.name}, {"arguments", c.arguments}});
    return arr;
}

} // namespace

std::string_view to_string(GatewayError::Kind kind)
{
    switch (kind) {
    case GatewayError::Kind::timeout:
        return "Timeout";
    case GatewayError::Kind::transport:
        return "TransportError";
    case GatewayError::Kind::rate_limited:
        return "RateLimited";
    case GatewayError::Kind::cassette_miss:
        return "CassetteMiss";
    case GatewayError::Kind::script_exhausted:
        return "ScriptExhausted";
    case GatewayError::Kind::bad_response:
        return "BadResponse";
    }
    return "?";
}

void check_request(const ChatRequest& req)
{
    if (req.messages.empty())
        throw std::invalid_argument("chat request has no messages");
    if (req.temperature < 0.0)
        throw std::invalid_argument("temperature must be non-negative");
}

std::string request_hash(const ChatRequest& req)
{
    nlohmann::json j;
    j["model"] = req.model;
    auto& msgs = j["messages"] = nlohmann::json::array();
    for (const auto& m : req.messages)
        msgs.push_back({{"role", m.role}, {"content", m.content}});
    j["tools"] = req.tool_schemas ? *req.tool_schemas : nlohmann::json(nullptr);
    return to_hex64(fnv1a64(j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace)));
}

nlohmann::json to_json(const ChatResponse& resp)
{
    nlohmann::json j;
    j["text"] = resp.text ? nlohmann::json(*resp.text) : nlohmann::json(nullptr);
    j["tool_calls"] = resp.tool_calls ? tool_calls_json(*resp.tool_calls) : nlohmann::json(nullptr);
    j["usage"] = {{"prompt_tokens", resp.usage.prompt_tokens},
                  {"completion_tokens", resp.usage.completion_tokens},
                  {"total_tokens", resp.usage.total_tokens}};
    return j;
}

ChatResponse response_from_json(const nlohmann::json& j)
{
    ChatResponse r;
    if (j.contains("text") && j["text"].is_string())
        r.text = j["text"].get<std::string>();
    if (j.contains("tool_calls") && j["tool_calls"].is_array()) {
        std::vector<ToolCall> calls;
        for (const auto& c : j["tool_calls"])
            calls.push_back({c.at("name").get<std::string>(), c.value("arguments", nlohmann::json::object())});
        r.tool_calls = std::move(calls);
    }
    if (j.contains("usage")) {
        const auto& u = j["usage"];
        r.usage = {u.value("prompt_tokens", 0), u.value("completion_tokens", 0), u.value("total_tokens", 0)};
    }
    return r;
}

nlohmann::json chat_completions_body(const ChatRequest& req)
{
    nlohmann::json body;
    body["model"] = req.model;
    auto& msgs = body["messages"] = nlohmann::json::array();
    for (const auto& m : req.messages)
        msgs.push_back({{"role", m.role}, {"content", m.content}});
    if (req.tool_schemas && !req.tool_schemas->empty()) {
        auto tools = nlohmann::json::array();
        for (const auto& fn : *req.tool_schemas)
            tools.push_back({{"type", "function"}, {"function", fn}});
        body["tools"] = std::move(tools);
        body["tool_choice"] = "auto";
    }
    body["temperature"] = req.temperature;
    body["max_tokens"] = req.max_tokens;
    return body;
}

ChatResponse parse_chat_completion(const nlohmann::json& body)
{
    try {
        const auto& message = body.at("choices").at(0).at("message");
        ChatResponse r;
        if (message.contains("content") && message["content"].is_string())
            r.text = message["content"].get<std::string>();
        if (message.contains("tool_calls") && message["tool_calls"].is_array() && !message["tool_calls"].empty()) {
            std::vector<ToolCall> calls;
            for (const auto& c : message["tool_calls"]) {
                const auto& fn = c.at("function");
                calls.push_back({fn.at("name").get<std::string>(), fn.value("arguments", nlohmann::json("{}"))});
            }
            r.tool_calls = std::move(calls);
        }
        if (body.contains("usage") && body["usage"].is_object()) {
            const auto& u = body["usage"];
            r.usage = {u.value("prompt_tokens", 0), u.value("completion_tokens", 0), u.value("total_tokens", 0)};
        }
        if (!r.text && !r.tool_calls)
            throw GatewayError(GatewayError::Kind::bad_response, "completion carries neither text nor tool calls");
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw GatewayError(GatewayError::Kind::bad_response, std::string("malformed completion body: ") + e.what());
    }
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::sequence(std::vector<ChatResponse> responses)
{
    auto b = std::make_shared<ScriptedBackend>();
    b->queue_.assign(std::make_move_iterator(responses.begin()), std::make_move_iterator(responses.end()));
    return b;
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::sequence(const std::vector<std::string>& texts)
{
    std::vector<ChatResponse> responses;
    for (const auto& t : texts) {
        ChatResponse r;
        r.text = t;
        responses.push_back(std::move(r));
    }
    return sequence(std::move(responses));
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::keyed(std::map<std::string, ChatResponse> by_hash)
{
    auto b = std::make_shared<ScriptedBackend>();
    b->keyed_ = std::move(by_hash);
    b->keyed_mode_ = true;
    return b;
}

ChatResponse ScriptedBackend::complete(const ChatRequest& req)
{
    check_request(req);
    std::lock_guard lock(mutex_);
    if (keyed_mode_) {
        const auto hash = request_hash(req);
        const auto it = keyed_.find(hash);
        if (it == keyed_.end())
            throw GatewayError(GatewayError::Kind::script_exhausted, "no scripted response for request " + hash);
        return it->second;
    }
    if (queue_.empty())
        throw GatewayError(GatewayError::Kind::script_exhausted, "scripted response queue is exhausted");
    auto r = std::move(queue_.front());
    queue_.pop_front();
    return r;
}

std::size_t ScriptedBackend::remaining() const
{
    return keyed_mode_ ? keyed_.size() : queue_.size();
}

void Cassette::put(const std::string& hash, const ChatResponse& resp)
{
    std::lock_guard lock(mutex_);
    entries_[hash] = guiagent::to_json(resp);
}

std::optional<ChatResponse> Cassette::get(const std::string& hash) const
{
    std::lock_guard lock(mutex_);
    const auto it = entries_.find(hash);
    if (it == entries_.end())
        return std::nullopt;
    return response_from_json(it->second);
}

std::size_t Cassette::size() const
{
    std::lock_guard lock(mutex_);
    return entries_.size();
}

nlohmann::json Cassette::to_json() const
{
    std::lock_guard lock(mutex_);
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : entries_)
        j[k] = v;
    return j;
}

std::shared_ptr<Cassette> Cassette::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open cassette " + path.string());
    const auto j = nlohmann::json::parse(in);
    auto c = std::make_shared<Cassette>();
    for (const auto& [k, v] : j.items())
        c->entries_[k] = v;
    return c;
}

void Cassette::save(const std::filesystem::path& path) const
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write cassette " + path.string());
    out << to_json().dump(1) << "\n";
}

ChatResponse ReplayBackend::complete(const ChatRequest& req)
{
    check_request(req);
    const auto hash = request_hash(req);
    auto r = cassette_->get(hash);
    if (!r)
        throw GatewayError(GatewayError::Kind::cassette_miss, "no cassette entry for request " + hash);
    return *r;
}

ChatResponse RecordingBackend::complete(const ChatRequest& req)
{
    auto r = inner_->complete(req);
    cassette_->put(request_hash(req), r);
    return r;
}

HttpBackend::HttpBackend(HttpConfig config) : config_(std::move(config))
{
    const auto scheme_end = config_.endpoint.find("://");
    if (scheme_end == std::string::npos)
        throw std::invalid_argument("endpoint must include a scheme: " + config_.endpoint);
    const auto path_start = config_.endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        scheme_host_port_ = config_.endpoint;
        path_ = "/v1/chat/completions";
    } else {
        scheme_host_port_ = config_.endpoint.substr(0, path_start);
        path_ = config_.endpoint.substr(path_start);
    }
    if (!config_.sleep)
        config_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

int HttpBackend::last_attempts() { return t_last_attempts; }

ChatResponse HttpBackend::complete(const ChatRequest& req)
{
    check_request(req);
    const auto body = chat_completions_body(req).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);

    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
        if (config_.api_key_header == "Authorization")
            headers.emplace("Authorization", std::string("Bearer ") + key);
        else
            headers.emplace(config_.api_key_header, key);
    }

    const auto secs = static_cast<time_t>(req.timeout_s);
    const auto usecs = static_cast<time_t>((req.timeout_s - static_cast<double>(secs)) * 1e6);

    t_last_attempts = 0;
    GatewayError last(GatewayError::Kind::transport, "no attempt made");
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0)
            config_.sleep(config_.backoff_base * (1 << (attempt - 1)));
        ++t_last_attempts;

        httplib::Client client(scheme_host_port_);
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_write_timeout(secs, usecs);

        const auto start = std::chrono::steady_clock::now();
        auto res = client.Post(path_, headers, body, "application/json");
        const double latency = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        if (!res) {
            const auto err = res.error();
            const bool timed_out = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
            last = GatewayError(timed_out ? GatewayError::Kind::timeout : GatewayError::Kind::transport,
                                "request to " + scheme_host_port_ + path_ + " failed: " + httplib::to_string(err));
            continue;
        }
        if (res->status == 429) {
            last = GatewayError(GatewayError::Kind::rate_limited, "rate limited (HTTP 429)");
            continue;
        }
        if (res->status >= 500) {
            last = GatewayError(GatewayError::Kind::transport, "server error HTTP " + std::to_string(res->status));
            continue;
        }
        if (res->status != 200)
            throw GatewayError(GatewayError::Kind::transport,
                               "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500));

        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw GatewayError(GatewayError::Kind::bad_response, std::string("response is not JSON: ") + e.what());
        }
        auto r = parse_chat_completion(parsed);
        r.latency_s = latency;
        return r;
    }
    throw last;
}

} // namespace guiagent
