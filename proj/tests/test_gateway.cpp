#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "doctest.h"

#include "guiagent/gateway.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

using namespace guiagent;

namespace {

ChatRequest request(const std::string& text)
{
    ChatRequest r;
    r.model = "m";
    r.messages = {{"user", text}};
    r.timeout_s = 5.0;
    return r;
}

const char* kCompletion = R"js({"choices":[{"message":{"role":"assistant","content":"Action_2=(Action: functions.press_control_A, Argument: {})"}}],
"usage":{"prompt_tokens":11,"completion_tokens":7,"total_tokens":18}})js";

struct LocalServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    LocalServer()
    {
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~LocalServer()
    {
        server.stop();
        thread.join();
    }
    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port); }
};

HttpConfig quick(const std::string& endpoint, std::vector<std::chrono::milliseconds>* sleeps)
{
    HttpConfig c;
    c.endpoint = endpoint;
    c.api_key_env = "GUIAGENT_TEST_KEY";
    c.max_retries = 3;
    c.backoff_base = std::chrono::milliseconds(100);
    c.sleep = [sleeps](std::chrono::milliseconds d) { sleeps->push_back(d); };
    return c;
}

} // namespace

TEST_CASE("scripted sequence plays back in order then runs dry")
{
    auto b = ScriptedBackend::sequence(std::vector<std::string>{"one", "two"});
    CHECK(b->complete(request("a")).text == "one");
    CHECK(b->remaining() == 1);
    CHECK(b->complete(request("b")).text == "two");
    try {
        b->complete(request("c"));
        FAIL("expected exhaustion");
    } catch (const GatewayError& e) {
        CHECK(e.kind() == GatewayError::Kind::script_exhausted);
    }
}

TEST_CASE("scripted keyed mode matches request hashes")
{
    ChatResponse r;
    r.text = "keyed";
    auto b = ScriptedBackend::keyed({{request_hash(request("x")), r}});
    CHECK(b->complete(request("x")).text == "keyed");
    CHECK_THROWS_AS(b->complete(request("y")), GatewayError);
}

TEST_CASE("request hash ignores sampling knobs only")
{
    auto a = request("x");
    auto b = a;
    b.temperature = 0.7;
    b.max_tokens = 5;
    b.timeout_s = 1;
    CHECK(request_hash(a) == request_hash(b));
    b.model = "other";
    CHECK(request_hash(a) != request_hash(b));
    auto c = a;
    c.tool_schemas = nlohmann::json::array({{{"name", "t"}}});
    CHECK(request_hash(a) != request_hash(c));
}

TEST_CASE("request checks")
{
    ChatRequest r;
    CHECK_THROWS_AS(check_request(r), std::invalid_argument);
    r = request("x");
    r.temperature = -1;
    CHECK_THROWS_AS(check_request(r), std::invalid_argument);
}

TEST_CASE("cassette records, saves, loads and replays")
{
    auto inner = ScriptedBackend::sequence(std::vector<std::string>{"first", "second"});
    auto cassette = std::make_shared<Cassette>();
    RecordingBackend rec(inner, cassette);
    rec.complete(request("p1"));
    rec.complete(request("p2"));
    CHECK(cassette->size() == 2);

    const auto path = std::filesystem::temp_directory_path() / "guiagent_test_cassette.json";
    cassette->save(path);
    ReplayBackend replay(Cassette::load(path));
    CHECK(replay.complete(request("p2")).text == "second");
    CHECK(replay.complete(request("p1")).text == "first");
    try {
        replay.complete(request("p3"));
        FAIL("expected a miss");
    } catch (const GatewayError& e) {
        CHECK(e.kind() == GatewayError::Kind::cassette_miss);
    }
    std::filesystem::remove(path);
}

TEST_CASE("response JSON round-trip keeps tool calls")
{
    ChatResponse r;
    r.text = "t";
    r.tool_calls = std::vector<ToolCall>{{"click_element", {{"element_id", 3}}}};
    r.usage = {1, 2, 3};
    const auto back = response_from_json(to_json(r));
    CHECK(back.text == r.text);
    REQUIRE(back.tool_calls);
    CHECK((*back.tool_calls)[0].name == "click_element");
    CHECK(back.usage.total_tokens == 3);
}

TEST_CASE("chat completion body and reply parsing")
{
    auto req = request("hello");
    req.tool_schemas = nlohmann::json::array({{{"name", "click_element"}, {"parameters", nlohmann::json::object()}}});
    const auto body = chat_completions_body(req);
    CHECK(body["model"] == "m");
    CHECK(body["messages"][0]["content"] == "hello");
    CHECK(body.contains("tools"));

    const auto tool_reply = nlohmann::json::parse(R"({"choices":[{"message":{"content":null,"tool_calls":[
        {"type":"function","function":{"name":"type_text","arguments":"{\"string_to_type\":\"hi\"}"}}]}}]})");
    const auto r = parse_chat_completion(tool_reply);
    REQUIRE(r.tool_calls);
    CHECK((*r.tool_calls)[0].name == "type_text");
    CHECK_THROWS_AS(parse_chat_completion(nlohmann::json::object()), GatewayError);
}

TEST_CASE("http backend sends the key and parses the completion")
{
    LocalServer s;
    std::string auth;
    nlohmann::json seen;
    s.server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        auth = req.get_header_value("Authorization");
        seen = nlohmann::json::parse(req.body);
        res.set_content(kCompletion, "application/json");
    });
    ::setenv("GUIAGENT_TEST_KEY", "sekret", 1);
    std::vector<std::chrono::milliseconds> sleeps;
    HttpBackend b(quick(s.endpoint(), &sleeps));
    const auto r = b.complete(request("hi"));
    CHECK(auth == "Bearer sekret");
    CHECK(seen["messages"][0]["content"] == "hi");
    REQUIRE(r.text);
    CHECK(r.text->find("press_control_A") != std::string::npos);
    CHECK(r.usage.total_tokens == 18);
    CHECK(HttpBackend::last_attempts() == 1);
    CHECK(sleeps.empty());
    ::unsetenv("GUIAGENT_TEST_KEY");
}

TEST_CASE("http backend retries 429 and 5xx with exponential backoff")
{
    LocalServer s;
    std::atomic<int> calls{0};
    s.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        const int n = calls++;
        if (n == 0)
            res.status = 429;
        else if (n == 1)
            res.status = 503;
        else
            res.set_content(kCompletion, "application/json");
    });
    std::vector<std::chrono::milliseconds> sleeps;
    HttpBackend b(quick(s.endpoint(), &sleeps));
    CHECK_NOTHROW(b.complete(request("x")));
    CHECK(calls == 3);
    CHECK(HttpBackend::last_attempts() == 3);
    REQUIRE(sleeps.size() == 2);
    CHECK(sleeps[0] == std::chrono::milliseconds(100));
    CHECK(sleeps[1] == std::chrono::milliseconds(200));
}

TEST_CASE("http backend gives up after max retries")
{
    LocalServer s;
    std::atomic<int> calls{0};
    s.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        res.status = 429;
    });
    std::vector<std::chrono::milliseconds> sleeps;
    HttpBackend b(quick(s.endpoint(), &sleeps));
    try {
        b.complete(request("x"));
        FAIL("expected rate limiting");
    } catch (const GatewayError& e) {
        CHECK(e.kind() == GatewayError::Kind::rate_limited);
    }
    CHECK(calls == 4);
    CHECK(sleeps.size() == 3);
}

TEST_CASE("http backend does not retry client errors")
{
    LocalServer s;
    std::atomic<int> calls{0};
    s.server.Post("/custom/path", [&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        res.status = 400;
        res.set_content("bad request", "text/plain");
    });
    std::vector<std::chrono::milliseconds> sleeps;
    HttpBackend b(quick(s.endpoint() + "/custom/path", &sleeps));
    CHECK_THROWS_AS(b.complete(request("x")), GatewayError);
    CHECK(calls == 1);
}

TEST_CASE("http backend reports unreachable endpoints as transport errors")
{
    std::vector<std::chrono::milliseconds> sleeps;
    auto cfg = quick("http://127.0.0.1:1", &sleeps);
    cfg.max_retries = 1;
    HttpBackend b(cfg);
    try {
        b.complete(request("x"));
        FAIL("expected failure");
    } catch (const GatewayError& e) {
        CHECK((e.kind() == GatewayError::Kind::transport || e.kind() == GatewayError::Kind::timeout));
    }
    CHECK_THROWS_AS(HttpBackend(HttpConfig{"no-scheme"}), std::invalid_argument);
}
