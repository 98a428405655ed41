#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <doctest.h>

#include <atomic>
#include <deque>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "bplab/chat_client.hpp"
#include "bplab/log.hpp"

using namespace bplab;
using namespace bplab::gen;

namespace {

constexpr const char* kKey = "sk-test-7c1e9d0b";

struct Reply {
    int status;
    std::string body;
};

std::string content_body(const std::string& text) {
    return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}}}.dump();
}

// Local endpoint that answers from a script and records what it was sent.
class ScriptedServer {
public:
    explicit ScriptedServer(std::deque<Reply> script) : script_(std::move(script)) {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            std::lock_guard lock(mu_);
            ++requests;
            last_auth = req.get_header_value("Authorization");
            last_body = req.body;
            Reply r = script_.empty() ? Reply{500, "script exhausted"} : script_.front();
            if (!script_.empty()) script_.pop_front();
            res.status = r.status;
            res.set_content(r.body, "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~ScriptedServer() {
        server_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }

    std::atomic<int> requests{0};
    std::string last_auth, last_body;

private:
    httplib::Server server_;
    std::deque<Reply> script_;
    std::mutex mu_;
    int port_ = 0;
    std::thread thread_;
};

struct Harness {
    std::vector<std::chrono::milliseconds> sleeps;
    std::string logs;
    log::Sink old_sink;
    log::Level old_level;

    Harness() {
        old_sink = log::set_sink([this](log::Level, std::string_view m) { logs += std::string(m) + "\n"; });
        old_level = log::set_min_level(log::Level::Debug);
    }
    ~Harness() {
        log::set_sink(old_sink);
        log::set_min_level(old_level);
    }
    ChatClient client(const std::string& url) {
        EndpointConfig cfg;
        cfg.url = url;
        cfg.api_key = kKey;
        cfg.timeout_seconds = 5;
        return ChatClient(cfg, [this](std::chrono::milliseconds d) { sleeps.push_back(d); });
    }
};

}  // namespace

TEST_CASE("successful completion sends credential and sampling settings") {
    Harness h;
    ScriptedServer server({{200, content_body("{'l0': []}")}});
    const auto c = h.client(server.url());
    CHECK(c.complete("hello", {0.7, 0.8}) == "{'l0': []}");
    CHECK(server.requests == 1);
    CHECK(server.last_auth == std::string("Bearer ") + kKey);
    const auto body = nlohmann::json::parse(server.last_body);
    CHECK(body["model"] == "gpt-4o");
    CHECK(body["temperature"].get<double>() == 0.7);
    CHECK(body["top_p"].get<double>() == 0.8);
    CHECK(body["messages"][0]["content"] == "hello");
    CHECK(h.sleeps.empty());
    CHECK(h.logs.find(kKey) == std::string::npos);
}

TEST_CASE("401 fails immediately without retry") {
    Harness h;
    ScriptedServer server({{401, "{\"error\": \"bad key\"}"}, {200, content_body("late")}});
    const auto c = h.client(server.url());
    CHECK_THROWS_AS(c.complete("x", {}), AuthenticationError);
    CHECK(server.requests == 1);
    CHECK(h.logs.find(kKey) == std::string::npos);
}

TEST_CASE("429 then 200 backs off once and succeeds") {
    Harness h;
    ScriptedServer server({{429, "slow down"}, {200, content_body("ok")}});
    const auto c = h.client(server.url());
    CHECK(c.complete("x", {}) == "ok");
    CHECK(server.requests == 2);
    REQUIRE(h.sleeps.size() == 1);
    CHECK(h.sleeps[0] == std::chrono::milliseconds(1000));
}

TEST_CASE("persistent failures exhaust retries with exponential backoff") {
    Harness h;
    {
        ScriptedServer server({{503, ""}, {503, ""}, {503, ""}});
        const auto c = h.client(server.url());
        CHECK_THROWS_AS(c.complete("x", {}), NetworkError);
        CHECK(server.requests == 3);
        CHECK(h.sleeps == std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(1000),
                                                                  std::chrono::milliseconds(2000)});
    }
    {
        ScriptedServer server({{429, ""}, {429, ""}, {429, ""}});
        const auto c = h.client(server.url());
        CHECK_THROWS_AS(c.complete("x", {}), RateLimitError);
    }
}

TEST_CASE("malformed responses") {
    Harness h;
    ScriptedServer server({{200, "{\"choices\": []}"}, {200, "not json"}, {200, "{\"choices\": [{\"message\": {}}]}"},
                           {400, std::string("echo ") + kKey}});
    const auto c = h.client(server.url());
    CHECK_THROWS_AS(c.complete("x", {}), MalformedResponseError);
    CHECK_THROWS_AS(c.complete("x", {}), MalformedResponseError);
    CHECK_THROWS_AS(c.complete("x", {}), MalformedResponseError);
    try {
        c.complete("x", {});
        FAIL("expected an error");
    } catch (const MalformedResponseError& e) {
        CHECK(std::string(e.what()).find(kKey) == std::string::npos);
        CHECK(std::string(e.what()).find("[redacted]") != std::string::npos);
    }
    CHECK(h.logs.find(kKey) == std::string::npos);
}

TEST_CASE("unreachable endpoint is a network error and logs stay clean") {
    Harness h;
    int port = 0;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    const auto c = h.client("http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions");
    CHECK_THROWS_AS(c.complete("x", {}), NetworkError);
    CHECK(h.sleeps.size() == 2);
    CHECK(h.logs.find(kKey) == std::string::npos);
}

TEST_CASE("missing credential is a configuration error") {
    EndpointConfig cfg;
    cfg.url = "http://127.0.0.1:9/v1/chat/completions";
    cfg.api_key_env = "BPLAB_TEST_UNSET_CREDENTIAL_VARIABLE";
    CHECK_THROWS_AS(ChatClient{cfg}, ConfigError);
    cfg.api_key = kKey;
    cfg.url = "no-scheme";
    CHECK_THROWS_AS(ChatClient{cfg}, ConfigError);
}

TEST_CASE("redact replaces every occurrence") {
    CHECK(redact("a KEY b KEY", "KEY") == "a [redacted] b [redacted]");
    CHECK(redact("nothing", "") == "nothing");
}

TEST_CASE("chat_source forwards the context sampling") {
    Harness h;
    ScriptedServer server({{200, content_body("reply")}});
    auto client = std::make_shared<const ChatClient>(h.client(server.url()));
    PromptContext ctx;
    ctx.temperature = 1.1;
    ctx.top_p = 0.5;
    CHECK(chat_source(client)(ctx, "p") == "reply");
    const auto body = nlohmann::json::parse(server.last_body);
    CHECK(body["temperature"].get<double>() == 1.1);
    CHECK(body["top_p"].get<double>() == 0.5);
}
