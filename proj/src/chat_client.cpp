#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "bplab/chat_client.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "bplab/log.hpp"

namespace bplab::gen {
namespace {

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

ParsedUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint URL needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/v1/chat/completions"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

bool transient_status(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

std::string redact(std::string text, const std::string& secret) {
    if (secret.empty()) return text;
    for (auto pos = text.find(secret); pos != std::string::npos; pos = text.find(secret, pos)) {
        text.replace(pos, secret.size(), "[redacted]");
    }
    return text;
}

ChatClient::ChatClient(EndpointConfig cfg, Sleeper sleeper) : cfg_(std::move(cfg)), sleep_(std::move(sleeper)) {
    if (cfg_.url.empty()) throw ConfigError("endpoint URL is not configured");
    split_url(cfg_.url);
    key_ = cfg_.api_key;
    if (key_.empty() && !cfg_.api_key_env.empty()) {
        if (const char* env = std::getenv(cfg_.api_key_env.c_str())) key_ = env;
    }
    if (key_.empty()) throw ConfigError("no credential: set " + cfg_.api_key_env);
    if (cfg_.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
    if (!sleep_) sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string ChatClient::request_body(const std::string& prompt, const Sampling& sampling) const {
    nlohmann::json body = {
        {"model", cfg_.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
        {"temperature", sampling.temperature},
        {"top_p", sampling.top_p},
        {"max_tokens", cfg_.max_tokens},
    };
    return body.dump();
}

std::string ChatClient::complete(const std::string& prompt, const Sampling& sampling) const {
    const auto url = split_url(cfg_.url);
    const std::string body = request_body(prompt, sampling);
    const httplib::Headers headers = {{"Authorization", "Bearer " + key_}};

    auto backoff = cfg_.initial_backoff;
    std::string last_problem;
    bool last_was_rate_limit = false;
    for (int attempt = 1; attempt <= cfg_.max_attempts; ++attempt) {
        if (attempt > 1) {
            sleep_(backoff);
            backoff *= 2;
        }
        log::info("chat request to " + cfg_.url + " attempt " + std::to_string(attempt) + "/" +
                  std::to_string(cfg_.max_attempts));

        httplib::Client client(url.origin);
        const auto secs = static_cast<time_t>(cfg_.timeout_seconds);
        const auto usecs = static_cast<time_t>((cfg_.timeout_seconds - static_cast<double>(secs)) * 1e6);
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_write_timeout(secs, usecs);

        auto res = client.Post(url.path, headers, body, "application/json");
        if (!res) {
            last_problem = "transport error: " + httplib::to_string(res.error());
            last_was_rate_limit = false;
            log::warn(last_problem);
            continue;
        }
        const int status = res->status;
        log::info("chat response status " + std::to_string(status));
        if (status == 401 || status == 403) {
            throw AuthenticationError("endpoint rejected credential (HTTP " + std::to_string(status) + ")");
        }
        if (transient_status(status)) {
            last_was_rate_limit = status == 429;
            last_problem = "HTTP " + std::to_string(status);
            log::warn("transient failure " + last_problem);
            continue;
        }
        if (status < 200 || status >= 300) {
            throw MalformedResponseError(redact("unexpected HTTP " + std::to_string(status) + ": " +
                                                    res->body.substr(0, 200),
                                                key_));
        }
        const auto doc = nlohmann::json::parse(res->body, nullptr, false);
        if (doc.is_discarded()) throw MalformedResponseError("response is not JSON");
        try {
            const auto& content = doc.at("choices").at(0).at("message").at("content");
            if (!content.is_string()) throw MalformedResponseError("assistant content is not a string");
            return content.get<std::string>();
        } catch (const nlohmann::json::exception&) {
            throw MalformedResponseError("response missing choices[0].message.content");
        }
    }
    const std::string msg = redact("chat request failed after " + std::to_string(cfg_.max_attempts) +
                                       " attempts: " + last_problem,
                                   key_);
    if (last_was_rate_limit) throw RateLimitError(msg);
    throw NetworkError(msg);
}

TextSource chat_source(std::shared_ptr<const ChatClient> client) {
    return [client](const PromptContext& ctx, const std::string& prompt) {
        return client->complete(prompt, Sampling{ctx.temperature, ctx.top_p});
    };
}

}  // namespace bplab::gen
