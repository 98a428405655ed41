#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <string>

#include "bplab/error.hpp"
#include "bplab/generator.hpp"

namespace bplab::gen {

struct GenerationError : Error {
    using Error::Error;
};
/// Transport failure that persisted through every retry.
struct NetworkError : GenerationError {
    using GenerationError::GenerationError;
};
struct AuthenticationError : GenerationError {
    using GenerationError::GenerationError;
};
struct RateLimitError : GenerationError {
    using GenerationError::GenerationError;
};
/// 2xx reply without assistant content, or an unexpected status.
struct MalformedResponseError : GenerationError {
    using GenerationError::GenerationError;
};
/// Missing endpoint or credential.
struct ConfigError : GenerationError {
    using GenerationError::GenerationError;
};

struct EndpointConfig {
    std::string url;  // full chat-completions URL
    std::string model = "gpt-4o";
    std::string api_key_env = "OPENAI_API_KEY";
    /// Overrides the environment lookup when non-empty.
    std::string api_key;
    double timeout_seconds = 120.0;
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{1000};
    int max_tokens = 4096;
};

struct Sampling {
    double temperature = 0.5;
    double top_p = 0.9;
};

/// OpenAI-compatible chat-completion client. Safe to share between threads;
/// every call opens its own connection.
class ChatClient {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    /// Resolves the credential; throws ConfigError when it is absent.
    explicit ChatClient(EndpointConfig cfg, Sleeper sleeper = {});

    /// Request body for `prompt`, as serialized JSON.
    std::string request_body(const std::string& prompt, const Sampling& sampling) const;

    /// Sends one completion request with retry/backoff; returns the assistant text.
    std::string complete(const std::string& prompt, const Sampling& sampling) const;

    const EndpointConfig& config() const { return cfg_; }

private:
    EndpointConfig cfg_;
    std::string key_;
    Sleeper sleep_;
};

/// Adapts a client into a TextSource using the context's sampling fields.
TextSource chat_source(std::shared_ptr<const ChatClient> client);

/// Replaces every occurrence of `secret` in `text`.
std::string redact(std::string text, const std::string& secret);

}  // namespace bplab::gen
