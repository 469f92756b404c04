#pragma once

#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace agentgate {

struct ChatMessage {
    std::string role;  // "system" | "user" | "assistant"
    std::string content;
};

class CompletionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Minimal chat-style completion interface: messages in, plain text out.
// Any hosted model endpoint or a local stub satisfies it, which keeps
// everything that talks to a model testable offline.
class CompletionClient {
public:
    virtual ~CompletionClient() = default;
    // Throws CompletionError on transport or protocol failure.
    virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
};

struct CompletionEndpointConfig {
    std::string base_url;  // e.g. "http://127.0.0.1:8080"
    std::string model;
    std::string path = "/v1/chat/completions";
    std::string api_key_env = "COMPLETION_API_KEY";
    double timeout_s = 30.0;
    double temperature = 0.0;

    static CompletionEndpointConfig from_json(const nlohmann::json& j);
    static CompletionEndpointConfig load(const std::filesystem::path& file);
};

// Chat-completions HTTP client (OpenAI-style request/response shape).
class HttpCompletionClient final : public CompletionClient {
public:
    explicit HttpCompletionClient(CompletionEndpointConfig cfg);
    std::string complete(const std::vector<ChatMessage>& messages) override;

private:
    CompletionEndpointConfig cfg_;
};

// Scripted stand-in for tests: answers come from a callback.
class StubCompletionClient final : public CompletionClient {
public:
    using Handler =
        std::function<std::string(const std::vector<ChatMessage>&)>;

    explicit StubCompletionClient(Handler handler)
        : handler_(std::move(handler)) {}

    // Convenience: always return the same text.
    static StubCompletionClient fixed(std::string text) {
        return StubCompletionClient(
            [text = std::move(text)](const auto&) { return text; });
    }

    std::string complete(const std::vector<ChatMessage>& messages) override {
        return handler_(messages);
    }

private:
    Handler handler_;
};

}  // namespace agentgate
