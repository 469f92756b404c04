#include "agentgate/completion.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>

#include <httplib.h>

namespace agentgate {

using nlohmann::json;

CompletionEndpointConfig CompletionEndpointConfig::from_json(const json& j) {
    CompletionEndpointConfig c;
    if (auto it = j.find("base_url"); it != j.end()) c.base_url = *it;
    if (auto it = j.find("model"); it != j.end()) c.model = *it;
    if (auto it = j.find("path"); it != j.end()) c.path = *it;
    if (auto it = j.find("api_key_env"); it != j.end()) c.api_key_env = *it;
    if (auto it = j.find("timeout_s"); it != j.end()) c.timeout_s = *it;
    if (auto it = j.find("temperature"); it != j.end()) c.temperature = *it;
    if (c.base_url.empty()) {
        throw CompletionError("completion config: base_url is required");
    }
    return c;
}

CompletionEndpointConfig CompletionEndpointConfig::load(
    const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw CompletionError("completion config: cannot open " +
                              file.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw CompletionError("completion config: " + std::string(e.what()));
    }
    return from_json(j);
}

HttpCompletionClient::HttpCompletionClient(CompletionEndpointConfig cfg)
    : cfg_(std::move(cfg)) {
    if (cfg_.base_url.empty()) {
        throw CompletionError("HttpCompletionClient: base_url is required");
    }
}

std::string HttpCompletionClient::complete(
    const std::vector<ChatMessage>& messages) {
    httplib::Client cli(cfg_.base_url);
    auto timeout = std::chrono::duration<double>(cfg_.timeout_s);
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    cli.set_write_timeout(timeout);

    httplib::Headers headers;
    if (!cfg_.api_key_env.empty()) {
        if (const char* key = std::getenv(cfg_.api_key_env.c_str())) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }

    json body{{"model", cfg_.model}, {"temperature", cfg_.temperature}};
    json msgs = json::array();
    for (const ChatMessage& m : messages) {
        msgs.push_back(json{{"role", m.role}, {"content", m.content}});
    }
    body["messages"] = std::move(msgs);

    auto res = cli.Post(cfg_.path, headers, body.dump(), "application/json");
    if (!res) {
        throw CompletionError("completion endpoint unreachable: " +
                              httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw CompletionError("completion endpoint returned HTTP " +
                              std::to_string(res->status));
    }
    json reply;
    try {
        reply = json::parse(res->body);
    } catch (const json::parse_error& e) {
        throw CompletionError("completion response is not JSON: " +
                              std::string(e.what()));
    }
    try {
        return reply.at("choices").at(0).at("message").at("content")
            .get<std::string>();
    } catch (const json::exception&) {
        throw CompletionError(
            "completion response missing choices[0].message.content");
    }
}

}  // namespace agentgate
