#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "discourse/gateway/backend.hpp"

namespace discourse::gateway {

struct HttpEndpoint {
    std::string base_url;          // e.g. https://api.openai.com/v1
    std::string model;
    std::string api_key_env = "DISCOURSE_API_KEY";
    std::chrono::seconds timeout{120};
};

/// Chat-completions style endpoint: POST {base_url}/chat/completions with a
/// messages array. Few-shot examples become alternating user/assistant turns.
class HttpChatBackend : public ChatBackend {
public:
    explicit HttpChatBackend(HttpEndpoint endpoint);
    std::string id() const override { return "http-chat:" + endpoint_.base_url; }
    std::string model() const override { return endpoint_.model; }
    std::string complete(const ChatRequest& request) override;

private:
    HttpEndpoint endpoint_;
};

/// POST {base_url}/embeddings with {"model", "input": [...]}.
class HttpEmbeddingBackend : public EmbeddingBackend {
public:
    explicit HttpEmbeddingBackend(HttpEndpoint endpoint);
    std::string id() const override { return "http-embed:" + endpoint_.base_url; }
    std::string model() const override { return endpoint_.model; }
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

private:
    HttpEndpoint endpoint_;
};

}  // namespace discourse::gateway
