#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "discourse/prompts.hpp"

namespace discourse::gateway {

struct FewShotExample {
    std::string input;
    std::string output;
};

struct ChatRequest {
    std::string template_id;
    std::string rendered_prompt;
    double temperature = 0.0;
    int max_tokens = 1024;
    std::vector<FewShotExample> few_shot;
    /// The values the prompt was rendered from. Carried for offline backends
    /// that answer from structured input; not part of the request identity.
    PromptVars variables;
};

/// Renders `template_id` from the registry and wraps it in a request.
ChatRequest make_request(const std::string& template_id, PromptVars vars,
                         const PromptRegistry& registry = PromptRegistry::builtin());

/// Throws std::invalid_argument when the request is unusable.
void validate(const ChatRequest& request, const PromptRegistry& registry = PromptRegistry::builtin());

class GatewayError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Worth retrying: rate limiting, 5xx, dropped connections.
class TransientError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class RetriesExhausted : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class AuthenticationError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

/// The backend refused or filtered the content.
class ContentError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string id() const = 0;
    virtual std::string model() const = 0;
    virtual std::string complete(const ChatRequest& request) = 0;
};

class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;
    virtual std::string id() const = 0;
    virtual std::string model() const = 0;
    /// One raw (not necessarily normalized) vector per input, in order.
    virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;
};

}  // namespace discourse::gateway
