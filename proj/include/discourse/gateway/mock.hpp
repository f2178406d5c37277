#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "discourse/gateway/backend.hpp"

namespace discourse::gateway {

/// Returns the rendered prompt unchanged.
class EchoChatBackend : public ChatBackend {
public:
    std::string id() const override { return "mock-echo"; }
    std::string model() const override { return "echo"; }
    std::string complete(const ChatRequest& request) override { return request.rendered_prompt; }
};

/// Replays a queue of scripted steps in call order, then falls back to an
/// optional handler. Every request is logged for inspection.
class ScriptedChatBackend : public ChatBackend {
public:
    using Handler = std::function<std::string(const ChatRequest&)>;

    ScriptedChatBackend() = default;
    explicit ScriptedChatBackend(std::vector<std::string> responses);
    explicit ScriptedChatBackend(Handler fallback) : fallback_(std::move(fallback)) {}

    std::string id() const override { return "mock-scripted"; }
    std::string model() const override { return model_; }
    void set_model(std::string model) { model_ = std::move(model); }

    void push(std::string response);
    void push(Handler step);
    void push_transient_failure(std::string message = "scripted transient failure");
    void set_fallback(Handler fallback);

    std::string complete(const ChatRequest& request) override;

    std::vector<ChatRequest> requests() const;
    std::size_t call_count() const;
    std::size_t pending() const;

private:
    mutable std::mutex mutex_;
    std::deque<Handler> steps_;
    Handler fallback_;
    std::vector<ChatRequest> log_;
    std::string model_ = "scripted";
};

/// Reproducible pseudo-random unit vector seeded by a hash of the text.
class HashEmbeddingBackend : public EmbeddingBackend {
public:
    explicit HashEmbeddingBackend(std::size_t dim = 64) : dim_(dim) {}
    std::string id() const override { return "mock-hash"; }
    std::string model() const override { return "hash-" + std::to_string(dim_); }
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

    static std::vector<double> hash_vector(const std::string& key, std::size_t dim);

private:
    std::size_t dim_;
};

/// Feature-hashed bag of content words: texts sharing vocabulary land close
/// together. Gives the offline pipeline embeddings with real neighborhoods.
class LexicalEmbeddingBackend : public EmbeddingBackend {
public:
    explicit LexicalEmbeddingBackend(std::size_t dim = 256) : dim_(dim) {}
    std::string id() const override { return "mock-lexical"; }
    std::string model() const override { return "lexical-" + std::to_string(dim_); }
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

private:
    std::size_t dim_;
};

/// Deterministic stand-in for a chat model that answers every pipeline
/// template from the structured prompt variables with simple text
/// heuristics. Used for offline runs of the whole pipeline.
class RuleBasedChatBackend : public ChatBackend {
public:
    std::string id() const override { return "mock-rules"; }
    std::string model() const override { return "rules-v1"; }
    std::string complete(const ChatRequest& request) override;
};

}  // namespace discourse::gateway
