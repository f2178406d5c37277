#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "discourse/embedding.hpp"
#include "discourse/gateway/backend.hpp"
#include "discourse/gateway/cache.hpp"
#include "discourse/gateway/rate_limiter.hpp"

namespace discourse::gateway {

struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds initial_backoff{500};
    double multiplier = 2.0;
    std::chrono::milliseconds max_backoff{30000};

    std::chrono::milliseconds backoff(int attempt) const;  // attempt counts from 1
};

struct GatewayOptions {
    RetryPolicy retry;
    double requests_per_minute = 0.0;
    std::size_t max_in_flight = 4;
    std::size_t embed_batch_size = 64;
    std::optional<std::filesystem::path> cache_dir;
    /// Replaces std::this_thread::sleep_for during backoff; tests use it to
    /// record delays without waiting.
    std::function<void(std::chrono::milliseconds)> sleep;
};

struct GatewayStats {
    std::size_t chat_calls = 0;       // backend invocations, retries included
    std::size_t chat_cache_hits = 0;
    std::size_t retries = 0;
    std::size_t embed_calls = 0;
    std::size_t embed_cache_hits = 0;
};

/// Outcome of one request in a fan-out batch.
struct Completion {
    std::optional<std::string> text;
    std::string error;
    bool ok() const { return text.has_value(); }
};

/// Uniform front for the chat and embedding backends: response caching,
/// retries with exponential backoff, rate limiting and an in-flight bound.
/// Safe to share between threads.
class ModelGateway {
public:
    ModelGateway(std::shared_ptr<ChatBackend> chat, std::shared_ptr<EmbeddingBackend> embedder,
                 GatewayOptions options = {});

    std::string complete(const ChatRequest& request);

    /// Runs requests concurrently (bounded by max_in_flight); results are in
    /// input order. Failures are captured per request.
    std::vector<Completion> complete_all(const std::vector<ChatRequest>& requests);

    /// One unit vector per text, in order. Throws std::invalid_argument for an
    /// empty batch or empty text, DimensionMismatch for inconsistent vectors.
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts);
    EmbeddingVector embed_one(const std::string& text);

    GatewayStats stats() const;
    const PromptRegistry& prompts() const { return PromptRegistry::builtin(); }
    ChatBackend& chat_backend() { return *chat_; }
    EmbeddingBackend& embedding_backend() { return *embedder_; }
    std::size_t peak_in_flight() const { return in_flight_.peak(); }

private:
    template <class Fn>
    auto with_retry(Fn&& fn) -> decltype(fn());

    std::shared_ptr<ChatBackend> chat_;
    std::shared_ptr<EmbeddingBackend> embedder_;
    GatewayOptions options_;
    ResponseCache cache_;
    TokenBucket bucket_;
    InFlightLimiter in_flight_;
    mutable std::mutex stats_mutex_;
    GatewayStats stats_;
};

}  // namespace discourse::gateway
