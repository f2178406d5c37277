#include "discourse/gateway/mock.hpp"

#include <cmath>

#include "discourse/hashing.hpp"
#include "discourse/text.hpp"

namespace discourse::gateway {

ScriptedChatBackend::ScriptedChatBackend(std::vector<std::string> responses) {
    for (auto& r : responses) push(std::move(r));
}

void ScriptedChatBackend::push(std::string response) {
    push(Handler([r = std::move(response)](const ChatRequest&) { return r; }));
}

void ScriptedChatBackend::push(Handler step) {
    std::lock_guard lock(mutex_);
    steps_.push_back(std::move(step));
}

void ScriptedChatBackend::push_transient_failure(std::string message) {
    push(Handler([m = std::move(message)](const ChatRequest&) -> std::string { throw TransientError(m); }));
}

void ScriptedChatBackend::set_fallback(Handler fallback) {
    std::lock_guard lock(mutex_);
    fallback_ = std::move(fallback);
}

std::string ScriptedChatBackend::complete(const ChatRequest& request) {
    Handler step;
    {
        std::lock_guard lock(mutex_);
        log_.push_back(request);
        if (!steps_.empty()) {
            step = std::move(steps_.front());
            steps_.pop_front();
        } else if (fallback_) {
            step = fallback_;
        }
    }
    if (!step) throw GatewayError("scripted backend has no response left");
    return step(request);
}

std::vector<ChatRequest> ScriptedChatBackend::requests() const {
    std::lock_guard lock(mutex_);
    return log_;
}

std::size_t ScriptedChatBackend::call_count() const {
    std::lock_guard lock(mutex_);
    return log_.size();
}

std::size_t ScriptedChatBackend::pending() const {
    std::lock_guard lock(mutex_);
    return steps_.size();
}

std::vector<double> HashEmbeddingBackend::hash_vector(const std::string& key, std::size_t dim) {
    SplitMix64 rng(fnv1a64(key));
    std::vector<double> v(dim);
    double norm = 0.0;
    for (auto& x : v) {
        x = rng.uniform() * 2.0 - 1.0;
        norm += x * x;
    }
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    return v;
}

std::vector<std::vector<double>> HashEmbeddingBackend::embed(const std::vector<std::string>& texts) {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(hash_vector(t, dim_));
    return out;
}

std::vector<std::vector<double>> LexicalEmbeddingBackend::embed(const std::vector<std::string>& texts) {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        std::vector<double> v(dim_, 0.0);
        const auto words = text::content_words(t);
        for (const auto& w : words) {
            const auto h = HashEmbeddingBackend::hash_vector("word:" + w, dim_);
            for (std::size_t i = 0; i < dim_; ++i) v[i] += h[i];
        }
        // A faint text-specific component keeps distinct texts distinct and
        // gives stopword-only texts a direction.
        const auto own = HashEmbeddingBackend::hash_vector("text:" + t, dim_);
        const double weight = words.empty() ? 1.0 : 0.05;
        for (std::size_t i = 0; i < dim_; ++i) v[i] += weight * own[i];
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace discourse::gateway
