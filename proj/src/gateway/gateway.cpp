#include "discourse/gateway/gateway.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <thread>

namespace discourse::gateway {

using nlohmann::json;

std::chrono::milliseconds RetryPolicy::backoff(int attempt) const {
    const double ms = static_cast<double>(initial_backoff.count()) * std::pow(multiplier, attempt - 1);
    return std::chrono::milliseconds(
        static_cast<long long>(std::min(ms, static_cast<double>(max_backoff.count()))));
}

ModelGateway::ModelGateway(std::shared_ptr<ChatBackend> chat, std::shared_ptr<EmbeddingBackend> embedder,
                           GatewayOptions options)
    : chat_(std::move(chat)),
      embedder_(std::move(embedder)),
      options_(std::move(options)),
      cache_(options_.cache_dir ? ResponseCache(*options_.cache_dir) : ResponseCache()),
      bucket_(options_.requests_per_minute, std::max<double>(1.0, static_cast<double>(options_.max_in_flight))),
      in_flight_(options_.max_in_flight) {
    if (!options_.sleep) options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

template <class Fn>
auto ModelGateway::with_retry(Fn&& fn) -> decltype(fn()) {
    const int attempts = std::max(1, options_.retry.max_attempts);
    std::string last_error;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        bucket_.acquire();
        try {
            InFlightLimiter::Slot slot(in_flight_);
            return fn();
        } catch (const TransientError& e) {
            last_error = e.what();
            if (attempt == attempts) break;
            {
                std::lock_guard lock(stats_mutex_);
                ++stats_.retries;
            }
            options_.sleep(options_.retry.backoff(attempt));
        }
    }
    throw RetriesExhausted("gave up after " + std::to_string(attempts) + " attempts: " + last_error);
}

std::string ModelGateway::complete(const ChatRequest& request) {
    validate(request);
    const auto key = CacheKey::for_chat(chat_->id(), chat_->model(), request);
    if (auto hit = cache_.fetch(key); hit && hit->contains("response") && (*hit)["response"].is_string()) {
        std::lock_guard lock(stats_mutex_);
        ++stats_.chat_cache_hits;
        return (*hit)["response"].get<std::string>();
    }
    auto text = with_retry([&] {
        {
            std::lock_guard lock(stats_mutex_);
            ++stats_.chat_calls;
        }
        return chat_->complete(request);
    });
    cache_.store(key, json{{"backend", chat_->id()},
                           {"model", chat_->model()},
                           {"template_id", request.template_id},
                           {"response", text}});
    return text;
}

std::vector<Completion> ModelGateway::complete_all(const std::vector<ChatRequest>& requests) {
    std::vector<Completion> results(requests.size());
    const std::size_t workers = std::min<std::size_t>(in_flight_.limit(), requests.size());
    auto run_one = [&](std::size_t i) {
        try {
            results[i].text = complete(requests[i]);
        } catch (const std::exception& e) {
            results[i].error = e.what();
        }
    };
    if (workers <= 1) {
        for (std::size_t i = 0; i < requests.size(); ++i) run_one(i);
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < requests.size(); i = next.fetch_add(1)) run_one(i);
        });
    }
    for (auto& t : pool) t.join();
    return results;
}

std::vector<EmbeddingVector> ModelGateway::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) throw std::invalid_argument("embed: empty batch");
    for (const auto& t : texts) {
        if (t.empty()) throw std::invalid_argument("embed: empty text");
    }
    std::map<std::string, EmbeddingVector> resolved;
    std::vector<std::string> misses;
    for (const auto& t : texts) {
        if (resolved.count(t)) continue;
        const auto key = CacheKey::for_embedding(embedder_->id(), embedder_->model(), t);
        if (auto hit = cache_.fetch(key); hit && hit->contains("vector")) {
            resolved.emplace(t, EmbeddingVector((*hit)["vector"].get<std::vector<double>>()));
            std::lock_guard lock(stats_mutex_);
            ++stats_.embed_cache_hits;
        } else if (std::find(misses.begin(), misses.end(), t) == misses.end()) {
            misses.push_back(t);
        }
    }
    const std::size_t batch = std::max<std::size_t>(1, options_.embed_batch_size);
    for (std::size_t start = 0; start < misses.size(); start += batch) {
        const std::vector<std::string> chunk(misses.begin() + static_cast<std::ptrdiff_t>(start),
                                             misses.begin() + static_cast<std::ptrdiff_t>(std::min(misses.size(), start + batch)));
        auto raw = with_retry([&] {
            {
                std::lock_guard lock(stats_mutex_);
                ++stats_.embed_calls;
            }
            return embedder_->embed(chunk);
        });
        if (raw.size() != chunk.size()) {
            throw GatewayError("embedding backend returned " + std::to_string(raw.size()) + " vectors for " +
                               std::to_string(chunk.size()) + " texts");
        }
        for (std::size_t i = 0; i < chunk.size(); ++i) {
            EmbeddingVector v = EmbeddingVector(std::move(raw[i])).normalized();
            cache_.store(CacheKey::for_embedding(embedder_->id(), embedder_->model(), chunk[i]),
                         json{{"backend", embedder_->id()}, {"model", embedder_->model()}, {"vector", v.values()}});
            resolved.emplace(chunk[i], std::move(v));
        }
    }
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(resolved.at(t));
    for (const auto& v : out) {
        if (v.dim() != out.front().dim()) throw DimensionMismatch("embedding batch has inconsistent dimensions");
    }
    return out;
}

EmbeddingVector ModelGateway::embed_one(const std::string& text) { return embed({text}).front(); }

GatewayStats ModelGateway::stats() const {
    std::lock_guard lock(stats_mutex_);
    return stats_;
}

}  // namespace discourse::gateway
