#include "discourse/gateway/rate_limiter.hpp"

#include <algorithm>
#include <thread>

namespace discourse::gateway {

TokenBucket::TokenBucket(double requests_per_minute, double burst)
    : rate_per_second_(requests_per_minute / 60.0),
      capacity_(std::max(1.0, burst)),
      tokens_(std::max(1.0, burst)),
      last_(std::chrono::steady_clock::now()) {}

void TokenBucket::refill(std::chrono::steady_clock::time_point now) {
    const std::chrono::duration<double> elapsed = now - last_;
    tokens_ = std::min(capacity_, tokens_ + elapsed.count() * rate_per_second_);
    last_ = now;
}

bool TokenBucket::try_acquire() {
    if (rate_per_second_ <= 0.0) return true;
    std::lock_guard lock(mutex_);
    refill(std::chrono::steady_clock::now());
    if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return true;
    }
    return false;
}

void TokenBucket::acquire() {
    if (rate_per_second_ <= 0.0) return;
    for (;;) {
        std::chrono::duration<double> wait{};
        {
            std::lock_guard lock(mutex_);
            refill(std::chrono::steady_clock::now());
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
            wait = std::chrono::duration<double>((1.0 - tokens_) / rate_per_second_);
        }
        std::this_thread::sleep_for(wait);
    }
}

InFlightLimiter::InFlightLimiter(std::size_t limit) : limit_(std::max<std::size_t>(1, limit)) {}

void InFlightLimiter::acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return active_ < limit_; });
    ++active_;
    peak_ = std::max(peak_, active_);
}

void InFlightLimiter::release() {
    {
        std::lock_guard lock(mutex_);
        --active_;
    }
    cv_.notify_one();
}

std::size_t InFlightLimiter::peak() const {
    std::lock_guard lock(mutex_);
    return peak_;
}

}  // namespace discourse::gateway
