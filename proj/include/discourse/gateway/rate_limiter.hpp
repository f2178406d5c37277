#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <mutex>

namespace discourse::gateway {

/// Token bucket refilled continuously at `requests_per_minute`. A rate of 0
/// disables limiting.
class TokenBucket {
public:
    explicit TokenBucket(double requests_per_minute = 0.0, double burst = 1.0);

    /// Blocks until a token is available, then consumes it.
    void acquire();

    /// Consumes a token if one is available right now.
    bool try_acquire();

private:
    void refill(std::chrono::steady_clock::time_point now);

    double rate_per_second_;
    double capacity_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
    std::mutex mutex_;
};

/// Bounds the number of concurrently executing backend calls.
class InFlightLimiter {
public:
    explicit InFlightLimiter(std::size_t limit);

    void acquire();
    void release();
    std::size_t limit() const { return limit_; }
    std::size_t peak() const;

    class Slot {
    public:
        explicit Slot(InFlightLimiter& l) : limiter_(l) { limiter_.acquire(); }
        ~Slot() { limiter_.release(); }
        Slot(const Slot&) = delete;
        Slot& operator=(const Slot&) = delete;

    private:
        InFlightLimiter& limiter_;
    };

private:
    std::size_t limit_;
    std::size_t active_ = 0;
    std::size_t peak_ = 0;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
};

}  // namespace discourse::gateway
