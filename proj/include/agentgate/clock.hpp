#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>

namespace agentgate {

// Monotonic instants. All round/session timing in the verifier is computed
// from these, never from wall-clock time, so host clock adjustments cannot
// shrink or stretch a response window.
using Instant = std::chrono::steady_clock::time_point;

inline double seconds_between(Instant earlier, Instant later) {
    return std::chrono::duration<double>(later - earlier).count();
}

class Clock {
public:
    virtual ~Clock() = default;
    virtual Instant now() const = 0;
};

class SteadyClock final : public Clock {
public:
    Instant now() const override { return std::chrono::steady_clock::now(); }
};

// Deterministic clock for tests and in-process simulations. Starts at the
// steady_clock epoch and only moves when told to.
class ManualClock final : public Clock {
public:
    ManualClock() = default;

    Instant now() const override {
        return Instant{std::chrono::duration_cast<Instant::duration>(
            std::chrono::nanoseconds{ns_.load(std::memory_order_acquire)})};
    }

    void advance(double seconds) {
        auto delta = std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::duration<double>(seconds));
        ns_.fetch_add(delta.count(), std::memory_order_acq_rel);
    }

    void set_elapsed(double seconds) {
        auto total = std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::duration<double>(seconds));
        ns_.store(total.count(), std::memory_order_release);
    }

private:
    std::atomic<std::int64_t> ns_{0};
};

}  // namespace agentgate
