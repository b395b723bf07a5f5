#pragma once

#include "scm/types.hpp"

#include <memory>
#include <mutex>

namespace scm {

class Clock {
public:
    virtual ~Clock() = default;

    /// Monotonic non-decreasing.
    virtual Timestamp now() = 0;
    virtual bool is_simulated() const { return false; }

    /// Only a simulated clock can be moved; the system clock throws
    /// Error(kInvalidArgument).
    virtual void advance_hours(double hours);
};

/// Wall clock (UTC). Never goes backwards even if the system time does.
class SystemClock final : public Clock {
public:
    Timestamp now() override;

private:
    std::mutex mu_;
    Timestamp last_{};
};

class SimulatedClock final : public Clock {
public:
    explicit SimulatedClock(Timestamp start = default_epoch()) : now_(start) {}

    Timestamp now() override;
    bool is_simulated() const override { return true; }
    void advance_hours(double hours) override;

    // 2025-01-01T00:00:00Z
    static Timestamp default_epoch() { return Timestamp{1735689600LL * 1000000LL}; }

private:
    std::mutex mu_;
    Timestamp now_;
};

std::shared_ptr<Clock> make_clock(bool simulated);

}  // namespace scm
