#pragma once

#include <atomic>
#include <cstdint>
#include <string>

namespace archon {

/// Source of timestamps. Replay mode swaps in a logical counter so that
/// recorded artifacts are byte-stable across runs.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::string now() = 0;
    virtual bool logical() const = 0;
};

class SystemClock final : public Clock {
public:
    std::string now() override;
    bool logical() const override { return false; }
};

class LogicalClock final : public Clock {
public:
    std::string now() override { return "t" + std::to_string(++tick_); }
    bool logical() const override { return true; }

private:
    std::atomic<std::uint64_t> tick_{0};
};

}  // namespace archon
