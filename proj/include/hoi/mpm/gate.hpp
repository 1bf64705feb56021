#pragma once

#include <cstddef>
#include <deque>
#include <optional>

namespace hoi::mpm {

/// Confirms a decision only once the last N decisions are all identical
/// (zero variance over a full queue). Anything else yields no output.
class StabilityGate {
public:
    static constexpr std::size_t kDefaultLength = 10;

    explicit StabilityGate(std::size_t length = kDefaultLength);

    /// Push a decision (evicting the oldest when full) and return the
    /// confirmed class, or nullopt.
    std::optional<int> push(int decision);

    std::size_t length() const { return length_; }
    std::size_t size() const { return queue_.size(); }
    const std::deque<int>& contents() const { return queue_; }
    void reset() { queue_.clear(); }

private:
    std::size_t length_;
    std::deque<int> queue_;
};

} // namespace hoi::mpm
