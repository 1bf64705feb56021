#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <utility>

namespace hoi {

/// Single-slot latest-value-wins mailbox.
///
/// Writers overwrite; readers see only the newest value. `take()` returns a
/// value at most once per publish, `peek()` never consumes. Every publish
/// bumps a sequence counter so readers can detect how many values they skipped.
template <typename T>
class LatestMailbox {
public:
    void publish(T value)
    {
        std::lock_guard lock(mutex_);
        slot_ = std::move(value);
        fresh_ = true;
        ++sequence_;
    }

    std::optional<T> take()
    {
        std::lock_guard lock(mutex_);
        if (!fresh_)
            return std::nullopt;
        fresh_ = false;
        return slot_;
    }

    std::optional<T> peek() const
    {
        std::lock_guard lock(mutex_);
        return slot_;
    }

    std::uint64_t sequence() const
    {
        std::lock_guard lock(mutex_);
        return sequence_;
    }

    void clear()
    {
        std::lock_guard lock(mutex_);
        slot_.reset();
        fresh_ = false;
    }

private:
    mutable std::mutex mutex_;
    std::optional<T> slot_;
    bool fresh_ = false;
    std::uint64_t sequence_ = 0;
};

} // namespace hoi
