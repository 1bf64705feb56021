#pragma once

#include "hoi/posekit/hand_pose.hpp"

#include <cstddef>
#include <deque>

namespace hoi::posekit {

/// Per-coordinate moving average over the last W poses.
///
/// During warm-up the mean runs over however many samples have arrived.
/// Rejected (non-finite) samples leave the window untouched.
class MovingAverageSmoother {
public:
    static constexpr std::size_t kDefaultWindow = 5;

    explicit MovingAverageSmoother(std::size_t window = kDefaultWindow);

    /// Push one raw pose and return the smoothed pose. Throws NonFiniteSample.
    HandPose push(const HandPose& raw);

    std::size_t window() const { return window_; }
    std::size_t count() const { return history_.size(); }
    void reset() { history_.clear(); }

private:
    std::size_t window_;
    std::deque<JointMatrix> history_;
};

} // namespace hoi::posekit
