#include "hoi/posekit/smoother.hpp"

#include <stdexcept>

namespace hoi::posekit {

MovingAverageSmoother::MovingAverageSmoother(std::size_t window) : window_(window)
{
    if (window_ == 0)
        throw std::invalid_argument("moving average window must be >= 1");
}

HandPose MovingAverageSmoother::push(const HandPose& raw)
{
    if (!is_finite(raw))
        throw NonFiniteSample("rejected pose sample with non-finite coordinates");

    history_.push_back(raw.joints);
    if (history_.size() > window_)
        history_.pop_front();

    // Summing the window each time avoids the drift of a running sum.
    JointMatrix sum = JointMatrix::Zero();
    for (const auto& joints : history_)
        sum += joints;

    HandPose out;
    out.timestamp = raw.timestamp;
    out.joints = sum / static_cast<double>(history_.size());
    return out;
}

} // namespace hoi::posekit
