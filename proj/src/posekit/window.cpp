#include "hoi/posekit/window.hpp"

#include <stdexcept>
#include <vector>

namespace hoi::posekit {

std::optional<FeatureWindow> make_window(std::span<const HandPose> buffer, std::size_t stride)
{
    if (stride == 0)
        throw std::invalid_argument("window stride must be >= 1");
    if (buffer.size() < required_span(stride))
        return std::nullopt;

    FeatureWindow window;
    for (int row = 0; row < kWindowLength; ++row) {
        const HandPose& pose = buffer[static_cast<std::size_t>(row) * stride];
        window.frames.row(row) = flatten(pose);
        window.timestamps[static_cast<std::size_t>(row)] = pose.timestamp;
    }
    return window;
}

HandPose window_pose(const FeatureWindow& window, int row)
{
    return unflatten(window.frames.row(row), window.timestamps[static_cast<std::size_t>(row)]);
}

WindowAssembler::WindowAssembler(std::size_t stride) : stride_(stride)
{
    if (stride_ == 0)
        throw std::invalid_argument("window stride must be >= 1");
}

void WindowAssembler::push(const HandPose& pose)
{
    buffer_.push_back(pose);
    if (buffer_.size() > required_span(stride_))
        buffer_.pop_front();
}

std::optional<FeatureWindow> WindowAssembler::window() const
{
    if (buffer_.size() < required_span(stride_))
        return std::nullopt;
    const std::vector<HandPose> contiguous(buffer_.begin(), buffer_.end());
    return make_window(contiguous, stride_);
}

} // namespace hoi::posekit
