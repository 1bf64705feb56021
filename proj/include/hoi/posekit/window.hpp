#pragma once

#include "hoi/posekit/hand_pose.hpp"

#include <array>
#include <cstddef>
#include <deque>
#include <optional>
#include <span>

namespace hoi::posekit {

inline constexpr int kWindowLength = 10;
inline constexpr std::size_t kDefaultStride = 10;

using WindowMatrix = Eigen::Matrix<double, kWindowLength, kFeatureCount, Eigen::RowMajor>;

/// Ten poses flattened joint-major, one row per frame.
struct FeatureWindow {
    WindowMatrix frames = WindowMatrix::Zero();
    std::array<double, kWindowLength> timestamps{};

    double start_timestamp() const { return timestamps.front(); }
};

/// Raw frames a window with the given stride spans: 10*stride - (stride-1).
constexpr std::size_t required_span(std::size_t stride)
{
    return kWindowLength * stride - (stride - 1);
}

/// Build a window anchored at the front of `buffer`: frames 0, stride, ...,
/// 9*stride. Returns nullopt when the buffer is shorter than required_span.
std::optional<FeatureWindow> make_window(std::span<const HandPose> buffer,
                                         std::size_t stride = kDefaultStride);

/// Recover the pose at row `row` of a window.
HandPose window_pose(const FeatureWindow& window, int row);

/// Rolling buffer that keeps exactly required_span(stride) of the most
/// recent poses, so the front-anchored window is also the latest one.
class WindowAssembler {
public:
    explicit WindowAssembler(std::size_t stride = kDefaultStride);

    void push(const HandPose& pose);
    std::optional<FeatureWindow> window() const;

    std::size_t stride() const { return stride_; }
    std::size_t size() const { return buffer_.size(); }
    void reset() { buffer_.clear(); }

private:
    std::size_t stride_;
    std::deque<HandPose> buffer_;
};

} // namespace hoi::posekit
