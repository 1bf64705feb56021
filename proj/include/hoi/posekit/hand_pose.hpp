#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>

namespace hoi::posekit {

inline constexpr int kJointCount = 21;
inline constexpr int kFeatureCount = 3 * kJointCount;

/// MANO 21-joint ordering. Each finger runs base to tip; the index finger
/// (IJ1-4) occupies indices 5..8.
namespace joint {
inline constexpr int kWrist = 0;
inline constexpr int kThumbCmc = 1, kThumbMcp = 2, kThumbIp = 3, kThumbTip = 4;
inline constexpr int kIndexMcp = 5, kIndexPip = 6, kIndexDip = 7, kIndexTip = 8;
inline constexpr int kMiddleMcp = 9, kMiddlePip = 10, kMiddleDip = 11, kMiddleTip = 12;
inline constexpr int kRingMcp = 13, kRingPip = 14, kRingDip = 15, kRingTip = 16;
inline constexpr int kPinkyMcp = 17, kPinkyPip = 18, kPinkyDip = 19, kPinkyTip = 20;

/// First joint of finger f (0 = thumb ... 4 = pinky).
constexpr int finger_base(int f) { return 1 + 4 * f; }
} // namespace joint

using JointMatrix = Eigen::Matrix<double, kJointCount, 3, Eigen::RowMajor>;
using FeatureRow = Eigen::Matrix<double, 1, kFeatureCount>;

/// One timestamped sample of 21 hand joints, meters, one joint per row.
struct HandPose {
    double timestamp = 0.0;
    JointMatrix joints = JointMatrix::Zero();

    bool operator==(const HandPose&) const = default;
};

class NonFiniteSample : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline bool is_finite(const HandPose& pose)
{
    return std::isfinite(pose.timestamp) && pose.joints.allFinite();
}

/// Joint-major flattening: x1, y1, z1, ..., x21, y21, z21.
inline FeatureRow flatten(const HandPose& pose)
{
    return Eigen::Map<const FeatureRow>(pose.joints.data());
}

inline HandPose unflatten(const Eigen::Ref<const FeatureRow>& row, double timestamp)
{
    HandPose pose;
    pose.timestamp = timestamp;
    Eigen::Map<FeatureRow>(pose.joints.data()) = row;
    return pose;
}

} // namespace hoi::posekit
