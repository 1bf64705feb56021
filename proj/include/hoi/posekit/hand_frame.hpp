#pragma once

#include "hoi/common/geometry.hpp"
#include "hoi/posekit/hand_pose.hpp"

#include <stdexcept>

namespace hoi::posekit {

/// Fingertip-anchored frame. Columns of `axes` are x_h, y_h, z_h:
/// y_h along the distal phalanx toward the tip, x_h toward the bending side,
/// z_h = x_h cross y_h.
struct HandFrame {
    Vec3d origin = Vec3d::Zero();
    Mat3d axes = Mat3d::Identity();

    Vec3d x() const { return axes.col(0); }
    Vec3d y() const { return axes.col(1); }
    Vec3d z() const { return axes.col(2); }
};

class DegenerateFrame : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Minimum joint separation (m) and bend-direction magnitude accepted.
inline constexpr double kDegenerateTolerance = 1e-6;

/// Extract the index-fingertip frame. Throws DegenerateFrame when the tip
/// coincides with the DIP joint or the finger is straight enough that no
/// bending side can be determined.
HandFrame hand_frame(const HandPose& pose);

} // namespace hoi::posekit
