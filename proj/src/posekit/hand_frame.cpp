#include "hoi/posekit/hand_frame.hpp"

namespace hoi::posekit {

HandFrame hand_frame(const HandPose& pose)
{
    const Vec3d tip = pose.joints.row(joint::kIndexTip).transpose();
    const Vec3d dip = pose.joints.row(joint::kIndexDip).transpose();
    const Vec3d mcp = pose.joints.row(joint::kIndexMcp).transpose();

    const Vec3d distal = tip - dip;
    if (!distal.allFinite() || distal.norm() <= kDegenerateTolerance)
        throw DegenerateFrame("index fingertip coincides with the distal joint");
    const Vec3d y = distal.normalized();

    const Vec3d to_mcp = mcp - tip;
    if (to_mcp.norm() <= kDegenerateTolerance)
        throw DegenerateFrame("index fingertip coincides with the MCP joint");

    // Gram-Schmidt: keep the part of tip->MCP orthogonal to the finger axis.
    const Vec3d bend = to_mcp - to_mcp.dot(y) * y;
    if (bend.norm() <= kDegenerateTolerance)
        throw DegenerateFrame("index finger is collinear; bending side undefined");
    const Vec3d x = bend.normalized();

    HandFrame frame;
    frame.origin = tip;
    frame.axes.col(0) = x;
    frame.axes.col(1) = y;
    frame.axes.col(2) = x.cross(y);
    return frame;
}

} // namespace hoi::posekit
