#pragma once

#include "hoi/common/geometry.hpp"
#include "hoi/posekit/hand_frame.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string_view>

namespace hoi::align {

using posekit::HandFrame;

/// Ring-anchored frame, rigid with the TCP while the gripper is closed.
/// Columns of `axes`: x_o (ring normal), y_o (gripper central line), z_o.
struct ObjectFrame {
    Vec3d origin = Vec3d::Zero();
    Mat3d axes = Mat3d::Identity();
};

class NonOrthonormalFrame : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr double kFrameTolerance = 1e-6;

/// T with hand.axes = T * object.axes.
Mat3d rotation_between_frames(const ObjectFrame& from, const HandFrame& to);

struct AngularDeviation {
    double alpha = 0.0; ///< arccos <x_o, y_h>
    double beta = 0.0;  ///< arccos <y_o, z_h>
};

AngularDeviation angular_deviations(const ObjectFrame& object, const HandFrame& hand);

/// Object orientation at which cos(alpha) = -1 and cos(beta) = 1:
/// x_o = -y_h, y_o = z_h, z_o = -x_h.
Mat3d aligned_orientation(const HandFrame& hand);

struct AlignmentError {
    double alpha = 0.0;
    double beta = 0.0;
    double lateral = 0.0; ///< ring-center offset along x_h, m
    double normal = 0.0;  ///< ring-center offset along z_h, m
    double axial = 0.0;   ///< gap ahead of the fingertip along y_h, m
    double rotation = 0.0; ///< angle to the aligned object orientation, rad

    /// Distance of the ring center from the finger axis.
    double radial() const { return std::hypot(lateral, normal); }
};

AlignmentError alignment_error(const ObjectFrame& object, const HandFrame& hand);

struct ApproachPolicy {
    double horizontal_speed = 0.01;   ///< v_h, m/s along the finger axis
    double vertical_speed = 0.05;     ///< v_v, m/s cap on off-axis correction
    double release_gap = 0.002;       ///< m
    double angular_tolerance = 0.026; ///< rad, on |alpha - pi| and |beta|
    double lateral_tolerance = 0.001; ///< m, on the radial offset
    double translation_gain = 25.0;   ///< 1/s
    double rotation_gain = 25.0;      ///< 1/s
    double max_rotation_rate = deg2rad(30.0); ///< rad/s
    double standoff = 0.02;           ///< m; closer than this only when aligned

    void validate() const;
    bool operator==(const ApproachPolicy&) const = default;
};

bool is_aligned(const AlignmentError& error, const ApproachPolicy& policy);

/// Pose increment for one control period, base frame.
struct SetpointIncrement {
    Vec3d translation = Vec3d::Zero();
    Vec3d rotation = Vec3d::Zero(); ///< axis-angle
    bool release_ready = false;
    bool tracking_loss = false;
};

/// Axial gap after one period of approach at v_h from `gap`; holds at the
/// standoff unless aligned.
double advance_gap(double gap, bool aligned, const ApproachPolicy& policy, double dt);

/// One step of the alignment law: null the off-axis offset (capped at v_v),
/// close the axial gap at v_h and rotate toward the aligned orientation.
SetpointIncrement alignment_setpoint(const ObjectFrame& object, const HandFrame& hand,
                                     const ApproachPolicy& policy, double dt);

/// Same law with the axial gap driven to `target_gap` within the period.
/// Used with a hand-relative reference so that hand motion along the finger
/// axis does not change the approach speed.
SetpointIncrement alignment_setpoint(const ObjectFrame& object, const HandFrame& hand,
                                     const ApproachPolicy& policy, double dt, double target_gap);

enum class CooperationPhase { Approaching, Aligned, Released };

std::string_view phase_name(CooperationPhase phase);

struct CooperationOutput {
    SetpointIncrement command;
    CooperationPhase phase = CooperationPhase::Approaching;
    AlignmentError error;
    bool tracking_loss = false;
    bool open_gripper = false; ///< emitted once, on release
    bool timed_out = false;
};

/// Cooperation-mode controller. Consumes the latest smoothed hand pose;
/// poses older than `stale_after` or with a degenerate finger frame hold
/// position and flag tracking loss without changing phase. The axial gap
/// follows a reference that shrinks at v_h from the first observed gap.
class CooperationController {
public:
    explicit CooperationController(ApproachPolicy policy = {}, double stale_after = 0.2, double timeout = 120.0);

    CooperationOutput step(const ObjectFrame& object, const std::optional<posekit::HandPose>& hand,
                           double now, double dt);

    CooperationPhase phase() const { return phase_; }
    const ApproachPolicy& policy() const { return policy_; }
    /// Gap the last command steered toward; empty before the first command.
    std::optional<double> reference_gap() const { return reference_gap_; }

private:
    ApproachPolicy policy_;
    double stale_after_;
    double timeout_;
    std::optional<double> started_;
    std::optional<double> reference_gap_;
    CooperationPhase phase_ = CooperationPhase::Approaching;
};

} // namespace hoi::align
