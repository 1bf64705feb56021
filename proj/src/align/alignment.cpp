#include "hoi/align/alignment.hpp"

#include <algorithm>
#include <cmath>

namespace hoi::align {

namespace {

void require_orthonormal(const Mat3d& axes, const char* which)
{
    if (!axes.allFinite() || !is_rotation(axes, kFrameTolerance))
        throw NonOrthonormalFrame(std::string(which) + " frame is not a right-handed orthonormal basis");
}

} // namespace

Mat3d rotation_between_frames(const ObjectFrame& from, const HandFrame& to)
{
    require_orthonormal(from.axes, "object");
    require_orthonormal(to.axes, "hand");
    return to.axes * from.axes.transpose();
}

AngularDeviation angular_deviations(const ObjectFrame& object, const HandFrame& hand)
{
    return {safe_angle(object.axes.col(0), hand.y()), safe_angle(object.axes.col(1), hand.z())};
}

Mat3d aligned_orientation(const HandFrame& hand)
{
    Mat3d target;
    target.col(0) = -hand.y();
    target.col(1) = hand.z();
    target.col(2) = -hand.x();
    return target;
}

AlignmentError alignment_error(const ObjectFrame& object, const HandFrame& hand)
{
    const AngularDeviation dev = angular_deviations(object, hand);
    const Vec3d offset = hand.axes.transpose() * (object.origin - hand.origin);
    AlignmentError e;
    e.alpha = dev.alpha;
    e.beta = dev.beta;
    e.lateral = offset.x();
    e.axial = offset.y();
    e.normal = offset.z();
    e.rotation = rotation_angle(aligned_orientation(hand) * object.axes.transpose());
    return e;
}

void ApproachPolicy::validate() const
{
    for (double v : {horizontal_speed, vertical_speed, release_gap, angular_tolerance, lateral_tolerance,
                     translation_gain, rotation_gain, max_rotation_rate, standoff})
        if (!(v > 0.0))
            throw std::invalid_argument("approach policy values must be positive");
}

bool is_aligned(const AlignmentError& error, const ApproachPolicy& policy)
{
    return std::abs(error.alpha - kPi) <= policy.angular_tolerance && error.beta <= policy.angular_tolerance
           && error.radial() <= policy.lateral_tolerance;
}

double advance_gap(double gap, bool aligned, const ApproachPolicy& policy, double dt)
{
    const double next = std::max(gap - policy.horizontal_speed * dt, 0.0);
    return aligned ? next : std::max(next, std::min(gap, policy.standoff));
}

namespace {

SetpointIncrement setpoint_to(const ObjectFrame& object, const HandFrame& hand, const AlignmentError& err,
                              const ApproachPolicy& policy, double dt, double target_gap)
{
    if (!(dt > 0.0))
        throw std::invalid_argument("control period must be positive");
    SetpointIncrement out;

    // Off-axis: proportional, at most v_v * dt per period.
    const Vec3d off_axis = err.lateral * hand.x() + err.normal * hand.z();
    Vec3d correction = -std::min(policy.translation_gain * dt, 1.0) * off_axis;
    const double cap = policy.vertical_speed * dt;
    if (correction.norm() > cap)
        correction *= cap / correction.norm();
    out.translation = correction + (target_gap - err.axial) * hand.y();

    const Eigen::AngleAxisd to_target(aligned_orientation(hand) * object.axes.transpose());
    const double angle = to_target.angle();
    if (angle > 0.0) {
        const double rate = std::min(policy.rotation_gain * angle, policy.max_rotation_rate);
        out.rotation = to_target.axis() * std::min(rate * dt, angle);
    }

    out.release_ready = is_aligned(err, policy) && err.axial <= policy.release_gap;
    return out;
}

} // namespace

SetpointIncrement alignment_setpoint(const ObjectFrame& object, const HandFrame& hand,
                                     const ApproachPolicy& policy, double dt)
{
    const AlignmentError err = alignment_error(object, hand);
    return setpoint_to(object, hand, err, policy, dt, advance_gap(err.axial, is_aligned(err, policy), policy, dt));
}

SetpointIncrement alignment_setpoint(const ObjectFrame& object, const HandFrame& hand,
                                     const ApproachPolicy& policy, double dt, double target_gap)
{
    return setpoint_to(object, hand, alignment_error(object, hand), policy, dt, target_gap);
}

std::string_view phase_name(CooperationPhase phase)
{
    switch (phase) {
    case CooperationPhase::Approaching: return "approaching";
    case CooperationPhase::Aligned: return "aligned";
    case CooperationPhase::Released: return "released";
    }
    return "unknown";
}

CooperationController::CooperationController(ApproachPolicy policy, double stale_after, double timeout)
    : policy_(policy), stale_after_(stale_after), timeout_(timeout)
{
    policy_.validate();
}

CooperationOutput CooperationController::step(const ObjectFrame& object,
                                              const std::optional<posekit::HandPose>& hand, double now, double dt)
{
    if (!started_)
        started_ = now;
    CooperationOutput out;
    out.phase = phase_;
    if (phase_ == CooperationPhase::Released)
        return out;
    if (now - *started_ > timeout_) {
        out.timed_out = true;
        return out;
    }

    if (!hand || now - hand->timestamp > stale_after_) {
        out.tracking_loss = out.command.tracking_loss = true;
        return out;
    }
    HandFrame frame;
    try {
        frame = posekit::hand_frame(*hand);
    } catch (const posekit::DegenerateFrame&) {
        out.tracking_loss = out.command.tracking_loss = true;
        return out;
    }

    out.error = alignment_error(object, frame);
    if (is_aligned(out.error, policy_) && out.error.axial <= policy_.release_gap) {
        phase_ = CooperationPhase::Released;
        out.phase = phase_;
        out.open_gripper = true;
        out.command.release_ready = true;
        return out;
    }

    const bool aligned = is_aligned(out.error, policy_);
    reference_gap_ = advance_gap(reference_gap_.value_or(out.error.axial), aligned, policy_, dt);
    out.command = alignment_setpoint(object, frame, policy_, dt, *reference_gap_);
    phase_ = aligned ? CooperationPhase::Aligned : CooperationPhase::Approaching;
    out.phase = phase_;
    return out;
}

} // namespace hoi::align
