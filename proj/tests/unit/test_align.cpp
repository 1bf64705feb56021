#include "hoi/align/alignment.hpp"
#include "hoi/dataset/synthetic_hand.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace hoi;
using namespace hoi::align;
using Catch::Approx;

namespace {

Mat3d random_rotation(std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    return Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized().toRotationMatrix();
}

HandFrame frame_from(const Mat3d& axes, const Vec3d& origin = Vec3d::Zero())
{
    return {origin, axes};
}

dataset::GeneratorConfig still_config()
{
    dataset::GeneratorConfig c;
    c.drift_amplitude = 0.0;
    return c;
}

/// Ring-class hand with an optional extra fingertip bend and lift.
posekit::HandPose ring_hand(double t, double extra_dip = 0.0, const Vec3d& lift = Vec3d::Zero())
{
    return dataset::class_pose(dataset::MotionClass::Ring, t, {}, still_config(), extra_dip, lift);
}

ObjectFrame aligned_object(const HandFrame& hand, double gap)
{
    return {hand.origin + gap * hand.y(), aligned_orientation(hand)};
}

void apply(ObjectFrame& object, const SetpointIncrement& inc)
{
    object.origin += inc.translation;
    object.axes = from_rotation_vector(inc.rotation).toRotationMatrix() * object.axes;
}

/// Smooth 0 -> 1 ramp over [0, duration].
double ramp(double t, double duration)
{
    if (t >= duration)
        return 1.0;
    return 0.5 * (1.0 - std::cos(kPi * t / duration));
}

} // namespace

TEST_CASE("rotation between identical frames is the identity", "[align][frames]")
{
    const Mat3d axes = axis_rotation(0, 0.3) * axis_rotation(2, -1.1);
    const Mat3d t = rotation_between_frames({Vec3d::Zero(), axes}, frame_from(axes));
    CHECK((t - Mat3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("frames 90 degrees apart about a shared z", "[align][frames]")
{
    const Mat3d hand = (Mat3d() << 0, -1, 0,
                                   1,  0, 0,
                                   0,  0, 1).finished();
    const Mat3d t = rotation_between_frames({Vec3d::Zero(), Mat3d::Identity()}, frame_from(hand));
    const Mat3d expected = (Mat3d() << std::cos(kPi / 2), -std::sin(kPi / 2), 0,
                                       std::sin(kPi / 2),  std::cos(kPi / 2), 0,
                                       0, 0, 1).finished();
    CHECK((t - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rotation between frames is a proper rotation mapping object axes to hand axes",
          "[align][frames][property]")
{
    std::mt19937_64 rng(5);
    for (int i = 0; i < 1000; ++i) {
        const Mat3d a = random_rotation(rng);
        const Mat3d b = random_rotation(rng);
        const Mat3d t = rotation_between_frames({Vec3d::Zero(), a}, frame_from(b));
        REQUIRE((t.transpose() * t - Mat3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
        REQUIRE(std::abs(t.determinant() - 1.0) < 1e-9);
        REQUIRE((t * a - b).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("non-orthonormal frames are rejected", "[align][frames]")
{
    Mat3d skewed = Mat3d::Identity();
    skewed(0, 1) = 1e-3;
    CHECK_THROWS_AS(rotation_between_frames({Vec3d::Zero(), skewed}, frame_from(Mat3d::Identity())),
                    NonOrthonormalFrame);
    Mat3d left = Mat3d::Identity();
    left(2, 2) = -1.0;
    CHECK_THROWS_AS(rotation_between_frames({Vec3d::Zero(), Mat3d::Identity()}, frame_from(left)),
                    NonOrthonormalFrame);
}

TEST_CASE("angular deviation examples", "[align][deviation]")
{
    const HandFrame hand = frame_from(Mat3d::Identity());
    Mat3d obj = Mat3d::Identity();

    obj.col(0) = hand.y();
    CHECK(angular_deviations({Vec3d::Zero(), obj}, hand).alpha == Approx(0.0).margin(1e-12));
    obj.col(0) = -hand.y();
    CHECK(angular_deviations({Vec3d::Zero(), obj}, hand).alpha == Approx(kPi).margin(1e-12));
    obj.col(0) = hand.x();
    CHECK(angular_deviations({Vec3d::Zero(), obj}, hand).alpha == Approx(kPi / 2).margin(1e-12));

    const AngularDeviation aligned = angular_deviations({Vec3d::Zero(), aligned_orientation(hand)}, hand);
    CHECK(std::cos(aligned.alpha) == Approx(-1.0));
    CHECK(std::cos(aligned.beta) == Approx(1.0));
}

TEST_CASE("angular deviations lie in [0, pi] and flip to pi - alpha under negation",
          "[align][deviation][property]")
{
    std::mt19937_64 rng(8);
    for (int i = 0; i < 1000; ++i) {
        const Mat3d o = random_rotation(rng);
        const HandFrame h = frame_from(random_rotation(rng));
        const AngularDeviation d = angular_deviations({Vec3d::Zero(), o}, h);
        REQUIRE(d.alpha >= 0.0);
        REQUIRE(d.alpha <= kPi);
        REQUIRE(d.beta >= 0.0);
        REQUIRE(d.beta <= kPi);

        Mat3d flipped = o;
        flipped.col(0) = -o.col(0);
        flipped.col(2) = -o.col(2);
        const AngularDeviation f = angular_deviations({Vec3d::Zero(), flipped}, h);
        REQUIRE(f.alpha == Approx(kPi - d.alpha).margin(1e-9));
    }
}

TEST_CASE("aligned object at zero gap is a fixed point", "[align][setpoint]")
{
    std::mt19937_64 rng(2);
    const HandFrame hand = frame_from(random_rotation(rng), Vec3d(0.1, 0.5, 0.3));
    const SetpointIncrement inc = alignment_setpoint(aligned_object(hand, 0.0), hand, ApproachPolicy{}, 0.002);
    CHECK(inc.translation.norm() < 1e-12);
    CHECK(inc.rotation.norm() < 1e-9);
    CHECK(inc.release_ready);
    CHECK_FALSE(inc.tracking_loss);
}

TEST_CASE("setpoint increment is linear in dt for constant error", "[align][setpoint][property]")
{
    std::mt19937_64 rng(3);
    const HandFrame hand = frame_from(random_rotation(rng), Vec3d(0.0, 0.6, 0.3));
    ObjectFrame obj = aligned_object(hand, 0.1);
    obj.origin += 0.0003 * hand.x() - 0.0002 * hand.z();
    obj.axes = Eigen::AngleAxisd(deg2rad(0.5), Vec3d(1, 2, 3).normalized()).toRotationMatrix() * obj.axes;

    const ApproachPolicy policy;
    const SetpointIncrement one = alignment_setpoint(obj, hand, policy, 1e-3);
    const SetpointIncrement two = alignment_setpoint(obj, hand, policy, 2e-3);
    CHECK((two.translation - 2.0 * one.translation).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((two.rotation - 2.0 * one.rotation).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(one.translation.dot(hand.y()) == Approx(-policy.horizontal_speed * 1e-3));
}

TEST_CASE("off-axis correction is capped at the vertical speed", "[align][setpoint]")
{
    const HandFrame hand = frame_from(Mat3d::Identity());
    ObjectFrame obj = aligned_object(hand, 0.1);
    obj.origin += Vec3d(0.05, 0.0, 0.05);
    const ApproachPolicy policy;
    const SetpointIncrement inc = alignment_setpoint(obj, hand, policy, 0.002);
    const Vec3d off_axis(inc.translation.x(), 0.0, inc.translation.z());
    CHECK(off_axis.norm() == Approx(policy.vertical_speed * 0.002));
    CHECK(off_axis.normalized().isApprox(Vec3d(-1, 0, -1).normalized(), 1e-12));
}

TEST_CASE("unaligned object halts at the standoff distance", "[align][setpoint]")
{
    const HandFrame hand = frame_from(Mat3d::Identity());
    ApproachPolicy policy;
    ObjectFrame obj = aligned_object(hand, policy.standoff + 0.0001);
    obj.axes = axis_rotation(1, deg2rad(45.0)) * obj.axes;
    // Rate-limited rotation takes 1.5 s; the gap must not close meanwhile.
    const SetpointIncrement inc = alignment_setpoint(obj, hand, policy, 0.02);
    CHECK((obj.origin + inc.translation - hand.origin).dot(hand.y()) == Approx(policy.standoff));
    CHECK(inc.rotation.norm() == Approx(policy.max_rotation_rate * 0.02));
}

TEST_CASE("invalid policy and period", "[align][setpoint]")
{
    ApproachPolicy p;
    p.horizontal_speed = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    CHECK_THROWS_AS(CooperationController(p), std::invalid_argument);
    const HandFrame hand = frame_from(Mat3d::Identity());
    CHECK_THROWS_AS(alignment_setpoint(aligned_object(hand, 0.01), hand, ApproachPolicy{}, 0.0),
                    std::invalid_argument);
}

TEST_CASE("static pre-aligned hand at 50 mm releases after 4.8 s", "[align][cooperation]")
{
    const double dt = 0.002;
    const posekit::HandPose pose = ring_hand(0.0);
    const HandFrame hand = posekit::hand_frame(pose);
    ObjectFrame obj = aligned_object(hand, 0.050);
    CooperationController ctl;

    double released_at = -1.0;
    int open_commands = 0;
    for (int tick = 0; tick < 5000; ++tick) {
        const double now = tick * dt;
        posekit::HandPose latest = pose;
        latest.timestamp = now;
        const CooperationOutput out = ctl.step(obj, latest, now, dt);
        REQUIRE_FALSE(out.tracking_loss);
        open_commands += out.open_gripper;
        if (out.phase == CooperationPhase::Released) {
            if (released_at < 0)
                released_at = now;
            continue;
        }
        CHECK(out.phase == CooperationPhase::Aligned);
        apply(obj, out.command);
    }
    // (50 - 2) mm at 10 mm/s.
    CHECK(released_at == Approx(4.8).margin(2 * dt));
    CHECK(open_commands == 1);
    CHECK(ctl.phase() == CooperationPhase::Released);
}

TEST_CASE("lost or stale hand frames hold position without changing phase", "[align][cooperation]")
{
    posekit::HandPose pose = ring_hand(0.0);
    const HandFrame hand = posekit::hand_frame(pose);
    ObjectFrame obj = aligned_object(hand, 0.050);
    CooperationController ctl;

    pose.timestamp = 0.0;
    REQUIRE(ctl.step(obj, pose, 0.0, 0.002).phase == CooperationPhase::Aligned);

    const CooperationOutput lost = ctl.step(obj, std::nullopt, 0.002, 0.002);
    CHECK(lost.tracking_loss);
    CHECK(lost.command.tracking_loss);
    CHECK(lost.command.translation.isZero(0.0));
    CHECK(lost.command.rotation.isZero(0.0));
    CHECK(lost.phase == CooperationPhase::Aligned);

    const CooperationOutput stale = ctl.step(obj, pose, 0.25, 0.002);
    CHECK(stale.tracking_loss);
    CHECK(stale.phase == CooperationPhase::Aligned);

    posekit::HandPose degenerate = pose;
    degenerate.joints.setZero();
    degenerate.timestamp = 0.3;
    const CooperationOutput bad = ctl.step(obj, degenerate, 0.3, 0.002);
    CHECK(bad.tracking_loss);
    CHECK(bad.command.translation.isZero(0.0));

    pose.timestamp = 0.31;
    CHECK_FALSE(ctl.step(obj, pose, 0.31, 0.002).tracking_loss);
}

TEST_CASE("cooperation times out", "[align][cooperation]")
{
    const posekit::HandPose pose = ring_hand(0.0);
    ObjectFrame obj = aligned_object(posekit::hand_frame(pose), 0.5);
    CooperationController ctl(ApproachPolicy{}, 0.2, 1.0);
    CHECK_FALSE(ctl.step(obj, pose, 0.0, 0.002).timed_out);
    CHECK(ctl.step(obj, std::nullopt, 1.5, 0.002).timed_out);
}

TEST_CASE("hand raised by 74.23 mm: TCP rises by the same amount", "[align][closed_loop]")
{
    const double dt = 0.002;
    const double lift = 0.07423;
    const HandFrame start = posekit::hand_frame(ring_hand(0.0));
    ObjectFrame obj = aligned_object(start, 0.2);
    const Vec3d initial = obj.origin;

    CooperationController ctl;
    posekit::HandPose pose;
    for (int tick = 0; tick < 7500; ++tick) {
        const double t = tick * dt;
        pose = ring_hand(t, 0.0, Vec3d(0.0, 0.0, lift * ramp(t, 10.0)));
        apply(obj, ctl.step(obj, pose, t, dt).command);
    }
    const HandFrame hand = posekit::hand_frame(pose);
    // 15 s at 10 mm/s along a finger axis that is not quite horizontal.
    const double gap = (obj.origin - hand.origin).dot(hand.y());
    CHECK(gap == Approx(0.2 - 0.15).margin(1e-9));
    CHECK(obj.origin.z() - initial.z() == Approx(lift - 0.15 * hand.y().z()).margin(1e-6));
    CHECK(alignment_error(obj, hand).radial() < 1e-6);
}

TEST_CASE("fingertip bent by 18 degrees: TCP rotates by 18 degrees", "[align][closed_loop]")
{
    const double dt = 0.002;
    const double bend = deg2rad(18.0);
    const HandFrame start = posekit::hand_frame(ring_hand(0.0));
    ObjectFrame obj = aligned_object(start, 0.15);
    const Mat3d initial = obj.axes;

    CooperationController ctl;
    HandFrame hand = start;
    for (int tick = 0; tick < 5000; ++tick) {
        const double t = tick * dt;
        const posekit::HandPose pose = ring_hand(t, bend * ramp(t, 6.0));
        hand = posekit::hand_frame(pose);
        apply(obj, ctl.step(obj, pose, t, dt).command);
    }
    CHECK(rad2deg(rotation_angle(obj.axes * initial.transpose())) == Approx(18.0).margin(1e-3));
    CHECK(rad2deg(rotation_angle(hand.axes * start.axes.transpose())) == Approx(18.0).margin(1e-9));
    CHECK(alignment_error(obj, hand).rotation < 1e-6);
}

TEST_CASE("tracking error stays within 2.5 mm and 1.5 degrees at the speed limits",
          "[align][closed_loop][property]")
{
    const double dt = 0.002;
    const ApproachPolicy policy;
    ObjectFrame obj = aligned_object(posekit::hand_frame(ring_hand(0.0)), 0.2);

    // Steady motion: 30 mm/s upward and a 10 deg/s fingertip bend.
    double max_radial = 0.0;
    double max_rotation = 0.0;
    for (int tick = 0; tick < 2000; ++tick) {
        const double t = tick * dt;
        const double lift = 0.03 * t;
        const double bend = deg2rad(10.0) * t;
        const HandFrame hand = posekit::hand_frame(ring_hand(t, bend, Vec3d(0, 0, lift)));
        const AlignmentError e = alignment_error(obj, hand);
        if (t > 0.5) {
            max_radial = std::max(max_radial, e.radial());
            max_rotation = std::max(max_rotation, e.rotation);
        }
        apply(obj, alignment_setpoint(obj, hand, policy, dt));
    }
    INFO("max radial " << max_radial * 1e3 << " mm, max rotation " << rad2deg(max_rotation) << " deg");
    CHECK(max_radial <= 0.0025);
    CHECK(rad2deg(max_rotation) <= 1.5);
}
