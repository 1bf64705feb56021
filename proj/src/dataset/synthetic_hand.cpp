#include "hoi/dataset/synthetic_hand.hpp"

#include <cmath>
#include <random>

namespace hoi::dataset {

namespace {

struct FingerGeometry {
    Vec3d base;                    // hand coordinates: forward, lateral, normal
    std::array<double, 3> lengths; // m
};

// Thumb, index, middle, ring, pinky. Adult-hand proportions.
const std::array<FingerGeometry, 5> kFingers = {{
    {Vec3d(0.025, 0.025, -0.010), {0.040, 0.032, 0.028}},
    {Vec3d(0.090, 0.022, 0.0), {0.040, 0.025, 0.022}},
    {Vec3d(0.094, 0.002, 0.0), {0.045, 0.028, 0.024}},
    {Vec3d(0.088, -0.017, 0.0), {0.042, 0.026, 0.023}},
    {Vec3d(0.078, -0.034, 0.0), {0.033, 0.020, 0.020}},
}};

const Vec3d kThumbDirection = Vec3d(0.6, 0.8, 0.0);

// Per-joint weight of the Come/Back displacement along the index chain.
constexpr std::array<double, 4> kIndexWeights = {0.4, 0.7, 0.9, 1.0};

FingerFlex flex(double a, double b, double c) { return {a, b, c}; }

} // namespace

posekit::JointMatrix articulate(const HandPlacement& placement, const HandArticulation& articulation)
{
    const Mat3d& rot = placement.orientation;
    const Vec3d normal = Vec3d::UnitZ();

    posekit::JointMatrix joints;
    auto world = [&](const Vec3d& local) -> Vec3d {
        return placement.wrist + placement.scale * (rot * local);
    };
    joints.row(posekit::joint::kWrist) = placement.wrist.transpose();

    for (int f = 0; f < 5; ++f) {
        const auto& finger = kFingers[static_cast<std::size_t>(f)];
        const auto& angles = articulation.flex[static_cast<std::size_t>(f)];
        const Vec3d heading = f == 0 ? Vec3d(kThumbDirection.normalized()) : Vec3d::UnitX();

        Vec3d position = finger.base;
        const int base = posekit::joint::finger_base(f);
        joints.row(base) = world(position).transpose();
        double cumulative = 0.0;
        for (int s = 0; s < 3; ++s) {
            cumulative += angles[static_cast<std::size_t>(s)];
            const Vec3d direction = std::cos(cumulative) * heading - std::sin(cumulative) * normal;
            position += finger.lengths[static_cast<std::size_t>(s)] * direction;
            joints.row(base + 1 + s) = world(position).transpose();
        }
    }
    return joints;
}

HandArticulation class_articulation(MotionClass motion)
{
    HandArticulation a;
    switch (motion) {
    case MotionClass::Keep:
    case MotionClass::Come:
    case MotionClass::Back:
        a.flex = {flex(0.2, 0.2, 0.1), flex(0.15, 0.15, 0.1), flex(0.15, 0.15, 0.1),
                  flex(0.15, 0.15, 0.1), flex(0.15, 0.15, 0.1)};
        break;
    case MotionClass::Ring:
        // Pointing: index raised at the knuckle with a curled tip, the rest
        // curled into the palm.
        a.flex = {flex(0.6, 0.6, 0.4), flex(-0.3, 0.4, 0.35), flex(1.2, 1.5, 1.0),
                  flex(1.2, 1.5, 1.0), flex(1.2, 1.5, 1.0)};
        break;
    default:
        throw UnknownClass("unknown motion class code " + std::to_string(code(motion)));
    }
    return a;
}

GestureInstance draw_instance(MotionClass motion, std::uint64_t seed, const GeneratorConfig& config)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(code(motion)), 0x1d5eu};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    GestureInstance inst;
    inst.scale = 1.0 + config.scale_spread * unit(rng);
    inst.wrist_offset = config.wrist_spread * Vec3d(unit(rng), unit(rng), unit(rng));
    inst.frequency = config.oscillation_frequency * (1.0 + config.frequency_spread * unit(rng));
    inst.phase = kPi * unit(rng);
    inst.drift_phase = kPi * unit(rng);
    return inst;
}

posekit::HandPose class_pose(MotionClass motion, double t, const GestureInstance& instance,
                             const GeneratorConfig& config, double extra_dip, const Vec3d& lift)
{
    HandArticulation articulation = class_articulation(motion);
    articulation.flex[1][2] += extra_dip;

    HandPlacement placement = config.placement;
    placement.scale *= instance.scale;
    placement.wrist += instance.wrist_offset + lift;
    if (motion == MotionClass::Ring) {
        const double w = 2.0 * kPi * t / config.drift_period + instance.drift_phase;
        placement.wrist += config.drift_amplitude * Vec3d(std::sin(w), std::cos(w), 0.5 * std::sin(2 * w));
    }

    posekit::HandPose pose;
    pose.timestamp = t;
    pose.joints = articulate(placement, articulation);

    if (motion == MotionClass::Come || motion == MotionClass::Back) {
        const double sign = motion == MotionClass::Come ? -1.0 : 1.0;
        const double envelope
            = 1.0 + config.oscillation_depth * std::sin(2.0 * kPi * instance.frequency * t + instance.phase);
        for (int k = 0; k < 4; ++k)
            pose.joints(posekit::joint::kIndexMcp + k, 1)
                += sign * config.oscillation_amplitude * kIndexWeights[static_cast<std::size_t>(k)] * envelope;
    }
    return pose;
}

} // namespace hoi::dataset
