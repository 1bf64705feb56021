#pragma once

#include "hoi/common/geometry.hpp"
#include "hoi/dataset/motion_class.hpp"
#include "hoi/posekit/hand_pose.hpp"

#include <array>
#include <cstdint>

namespace hoi::dataset {

/// Flexion (rad) at the three joints of one finger, base to tip.
using FingerFlex = std::array<double, 3>;

/// Kinematic placement of a synthetic hand. `orientation` columns are the
/// forward (finger) direction, the lateral direction toward the thumb side,
/// and the back-of-hand normal; fingers flex toward the palm (-normal).
struct HandPlacement {
    Vec3d wrist = Vec3d(0.0, 0.65, 0.30);
    Mat3d orientation = (Mat3d() << 0, 1, 0,
                                   -1, 0, 0,
                                    0, 0, 1).finished();
    double scale = 1.0;
};

struct HandArticulation {
    std::array<FingerFlex, 5> flex{};
};

/// Forward kinematics of the planar-chain hand model in MANO joint order.
posekit::JointMatrix articulate(const HandPlacement& placement, const HandArticulation& articulation);

/// Constants of the synthetic gesture generator, in one record so that runs
/// are reproducible from configuration alone.
struct GeneratorConfig {
    double frame_rate = 30.0;           ///< Hz
    double oscillation_amplitude = 0.04; ///< m, index displacement for Come/Back
    double oscillation_depth = 0.1;      ///< relative modulation of that displacement over time
    double oscillation_frequency = 1.0;  ///< Hz
    double frequency_spread = 0.2;       ///< relative, per trajectory
    double scale_spread = 0.0;           ///< relative hand-size variation per trajectory
    double wrist_spread = 0.0;           ///< m, per-trajectory wrist offset
    double drift_amplitude = 0.003;      ///< m, Ring slow drift
    double drift_period = 20.0;          ///< s
    HandPlacement placement{};
};

/// Per-trajectory random draws. Fixed for the trajectory's lifetime.
struct GestureInstance {
    double scale = 1.0;
    Vec3d wrist_offset = Vec3d::Zero();
    double frequency = 1.0;
    double phase = 0.0;
    double drift_phase = 0.0;
};

/// Draw a gesture instance from a seed (Keep stays at the nominal placement
/// apart from hand size).
GestureInstance draw_instance(MotionClass motion, std::uint64_t seed, const GeneratorConfig& config);

/// The nominal articulation of a class (no oscillation applied).
HandArticulation class_articulation(MotionClass motion);

/// Noise-free pose of `motion` at time t. `extra_dip` bends the index
/// fingertip further toward the palm; `lift` translates the whole hand.
posekit::HandPose class_pose(MotionClass motion, double t, const GestureInstance& instance,
                             const GeneratorConfig& config, double extra_dip = 0.0,
                             const Vec3d& lift = Vec3d::Zero());

} // namespace hoi::dataset
