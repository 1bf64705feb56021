#pragma once

#include "hoi/align/alignment.hpp"
#include "hoi/arm/servo.hpp"
#include "hoi/dataset/synthetic_hand.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hoi::harness {

using dataset::MotionClass;

class ScenarioError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Pick: the robot grasps the ring and carries it to the home pose while the
/// hand rests. Gesture: the hand shows a class. Hold: the hand keeps the
/// previous class. Disturb: like hold, while the hand rises by `lift` and the
/// fingertip bends by `bend` along a smooth ramp.
enum class SegmentType { Pick, Gesture, Hold, Disturb };

struct Segment {
    SegmentType type = SegmentType::Hold;
    double duration = 0.0; ///< s
    MotionClass gesture = MotionClass::Keep;
    double lift = 0.0; ///< m, vertical
    double bend = 0.0; ///< rad, extra fingertip flexion

    bool operator==(const Segment&) const = default;
};

/// Acceptance thresholds checked by the command line; unset ones are skipped.
struct Thresholds {
    std::optional<double> max_latency;              ///< s
    std::optional<double> max_translation_error_mm;
    std::optional<double> max_rotation_error_deg;
    std::optional<double> max_release_gap_mm;
    std::optional<double> max_release_angle;        ///< rad, on |alpha - pi| and |beta|
    bool require_release = false;

    bool operator==(const Thresholds&) const = default;
};

struct ScenarioConfig {
    std::uint64_t seed = 0;
    double pose_rate = 30.0;            ///< Hz
    double jitter = 0.00015;            ///< m, per-coordinate pose noise
    std::size_t recognition_window = 2; ///< smoother length ahead of the classifier
    std::size_t tracking_window = 20;   ///< smoother length ahead of the cooperation controller
    std::size_t gate_length = 2;
    /// Frames before the same class may be acted on again; a held gesture
    /// repeats its action at this cadence.
    std::size_t repeat_holdoff = 10;
    double step = 0.020;                ///< m per confirmed Come/Back
    double gripper_delay = 0.5;         ///< s
    arm::Pose start;                    ///< TCP pose at the ring before picking
    arm::Pose home;                     ///< TCP pose after picking
    arm::SpeedLimits limits;
    double safety_radius = 0.05;
    double safety_cone_half_angle = deg2rad(15.0);
    align::ApproachPolicy policy;
    Thresholds thresholds;

    bool operator==(const ScenarioConfig&) const = default;
};

struct ScenarioScript {
    std::string name;
    ScenarioConfig config;
    std::vector<Segment> segments;

    double duration() const;
    /// Throws ScenarioError on non-positive durations, a pick anywhere but
    /// first, or invalid configuration values.
    void validate() const;
    bool operator==(const ScenarioScript&) const = default;
};

std::string_view segment_type_name(SegmentType type);

ScenarioScript parse_scenario(const nlohmann::json& doc);
nlohmann::json to_json(const ScenarioScript& script);
/// Replace the configuration with the keys present in `overrides`.
void apply_config(ScenarioConfig& config, const nlohmann::json& overrides);

ScenarioScript load_scenario(const std::filesystem::path& path);
void save_scenario(const std::filesystem::path& path, const ScenarioScript& script);

/// Pick, a short teleoperated approach with Come and Back, the Ring trigger
/// and cooperation through release.
ScenarioScript ring_scenario();

/// Cooperation with a slow approach while the hand rises by 74.23 mm and the
/// fingertip bends by 18 degrees over 30 s.
ScenarioScript disturbance_scenario();

/// Built-in scenario by name ("ring", "disturbance", "empty") or a JSON file.
ScenarioScript resolve_scenario(const std::string& name_or_path);

/// Noise-free hand motion of a script. Each gesture segment draws its own
/// gesture instance; hold and disturb segments continue the previous one.
class ScriptedHand {
public:
    explicit ScriptedHand(const ScenarioScript& script, dataset::GeneratorConfig generator = {});

    struct State {
        std::size_t segment = 0;
        MotionClass gesture = MotionClass::Keep;
        double lift = 0.0;
        double bend = 0.0;
    };

    /// Times past the end stay in the last segment.
    State state_at(double t) const;
    posekit::HandPose pose_at(double t) const;

private:
    struct Span {
        double start = 0.0;
        double duration = 0.0;
        MotionClass gesture = MotionClass::Keep;
        dataset::GestureInstance instance;
        double lift_from = 0.0, lift_to = 0.0;
        double bend_from = 0.0, bend_to = 0.0;
    };

    dataset::GeneratorConfig generator_;
    std::vector<Span> spans_;
};

} // namespace hoi::harness
