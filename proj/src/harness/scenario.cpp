#include "hoi/harness/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <string_view>

namespace hoi::harness {

using nlohmann::json;

namespace {

// Degrees for people to read: drops the last-bit noise of the conversion.
double degrees(double rad)
{
    return std::round(rad2deg(rad) * 1e9) / 1e9;
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where)
{
    if (!obj.is_object())
        throw ScenarioError(std::string(where) + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (auto a : allowed)
            known = known || key == a;
        if (!known)
            throw ScenarioError(std::string(where) + ": unknown key '" + key + "'");
    }
}

double number(const json& j, std::string_view where)
{
    if (!j.is_number())
        throw ScenarioError(std::string(where) + ": expected a number");
    return j.get<double>();
}

std::uint64_t count(const json& j, std::string_view where)
{
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
        throw ScenarioError(std::string(where) + ": expected a non-negative integer");
    return j.get<std::uint64_t>();
}

arm::Pose pose_from(const json& j, std::string_view where)
{
    if (!j.is_array() || j.size() != 6)
        throw ScenarioError(std::string(where) + ": expected [x, y, z, rx, ry, rz]");
    double v[6];
    for (std::size_t i = 0; i < 6; ++i)
        v[i] = number(j[i], where);
    return arm::Pose::from_rotation_vector(Vec3d(v[0], v[1], v[2]), Vec3d(v[3], v[4], v[5]));
}

json pose_json(const arm::Pose& pose)
{
    const Vec3d r = pose.rotation_vector();
    return json::array({pose.position.x(), pose.position.y(), pose.position.z(), r.x(), r.y(), r.z()});
}

SegmentType parse_segment_type(const std::string& name)
{
    for (auto t : {SegmentType::Pick, SegmentType::Gesture, SegmentType::Hold, SegmentType::Disturb})
        if (segment_type_name(t) == name)
            return t;
    throw ScenarioError("unknown segment type '" + name + "'");
}

Segment parse_segment(const json& j, std::size_t index)
{
    const std::string where = "segment " + std::to_string(index);
    check_keys(j, {"type", "duration", "gesture", "lift", "bend_deg"}, where);
    if (!j.contains("type") || !j["type"].is_string())
        throw ScenarioError(where + ": missing type");
    Segment s;
    s.type = parse_segment_type(j["type"].get<std::string>());
    if (!j.contains("duration"))
        throw ScenarioError(where + ": missing duration");
    s.duration = number(j["duration"], where + ".duration");
    if (s.type == SegmentType::Gesture) {
        if (!j.contains("gesture") || !j["gesture"].is_string())
            throw ScenarioError(where + ": gesture segment needs a gesture name");
        try {
            s.gesture = dataset::parse_class(j["gesture"].get<std::string>());
        } catch (const dataset::UnknownClass& e) {
            throw ScenarioError(where + ": " + e.what());
        }
    } else if (j.contains("gesture")) {
        throw ScenarioError(where + ": only gesture segments name a gesture");
    }
    if (s.type != SegmentType::Disturb && (j.contains("lift") || j.contains("bend_deg")))
        throw ScenarioError(where + ": lift and bend belong to disturb segments");
    if (j.contains("lift"))
        s.lift = number(j["lift"], where + ".lift");
    if (j.contains("bend_deg"))
        s.bend = deg2rad(number(j["bend_deg"], where + ".bend_deg"));
    return s;
}

json segment_json(const Segment& s)
{
    json j{{"type", segment_type_name(s.type)}, {"duration", s.duration}};
    if (s.type == SegmentType::Gesture)
        j["gesture"] = dataset::class_name(s.gesture);
    if (s.type == SegmentType::Disturb) {
        j["lift"] = s.lift;
        j["bend_deg"] = degrees(s.bend);
    }
    return j;
}

void apply_policy(align::ApproachPolicy& p, const json& j)
{
    check_keys(j, {"horizontal_speed", "vertical_speed", "release_gap", "angular_tolerance", "lateral_tolerance",
                   "translation_gain", "rotation_gain", "max_rotation_rate_deg", "standoff"},
               "approach");
    if (j.contains("horizontal_speed")) p.horizontal_speed = number(j["horizontal_speed"], "horizontal_speed");
    if (j.contains("vertical_speed")) p.vertical_speed = number(j["vertical_speed"], "vertical_speed");
    if (j.contains("release_gap")) p.release_gap = number(j["release_gap"], "release_gap");
    if (j.contains("angular_tolerance")) p.angular_tolerance = number(j["angular_tolerance"], "angular_tolerance");
    if (j.contains("lateral_tolerance")) p.lateral_tolerance = number(j["lateral_tolerance"], "lateral_tolerance");
    if (j.contains("translation_gain")) p.translation_gain = number(j["translation_gain"], "translation_gain");
    if (j.contains("rotation_gain")) p.rotation_gain = number(j["rotation_gain"], "rotation_gain");
    if (j.contains("max_rotation_rate_deg"))
        p.max_rotation_rate = deg2rad(number(j["max_rotation_rate_deg"], "max_rotation_rate_deg"));
    if (j.contains("standoff")) p.standoff = number(j["standoff"], "standoff");
}

json policy_json(const align::ApproachPolicy& p)
{
    return {{"horizontal_speed", p.horizontal_speed}, {"vertical_speed", p.vertical_speed},
            {"release_gap", p.release_gap}, {"angular_tolerance", p.angular_tolerance},
            {"lateral_tolerance", p.lateral_tolerance}, {"translation_gain", p.translation_gain},
            {"rotation_gain", p.rotation_gain}, {"max_rotation_rate_deg", degrees(p.max_rotation_rate)},
            {"standoff", p.standoff}};
}

void apply_thresholds(Thresholds& t, const json& j)
{
    check_keys(j, {"max_latency", "max_translation_error_mm", "max_rotation_error_deg", "max_release_gap_mm",
                   "max_release_angle", "require_release"},
               "thresholds");
    if (j.contains("max_latency")) t.max_latency = number(j["max_latency"], "max_latency");
    if (j.contains("max_translation_error_mm"))
        t.max_translation_error_mm = number(j["max_translation_error_mm"], "max_translation_error_mm");
    if (j.contains("max_rotation_error_deg"))
        t.max_rotation_error_deg = number(j["max_rotation_error_deg"], "max_rotation_error_deg");
    if (j.contains("max_release_gap_mm")) t.max_release_gap_mm = number(j["max_release_gap_mm"], "max_release_gap_mm");
    if (j.contains("max_release_angle")) t.max_release_angle = number(j["max_release_angle"], "max_release_angle");
    if (j.contains("require_release")) {
        if (!j["require_release"].is_boolean())
            throw ScenarioError("require_release: expected true or false");
        t.require_release = j["require_release"].get<bool>();
    }
}

json thresholds_json(const Thresholds& t)
{
    json j = json::object();
    if (t.max_latency) j["max_latency"] = *t.max_latency;
    if (t.max_translation_error_mm) j["max_translation_error_mm"] = *t.max_translation_error_mm;
    if (t.max_rotation_error_deg) j["max_rotation_error_deg"] = *t.max_rotation_error_deg;
    if (t.max_release_gap_mm) j["max_release_gap_mm"] = *t.max_release_gap_mm;
    if (t.max_release_angle) j["max_release_angle"] = *t.max_release_angle;
    j["require_release"] = t.require_release;
    return j;
}

json config_json(const ScenarioConfig& c)
{
    return {{"seed", c.seed},
            {"pose_rate", c.pose_rate},
            {"jitter", c.jitter},
            {"recognition_window", c.recognition_window},
            {"tracking_window", c.tracking_window},
            {"gate_length", c.gate_length},
            {"repeat_holdoff", c.repeat_holdoff},
            {"step", c.step},
            {"gripper_delay", c.gripper_delay},
            {"robot",
             {{"start", pose_json(c.start)},
              {"home", pose_json(c.home)},
              {"linear_speed", c.limits.linear},
              {"angular_speed", c.limits.angular}}},
            {"safety", {{"radius", c.safety_radius}, {"cone_half_angle_deg", degrees(c.safety_cone_half_angle)}}},
            {"approach", policy_json(c.policy)},
            {"thresholds", thresholds_json(c.thresholds)}};
}

// Smooth 0 -> 1 over [0, 1].
double ramp(double u)
{
    u = std::clamp(u, 0.0, 1.0);
    return 0.5 * (1.0 - std::cos(kPi * u));
}

} // namespace

std::string_view segment_type_name(SegmentType type)
{
    switch (type) {
    case SegmentType::Pick: return "pick";
    case SegmentType::Gesture: return "gesture";
    case SegmentType::Hold: return "hold";
    case SegmentType::Disturb: return "disturb";
    }
    throw ScenarioError("unknown segment type");
}

double ScenarioScript::duration() const
{
    double total = 0.0;
    for (const auto& s : segments)
        total += s.duration;
    return total;
}

void ScenarioScript::validate() const
{
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& s = segments[i];
        if (!(std::isfinite(s.duration) && s.duration > 0.0))
            throw ScenarioError("segment " + std::to_string(i) + ": duration must be positive");
        if (s.type == SegmentType::Pick && i != 0)
            throw ScenarioError("segment " + std::to_string(i) + ": pick must be the first segment");
        if (!std::isfinite(s.lift) || !std::isfinite(s.bend))
            throw ScenarioError("segment " + std::to_string(i) + ": lift and bend must be finite");
    }
    const auto& c = config;
    if (!(c.pose_rate > 0.0 && c.pose_rate <= 500.0))
        throw ScenarioError("pose_rate must lie in (0, 500] Hz");
    if (!(c.jitter >= 0.0))
        throw ScenarioError("jitter must be >= 0");
    if (c.recognition_window < 1 || c.tracking_window < 1 || c.gate_length < 1)
        throw ScenarioError("smoother windows and gate length must be >= 1");
    if (!(c.step >= 0.0) || !(c.gripper_delay >= 0.0))
        throw ScenarioError("step and gripper_delay must be >= 0");
    if (!(c.limits.linear > 0.0 && c.limits.angular > 0.0))
        throw ScenarioError("speed limits must be positive");
    if (!c.start.position.allFinite() || !c.home.position.allFinite())
        throw ScenarioError("robot poses must be finite");
    try {
        c.policy.validate();
        arm::SafetyZone{Vec3d::Zero(), Vec3d::UnitY(), c.safety_radius, c.safety_cone_half_angle}.validate();
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(e.what());
    }
}

void apply_config(ScenarioConfig& c, const json& j)
{
    check_keys(j, {"seed", "pose_rate", "jitter", "recognition_window", "tracking_window", "gate_length",
                   "repeat_holdoff", "step", "gripper_delay", "robot", "safety", "approach", "thresholds"},
               "config");
    if (j.contains("seed")) c.seed = count(j["seed"], "seed");
    if (j.contains("pose_rate")) c.pose_rate = number(j["pose_rate"], "pose_rate");
    if (j.contains("jitter")) c.jitter = number(j["jitter"], "jitter");
    if (j.contains("recognition_window")) c.recognition_window = count(j["recognition_window"], "recognition_window");
    if (j.contains("tracking_window")) c.tracking_window = count(j["tracking_window"], "tracking_window");
    if (j.contains("gate_length")) c.gate_length = count(j["gate_length"], "gate_length");
    if (j.contains("repeat_holdoff")) c.repeat_holdoff = count(j["repeat_holdoff"], "repeat_holdoff");
    if (j.contains("step")) c.step = number(j["step"], "step");
    if (j.contains("gripper_delay")) c.gripper_delay = number(j["gripper_delay"], "gripper_delay");
    if (j.contains("robot")) {
        const json& r = j["robot"];
        check_keys(r, {"start", "home", "linear_speed", "angular_speed"}, "robot");
        if (r.contains("start")) c.start = pose_from(r["start"], "robot.start");
        if (r.contains("home")) c.home = pose_from(r["home"], "robot.home");
        if (r.contains("linear_speed")) c.limits.linear = number(r["linear_speed"], "linear_speed");
        if (r.contains("angular_speed")) c.limits.angular = number(r["angular_speed"], "angular_speed");
    }
    if (j.contains("safety")) {
        const json& s = j["safety"];
        check_keys(s, {"radius", "cone_half_angle_deg"}, "safety");
        if (s.contains("radius")) c.safety_radius = number(s["radius"], "radius");
        if (s.contains("cone_half_angle_deg"))
            c.safety_cone_half_angle = deg2rad(number(s["cone_half_angle_deg"], "cone_half_angle_deg"));
    }
    if (j.contains("approach"))
        apply_policy(c.policy, j["approach"]);
    if (j.contains("thresholds"))
        apply_thresholds(c.thresholds, j["thresholds"]);
}

ScenarioScript parse_scenario(const json& doc)
{
    check_keys(doc, {"name", "config", "segments"}, "scenario");
    ScenarioScript script;
    if (doc.contains("name")) {
        if (!doc["name"].is_string())
            throw ScenarioError("name: expected a string");
        script.name = doc["name"].get<std::string>();
    }
    if (doc.contains("config"))
        apply_config(script.config, doc["config"]);
    if (doc.contains("segments")) {
        if (!doc["segments"].is_array())
            throw ScenarioError("segments: expected an array");
        for (std::size_t i = 0; i < doc["segments"].size(); ++i)
            script.segments.push_back(parse_segment(doc["segments"][i], i));
    }
    script.validate();
    return script;
}

json to_json(const ScenarioScript& script)
{
    json segments = json::array();
    for (const auto& s : script.segments)
        segments.push_back(segment_json(s));
    return {{"name", script.name}, {"config", config_json(script.config)}, {"segments", segments}};
}

ScenarioScript load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ScenarioError("cannot open scenario " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ScenarioError(path.string() + ": " + e.what());
    }
    return parse_scenario(doc);
}

void save_scenario(const std::filesystem::path& path, const ScenarioScript& script)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << to_json(script).dump(2) << '\n';
}

namespace {

ScenarioConfig default_robot_config()
{
    ScenarioConfig c;
    // Ring held level with its normal pointing at the operator.
    const Vec3d level(0.0, 0.0, kPi / 2);
    c.start = arm::Pose::from_rotation_vector(Vec3d(0.25, 0.20, 0.12), level);
    c.home = arm::Pose::from_rotation_vector(Vec3d(0.022, 0.28, 0.30), level);
    return c;
}

Segment gesture(MotionClass c, double duration)
{
    Segment s;
    s.type = SegmentType::Gesture;
    s.gesture = c;
    s.duration = duration;
    return s;
}

Segment of_type(SegmentType type, double duration)
{
    Segment s;
    s.type = type;
    s.duration = duration;
    return s;
}

} // namespace

ScenarioScript ring_scenario()
{
    ScenarioScript s;
    s.name = "ring";
    s.config = default_robot_config();
    s.config.seed = 7;
    s.config.thresholds.max_latency = 0.3;
    s.config.thresholds.max_release_gap_mm = 2.0;
    s.config.thresholds.max_release_angle = s.config.policy.angular_tolerance;
    s.config.thresholds.require_release = true;
    s.segments = {
        of_type(SegmentType::Pick, 3.0),
        gesture(MotionClass::Keep, 1.0),
        gesture(MotionClass::Come, 0.4),
        gesture(MotionClass::Keep, 1.0),
        gesture(MotionClass::Back, 0.3),
        gesture(MotionClass::Keep, 1.0),
        gesture(MotionClass::Come, 0.4),
        gesture(MotionClass::Keep, 1.0),
        gesture(MotionClass::Ring, 1.0),
        of_type(SegmentType::Hold, 16.0),
    };
    return s;
}

ScenarioScript disturbance_scenario()
{
    ScenarioScript s;
    s.name = "disturbance";
    s.config = default_robot_config();
    s.config.seed = 11;
    s.config.policy.horizontal_speed = 0.0035;
    s.config.thresholds.max_latency = 0.3;
    s.config.thresholds.max_translation_error_mm = 2.5;
    s.config.thresholds.max_rotation_error_deg = 1.5;
    s.config.thresholds.require_release = true;
    Segment disturb = of_type(SegmentType::Disturb, 30.0);
    disturb.lift = 0.07423;
    disturb.bend = deg2rad(18.0);
    s.segments = {
        of_type(SegmentType::Pick, 3.0),
        gesture(MotionClass::Keep, 1.0),
        gesture(MotionClass::Come, 0.4),
        gesture(MotionClass::Keep, 1.0),
        gesture(MotionClass::Ring, 1.0),
        of_type(SegmentType::Hold, 2.0),
        disturb,
        of_type(SegmentType::Hold, 15.0),
    };
    return s;
}

ScenarioScript resolve_scenario(const std::string& name_or_path)
{
    if (name_or_path == "ring")
        return ring_scenario();
    if (name_or_path == "disturbance")
        return disturbance_scenario();
    if (name_or_path == "empty") {
        ScenarioScript s;
        s.name = "empty";
        return s;
    }
    return load_scenario(name_or_path);
}

ScriptedHand::ScriptedHand(const ScenarioScript& script, dataset::GeneratorConfig generator)
    : generator_(std::move(generator))
{
    script.validate();
    double t = 0.0, lift = 0.0, bend = 0.0;
    Span previous;
    for (std::size_t i = 0; i < script.segments.size(); ++i) {
        const Segment& seg = script.segments[i];
        Span span = previous;
        span.start = t;
        span.duration = seg.duration;
        span.lift_from = span.lift_to = lift;
        span.bend_from = span.bend_to = bend;
        if (seg.type == SegmentType::Pick || seg.type == SegmentType::Gesture) {
            span.gesture = seg.type == SegmentType::Pick ? MotionClass::Keep : seg.gesture;
            span.instance = dataset::draw_instance(span.gesture, script.config.seed * 1000 + i, generator_);
        } else if (seg.type == SegmentType::Disturb) {
            span.lift_to = lift += seg.lift;
            span.bend_to = bend += seg.bend;
        }
        spans_.push_back(span);
        previous = span;
        t += seg.duration;
    }
}

ScriptedHand::State ScriptedHand::state_at(double t) const
{
    if (spans_.empty())
        return {};
    std::size_t i = 0;
    while (i + 1 < spans_.size() && t >= spans_[i + 1].start)
        ++i;
    const Span& s = spans_[i];
    const double u = ramp((t - s.start) / s.duration);
    return {i, s.gesture, s.lift_from + (s.lift_to - s.lift_from) * u, s.bend_from + (s.bend_to - s.bend_from) * u};
}

posekit::HandPose ScriptedHand::pose_at(double t) const
{
    const State st = state_at(t);
    const dataset::GestureInstance instance = spans_.empty() ? dataset::GestureInstance{} : spans_[st.segment].instance;
    return dataset::class_pose(st.gesture, t, instance, generator_, st.bend, Vec3d(0.0, 0.0, st.lift));
}

} // namespace hoi::harness
