#pragma once

#include "hoi/arm/servo.hpp"
#include "hoi/harness/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hoi::harness {

/// Ground truth of one pose frame plus the controller state in force while
/// it was captured.
struct HandSample {
    std::int64_t time_us = 0;
    std::size_t segment = 0;
    MotionClass gesture = MotionClass::Keep;
    Vec3d tip = Vec3d::Zero();
    Mat3d axes = Mat3d::Identity(); ///< true fingertip frame, columns x_h, y_h, z_h
    /// Reference gap of the active cooperation command, if any.
    std::optional<double> active_gap;

    bool operator==(const HandSample&) const = default;
};

/// Timeline entry. Kinds:
///   phase    label = pick | teleop | cooperation | aligned | released | done
///   onset    label = gesture, id = segment, value = 1 when the gesture commands an action
///   confirm  label = gesture
///   command  label = source (gesture name, pick, cooperation or release), id = command id
///   release  label = axial | radial | alpha | beta, value = measured error (m or rad)
///   timeout, tracking_loss
struct Event {
    std::int64_t time_us = 0;
    std::string kind;
    std::string label;
    std::uint64_t id = 0;
    double value = 0.0;

    bool operator==(const Event&) const = default;
};

struct RunTraces {
    std::vector<arm::TraceEntry> tcp;
    std::vector<HandSample> hand;
    std::vector<Event> events;
};

struct GestureLatency {
    std::string gesture;
    double onset = 0.0;  ///< s, first frame of the gesture
    double action = 0.0; ///< s, first servo tick running a command derived from it
    double latency = 0.0;

    bool operator==(const GestureLatency&) const = default;
};

struct ReleaseState {
    double axial_mm = 0.0;
    double radial_mm = 0.0;
    double alpha_deviation = 0.0; ///< rad, |alpha - pi|
    double beta_deviation = 0.0;  ///< rad, |beta|

    bool operator==(const ReleaseState&) const = default;
};

struct MetricsReport {
    double duration = 0.0; ///< s
    std::vector<GestureLatency> latencies;
    std::size_t missed_gestures = 0; ///< action gestures never turned into motion

    std::size_t tracking_samples = 0;
    double max_translation_error_mm = 0.0;
    double mean_translation_error_mm = 0.0;
    double max_rotation_error_deg = 0.0;
    double mean_rotation_error_deg = 0.0;

    std::vector<std::pair<std::string, double>> phases;
    bool phase_order_ok = true;
    std::map<std::string, std::size_t> confirmations;

    bool reached_cooperation = false;
    bool released = false;
    bool incomplete = false; ///< frames were produced but the object was never released
    std::optional<ReleaseState> release_measured;
    std::optional<ReleaseState> release_true;

    std::size_t safety_stops = 0;
    std::size_t tracking_losses = 0;
    bool timed_out = false;

    bool operator==(const MetricsReport&) const = default;
};

/// Everything in the report is derived from the traces, so a replay of saved
/// traces reproduces it.
MetricsReport compute_metrics(const RunTraces& traces);

/// Names of failed thresholds; empty when all are met.
std::vector<std::string> check_thresholds(const MetricsReport& report, const Thresholds& thresholds);

void write_metrics(std::ostream& out, const MetricsReport& report);
void write_latency_csv(std::ostream& out, const MetricsReport& report);

void write_hand_csv(std::ostream& out, const std::vector<HandSample>& hand);
std::vector<HandSample> read_hand_csv(std::istream& in);
void write_events_csv(std::ostream& out, const std::vector<Event>& events);
std::vector<Event> read_events_csv(std::istream& in);

/// tcp_trace.csv, hand_trace.csv and events.csv in `dir`.
void save_traces(const std::filesystem::path& dir, const RunTraces& traces);
RunTraces load_traces(const std::filesystem::path& dir);

} // namespace hoi::harness
