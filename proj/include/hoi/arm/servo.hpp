#pragma once

#include "hoi/common/geometry.hpp"
#include "hoi/common/mailbox.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace hoi::arm {

enum class Gripper : std::uint8_t { Open = 0, Closed = 1 };

std::string_view gripper_name(Gripper g);

struct Pose {
    Vec3d position = Vec3d::Zero();
    Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();

    Vec3d rotation_vector() const { return to_rotation_vector(orientation); }
    static Pose from_rotation_vector(const Vec3d& position, const Vec3d& rotation);
    bool operator==(const Pose& other) const;
};

struct SpeedLimits {
    double linear = 0.25; ///< m/s
    double angular = 1.0; ///< rad/s

    bool operator==(const SpeedLimits&) const = default;
};

/// Hand-anchored keep-out sphere. Points inside a cone about `axis` with its
/// apex one radius behind `center` are exempt, which leaves a corridor for
/// approaching the fingertip head-on.
struct SafetyZone {
    Vec3d center = Vec3d::Zero();
    Vec3d axis = Vec3d::UnitY(); ///< unit approach axis, pointing away from the hand
    double radius = 0.05;
    double cone_half_angle = deg2rad(15.0);

    void validate() const;
    bool violates(const Vec3d& point) const;
};

struct TcpState {
    Pose pose;
    SpeedLimits limits;
    Gripper gripper = Gripper::Closed;
    bool safety_stop = false;
    std::optional<Gripper> pending_gripper;
    std::int64_t gripper_due_us = 0;
};

/// One servo step toward `target`: straight-line translation and shortest-arc
/// orientation, each clamped to its speed limit and snapped onto the target
/// when within one step's reach. A step that would end inside `zone` halts
/// the arm and latches the safety stop instead. A latched state does not move.
TcpState servo_to(const TcpState& state, const Pose& target, double dt, const SafetyZone* zone = nullptr);

inline constexpr std::int64_t kDefaultGripperDelayUs = 500'000;

/// Schedule a gripper action `delay_us` after `now_us`. Repeating the current
/// or already-pending action changes nothing. Honoured during a safety stop.
TcpState gripper_command(const TcpState& state, Gripper action, std::int64_t now_us,
                         std::int64_t delay_us = kDefaultGripperDelayUs);

/// Apply a pending gripper action whose actuation time has come.
TcpState update_gripper(const TcpState& state, std::int64_t now_us);

struct ServoCommand {
    std::uint64_t id = 0; ///< 0 means no command
    Pose target;
    std::optional<Gripper> gripper;
    bool reset_safety = false;
};

struct TraceEntry {
    std::uint64_t tick = 0;
    std::int64_t time_us = 0;
    Pose pose;
    Gripper gripper = Gripper::Closed;
    std::uint64_t command_id = 0;
    bool safety_stop = false;
};

inline constexpr std::int64_t kServoPeriodUs = 2000;

/// The 500 Hz servo loop. Each tick first servos toward the active command,
/// then takes the newest command from the mailbox, which becomes active on
/// the next tick.
class ServoLoop {
public:
    explicit ServoLoop(TcpState initial, std::int64_t gripper_delay_us = kDefaultGripperDelayUs);

    LatestMailbox<ServoCommand>& commands() { return commands_; }
    LatestMailbox<std::optional<SafetyZone>>& safety_zone() { return zone_; }

    /// Run tick number `tick` at its scheduled time.
    TraceEntry step(std::uint64_t tick);

    const TcpState& state() const { return state_; }
    const ServoCommand& active() const { return active_; }

private:
    void accept(const ServoCommand& command, std::int64_t now_us);

    TcpState state_;
    std::int64_t gripper_delay_us_;
    ServoCommand active_;
    std::optional<SafetyZone> active_zone_;
    LatestMailbox<ServoCommand> commands_;
    LatestMailbox<std::optional<SafetyZone>> zone_;
};

inline double tick_seconds(std::uint64_t tick)
{
    return double(std::int64_t(tick) * kServoPeriodUs) * 1e-6;
}

/// Simulated clock: runs `ticks` consecutive ticks starting at `first`.
/// `before_tick` is called ahead of each tick so a driver can publish
/// commands. Bit-reproducible for identical command streams.
std::vector<TraceEntry> run_servo_loop(ServoLoop& loop, std::uint64_t ticks,
                                       const std::function<void(std::uint64_t)>& before_tick = {},
                                       std::uint64_t first = 0);

struct WallClockRun {
    std::vector<TraceEntry> trace;
    std::vector<std::uint64_t> missed_ticks;
};

/// Wall clock: ticks are scheduled on a steady clock. A tick whose deadline
/// has already passed by a full period is logged as missed and skipped, so
/// the loop never steps twice to catch up.
WallClockRun run_servo_loop_realtime(ServoLoop& loop, std::chrono::microseconds duration,
                                     const std::function<void(std::uint64_t)>& before_tick = {});

inline constexpr const char* kTraceHeader = "tick,time,x,y,z,rx,ry,rz,gripper,command_id,safety_stop";

void write_trace_csv(std::ostream& out, std::span<const TraceEntry> trace);
/// Inverse of write_trace_csv; the orientation is rebuilt from the rotation vector.
std::vector<TraceEntry> read_trace_csv(std::istream& in);

} // namespace hoi::arm
