#include "hoi/arm/servo.hpp"

#include "hoi/common/text.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>

namespace hoi::arm {

std::string_view gripper_name(Gripper g)
{
    return g == Gripper::Open ? "open" : "closed";
}

Pose Pose::from_rotation_vector(const Vec3d& position, const Vec3d& rotation)
{
    return {position, hoi::from_rotation_vector(rotation)};
}

bool Pose::operator==(const Pose& other) const
{
    return position == other.position && orientation.coeffs() == other.orientation.coeffs();
}

void SafetyZone::validate() const
{
    if (!(radius > 0.0))
        throw std::invalid_argument("safety zone radius must be positive");
    if (!(cone_half_angle >= 0.0 && cone_half_angle < kPi / 2))
        throw std::invalid_argument("exemption cone half-angle must lie in [0, pi/2)");
    if (std::abs(axis.norm() - 1.0) > 1e-6)
        throw std::invalid_argument("safety zone axis must be a unit vector");
}

bool SafetyZone::violates(const Vec3d& point) const
{
    if ((point - center).norm() >= radius)
        return false;
    const Vec3d from_apex = point - (center - radius * axis);
    return safe_angle(from_apex.normalized(), axis) > cone_half_angle;
}

TcpState servo_to(const TcpState& state, const Pose& target, double dt, const SafetyZone* zone)
{
    if (!(dt > 0.0))
        throw std::invalid_argument("servo period must be positive");
    if (!target.position.allFinite() || !target.orientation.coeffs().allFinite())
        throw std::invalid_argument("servo target must be finite");
    if (state.safety_stop)
        return state;

    TcpState next = state;
    const Vec3d delta = target.position - state.pose.position;
    const double reach = state.limits.linear * dt;
    const double distance = delta.norm();
    next.pose.position = distance <= reach ? target.position : state.pose.position + delta * (reach / distance);

    Eigen::Quaterniond turn = target.orientation.normalized() * state.pose.orientation.conjugate();
    if (turn.w() < 0.0)
        turn.coeffs() = -turn.coeffs();
    const Eigen::AngleAxisd aa(turn);
    const double max_angle = state.limits.angular * dt;
    if (aa.angle() > max_angle) {
        next.pose.orientation = Eigen::Quaterniond(Eigen::AngleAxisd(max_angle, aa.axis())) * state.pose.orientation;
        next.pose.orientation.normalize();
    } else {
        next.pose.orientation = target.orientation;
        if (std::abs(next.pose.orientation.norm() - 1.0) > 1e-12)
            next.pose.orientation.normalize();
    }

    if (zone && zone->violates(next.pose.position)) {
        TcpState halted = state;
        halted.safety_stop = true;
        return halted;
    }
    return next;
}

TcpState gripper_command(const TcpState& state, Gripper action, std::int64_t now_us, std::int64_t delay_us)
{
    if (state.pending_gripper == action || (!state.pending_gripper && state.gripper == action))
        return state;
    TcpState next = state;
    next.pending_gripper = action;
    next.gripper_due_us = now_us + delay_us;
    return next;
}

TcpState update_gripper(const TcpState& state, std::int64_t now_us)
{
    if (!state.pending_gripper || now_us < state.gripper_due_us)
        return state;
    TcpState next = state;
    next.gripper = *state.pending_gripper;
    next.pending_gripper.reset();
    return next;
}

ServoLoop::ServoLoop(TcpState initial, std::int64_t gripper_delay_us)
    : state_(std::move(initial)), gripper_delay_us_(gripper_delay_us)
{
    active_.target = state_.pose;
}

TraceEntry ServoLoop::step(std::uint64_t tick)
{
    const std::int64_t now = std::int64_t(tick) * kServoPeriodUs;
    if (auto zone = zone_.take())
        active_zone_ = *zone;
    state_ = servo_to(state_, active_.target, double(kServoPeriodUs) * 1e-6,
                      active_zone_ ? &*active_zone_ : nullptr);
    state_ = update_gripper(state_, now);

    TraceEntry entry{tick, now, state_.pose, state_.gripper, active_.id, state_.safety_stop};
    if (auto command = commands_.take())
        accept(*command, now);
    return entry;
}

void ServoLoop::accept(const ServoCommand& command, std::int64_t now_us)
{
    if (command.reset_safety)
        state_.safety_stop = false;
    if (command.gripper)
        state_ = gripper_command(state_, *command.gripper, now_us, gripper_delay_us_);
    active_ = command;
}

std::vector<TraceEntry> run_servo_loop(ServoLoop& loop, std::uint64_t ticks,
                                       const std::function<void(std::uint64_t)>& before_tick, std::uint64_t first)
{
    std::vector<TraceEntry> trace;
    trace.reserve(ticks);
    for (std::uint64_t tick = first; tick < first + ticks; ++tick) {
        if (before_tick)
            before_tick(tick);
        trace.push_back(loop.step(tick));
    }
    return trace;
}

WallClockRun run_servo_loop_realtime(ServoLoop& loop, std::chrono::microseconds duration,
                                     const std::function<void(std::uint64_t)>& before_tick)
{
    using Clock = std::chrono::steady_clock;
    const auto period = std::chrono::microseconds(kServoPeriodUs);
    const std::uint64_t total = std::uint64_t(duration / period);
    const auto start = Clock::now();

    WallClockRun run;
    run.trace.reserve(total);
    for (std::uint64_t tick = 0; tick < total; ++tick) {
        const auto deadline = start + tick * period;
        const auto now = Clock::now();
        if (now >= deadline + period) {
            run.missed_ticks.push_back(tick);
            continue;
        }
        std::this_thread::sleep_until(deadline);
        if (before_tick)
            before_tick(tick);
        run.trace.push_back(loop.step(tick));
    }
    return run;
}

void write_trace_csv(std::ostream& out, std::span<const TraceEntry> trace)
{
    out << kTraceHeader << '\n';
    std::string line;
    for (const auto& e : trace) {
        const Vec3d rv = e.pose.rotation_vector();
        line = std::to_string(e.tick) + ',' + format_double(double(e.time_us) * 1e-6);
        for (double v : {e.pose.position.x(), e.pose.position.y(), e.pose.position.z(), rv.x(), rv.y(), rv.z()}) {
            line += ',';
            line += format_double(v);
        }
        line += ',';
        line += gripper_name(e.gripper);
        line += ',';
        line += std::to_string(e.command_id);
        line += e.safety_stop ? ",1\n" : ",0\n";
        out << line;
    }
}

std::vector<TraceEntry> read_trace_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader)
        throw std::runtime_error("trace: missing header");
    std::vector<TraceEntry> trace;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto f = split(line, ',');
        if (f.size() != 11)
            throw std::runtime_error("trace: expected 11 fields, got " + std::to_string(f.size()));
        TraceEntry e;
        e.tick = std::stoull(std::string(f[0]));
        e.time_us = std::int64_t(e.tick) * kServoPeriodUs;
        const Vec3d position(parse_double(f[2]), parse_double(f[3]), parse_double(f[4]));
        const Vec3d rotation(parse_double(f[5]), parse_double(f[6]), parse_double(f[7]));
        e.pose = Pose::from_rotation_vector(position, rotation);
        if (f[8] == gripper_name(Gripper::Open))
            e.gripper = Gripper::Open;
        else if (f[8] == gripper_name(Gripper::Closed))
            e.gripper = Gripper::Closed;
        else
            throw std::runtime_error("trace: unknown gripper state '" + std::string(f[8]) + "'");
        e.command_id = std::stoull(std::string(f[9]));
        e.safety_stop = f[10] == "1";
        trace.push_back(e);
    }
    return trace;
}

} // namespace hoi::arm
