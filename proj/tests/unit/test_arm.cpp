#include "hoi/arm/servo.hpp"

#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

using namespace hoi;
using namespace hoi::arm;
using Catch::Approx;

namespace {

constexpr double kDt = 0.002;

TcpState start_state()
{
    TcpState s;
    s.pose = Pose::from_rotation_vector(Vec3d(0.1, 0.2, 0.3), Vec3d(0.0, 0.3, -0.2));
    return s;
}

double angle_between(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b)
{
    return Eigen::AngleAxisd(a * b.conjugate()).angle();
}

Pose random_pose(std::mt19937_64& rng, double spread)
{
    std::uniform_real_distribution<double> u(-spread, spread);
    std::uniform_real_distribution<double> r(-2.0, 2.0);
    return Pose::from_rotation_vector(Vec3d(u(rng), u(rng), u(rng)), Vec3d(r(rng), r(rng), r(rng)) * 0.7);
}

} // namespace

TEST_CASE("servo_to the current pose leaves the state unchanged", "[arm][servo]")
{
    const TcpState s = start_state();
    const TcpState next = servo_to(s, s.pose, kDt);
    CHECK(next.pose == s.pose);
    CHECK_FALSE(next.safety_stop);
}

TEST_CASE("a 1 m step moves exactly 0.5 mm along the line", "[arm][servo]")
{
    const TcpState s = start_state();
    Pose target = s.pose;
    const Vec3d direction = Vec3d(1, -2, 2).normalized();
    target.position += direction;
    const TcpState next = servo_to(s, target, kDt);
    const Vec3d moved = next.pose.position - s.pose.position;
    CHECK(moved.norm() == Approx(0.25 * 0.002).epsilon(1e-12));
    CHECK((moved.normalized() - direction).norm() < 1e-12);
}

TEST_CASE("a target within one step's reach is reached exactly", "[arm][servo]")
{
    const TcpState s = start_state();
    Pose target = s.pose;
    target.position += Vec3d(0.0001, 0.0, 0.0);
    CHECK(servo_to(s, target, kDt).pose == target);
}

TEST_CASE("rotation is clamped to the angular limit along the shortest arc", "[arm][servo]")
{
    TcpState s;
    Pose target;
    target.orientation = Eigen::AngleAxisd(deg2rad(90.0), Vec3d::UnitZ());
    const TcpState next = servo_to(s, target, kDt);
    const Eigen::AngleAxisd step(next.pose.orientation);
    CHECK(step.angle() == Approx(0.002).epsilon(1e-12));
    CHECK((step.axis() - Vec3d::UnitZ()).norm() < 1e-12);

    // Same rotation expressed with a negated quaternion.
    Pose flipped = target;
    flipped.orientation.coeffs() = -target.orientation.coeffs();
    CHECK(angle_between(servo_to(s, flipped, kDt).pose.orientation, next.pose.orientation) < 1e-12);
}

TEST_CASE("non-finite targets are rejected", "[arm][servo]")
{
    Pose bad;
    bad.position.x() = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(servo_to(TcpState{}, bad, kDt), std::invalid_argument);
}

TEST_CASE("one simulated second is 500 ticks; no commands keep the pose", "[arm][loop]")
{
    ServoLoop loop(start_state());
    const auto trace = run_servo_loop(loop, 500);
    REQUIRE(trace.size() == 500);
    for (std::size_t i = 0; i < trace.size(); ++i) {
        CHECK(trace[i].tick == i);
        CHECK(trace[i].time_us == std::int64_t(i) * 2000);
        CHECK(trace[i].pose == start_state().pose);
        CHECK(trace[i].command_id == 0);
    }
}

TEST_CASE("a command published at tick 100 first moves the arm at tick 101", "[arm][loop]")
{
    ServoLoop loop(start_state());
    Pose target = start_state().pose;
    target.position.z() += 0.01;
    const auto trace = run_servo_loop(loop, 200, [&](std::uint64_t tick) {
        if (tick == 100)
            loop.commands().publish({7, target, std::nullopt, false});
    });
    CHECK(trace[100].pose == start_state().pose);
    CHECK(trace[100].command_id == 0);
    CHECK_FALSE(trace[101].pose == start_state().pose);
    CHECK(trace[101].command_id == 7);
    // 10 mm at 0.5 mm per tick.
    CHECK(trace[120].pose == target);
    CHECK_FALSE(trace[119].pose == target);
}

TEST_CASE("latest command wins", "[arm][loop]")
{
    ServoLoop loop(start_state());
    Pose a = start_state().pose;
    a.position.x() += 1.0;
    Pose b = start_state().pose;
    b.position.x() -= 1.0;
    loop.commands().publish({1, a, std::nullopt, false});
    loop.commands().publish({2, b, std::nullopt, false});
    loop.step(0);
    const TraceEntry e = loop.step(1);
    CHECK(e.command_id == 2);
    CHECK(e.pose.position.x() < start_state().pose.position.x());
}

TEST_CASE("speed limits hold and simulated runs are bit-identical", "[arm][loop][property]")
{
    auto run = [](std::uint64_t seed) {
        ServoLoop loop(start_state());
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> every(1, 60);
        std::uint64_t next_command = 0;
        std::uint64_t id = 0;
        return run_servo_loop(loop, 5000, [&](std::uint64_t tick) {
            if (tick == next_command) {
                loop.commands().publish({++id, random_pose(rng, 0.3), std::nullopt, false});
                next_command += std::uint64_t(every(rng));
            }
        });
    };
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto trace = run(seed);
        const auto again = run(seed);
        REQUIRE(trace.size() == again.size());
        for (std::size_t i = 0; i < trace.size(); ++i) {
            REQUIRE(trace[i].pose == again[i].pose);
            REQUIRE(trace[i].command_id == again[i].command_id);
        }
        for (std::size_t i = 1; i < trace.size(); ++i) {
            const double linear = (trace[i].pose.position - trace[i - 1].pose.position).norm() / kDt;
            const double angular = angle_between(trace[i].pose.orientation, trace[i - 1].pose.orientation) / kDt;
            REQUIRE(linear <= 0.25 + 1e-12);
            REQUIRE(angular <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("quaternion norm drift stays below 1e-9 over a million ticks", "[arm][servo][property]")
{
    TcpState s;
    Pose target;
    double worst = 0.0;
    for (int tick = 0; tick < 1'000'000; ++tick) {
        // Chase a target that keeps rotating so every step is rate-limited.
        if (tick % 1000 == 0)
            target.orientation = Eigen::AngleAxisd(0.01 * tick, Vec3d(1, 1, 0).normalized())
                                 * Eigen::AngleAxisd(2.5, Vec3d::UnitZ());
        s = servo_to(s, target, kDt);
        worst = std::max(worst, std::abs(s.pose.orientation.norm() - 1.0));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("safety zone: exemption cone and keep-out sphere", "[arm][safety]")
{
    SafetyZone zone;
    zone.center = Vec3d(0, 0.5, 0.3);
    zone.axis = -Vec3d::UnitY();
    CHECK_NOTHROW(zone.validate());

    CHECK_FALSE(zone.violates(zone.center + Vec3d(0.06, 0, 0)));
    CHECK(zone.violates(zone.center + Vec3d(0.03, 0, 0)));
    CHECK(zone.violates(zone.center - 0.02 * zone.axis + Vec3d(0.01, 0, 0)));
    CHECK_FALSE(zone.violates(zone.center + 0.02 * zone.axis));
    CHECK_FALSE(zone.violates(zone.center));
    // Cone edge: 15 degrees about the axis from an apex one radius behind the center.
    const double at_gap = 0.02;
    const double edge = (0.05 + at_gap) * std::tan(deg2rad(15.0));
    CHECK_FALSE(zone.violates(zone.center + at_gap * zone.axis + Vec3d(0.99 * edge, 0, 0)));
    CHECK(zone.violates(zone.center + at_gap * zone.axis + Vec3d(1.01 * edge, 0, 0)));

    SafetyZone bad = zone;
    bad.radius = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("entering the zone from the side latches a safety stop until reset", "[arm][safety]")
{
    SafetyZone zone;
    zone.center = Vec3d(0, 0.5, 0.3);
    zone.axis = -Vec3d::UnitY();

    TcpState init;
    init.pose.position = zone.center + Vec3d(0.1, 0, 0);
    ServoLoop loop(init);
    loop.safety_zone().publish(zone);
    Pose target = init.pose;
    target.position = zone.center;
    loop.commands().publish({1, target, std::nullopt, false});

    const auto trace = run_servo_loop(loop, 400);
    for (const auto& e : trace)
        REQUIRE_FALSE(zone.violates(e.pose.position));
    CHECK(trace.back().safety_stop);
    CHECK((trace.back().pose.position - zone.center).norm() == Approx(0.05).margin(0.0005));

    // Latched: a safe target is ignored until an explicit reset.
    Pose away = init.pose;
    loop.commands().publish({2, away, std::nullopt, false});
    const auto latched = run_servo_loop(loop, 10, {}, 400);
    CHECK(latched.back().pose == trace.back().pose);

    loop.commands().publish({3, away, std::nullopt, true});
    const auto resumed = run_servo_loop(loop, 200, {}, 410);
    CHECK_FALSE(resumed.back().safety_stop);
    CHECK(resumed.back().pose == away);
}

TEST_CASE("approach inside the exemption cone reaches the fingertip", "[arm][safety]")
{
    SafetyZone zone;
    zone.center = Vec3d(0, 0.5, 0.3);
    zone.axis = -Vec3d::UnitY();

    TcpState init;
    init.pose.position = zone.center + 0.1 * zone.axis + Vec3d(0.001, 0, 0);
    ServoLoop loop(init);
    loop.safety_zone().publish(zone);
    Pose target = init.pose;
    target.position = zone.center + 0.002 * zone.axis;
    loop.commands().publish({1, target, std::nullopt, false});
    const auto trace = run_servo_loop(loop, 300);
    CHECK_FALSE(trace.back().safety_stop);
    CHECK(trace.back().pose == target);
}

TEST_CASE("gripper actuation delay and idempotence", "[arm][gripper]")
{
    TcpState closed;
    closed.gripper = Gripper::Closed;
    const TcpState same = gripper_command(closed, Gripper::Closed, 0);
    CHECK(same.gripper == Gripper::Closed);
    CHECK_FALSE(same.pending_gripper);

    const std::int64_t t = 1'000'000;
    TcpState opening = gripper_command(closed, Gripper::Open, t);
    CHECK(update_gripper(opening, t + 499'999).gripper == Gripper::Closed);
    CHECK(update_gripper(opening, t + 500'000).gripper == Gripper::Open);

    // Repeating the pending action does not restart the delay.
    opening = gripper_command(opening, Gripper::Open, t + 300'000);
    CHECK(update_gripper(opening, t + 500'000).gripper == Gripper::Open);
}

TEST_CASE("open command is honoured during a safety stop", "[arm][gripper][safety]")
{
    TcpState init;
    init.safety_stop = true;
    ServoLoop loop(init);
    loop.commands().publish({1, init.pose, Gripper::Open, false});
    const auto trace = run_servo_loop(loop, 300);
    // Accepted after tick 0 (t = 0), open at t = 0.5 s = tick 250.
    CHECK(trace[249].gripper == Gripper::Closed);
    CHECK(trace[250].gripper == Gripper::Open);
    CHECK(trace.back().safety_stop);
}

TEST_CASE("wall-clock loop never double-steps", "[arm][loop][realtime]")
{
    ServoLoop loop(start_state());
    const WallClockRun run = run_servo_loop_realtime(loop, std::chrono::milliseconds(100));
    CHECK(run.trace.size() + run.missed_ticks.size() == 50);
    for (std::size_t i = 1; i < run.trace.size(); ++i)
        CHECK(run.trace[i].tick > run.trace[i - 1].tick);
}

TEST_CASE("trace CSV export", "[arm][io]")
{
    ServoLoop loop(start_state());
    const auto trace = run_servo_loop(loop, 2);
    std::ostringstream out;
    write_trace_csv(out, trace);
    std::istringstream in(out.str());
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "tick,time,x,y,z,rx,ry,rz,gripper,command_id,safety_stop");
    CHECK(row.rfind("0,0,0.1,0.2,0.3,", 0) == 0);
    CHECK(row.substr(row.size() - 11) == ",closed,0,0");
}

TEST_CASE("trace CSV reads back", "[arm][io]")
{
    TcpState s = start_state();
    s.pose.orientation = Eigen::Quaterniond(Eigen::AngleAxisd(0.7, Vec3d(1, 2, 3).normalized()));
    ServoLoop loop(s);
    loop.commands().publish({42, Pose::from_rotation_vector(Vec3d(0.11, 0.2, 0.3), Vec3d(0.1, 0, 0)), {}, false});
    const auto trace = run_servo_loop(loop, 5);
    std::stringstream io;
    write_trace_csv(io, trace);
    const auto back = read_trace_csv(io);
    REQUIRE(back.size() == trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        CHECK(back[i].tick == trace[i].tick);
        CHECK(back[i].time_us == trace[i].time_us);
        CHECK(back[i].command_id == trace[i].command_id);
        CHECK(back[i].gripper == trace[i].gripper);
        CHECK(back[i].pose.position == trace[i].pose.position);
        CHECK(back[i].pose.orientation.angularDistance(trace[i].pose.orientation) < 1e-12);
    }
    std::istringstream bad("tick,time\n");
    CHECK_THROWS(read_trace_csv(bad));
}
