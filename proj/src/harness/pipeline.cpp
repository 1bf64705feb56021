#include "hoi/harness/pipeline.hpp"

#include "hoi/fsm/primitives.hpp"
#include "hoi/mpm/gate.hpp"
#include "hoi/posekit/hand_frame.hpp"
#include "hoi/posekit/smoother.hpp"
#include "hoi/posekit/window.hpp"
#include "hoi/wire/session.hpp"

#include <cmath>
#include <fstream>
#include <random>

namespace hoi::harness {

namespace {

std::array<float, 6> pose_floats(const arm::Pose& p)
{
    const Vec3d r = p.rotation_vector();
    return {float(p.position.x()), float(p.position.y()), float(p.position.z()),
            float(r.x()), float(r.y()), float(r.z())};
}

arm::Pose pose_of(const std::array<float, 6>& v)
{
    return arm::Pose::from_rotation_vector(Vec3d(v[0], v[1], v[2]), Vec3d(v[3], v[4], v[5]));
}

std::int64_t frame_time_us(std::uint64_t frame, double rate)
{
    return std::llround(double(frame) * 1e6 / rate);
}

bool commands_action(const fsm::PrimitiveRegistry& registry, MotionClass c)
{
    if (!registry.contains(c))
        return false;
    const auto& action = registry.lookup(c).action;
    if (const auto* d = std::get_if<fsm::Displacement>(&action))
        return !d->is_zero();
    return true;
}

arm::Pose displaced(const arm::Pose& base, const fsm::Displacement& d)
{
    arm::Pose p = base;
    p.position += d.translation;
    p.orientation = (from_rotation_vector(d.rotation) * base.orientation).normalized();
    return p;
}

struct Link {
    std::unique_ptr<wire::Transport> tx, rx;
    Link()
    {
        auto [a, b] = wire::make_loopback_pair();
        tx = std::move(a);
        rx = std::move(b);
    }
};

class Pipeline {
public:
    Pipeline(const mpm::MpmNetwork& network, const ScenarioScript& script);
    ScenarioRun run();

private:
    void produce(std::uint64_t frame);
    void control();
    void on_pose(const wire::WireMessage& message);
    void pick(std::int64_t t_us);
    void recognize(std::int64_t t_us);
    void cooperate(std::int64_t t_us, const posekit::HandPose& hand);
    void servo(std::uint64_t tick);
    void send_command(std::int64_t t_us, const arm::Pose& target, wire::GripperAction gripper, const std::string& source);
    void event(std::int64_t t_us, std::string kind, std::string label, std::uint64_t id = 0, double value = 0.0);

    const mpm::MpmNetwork& network_;
    const ScenarioScript& script_;
    const ScenarioConfig& config_;
    ScriptedHand hand_;
    fsm::PrimitiveRegistry registry_;
    bool has_pick_;
    std::int64_t pick_end_us_;
    std::int64_t duration_us_;
    std::uint64_t now_us_ = 0;

    Link pose_link_, command_link_, state_link_;
    wire::ProducerSession pose_out_, command_out_, state_out_;
    wire::ConsumerSession pose_in_, command_in_, state_in_;

    std::mt19937_64 rng_;
    std::normal_distribution<double> noise_;
    std::optional<std::size_t> last_segment_;

    posekit::MovingAverageSmoother recognition_smoother_;
    posekit::MovingAverageSmoother tracking_smoother_;
    posekit::WindowAssembler windows_{1};
    mpm::StabilityGate gate_;
    std::optional<MotionClass> last_confirmed_;
    std::uint64_t frames_since_confirmed_ = 0;

    fsm::ControllerMode mode_ = fsm::ControllerMode::Teleop;
    bool recognizing_ = false;
    bool pick_started_ = false;
    bool home_sent_ = false;
    std::optional<align::CooperationController> cooperation_;
    std::string cooperation_source_;
    bool cooperation_commanded_ = false;
    bool aligned_seen_ = false;
    bool timeout_seen_ = false;
    bool done_seen_ = false;
    std::optional<double> active_gap_;

    arm::Pose base_target_;
    std::optional<wire::StateReport> last_state_;
    std::uint64_t last_command_stamp_ = 0;
    bool any_command_ = false;

    arm::ServoLoop loop_;
    ScenarioRun run_;
};

arm::TcpState initial_state(const ScenarioConfig& config, bool has_pick)
{
    arm::TcpState s;
    s.pose = has_pick ? config.start : config.home;
    s.limits = config.limits;
    s.gripper = has_pick ? arm::Gripper::Open : arm::Gripper::Closed;
    return s;
}

Pipeline::Pipeline(const mpm::MpmNetwork& network, const ScenarioScript& script)
    : network_(network),
      script_(script),
      config_(script.config),
      hand_(script),
      registry_(fsm::default_bindings(script.config.step)),
      has_pick_(!script.segments.empty() && script.segments.front().type == SegmentType::Pick),
      pick_end_us_(has_pick_ ? std::llround(script.segments.front().duration * 1e6) : 0),
      duration_us_(std::llround(script.duration() * 1e6)),
      pose_out_(*pose_link_.tx),
      command_out_(*command_link_.tx),
      state_out_(*state_link_.tx),
      pose_in_(*pose_link_.rx, [this] { return now_us_; }),
      command_in_(*command_link_.rx, [this] { return now_us_; }),
      state_in_(*state_link_.rx, [this] { return now_us_; }),
      rng_(script.config.seed),
      noise_(0.0, 1.0),
      recognition_smoother_(script.config.recognition_window),
      tracking_smoother_(script.config.tracking_window),
      gate_(script.config.gate_length),
      base_target_(script.config.home),
      loop_(initial_state(script.config, has_pick_), std::llround(script.config.gripper_delay * 1e6))
{
}

ScenarioRun Pipeline::run()
{
    const std::int64_t ticks = (duration_us_ + arm::kServoPeriodUs - 1) / arm::kServoPeriodUs;
    std::uint64_t frame = 0;
    for (std::int64_t tick = 0; tick < ticks; ++tick) {
        now_us_ = std::uint64_t(tick * arm::kServoPeriodUs);
        for (std::int64_t t = frame_time_us(frame, config_.pose_rate);
             t <= std::int64_t(now_us_) && t < duration_us_; t = frame_time_us(frame, config_.pose_rate)) {
            produce(frame);
            ++frame;
        }
        control();
        servo(std::uint64_t(tick));
    }
    run_.report = compute_metrics(run_.traces);
    run_.wire.protocol_errors = pose_in_.protocol_errors() + command_in_.protocol_errors() + state_in_.protocol_errors();
    return std::move(run_);
}

void Pipeline::event(std::int64_t t_us, std::string kind, std::string label, std::uint64_t id, double value)
{
    run_.traces.events.push_back({t_us, std::move(kind), std::move(label), id, value});
}

void Pipeline::produce(std::uint64_t frame)
{
    const std::int64_t t_us = frame_time_us(frame, config_.pose_rate);
    const double t = double(t_us) * 1e-6;
    const ScriptedHand::State state = hand_.state_at(t);
    posekit::HandPose pose = hand_.pose_at(t);

    HandSample sample;
    sample.time_us = t_us;
    sample.segment = state.segment;
    sample.gesture = state.gesture;
    const posekit::HandFrame truth = posekit::hand_frame(pose);
    sample.tip = truth.origin;
    sample.axes = truth.axes;
    run_.traces.hand.push_back(sample);

    if (last_segment_ != state.segment) {
        last_segment_ = state.segment;
        if (script_.segments[state.segment].type == SegmentType::Gesture)
            event(t_us, "onset", std::string(dataset::class_name(state.gesture)), state.segment,
                  commands_action(registry_, state.gesture) ? 1.0 : 0.0);
    }

    wire::PoseSample sample_msg;
    for (int j = 0; j < posekit::kJointCount; ++j)
        for (int c = 0; c < 3; ++c) {
            const double jitter = config_.jitter > 0.0 ? config_.jitter * noise_(rng_) : 0.0;
            sample_msg.joints[std::size_t(3 * j + c)] = float(pose.joints(j, c) + jitter);
        }
    pose_out_.send({std::uint64_t(t_us), sample_msg});
    ++run_.wire.pose_messages;
}

void Pipeline::control()
{
    pose_in_.pump();
    state_in_.pump();
    if (auto m = state_in_.latest(wire::MessageType::StateReport))
        last_state_ = std::get<wire::StateReport>(m->payload);
    run_.wire.state_messages += state_in_.drain_log().size();
    for (const auto& d : pose_in_.drain_log())
        if (d.message.type() == wire::MessageType::PoseSample)
            on_pose(d.message);
}

void Pipeline::on_pose(const wire::WireMessage& message)
{
    const auto t_us = std::int64_t(message.timestamp_us);
    const auto& joints = std::get<wire::PoseSample>(message.payload).joints;
    posekit::HandPose raw;
    raw.timestamp = double(t_us) * 1e-6;
    for (int j = 0; j < posekit::kJointCount; ++j)
        for (int c = 0; c < 3; ++c)
            raw.joints(j, c) = joints[std::size_t(3 * j + c)];

    const posekit::HandPose recognition = recognition_smoother_.push(raw);
    const posekit::HandPose tracking = tracking_smoother_.push(raw);
    windows_.push(recognition);

    HandSample& sample = run_.traces.hand.back();
    if (sample.time_us != t_us)
        throw std::logic_error("pose frames out of step with the hand trace");
    sample.active_gap = active_gap_;

    try {
        const posekit::HandFrame f = posekit::hand_frame(tracking);
        loop_.safety_zone().publish(arm::SafetyZone{f.origin, f.y(), config_.safety_radius, config_.safety_cone_half_angle});
    } catch (const posekit::DegenerateFrame&) {
    }

    if (has_pick_ && t_us < pick_end_us_) {
        pick(t_us);
        return;
    }
    if (!recognizing_) {
        recognizing_ = true;
        event(t_us, "phase", "teleop");
        if (!home_sent_) {
            send_command(t_us, config_.home, wire::GripperAction::Hold, "pick");
            home_sent_ = true;
        }
    }
    if (mode_ != fsm::ControllerMode::Done)
        recognize(t_us);
    if (mode_ == fsm::ControllerMode::Cooperation)
        cooperate(t_us, tracking);
    if (mode_ == fsm::ControllerMode::Done && !done_seen_ && last_state_
        && last_state_->gripper == wire::GripperState::Open) {
        done_seen_ = true;
        event(t_us, "phase", "done");
    }
}

void Pipeline::pick(std::int64_t t_us)
{
    if (!pick_started_) {
        pick_started_ = true;
        event(t_us, "phase", "pick");
        send_command(t_us, config_.start, wire::GripperAction::Close, "pick");
        return;
    }
    if (!home_sent_ && last_state_ && last_state_->gripper == wire::GripperState::Closed) {
        home_sent_ = true;
        send_command(t_us, config_.home, wire::GripperAction::Hold, "pick");
    }
}

void Pipeline::recognize(std::int64_t t_us)
{
    ++frames_since_confirmed_;
    const auto window = windows_.window();
    if (!window)
        return;
    const auto confirmed = gate_.push(mpm::decide(mpm::classify(network_, *window)));
    if (!confirmed)
        return;
    gate_.reset();
    const MotionClass motion = dataset::class_from_code(*confirmed);
    if (mode_ != fsm::ControllerMode::Teleop
        || (last_confirmed_ == motion && frames_since_confirmed_ < config_.repeat_holdoff))
        return;
    last_confirmed_ = motion;
    frames_since_confirmed_ = 0;

    const std::string name(dataset::class_name(motion));
    event(t_us, "confirm", name);
    command_out_.send({std::uint64_t(t_us), wire::GateDecision{std::uint8_t(*confirmed)}});

    const fsm::FsmStep step = fsm::step_fsm(mode_, motion, registry_);
    if (step.action && !step.action->is_zero()) {
        base_target_ = displaced(base_target_, *step.action);
        send_command(t_us, base_target_, wire::GripperAction::Hold, name);
    }
    if (step.mode == fsm::ControllerMode::Cooperation) {
        mode_ = step.mode;
        event(t_us, "phase", "cooperation");
        cooperation_.emplace(config_.policy);
        cooperation_source_ = name;
    }
}

void Pipeline::cooperate(std::int64_t t_us, const posekit::HandPose& hand)
{
    if (!last_state_)
        return;
    const arm::Pose tcp = pose_of(last_state_->pose);
    const align::ObjectFrame object{tcp.position, tcp.orientation.toRotationMatrix()};
    const double t = double(t_us) * 1e-6;
    const align::CooperationOutput out = cooperation_->step(object, hand, t, 1.0 / config_.pose_rate);

    if (out.timed_out) {
        if (!timeout_seen_)
            event(t_us, "timeout", "cooperation");
        timeout_seen_ = true;
        return;
    }
    if (out.tracking_loss) {
        event(t_us, "tracking_loss", "cooperation");
        return;
    }
    if (out.open_gripper) {
        event(t_us, "release", "axial", 0, out.error.axial);
        event(t_us, "release", "radial", 0, out.error.radial());
        event(t_us, "release", "alpha", 0, std::abs(out.error.alpha - kPi));
        event(t_us, "release", "beta", 0, std::abs(out.error.beta));
        mode_ = fsm::finish_cooperation(mode_);
        event(t_us, "phase", "released");
        send_command(t_us, tcp, wire::GripperAction::Open, "release");
        active_gap_.reset();
        return;
    }
    if (out.phase == align::CooperationPhase::Aligned && !aligned_seen_) {
        aligned_seen_ = true;
        event(t_us, "phase", "aligned");
    }
    arm::Pose target;
    target.position = object.origin + out.command.translation;
    target.orientation = (from_rotation_vector(out.command.rotation) * tcp.orientation).normalized();
    send_command(t_us, target, wire::GripperAction::Hold, cooperation_commanded_ ? "cooperation" : cooperation_source_);
    cooperation_commanded_ = true;
    active_gap_ = cooperation_->reference_gap();
}

void Pipeline::send_command(std::int64_t t_us, const arm::Pose& target, wire::GripperAction gripper,
                            const std::string& source)
{
    // The command id is the wire timestamp plus one; stamps stay unique.
    std::uint64_t stamp = std::uint64_t(t_us);
    if (any_command_ && stamp <= last_command_stamp_)
        stamp = last_command_stamp_ + 1;
    any_command_ = true;
    last_command_stamp_ = stamp;
    command_out_.send({stamp, wire::ServoCommand{pose_floats(target), gripper}});
    event(t_us, "command", source, stamp + 1);
}

void Pipeline::servo(std::uint64_t tick)
{
    command_in_.pump();
    if (auto m = command_in_.latest(wire::MessageType::ServoCommand)) {
        const auto& c = std::get<wire::ServoCommand>(m->payload);
        const std::optional<arm::Gripper> gripper
            = c.gripper == wire::GripperAction::Open    ? std::optional(arm::Gripper::Open)
              : c.gripper == wire::GripperAction::Close ? std::optional(arm::Gripper::Closed)
                                                        : std::nullopt;
        loop_.commands().publish({m->timestamp_us + 1, pose_of(c.pose), gripper, false});
    }
    for (const auto& d : command_in_.drain_log()) {
        if (d.message.type() == wire::MessageType::ServoCommand)
            ++run_.wire.command_messages;
        else if (d.message.type() == wire::MessageType::GateDecision)
            ++run_.wire.gate_messages;
    }

    const arm::TraceEntry entry = loop_.step(tick);
    run_.traces.tcp.push_back(entry);
    wire::StateReport report;
    report.pose = pose_floats(entry.pose);
    report.gripper = entry.gripper == arm::Gripper::Open ? wire::GripperState::Open : wire::GripperState::Closed;
    report.status = entry.safety_stop ? wire::ArmStatus::SafetyStop : wire::ArmStatus::Ok;
    state_out_.send({std::uint64_t(entry.time_us), report});
}

} // namespace

ScenarioRun run_scenario(const mpm::MpmNetwork& network, const ScenarioScript& script)
{
    script.validate();
    return Pipeline(network, script).run();
}

void save_run(const std::filesystem::path& dir, const ScenarioScript& script, const ScenarioRun& run)
{
    save_traces(dir, run.traces);
    save_scenario(dir / "scenario.json", script);
    std::ofstream metrics(dir / "metrics.txt");
    write_metrics(metrics, run.report);
    std::ofstream latency(dir / "latency.csv");
    write_latency_csv(latency, run.report);
    if (!metrics || !latency)
        throw std::runtime_error("cannot write metrics in " + dir.string());
}

} // namespace hoi::harness
