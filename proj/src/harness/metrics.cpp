#include "hoi/harness/metrics.hpp"

#include "hoi/common/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace hoi::harness {

namespace {

constexpr const char* kHandHeader
    = "time,segment,gesture,tip_x,tip_y,tip_z,xh_x,xh_y,xh_z,yh_x,yh_y,yh_z,zh_x,zh_y,zh_z,active_gap";
constexpr const char* kEventHeader = "time_us,kind,label,id,value";

const char* const kPhaseOrder[] = {"pick", "teleop", "cooperation", "aligned", "released", "done"};

int phase_rank(const std::string& name)
{
    for (int i = 0; i < 6; ++i)
        if (name == kPhaseOrder[i])
            return i;
    return -1;
}

std::optional<double> phase_time(const MetricsReport& r, const std::string& name)
{
    for (const auto& [n, t] : r.phases)
        if (n == name)
            return t;
    return std::nullopt;
}

/// Index of the last TCP entry at or before `time_us`.
std::optional<std::size_t> tcp_at(const std::vector<arm::TraceEntry>& tcp, std::int64_t time_us)
{
    auto it = std::upper_bound(tcp.begin(), tcp.end(), time_us,
                               [](std::int64_t t, const arm::TraceEntry& e) { return t < e.time_us; });
    if (it == tcp.begin())
        return std::nullopt;
    return std::size_t(std::prev(it) - tcp.begin());
}

posekit::HandFrame frame_of(const HandSample& s)
{
    return {s.tip, s.axes};
}

align::ObjectFrame object_of(const arm::TraceEntry& e)
{
    return {e.pose.position, e.pose.orientation.toRotationMatrix()};
}

std::runtime_error csv_error(const std::string& file, const std::string& what)
{
    return std::runtime_error(file + ": " + what);
}

} // namespace

MetricsReport compute_metrics(const RunTraces& tr)
{
    MetricsReport r;
    if (!tr.tcp.empty())
        r.duration = double(tr.tcp.back().time_us + arm::kServoPeriodUs) * 1e-6;

    std::map<std::uint64_t, std::int64_t> first_active;
    bool stopped = false;
    for (const auto& e : tr.tcp) {
        if (e.command_id != 0)
            first_active.emplace(e.command_id, e.time_us);
        if (e.safety_stop && !stopped)
            ++r.safety_stops;
        stopped = e.safety_stop;
    }

    std::map<std::string, ReleaseState> measured;
    for (const auto& ev : tr.events) {
        if (ev.kind == "phase") {
            r.phases.emplace_back(ev.label, double(ev.time_us) * 1e-6);
        } else if (ev.kind == "confirm") {
            ++r.confirmations[ev.label];
        } else if (ev.kind == "timeout") {
            r.timed_out = true;
        } else if (ev.kind == "tracking_loss") {
            ++r.tracking_losses;
        } else if (ev.kind == "release") {
            ReleaseState& m = r.release_measured ? *r.release_measured : r.release_measured.emplace();
            if (ev.label == "axial") m.axial_mm = ev.value * 1e3;
            else if (ev.label == "radial") m.radial_mm = ev.value * 1e3;
            else if (ev.label == "alpha") m.alpha_deviation = ev.value;
            else if (ev.label == "beta") m.beta_deviation = ev.value;
        }
    }

    int last_rank = -1;
    double last_time = -1.0;
    for (const auto& [name, t] : r.phases) {
        const int rank = phase_rank(name);
        if (rank <= last_rank || t <= last_time)
            r.phase_order_ok = false;
        last_rank = std::max(last_rank, rank);
        last_time = t;
    }
    r.reached_cooperation = phase_time(r, "cooperation").has_value();
    r.released = phase_time(r, "released").has_value();
    r.incomplete = !tr.hand.empty() && !r.released;

    // Command-to-action latency of each gesture that commands an action: the
    // first command it caused, up to the next onset of the same gesture.
    for (std::size_t i = 0; i < tr.events.size(); ++i) {
        const Event& onset = tr.events[i];
        if (onset.kind != "onset" || onset.value != 1.0)
            continue;
        std::optional<std::uint64_t> command;
        for (std::size_t j = i + 1; j < tr.events.size() && !command; ++j) {
            const Event& e = tr.events[j];
            if (e.kind == "onset" && e.label == onset.label)
                break;
            if (e.kind == "command" && e.label == onset.label)
                command = e.id;
        }
        const auto active = command ? first_active.find(*command) : first_active.end();
        if (active == first_active.end()) {
            ++r.missed_gestures;
            continue;
        }
        GestureLatency g;
        g.gesture = onset.label;
        g.onset = double(onset.time_us) * 1e-6;
        g.action = double(active->second) * 1e-6;
        g.latency = double(active->second - onset.time_us) * 1e-6;
        r.latencies.push_back(g);
    }

    // Tracking error against the true hand, from the first aligned frame
    // until release.
    const auto aligned = phase_time(r, "aligned");
    const auto released = phase_time(r, "released");
    double sum_t = 0.0, sum_r = 0.0;
    for (const auto& s : tr.hand) {
        const double t = double(s.time_us) * 1e-6;
        if (!aligned || t < *aligned || (released && t >= *released) || !s.active_gap)
            continue;
        const auto k = tcp_at(tr.tcp, s.time_us);
        if (!k)
            continue;
        const auto& tcp = tr.tcp[*k];
        const posekit::HandFrame hand = frame_of(s);
        const Vec3d desired = hand.origin + *s.active_gap * hand.y();
        const double et = (tcp.pose.position - desired).norm() * 1e3;
        const double er = rad2deg(align::alignment_error(object_of(tcp), hand).rotation);
        r.max_translation_error_mm = std::max(r.max_translation_error_mm, et);
        r.max_rotation_error_deg = std::max(r.max_rotation_error_deg, er);
        sum_t += et;
        sum_r += er;
        ++r.tracking_samples;
    }
    if (r.tracking_samples > 0) {
        r.mean_translation_error_mm = sum_t / double(r.tracking_samples);
        r.mean_rotation_error_deg = sum_r / double(r.tracking_samples);
    }

    if (released) {
        const std::int64_t release_us = std::llround(*released * 1e6);
        auto s = std::find_if(tr.hand.begin(), tr.hand.end(), [&](const HandSample& h) { return h.time_us == release_us; });
        const auto k = tcp_at(tr.tcp, release_us);
        if (s != tr.hand.end() && k) {
            const align::AlignmentError e = align::alignment_error(object_of(tr.tcp[*k]), frame_of(*s));
            r.release_true = ReleaseState{e.axial * 1e3, e.radial() * 1e3, std::abs(e.alpha - kPi), std::abs(e.beta)};
        }
    }
    return r;
}

std::vector<std::string> check_thresholds(const MetricsReport& r, const Thresholds& t)
{
    std::vector<std::string> failed;
    if (t.max_latency) {
        if (r.missed_gestures > 0)
            failed.push_back("gestures without action: " + std::to_string(r.missed_gestures));
        for (const auto& g : r.latencies)
            if (g.latency > *t.max_latency)
                failed.push_back("latency of " + g.gesture + " at " + format_double(g.onset) + " s is "
                                 + format_double(g.latency) + " s");
    }
    if (t.max_translation_error_mm || t.max_rotation_error_deg) {
        if (r.tracking_samples == 0)
            failed.push_back("no tracking samples");
        if (t.max_translation_error_mm && r.max_translation_error_mm > *t.max_translation_error_mm)
            failed.push_back("translation error " + format_double(r.max_translation_error_mm) + " mm");
        if (t.max_rotation_error_deg && r.max_rotation_error_deg > *t.max_rotation_error_deg)
            failed.push_back("rotation error " + format_double(r.max_rotation_error_deg) + " deg");
    }
    if (t.require_release) {
        if (!r.released)
            failed.push_back("object not released");
        if (!r.phase_order_ok)
            failed.push_back("phases out of order");
        for (const char* phase : {"pick", "teleop", "cooperation", "aligned", "released"})
            if (!phase_time(r, phase))
                failed.push_back(std::string("missing phase ") + phase);
        if (r.safety_stops > 0)
            failed.push_back("safety stops: " + std::to_string(r.safety_stops));
    }
    // The release decision is taken on the sensed hand, so that is the state
    // held to the thresholds; the true state is reported alongside.
    if (const auto& rel = r.release_measured) {
        if (t.max_release_gap_mm && rel->axial_mm > *t.max_release_gap_mm)
            failed.push_back("release gap " + format_double(rel->axial_mm) + " mm");
        if (t.max_release_angle && std::max(rel->alpha_deviation, rel->beta_deviation) > *t.max_release_angle)
            failed.push_back("release angle outside tolerance");
    }
    if ((t.max_release_gap_mm || t.max_release_angle) && !r.release_measured)
        failed.push_back("no release to check");
    return failed;
}

void write_metrics(std::ostream& out, const MetricsReport& r)
{
    out << std::fixed << std::setprecision(6);
    out << "duration_s " << r.duration << '\n';
    out << "gestures_with_latency " << r.latencies.size() << '\n';
    out << "missed_gestures " << r.missed_gestures << '\n';
    double max_latency = 0.0, mean_latency = 0.0;
    for (const auto& g : r.latencies) {
        max_latency = std::max(max_latency, g.latency);
        mean_latency += g.latency;
    }
    if (!r.latencies.empty())
        mean_latency /= double(r.latencies.size());
    out << "max_latency_s " << max_latency << '\n';
    out << "mean_latency_s " << mean_latency << '\n';
    out << "tracking_samples " << r.tracking_samples << '\n';
    out << "max_translation_error_mm " << r.max_translation_error_mm << '\n';
    out << "mean_translation_error_mm " << r.mean_translation_error_mm << '\n';
    out << "max_rotation_error_deg " << r.max_rotation_error_deg << '\n';
    out << "mean_rotation_error_deg " << r.mean_rotation_error_deg << '\n';
    for (const auto& [name, t] : r.phases)
        out << "phase_" << name << "_s " << t << '\n';
    out << "phase_order_ok " << r.phase_order_ok << '\n';
    for (const auto& [name, n] : r.confirmations)
        out << "confirmations_" << name << ' ' << n << '\n';
    out << "reached_cooperation " << r.reached_cooperation << '\n';
    out << "released " << r.released << '\n';
    out << "incomplete " << r.incomplete << '\n';
    for (const auto* rel : {&r.release_measured, &r.release_true}) {
        if (!*rel)
            continue;
        const char* which = rel == &r.release_measured ? "measured" : "true";
        out << "release_" << which << "_gap_mm " << (*rel)->axial_mm << '\n';
        out << "release_" << which << "_radial_mm " << (*rel)->radial_mm << '\n';
        out << "release_" << which << "_alpha_deviation_deg " << rad2deg((*rel)->alpha_deviation) << '\n';
        out << "release_" << which << "_beta_deviation_deg " << rad2deg((*rel)->beta_deviation) << '\n';
    }
    out << "safety_stops " << r.safety_stops << '\n';
    out << "tracking_losses " << r.tracking_losses << '\n';
    out << "timed_out " << r.timed_out << '\n';
}

void write_latency_csv(std::ostream& out, const MetricsReport& r)
{
    out << "gesture,onset,action,latency\n";
    for (const auto& g : r.latencies)
        out << g.gesture << ',' << format_double(g.onset) << ',' << format_double(g.action) << ','
            << format_double(g.latency) << '\n';
}

void write_hand_csv(std::ostream& out, const std::vector<HandSample>& hand)
{
    out << kHandHeader << '\n';
    for (const auto& s : hand) {
        std::string line = std::to_string(s.time_us) + ',' + std::to_string(s.segment) + ','
                           + std::string(dataset::class_name(s.gesture));
        for (int i = 0; i < 3; ++i)
            line += ',' + format_double(s.tip(i));
        for (int c = 0; c < 3; ++c)
            for (int i = 0; i < 3; ++i)
                line += ',' + format_double(s.axes(i, c));
        line += ',';
        if (s.active_gap)
            line += format_double(*s.active_gap);
        out << line << '\n';
    }
}

std::vector<HandSample> read_hand_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != kHandHeader)
        throw csv_error("hand trace", "missing header");
    std::vector<HandSample> hand;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto f = split(line, ',');
        if (f.size() != 16)
            throw csv_error("hand trace", "expected 16 fields");
        HandSample s;
        s.time_us = std::stoll(std::string(f[0]));
        s.segment = std::stoul(std::string(f[1]));
        s.gesture = dataset::parse_class(f[2]);
        for (int i = 0; i < 3; ++i)
            s.tip(i) = parse_double(f[3 + std::size_t(i)]);
        for (int c = 0; c < 3; ++c)
            for (int i = 0; i < 3; ++i)
                s.axes(i, c) = parse_double(f[6 + std::size_t(3 * c + i)]);
        if (!f[15].empty())
            s.active_gap = parse_double(f[15]);
        hand.push_back(s);
    }
    return hand;
}

void write_events_csv(std::ostream& out, const std::vector<Event>& events)
{
    out << kEventHeader << '\n';
    for (const auto& e : events)
        out << e.time_us << ',' << e.kind << ',' << e.label << ',' << e.id << ',' << format_double(e.value) << '\n';
}

std::vector<Event> read_events_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != kEventHeader)
        throw csv_error("events", "missing header");
    std::vector<Event> events;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto f = split(line, ',');
        if (f.size() != 5)
            throw csv_error("events", "expected 5 fields");
        events.push_back({std::stoll(std::string(f[0])), std::string(f[1]), std::string(f[2]),
                          std::stoull(std::string(f[3])), parse_double(f[4])});
    }
    return events;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read " + path.string());
    return in;
}

} // namespace

void save_traces(const std::filesystem::path& dir, const RunTraces& traces)
{
    std::filesystem::create_directories(dir);
    auto tcp = open_out(dir / "tcp_trace.csv");
    arm::write_trace_csv(tcp, traces.tcp);
    auto hand = open_out(dir / "hand_trace.csv");
    write_hand_csv(hand, traces.hand);
    auto events = open_out(dir / "events.csv");
    write_events_csv(events, traces.events);
}

RunTraces load_traces(const std::filesystem::path& dir)
{
    RunTraces traces;
    auto tcp = open_in(dir / "tcp_trace.csv");
    traces.tcp = arm::read_trace_csv(tcp);
    auto hand = open_in(dir / "hand_trace.csv");
    traces.hand = read_hand_csv(hand);
    auto events = open_in(dir / "events.csv");
    traces.events = read_events_csv(events);
    return traces;
}

} // namespace hoi::harness
