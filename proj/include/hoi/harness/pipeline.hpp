#pragma once

#include "hoi/harness/metrics.hpp"
#include "hoi/harness/scenario.hpp"
#include "hoi/mpm/network.hpp"

#include <cstdint>
#include <filesystem>

namespace hoi::harness {

struct WireStats {
    std::uint64_t pose_messages = 0;
    std::uint64_t command_messages = 0;
    std::uint64_t state_messages = 0;
    std::uint64_t gate_messages = 0;
    std::uint64_t protocol_errors = 0;
};

struct ScenarioRun {
    RunTraces traces;
    MetricsReport report;
    WireStats wire;
};

/// Run the full pipeline on the simulated clock: scripted hand poses are
/// streamed at the pose rate, smoothed, windowed (stride 1), classified,
/// gated and fed to the primitive state machine, whose teleop steps or
/// cooperation commands drive the 500 Hz servo loop. Poses, commands, gate
/// decisions and arm state travel over loopback wire links. Within a tick the
/// producer runs first, then recognition and control, then the servo, so a
/// run is a pure function of its inputs.
ScenarioRun run_scenario(const mpm::MpmNetwork& network, const ScenarioScript& script);

/// Writes the traces, scenario.json, metrics.txt and latency.csv.
void save_run(const std::filesystem::path& dir, const ScenarioScript& script, const ScenarioRun& run);

} // namespace hoi::harness
