#pragma once

#include "hoi/posekit/hand_pose.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace hoi::posekit {

/// Trajectory text format, version 1:
///
///     # hoi-trajectory v1
///     <timestamp>,<x1>,<y1>,<z1>,...,<x21>,<y21>,<z21>
///
/// One pose per line, shortest round-trip decimal encoding.
inline constexpr const char* kTrajectoryHeader = "# hoi-trajectory v1";

class TrajectoryFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void write_trajectory(std::ostream& out, std::span<const HandPose> poses);
std::vector<HandPose> read_trajectory(std::istream& in);

void save_trajectory(const std::filesystem::path& path, std::span<const HandPose> poses);
std::vector<HandPose> load_trajectory(const std::filesystem::path& path);

} // namespace hoi::posekit
