#pragma once

#include "hoi/mpm/network.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

namespace hoi::mpm {

/// Checkpoint layout (all integers u32, all reals f64, little-endian):
///
///     "HOIM" | version | input | hidden | layers | classes | parameter count
///     | input mean[input] | input scale[input] | parameters[count]
///
/// Parameters follow ParameterLayout order.
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> serialize(const MpmNetwork& network);
MpmNetwork deserialize(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const MpmNetwork& network);
MpmNetwork load_checkpoint(const std::filesystem::path& path);

} // namespace hoi::mpm
