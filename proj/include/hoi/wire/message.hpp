#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace hoi::wire {

inline constexpr std::array<std::uint8_t, 4> kMagic{'H', 'O', 'I', '1'};
inline constexpr std::size_t kHeaderSize = 17;

enum class MessageType : std::uint8_t { PoseSample = 1, ServoCommand = 2, StateReport = 3, GateDecision = 4 };

/// 21 joints x (x, y, z), joint-major, meters.
struct PoseSample {
    std::array<float, 63> joints{};
    bool operator==(const PoseSample&) const = default;
};

enum class GripperAction : std::uint8_t { Hold = 0, Open = 1, Close = 2 };

/// Target TCP pose: position (m) then axis-angle (rad).
struct ServoCommand {
    std::array<float, 6> pose{};
    GripperAction gripper = GripperAction::Hold;
    bool operator==(const ServoCommand&) const = default;
};

enum class GripperState : std::uint8_t { Open = 0, Closed = 1 };
enum class ArmStatus : std::uint8_t { Ok = 0, SafetyStop = 1 };

struct StateReport {
    std::array<float, 6> pose{};
    GripperState gripper = GripperState::Closed;
    ArmStatus status = ArmStatus::Ok;
    bool operator==(const StateReport&) const = default;
};

/// Confirmed gate output as a motion class code.
struct GateDecision {
    std::uint8_t class_code = 0;
    bool operator==(const GateDecision&) const = default;
};

inline constexpr std::uint8_t kMaxClassCode = 3;

using Payload = std::variant<PoseSample, ServoCommand, StateReport, GateDecision>;

struct WireMessage {
    std::uint64_t timestamp_us = 0;
    Payload payload;

    MessageType type() const { return MessageType(payload.index() + 1); }
    bool operator==(const WireMessage&) const = default;
};

/// Payload bytes for a message type; 0 for an unknown type.
std::uint32_t payload_size(std::uint8_t type);

class EncodeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Frame layout: magic, type, timestamp (u64 LE), payload length (u32 LE),
/// payload (float32 LE values and single bytes). Throws EncodeError for
/// non-finite floats or out-of-range enumerations.
std::vector<std::uint8_t> encode(const WireMessage& message);
void encode_into(const WireMessage& message, std::vector<std::uint8_t>& out);

struct Decoded {
    WireMessage message;
    std::size_t consumed = 0;
};

struct NeedMore {};

struct ProtocolError {
    std::size_t offset = 0; ///< offset of the offending byte within the input
    std::size_t skip = 0;   ///< bytes to drop to reach the next possible frame start
    std::string reason;
};

using DecodeResult = std::variant<Decoded, NeedMore, ProtocolError>;

/// Decode one frame from the front of `bytes`. Never reads past the
/// reported consumed length; NeedMore consumes nothing.
DecodeResult decode(std::span<const std::uint8_t> bytes);

/// Incremental decoder over a byte stream of arbitrary chunking. Malformed
/// input is skipped up to the next magic marker and reported once per
/// corrupt region (the bytes between two successfully decoded frames).
class StreamDecoder {
public:
    void feed(std::span<const std::uint8_t> bytes);

    /// Next decoded message or error, or nothing until more bytes arrive.
    std::optional<std::variant<WireMessage, ProtocolError>> next();

    std::size_t buffered() const { return buffer_.size() - head_; }
    std::uint64_t stream_offset() const { return offset_; }
    std::uint64_t errors() const { return errors_; }
    std::uint64_t skipped_bytes() const { return skipped_; }

private:
    std::vector<std::uint8_t> buffer_;
    std::size_t head_ = 0;
    std::uint64_t offset_ = 0; ///< stream position of buffer_[head_]
    std::uint64_t errors_ = 0;
    std::uint64_t skipped_ = 0;
    bool in_corrupt_region_ = false;
};

} // namespace hoi::wire
