#include "hoi/wire/message.hpp"

#include "hoi/common/bytes.hpp"

#include <algorithm>
#include <cmath>

namespace hoi::wire {

std::uint32_t payload_size(std::uint8_t type)
{
    switch (MessageType(type)) {
    case MessageType::PoseSample: return 63 * 4;
    case MessageType::ServoCommand: return 6 * 4 + 1;
    case MessageType::StateReport: return 6 * 4 + 2;
    case MessageType::GateDecision: return 1;
    }
    return 0;
}

namespace {

template <std::size_t N>
void put_floats(std::vector<std::uint8_t>& out, const std::array<float, N>& values)
{
    for (float v : values) {
        if (!std::isfinite(v))
            throw EncodeError("non-finite value in payload");
        put_f32(out, v);
    }
}

void put_payload(std::vector<std::uint8_t>& out, const PoseSample& p) { put_floats(out, p.joints); }

void put_payload(std::vector<std::uint8_t>& out, const ServoCommand& c)
{
    if (std::uint8_t(c.gripper) > 2)
        throw EncodeError("invalid gripper action");
    put_floats(out, c.pose);
    out.push_back(std::uint8_t(c.gripper));
}

void put_payload(std::vector<std::uint8_t>& out, const StateReport& r)
{
    if (std::uint8_t(r.gripper) > 1 || std::uint8_t(r.status) > 1)
        throw EncodeError("invalid state report field");
    put_floats(out, r.pose);
    out.push_back(std::uint8_t(r.gripper));
    out.push_back(std::uint8_t(r.status));
}

void put_payload(std::vector<std::uint8_t>& out, const GateDecision& g)
{
    if (g.class_code > kMaxClassCode)
        throw EncodeError("invalid class code");
    out.push_back(g.class_code);
}

/// First position at or after `from` where the magic could start, allowing a
/// partial match against the end of the input.
std::size_t next_magic(std::span<const std::uint8_t> bytes, std::size_t from)
{
    for (std::size_t p = from; p < bytes.size(); ++p) {
        const std::size_t n = std::min(kMagic.size(), bytes.size() - p);
        if (std::equal(kMagic.begin(), kMagic.begin() + std::ptrdiff_t(n), bytes.begin() + std::ptrdiff_t(p)))
            return p;
    }
    return bytes.size();
}

ProtocolError error_at(std::span<const std::uint8_t> bytes, std::size_t offset, std::string reason)
{
    return {offset, next_magic(bytes, 1), std::move(reason)};
}

template <std::size_t N>
bool get_floats(std::span<const std::uint8_t> in, std::size_t at, std::array<float, N>& values)
{
    for (std::size_t i = 0; i < N; ++i) {
        values[i] = get_f32(in, at + 4 * i);
        if (!std::isfinite(values[i]))
            return false;
    }
    return true;
}

} // namespace

void encode_into(const WireMessage& message, std::vector<std::uint8_t>& out)
{
    std::vector<std::uint8_t> frame;
    const auto type = std::uint8_t(message.type());
    frame.reserve(kHeaderSize + payload_size(type));
    frame.insert(frame.end(), kMagic.begin(), kMagic.end());
    frame.push_back(type);
    put_u64(frame, message.timestamp_us);
    put_u32(frame, payload_size(type));
    std::visit([&](const auto& p) { put_payload(frame, p); }, message.payload);
    out.insert(out.end(), frame.begin(), frame.end());
}

std::vector<std::uint8_t> encode(const WireMessage& message)
{
    std::vector<std::uint8_t> out;
    encode_into(message, out);
    return out;
}

DecodeResult decode(std::span<const std::uint8_t> bytes)
{
    for (std::size_t i = 0; i < std::min(kMagic.size(), bytes.size()); ++i)
        if (bytes[i] != kMagic[i])
            return error_at(bytes, i, "bad magic");
    if (bytes.size() < 5)
        return NeedMore{};
    const std::uint8_t type = bytes[4];
    const std::uint32_t expected = payload_size(type);
    if (expected == 0)
        return error_at(bytes, 4, "unknown message type " + std::to_string(type));
    if (bytes.size() < kHeaderSize)
        return NeedMore{};
    const std::uint32_t length = get_u32(bytes, 13);
    if (length != expected)
        return error_at(bytes, 13, "payload length " + std::to_string(length) + " does not match type");
    if (bytes.size() < kHeaderSize + length)
        return NeedMore{};

    WireMessage m;
    m.timestamp_us = get_u64(bytes, 5);
    const std::size_t at = kHeaderSize;
    bool ok = true;
    switch (MessageType(type)) {
    case MessageType::PoseSample: {
        PoseSample p;
        ok = get_floats(bytes, at, p.joints);
        m.payload = p;
        break;
    }
    case MessageType::ServoCommand: {
        ServoCommand c;
        ok = get_floats(bytes, at, c.pose) && bytes[at + 24] <= 2;
        c.gripper = GripperAction(bytes[at + 24]);
        m.payload = c;
        break;
    }
    case MessageType::StateReport: {
        StateReport r;
        ok = get_floats(bytes, at, r.pose) && bytes[at + 24] <= 1 && bytes[at + 25] <= 1;
        r.gripper = GripperState(bytes[at + 24]);
        r.status = ArmStatus(bytes[at + 25]);
        m.payload = r;
        break;
    }
    case MessageType::GateDecision:
        ok = bytes[at] <= kMaxClassCode;
        m.payload = GateDecision{bytes[at]};
        break;
    }
    if (!ok)
        return error_at(bytes, at, "invalid payload");
    return Decoded{std::move(m), kHeaderSize + length};
}

void StreamDecoder::feed(std::span<const std::uint8_t> bytes)
{
    if (head_ > 0 && head_ * 2 >= buffer_.size()) {
        buffer_.erase(buffer_.begin(), buffer_.begin() + std::ptrdiff_t(head_));
        head_ = 0;
    }
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<std::variant<WireMessage, ProtocolError>> StreamDecoder::next()
{
    while (head_ < buffer_.size()) {
        const std::span<const std::uint8_t> pending(buffer_.data() + head_, buffer_.size() - head_);
        DecodeResult r = decode(pending);
        if (auto* d = std::get_if<Decoded>(&r)) {
            head_ += d->consumed;
            offset_ += d->consumed;
            in_corrupt_region_ = false;
            return std::move(d->message);
        }
        auto* e = std::get_if<ProtocolError>(&r);
        if (!e)
            return std::nullopt;
        ProtocolError out = *e;
        out.offset += offset_;
        head_ += e->skip;
        offset_ += e->skip;
        skipped_ += e->skip;
        if (!in_corrupt_region_) {
            in_corrupt_region_ = true;
            ++errors_;
            return out;
        }
    }
    return std::nullopt;
}

} // namespace hoi::wire
