#pragma once

#include "hoi/common/mailbox.hpp"
#include "hoi/wire/message.hpp"
#include "hoi/wire/transport.hpp"

#include <array>
#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <vector>

namespace hoi::wire {

class SessionClosed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ProducerSession {
public:
    explicit ProducerSession(Transport& transport) : transport_(transport) {}

    /// Encode and send one message; throws SessionClosed after a disconnect.
    void send(const WireMessage& message);

    void close() { transport_.close(); }
    bool closed() const { return transport_.closed(); }
    std::uint64_t sent() const { return sent_; }

private:
    Transport& transport_;
    std::vector<std::uint8_t> scratch_;
    std::uint64_t sent_ = 0;
};

struct Delivery {
    WireMessage message;
    std::uint64_t delivered_us = 0;
    std::uint64_t latency_us = 0; ///< delivery time minus message timestamp, floored at 0
};

/// Receiving end of a stream. `pump` is called by the owning context;
/// `latest` may be read from any context. Every decoded message is kept in
/// the ordered log until drained; when the log is full, pump stops reading
/// and the transport buffers, so nothing is dropped.
class ConsumerSession {
public:
    using Clock = std::function<std::uint64_t()>;

    ConsumerSession(Transport& transport, Clock clock_us, std::size_t log_capacity = std::size_t(1) << 20);

    /// Read and decode what is available, waiting up to `timeout` for the
    /// first bytes. Returns the number of messages delivered.
    std::size_t pump(std::chrono::milliseconds timeout = std::chrono::milliseconds(0));

    /// Newest message of a type not yet taken; older ones are skipped.
    std::optional<WireMessage> latest(MessageType type);

    std::vector<Delivery> drain_log();
    std::size_t log_size() const;

    bool closed() const { return closed_; }
    std::uint64_t delivered() const { return delivered_; }
    std::uint64_t protocol_errors() const { return decoder_.errors(); }
    const std::vector<ProtocolError>& errors() const { return errors_; }

private:
    Transport& transport_;
    Clock clock_;
    std::size_t capacity_;
    StreamDecoder decoder_;
    std::array<LatestMailbox<WireMessage>, 4> latest_;
    mutable std::mutex log_mutex_;
    std::deque<Delivery> log_;
    std::vector<ProtocolError> errors_;
    std::uint64_t delivered_ = 0;
    bool closed_ = false;
};

} // namespace hoi::wire
