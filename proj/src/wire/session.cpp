#include "hoi/wire/session.hpp"

namespace hoi::wire {

void ProducerSession::send(const WireMessage& message)
{
    scratch_.clear();
    encode_into(message, scratch_);
    try {
        transport_.send(scratch_);
    } catch (const TransportClosed& e) {
        throw SessionClosed(e.what());
    }
    ++sent_;
}

ConsumerSession::ConsumerSession(Transport& transport, Clock clock_us, std::size_t log_capacity)
    : transport_(transport), clock_(std::move(clock_us)), capacity_(log_capacity)
{
    if (capacity_ == 0)
        throw std::invalid_argument("log capacity must be positive");
}

std::size_t ConsumerSession::pump(std::chrono::milliseconds timeout)
{
    std::size_t count = 0;
    std::array<std::uint8_t, 4096> buffer;
    while (!closed_ && log_size() < capacity_) {
        // Decode what is buffered before reading more, one message at a time,
        // so the log bound is respected.
        if (auto item = decoder_.next()) {
            if (auto* m = std::get_if<WireMessage>(&*item)) {
                const std::uint64_t now = clock_();
                const std::uint64_t latency = now > m->timestamp_us ? now - m->timestamp_us : 0;
                latest_[std::size_t(m->type()) - 1].publish(*m);
                {
                    std::lock_guard lock(log_mutex_);
                    log_.push_back({*m, now, latency});
                }
                ++delivered_;
                ++count;
            } else {
                errors_.push_back(std::get<ProtocolError>(*item));
            }
            continue;
        }
        std::size_t n = 0;
        try {
            n = transport_.receive(buffer, timeout);
        } catch (const TransportClosed&) {
            closed_ = true;
            break;
        }
        if (n == 0)
            break;
        decoder_.feed(std::span<const std::uint8_t>(buffer.data(), n));
        timeout = std::chrono::milliseconds(0);
    }
    return count;
}

std::optional<WireMessage> ConsumerSession::latest(MessageType type)
{
    return latest_[std::size_t(type) - 1].take();
}

std::vector<Delivery> ConsumerSession::drain_log()
{
    std::lock_guard lock(log_mutex_);
    std::vector<Delivery> out(log_.begin(), log_.end());
    log_.clear();
    return out;
}

std::size_t ConsumerSession::log_size() const
{
    std::lock_guard lock(log_mutex_);
    return log_.size();
}

} // namespace hoi::wire
