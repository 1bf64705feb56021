#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

namespace hoi::wire {

class TransportClosed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reliable, ordered byte stream.
class Transport {
public:
    virtual ~Transport() = default;

    /// Queue all of `bytes`. Throws TransportClosed once either end closed.
    virtual void send(std::span<const std::uint8_t> bytes) = 0;

    /// Read up to buffer.size() bytes, waiting at most `timeout` for the
    /// first one. Returns 0 on timeout. Bytes that arrived before a close are
    /// still delivered; afterwards throws TransportClosed.
    virtual std::size_t receive(std::span<std::uint8_t> buffer, std::chrono::milliseconds timeout) = 0;

    /// Abrupt disconnect, visible to both ends.
    virtual void close() = 0;
    virtual bool closed() const = 0;
};

/// Connected in-memory pair.
std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_loopback_pair();

/// TCP client connection (IPv4).
std::unique_ptr<Transport> tcp_connect(const std::string& host, std::uint16_t port);

class TcpListener {
public:
    /// Bind and listen; port 0 picks an ephemeral port.
    explicit TcpListener(std::uint16_t port = 0, const std::string& host = "127.0.0.1");
    ~TcpListener();
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    std::uint16_t port() const { return port_; }

    /// Wait for one connection; nullptr on timeout.
    std::unique_ptr<Transport> accept(std::chrono::milliseconds timeout);

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

inline constexpr std::uint16_t kDefaultPort = 30017;

} // namespace hoi::wire
