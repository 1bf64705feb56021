#include "hoi/wire/transport.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>

namespace hoi::wire {

namespace {

std::runtime_error system_error(const std::string& what)
{
    return std::runtime_error(what + ": " + std::strerror(errno));
}

sockaddr_in make_address(const std::string& host, std::uint16_t port)
{
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
        throw std::invalid_argument("not an IPv4 address: " + host);
    return addr;
}

class TcpTransport final : public Transport {
public:
    explicit TcpTransport(int fd) : fd_(fd)
    {
        const int one = 1;
        ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    }
    ~TcpTransport() override
    {
        close();
        ::close(fd_);
    }

    void send(std::span<const std::uint8_t> bytes) override
    {
        std::size_t sent = 0;
        while (sent < bytes.size()) {
            if (closed_)
                throw TransportClosed("connection closed");
            const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR)
                    continue;
                closed_ = true;
                throw TransportClosed(std::string("send failed: ") + std::strerror(errno));
            }
            sent += std::size_t(n);
        }
    }

    std::size_t receive(std::span<std::uint8_t> buffer, std::chrono::milliseconds timeout) override
    {
        if (closed_)
            throw TransportClosed("connection closed");
        pollfd p{fd_, POLLIN, 0};
        const int ready = ::poll(&p, 1, int(timeout.count()));
        if (ready == 0)
            return 0;
        if (ready < 0) {
            if (errno == EINTR)
                return 0;
            throw system_error("poll");
        }
        const ssize_t n = ::recv(fd_, buffer.data(), buffer.size(), 0);
        if (n <= 0) {
            closed_ = true;
            throw TransportClosed("connection closed by peer");
        }
        return std::size_t(n);
    }

    void close() override
    {
        if (!closed_.exchange(true))
            ::shutdown(fd_, SHUT_RDWR);
    }

    bool closed() const override { return closed_; }

private:
    int fd_;
    std::atomic<bool> closed_{false};
};

} // namespace

std::unique_ptr<Transport> tcp_connect(const std::string& host, std::uint16_t port)
{
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0)
        throw system_error("socket");
    const sockaddr_in addr = make_address(host, port);
    if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
        const auto err = system_error("connect to " + host + ":" + std::to_string(port));
        ::close(fd);
        throw err;
    }
    return std::make_unique<TcpTransport>(fd);
}

TcpListener::TcpListener(std::uint16_t port, const std::string& host)
{
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0)
        throw system_error("socket");
    const int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr = make_address(host, port);
    if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd_, 4) != 0) {
        const auto err = system_error("listen on " + host + ":" + std::to_string(port));
        ::close(fd_);
        throw err;
    }
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener()
{
    ::close(fd_);
}

std::unique_ptr<Transport> TcpListener::accept(std::chrono::milliseconds timeout)
{
    pollfd p{fd_, POLLIN, 0};
    if (::poll(&p, 1, int(timeout.count())) <= 0)
        return nullptr;
    const int client = ::accept(fd_, nullptr, nullptr);
    if (client < 0)
        throw system_error("accept");
    return std::make_unique<TcpTransport>(client);
}

} // namespace hoi::wire
