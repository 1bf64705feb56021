#include "hoi/wire/transport.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <mutex>

namespace hoi::wire {

namespace {

struct Link {
    std::mutex mutex;
    std::condition_variable ready;
    std::deque<std::uint8_t> to_first;
    std::deque<std::uint8_t> to_second;
    bool closed = false;
};

class LoopbackEnd final : public Transport {
public:
    LoopbackEnd(std::shared_ptr<Link> link, bool first) : link_(std::move(link)), first_(first) {}
    ~LoopbackEnd() override { close(); }

    void send(std::span<const std::uint8_t> bytes) override
    {
        {
            std::lock_guard lock(link_->mutex);
            if (link_->closed)
                throw TransportClosed("loopback link closed");
            auto& out = first_ ? link_->to_second : link_->to_first;
            out.insert(out.end(), bytes.begin(), bytes.end());
        }
        link_->ready.notify_all();
    }

    std::size_t receive(std::span<std::uint8_t> buffer, std::chrono::milliseconds timeout) override
    {
        std::unique_lock lock(link_->mutex);
        auto& in = first_ ? link_->to_first : link_->to_second;
        link_->ready.wait_for(lock, timeout, [&] { return !in.empty() || link_->closed; });
        if (in.empty()) {
            if (link_->closed)
                throw TransportClosed("loopback link closed");
            return 0;
        }
        const std::size_t n = std::min(buffer.size(), in.size());
        std::copy_n(in.begin(), n, buffer.begin());
        in.erase(in.begin(), in.begin() + std::ptrdiff_t(n));
        return n;
    }

    void close() override
    {
        {
            std::lock_guard lock(link_->mutex);
            link_->closed = true;
        }
        link_->ready.notify_all();
    }

    bool closed() const override
    {
        std::lock_guard lock(link_->mutex);
        return link_->closed;
    }

private:
    std::shared_ptr<Link> link_;
    bool first_;
};

} // namespace

std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_loopback_pair()
{
    auto link = std::make_shared<Link>();
    return {std::make_unique<LoopbackEnd>(link, true), std::make_unique<LoopbackEnd>(link, false)};
}

} // namespace hoi::wire
