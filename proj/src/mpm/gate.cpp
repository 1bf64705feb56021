#include "hoi/mpm/gate.hpp"

#include <algorithm>
#include <stdexcept>

namespace hoi::mpm {

StabilityGate::StabilityGate(std::size_t length) : length_(length)
{
    if (length_ == 0)
        throw std::invalid_argument("gate length must be >= 1");
}

std::optional<int> StabilityGate::push(int decision)
{
    if (decision < 0)
        throw std::invalid_argument("gate decision must be a class code");
    queue_.push_back(decision);
    if (queue_.size() > length_)
        queue_.pop_front();
    if (queue_.size() < length_)
        return std::nullopt;
    const bool uniform = std::all_of(queue_.begin(), queue_.end(), [&](int d) { return d == queue_.front(); });
    if (!uniform)
        return std::nullopt;
    return queue_.front();
}

} // namespace hoi::mpm
