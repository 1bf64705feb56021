#pragma once

#include "hoi/wire/message.hpp"

#include <random>

namespace hoi::testing {

/// A valid message of a random type with random field values.
inline wire::WireMessage random_message(std::mt19937_64& rng)
{
    std::uniform_real_distribution<float> value(-10.0f, 10.0f);
    std::uniform_int_distribution<int> type(1, 4);
    using namespace hoi::wire;
    WireMessage m;
    m.timestamp_us = rng();
    switch (type(rng)) {
    case 1: {
        PoseSample p;
        for (auto& v : p.joints)
            v = value(rng);
        m.payload = p;
        break;
    }
    case 2: {
        ServoCommand c;
        for (auto& v : c.pose)
            v = value(rng);
        c.gripper = GripperAction(rng() % 3);
        m.payload = c;
        break;
    }
    case 3: {
        StateReport r;
        for (auto& v : r.pose)
            v = value(rng);
        r.gripper = GripperState(rng() % 2);
        r.status = ArmStatus(rng() % 2);
        m.payload = r;
        break;
    }
    default:
        m.payload = GateDecision{std::uint8_t(rng() % 4)};
    }
    return m;
}

} // namespace hoi::testing
