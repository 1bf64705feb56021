#pragma once

#include "hoi/common/geometry.hpp"
#include "hoi/dataset/motion_class.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <variant>

namespace hoi::fsm {

using dataset::MotionClass;

enum class Level { Low, High };

/// Incremental TCP motion in the base frame.
struct Displacement {
    Vec3d translation = Vec3d::Zero(); ///< m
    Vec3d rotation = Vec3d::Zero();    ///< axis-angle, rad

    bool is_zero() const { return translation.isZero(0.0) && rotation.isZero(0.0); }
    bool operator==(const Displacement&) const = default;
};

enum class Directive { EnterCooperation };

struct PrimitiveBinding {
    MotionClass motion = MotionClass::Keep;
    Level level = Level::Low;
    std::variant<Displacement, Directive> action;
};

class UnregisteredClass : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class RegistryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One binding per class; low-level bindings carry displacements and
/// high-level bindings carry directives.
class PrimitiveRegistry {
public:
    void add(const PrimitiveBinding& binding);
    const PrimitiveBinding& lookup(MotionClass motion) const;
    bool contains(MotionClass motion) const { return bindings_.contains(motion); }
    std::size_t size() const { return bindings_.size(); }

private:
    std::map<MotionClass, PrimitiveBinding> bindings_;
};

inline constexpr double kDefaultStep = 0.020; ///< m per confirmed Come/Back

/// Keep holds, Come steps +y toward the operator, Back steps -y, Ring enters
/// cooperation.
PrimitiveRegistry default_bindings(double step = kDefaultStep);

/// Text configuration, one binding per line, `#` comments:
///
///     Come low  0 0.02 0  0 0 0     # dx dy dz  rx ry rz
///     Ring high enter_cooperation
PrimitiveRegistry read_registry(std::istream& in);
PrimitiveRegistry load_registry(const std::filesystem::path& path);

enum class ControllerMode { Teleop = 0, Cooperation = 1, Done = 2 };

std::string_view mode_name(ControllerMode mode);

struct FsmStep {
    ControllerMode mode = ControllerMode::Teleop;
    std::optional<Displacement> action;
};

/// Advance the two-mode state machine by one gate output. Teleop emits the
/// registry displacement of a confirmed low-level class; a confirmed
/// EnterCooperation directive switches mode without an action. Cooperation
/// and Done ignore classifications.
FsmStep step_fsm(ControllerMode mode, std::optional<MotionClass> confirmed, const PrimitiveRegistry& registry);

/// Cooperation -> Done once the object has been released.
ControllerMode finish_cooperation(ControllerMode mode);

} // namespace hoi::fsm
