#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hoi::dataset {

/// Motion primitives of the ring-wearing task. Codes are stable on disk and
/// on the wire.
enum class MotionClass : std::uint8_t {
    Keep = 0,
    Come = 1,
    Back = 2,
    Ring = 3,
};

inline constexpr int kDefaultClassCount = 4;
inline constexpr std::array<MotionClass, kDefaultClassCount> kAllClasses = {
    MotionClass::Keep, MotionClass::Come, MotionClass::Back, MotionClass::Ring};

class UnknownClass : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

constexpr int code(MotionClass c) { return static_cast<int>(c); }

inline MotionClass class_from_code(int code)
{
    if (code < 0 || code >= kDefaultClassCount)
        throw UnknownClass("unknown motion class code " + std::to_string(code));
    return static_cast<MotionClass>(code);
}

inline std::string_view class_name(MotionClass c)
{
    switch (c) {
    case MotionClass::Keep: return "Keep";
    case MotionClass::Come: return "Come";
    case MotionClass::Back: return "Back";
    case MotionClass::Ring: return "Ring";
    }
    throw UnknownClass("unknown motion class code " + std::to_string(static_cast<int>(c)));
}

inline MotionClass parse_class(std::string_view name)
{
    for (const auto c : kAllClasses)
        if (class_name(c) == name)
            return c;
    throw UnknownClass("unknown motion class '" + std::string(name) + "'");
}

} // namespace hoi::dataset
