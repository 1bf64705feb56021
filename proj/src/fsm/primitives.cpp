#include "hoi/fsm/primitives.hpp"

#include "hoi/common/text.hpp"

#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

namespace hoi::fsm {

void PrimitiveRegistry::add(const PrimitiveBinding& binding)
{
    const bool carries_displacement = std::holds_alternative<Displacement>(binding.action);
    if (binding.level == Level::Low && !carries_displacement)
        throw RegistryError("low-level binding must carry a displacement");
    if (binding.level == Level::High && carries_displacement)
        throw RegistryError("high-level binding must carry a directive");
    if (!bindings_.emplace(binding.motion, binding).second)
        throw RegistryError("class " + std::string(dataset::class_name(binding.motion)) + " bound twice");
}

const PrimitiveBinding& PrimitiveRegistry::lookup(MotionClass motion) const
{
    const auto it = bindings_.find(motion);
    if (it == bindings_.end())
        throw UnregisteredClass("no primitive bound to class code " + std::to_string(dataset::code(motion)));
    return it->second;
}

PrimitiveRegistry default_bindings(double step)
{
    PrimitiveRegistry r;
    r.add({MotionClass::Keep, Level::Low, Displacement{}});
    r.add({MotionClass::Come, Level::Low, Displacement{Vec3d(0, step, 0), Vec3d::Zero()}});
    r.add({MotionClass::Back, Level::Low, Displacement{Vec3d(0, -step, 0), Vec3d::Zero()}});
    r.add({MotionClass::Ring, Level::High, Directive::EnterCooperation});
    return r;
}

PrimitiveRegistry read_registry(std::istream& in)
{
    PrimitiveRegistry r;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream fields(line);
        std::vector<std::string> tok;
        for (std::string t; fields >> t;)
            tok.push_back(t);
        if (tok.empty())
            continue;
        const auto where = "registry line " + std::to_string(line_no) + ": ";
        if (tok.size() < 3)
            throw RegistryError(where + "expected '<class> <level> <action>'");

        PrimitiveBinding b;
        try {
            b.motion = dataset::parse_class(tok[0]);
        } catch (const dataset::UnknownClass& e) {
            throw RegistryError(where + e.what());
        }
        if (tok[1] == "low") {
            if (tok.size() != 8)
                throw RegistryError(where + "low-level binding needs six numbers");
            Displacement d;
            try {
                for (int i = 0; i < 3; ++i) {
                    d.translation(i) = parse_double(tok[std::size_t(2 + i)]);
                    d.rotation(i) = parse_double(tok[std::size_t(5 + i)]);
                }
            } catch (const std::invalid_argument& e) {
                throw RegistryError(where + e.what());
            }
            b.level = Level::Low;
            b.action = d;
        } else if (tok[1] == "high") {
            if (tok.size() != 3 || tok[2] != "enter_cooperation")
                throw RegistryError(where + "unknown directive");
            b.level = Level::High;
            b.action = Directive::EnterCooperation;
        } else {
            throw RegistryError(where + "level must be 'low' or 'high'");
        }
        try {
            r.add(b);
        } catch (const RegistryError& e) {
            throw RegistryError(where + e.what());
        }
    }
    return r;
}

PrimitiveRegistry load_registry(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw RegistryError("cannot open registry file " + path.string());
    return read_registry(in);
}

std::string_view mode_name(ControllerMode mode)
{
    switch (mode) {
    case ControllerMode::Teleop: return "teleop";
    case ControllerMode::Cooperation: return "cooperation";
    case ControllerMode::Done: return "done";
    }
    return "unknown";
}

FsmStep step_fsm(ControllerMode mode, std::optional<MotionClass> confirmed, const PrimitiveRegistry& registry)
{
    if (!confirmed)
        return {mode, std::nullopt};
    const PrimitiveBinding& binding = registry.lookup(*confirmed);
    if (mode != ControllerMode::Teleop)
        return {mode, std::nullopt};

    if (const auto* d = std::get_if<Displacement>(&binding.action))
        return {ControllerMode::Teleop, *d};
    switch (std::get<Directive>(binding.action)) {
    case Directive::EnterCooperation: return {ControllerMode::Cooperation, std::nullopt};
    }
    return {mode, std::nullopt};
}

ControllerMode finish_cooperation(ControllerMode mode)
{
    return mode == ControllerMode::Cooperation ? ControllerMode::Done : mode;
}

} // namespace hoi::fsm
