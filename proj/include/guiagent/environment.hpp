#pragma once

#include "guiagent/ui_model.hpp"

#include <string>
#include <string_view>
#include <variant>

namespace guiagent {

enum class Modifier { ctrl };

/// Atomic input events understood by an environment.
namespace prim {
struct MouseMove {
    int x, y;
    bool operator==(const MouseMove&) const = default;
};
struct MouseDown {
    bool operator==(const MouseDown&) const = default;
};
struct MouseUp {
    bool operator==(const MouseUp&) const = default;
};
/// A single key. With ctrl held this is a chord (ctrl+a, ctrl+c, ctrl+v).
struct Key {
    char ch;
    bool operator==(const Key&) const = default;
};
struct ModifierDown {
    Modifier modifier;
    bool operator==(const ModifierDown&) const = default;
};
struct ModifierUp {
    Modifier modifier;
    bool operator==(const ModifierUp&) const = default;
};
} // namespace prim

using Primitive = std::variant<prim::MouseMove, prim::MouseDown, prim::MouseUp, prim::Key, prim::ModifierDown,
                               prim::ModifierUp>;

std::string describe(const Primitive& p);

enum class EnvStatus { running, success, failure };

std::string_view to_string(EnvStatus status);

struct PrimitiveResult {
    bool accepted = true;
    std::string note; // empty unless the primitive was rejected or had no effect
};

/// The executor's only view of the world.
class Environment {
public:
    virtual ~Environment() = default;

    virtual PrimitiveResult apply(const Primitive& p) = 0;
    virtual Observation snapshot() const = 0;
    virtual EnvStatus status() const = 0;
    virtual const std::string& utterance() const = 0;
};

} // namespace guiagent
