#pragma once

#include "actfx/program.hpp"
#include "actfx/scene.hpp"

namespace actfx {

/// Denotational question semantics over an immutable scene.
/// Throws Error("non-unique") when unique() sees a set of size != 1,
/// Error("type-error") when p is not a question program.
Answer exec_question(const Node& p, const Scene& s);

/// Applies an action program, returning a fresh canonicalized scene; the
/// input is never mutated. Throws Error("non-unique-anchor") when a
/// placement anchor resolves to != 1 object and Error("capacity") when an
/// add would exceed the object cap. Empty target sets are no-ops.
Scene exec_action(const Node& p, const Scene& s);

}  // namespace actfx
