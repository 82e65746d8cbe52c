#pragma once

#include <string>
#include <string_view>

#include "actfx/program.hpp"

namespace actfx {

/// Parses the nested-call program syntax, e.g.
///   count(filter_color(filter_material(scene(),metal),red))
/// Whitespace-insensitive. Throws Error("syntax-error") with a byte offset,
/// or Error("type-error") naming the ill-typed node.
Node parse_program(std::string_view text);

/// Canonical text form; parse_program(render_program(p)) == p.
std::string render_program(const Node& program);

}  // namespace actfx
