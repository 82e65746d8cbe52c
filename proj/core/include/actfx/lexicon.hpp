#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "actfx/scene.hpp"

namespace actfx {

/// Shared surface-word tables: the generator realizes attribute values as
/// words (with synonyms), the question front-end inverts them.
namespace lexicon {

enum class Family { ShapeF, SizeF, MaterialF, ColorF };

struct AttrWord {
  Family family;
  int value;  // enum index within the family
  bool plural = false;
};

/// Maps any surface word ("shiny", "balls", "grey", ...) to its attribute.
std::optional<AttrWord> attribute_word(std::string_view w);

/// Synonyms for one attribute value, canonical spelling first.
const std::vector<std::string>& surface_words(Family family, int value);

/// Plural forms aligned with surface_words; only shape nouns have them.
const std::vector<std::string>& plural_words(Family family, int value);

/// "thing"/"object" noun wildcards (any shape).
bool is_wildcard_noun(std::string_view w, bool* plural = nullptr);

/// "shape"/"size"/"material"/"color" attribute-name words.
std::optional<Family> family_name_word(std::string_view w);
std::string_view family_name(Family f);

/// Every surface word the lexicon can produce (for vocabulary building).
std::vector<std::string> all_words();

std::string canonical_word(Family family, int value);

}  // namespace lexicon
}  // namespace actfx
