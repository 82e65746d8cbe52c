#include "actfx/lexicon.hpp"

namespace actfx::lexicon {

namespace {

struct Entry {
  Family family;
  int value;
  std::vector<std::string> words;    // canonical first
  std::vector<std::string> plurals;  // shape nouns only
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {Family::ShapeF, 0, {"cube", "block"}, {"cubes", "blocks"}},
      {Family::ShapeF, 1, {"sphere", "ball"}, {"spheres", "balls"}},
      {Family::ShapeF, 2, {"cylinder"}, {"cylinders"}},
      {Family::SizeF, 0, {"small", "tiny"}, {}},
      {Family::SizeF, 1, {"big", "large"}, {}},
      {Family::MaterialF, 0, {"metal", "metallic", "shiny"}, {}},
      {Family::MaterialF, 1, {"rubber", "matte"}, {}},
      {Family::ColorF, 0, {"red"}, {}},
      {Family::ColorF, 1, {"green"}, {}},
      {Family::ColorF, 2, {"gray", "grey"}, {}},
      {Family::ColorF, 3, {"blue"}, {}},
      {Family::ColorF, 4, {"brown"}, {}},
      {Family::ColorF, 5, {"yellow"}, {}},
      {Family::ColorF, 6, {"purple"}, {}},
      {Family::ColorF, 7, {"cyan"}, {}},
  };
  return table;
}

}  // namespace

std::optional<AttrWord> attribute_word(std::string_view w) {
  for (const auto& e : entries()) {
    for (const auto& s : e.words) {
      if (s == w) return AttrWord{e.family, e.value, false};
    }
    for (const auto& s : e.plurals) {
      if (s == w) return AttrWord{e.family, e.value, true};
    }
  }
  return std::nullopt;
}

const std::vector<std::string>& surface_words(Family family, int value) {
  for (const auto& e : entries()) {
    if (e.family == family && e.value == value) return e.words;
  }
  static const std::vector<std::string> empty;
  return empty;
}

const std::vector<std::string>& plural_words(Family family, int value) {
  for (const auto& e : entries()) {
    if (e.family == family && e.value == value) return e.plurals;
  }
  static const std::vector<std::string> empty;
  return empty;
}

bool is_wildcard_noun(std::string_view w, bool* plural) {
  if (w == "thing" || w == "object") {
    if (plural) *plural = false;
    return true;
  }
  if (w == "things" || w == "objects") {
    if (plural) *plural = true;
    return true;
  }
  return false;
}

std::optional<Family> family_name_word(std::string_view w) {
  if (w == "shape") return Family::ShapeF;
  if (w == "size") return Family::SizeF;
  if (w == "material") return Family::MaterialF;
  if (w == "color") return Family::ColorF;
  return std::nullopt;
}

std::string_view family_name(Family f) {
  switch (f) {
    case Family::ShapeF: return "shape";
    case Family::SizeF: return "size";
    case Family::MaterialF: return "material";
    case Family::ColorF: return "color";
  }
  return "";
}

std::vector<std::string> all_words() {
  std::vector<std::string> out;
  for (const auto& e : entries()) {
    out.insert(out.end(), e.words.begin(), e.words.end());
    out.insert(out.end(), e.plurals.begin(), e.plurals.end());
  }
  out.insert(out.end(), {"thing", "things", "object", "objects", "shape",
                         "size", "material", "color"});
  return out;
}

std::string canonical_word(Family family, int value) {
  return surface_words(family, value).front();
}

}  // namespace actfx::lexicon
