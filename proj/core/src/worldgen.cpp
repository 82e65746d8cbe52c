#include "actfx/worldgen.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "actfx/error.hpp"
#include "actfx/executor.hpp"
#include "actfx/lexicon.hpp"
#include "actfx/parser.hpp"
#include "json.hpp"
#include "ref_desc.hpp"

namespace actfx {

using lexicon::Family;

const std::vector<std::string>& action_type_names() {
  static const std::vector<std::string> names = {"add", "remove", "change",
                                                 "move"};
  return names;
}

const std::vector<std::string>& split_names() {
  static const std::vector<std::string> names = {
      "train", "val", "test_ordinary", "test_2hop_ta", "test_2hop_qh"};
  return names;
}

// --- scene sampling -----------------------------------------------------------

Scene gen_scene(Rng& rng) {
  for (int scene_try = 0; scene_try < 20; ++scene_try) {
    Scene s;
    const int n = rng.uniform_int(3, kMaxObjects);
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      SceneObject o;
      o.shape = static_cast<Shape>(rng.uniform_int(0, kShapeCount - 1));
      o.size = static_cast<Size>(rng.uniform_int(0, kSizeCount - 1));
      o.material = static_cast<Material>(rng.uniform_int(0, kMaterialCount - 1));
      o.color = static_cast<Color>(rng.uniform_int(0, kColorCount - 1));
      ok = false;
      for (int attempt = 0; attempt < 1000; ++attempt) {
        const double x = rng.uniform_real(-kCoordRange, kCoordRange);
        const double y = rng.uniform_real(-kCoordRange, kCoordRange);
        bool clear = true;
        for (const auto& other : s.objects) {
          const double dx = other.pos.x - x;
          const double dy = other.pos.y - y;
          if (dx * dx + dy * dy < kMinSeparation * kMinSeparation) {
            clear = false;
            break;
          }
        }
        if (clear) {
          o.pos = {x, y, 0.0};
          ok = true;
          break;
        }
      }
      if (ok) {
        o.id = s.size();
        s.objects.push_back(o);
      }
    }
    if (ok) return s;
  }
  throw Error("placement-exhausted", "could not place objects after retries");
}

// --- referring expressions ------------------------------------------------------

namespace {

RefExpr ref_from_object(const SceneObject& o, bool use_shape, bool use_size,
                        bool use_material, bool use_color) {
  RefExpr r;
  if (use_shape) r.shape = o.shape;
  if (use_size) r.size = o.size;
  if (use_material) r.material = o.material;
  if (use_color) r.color = o.color;
  return r;
}

/// All attribute subsets that single out `target` in `s`.
std::vector<RefExpr> unique_refs(const Scene& s, int target) {
  const SceneObject& o = s.by_id(target);
  std::vector<RefExpr> out;
  for (int bits = 0; bits < 16; ++bits) {
    RefExpr r = ref_from_object(o, bits & 1, bits & 2, bits & 4, bits & 8);
    if (ref_resolve(s, r).size() == 1) out.push_back(r);
  }
  return out;
}

std::optional<RefExpr> choose_unique_ref(Rng& rng, const Scene& s,
                                         int target) {
  std::vector<RefExpr> all = unique_refs(s, target);
  if (all.empty()) return std::nullopt;
  int min_attrs = 4;
  for (const auto& r : all) min_attrs = std::min(min_attrs, r.attr_count());
  if (rng.coin(0.6)) {
    std::vector<RefExpr> minimal;
    for (const auto& r : all) {
      if (r.attr_count() == min_attrs) minimal.push_back(r);
    }
    return rng.pick(minimal);
  }
  return rng.pick(all);
}

std::vector<int> targetable_ids(const Scene& s) {
  std::vector<int> out;
  for (const auto& o : s.objects) {
    if (!unique_refs(s, o.id).empty()) out.push_back(o.id);
  }
  return out;
}

// --- surface realization ---------------------------------------------------------

std::string pick_word(Rng& rng, Family family, int value, bool plural) {
  const auto& words = lexicon::surface_words(family, value);
  const int idx = rng.uniform_int(0, static_cast<int>(words.size()) - 1);
  if (plural) {
    const auto& plurals = lexicon::plural_words(family, value);
    if (!plurals.empty()) return plurals[static_cast<std::size_t>(idx)];
  }
  return words[static_cast<std::size_t>(idx)];
}

std::string noun_phrase(Rng& rng, const RefExpr& r, bool plural) {
  std::string out;
  if (r.size) {
    out += pick_word(rng, Family::SizeF, static_cast<int>(*r.size), false);
    out += ' ';
  }
  if (r.color) {
    out += pick_word(rng, Family::ColorF, static_cast<int>(*r.color), false);
    out += ' ';
  }
  if (r.material) {
    out += pick_word(rng, Family::MaterialF, static_cast<int>(*r.material),
                     false);
    out += ' ';
  }
  if (r.shape) {
    out += pick_word(rng, Family::ShapeF, static_cast<int>(*r.shape), plural);
  } else {
    out += rng.coin() ? (plural ? "things" : "thing")
                      : (plural ? "objects" : "object");
  }
  return out;
}

std::string indef(const std::string& np) {
  const bool vowel = !np.empty() && (np[0] == 'a' || np[0] == 'e' ||
                                     np[0] == 'i' || np[0] == 'o' ||
                                     np[0] == 'u');
  return (vowel ? "an " : "a ") + np;
}

std::string rel_phrase(Relation rel) {
  switch (rel) {
    case Relation::left: return "to the left of";
    case Relation::right: return "to the right of";
    case Relation::front: return "in front of";
    case Relation::behind: return "behind";
    case Relation::on: return "on";
  }
  return "";
}

// --- action drafting -------------------------------------------------------------

struct ActionDraft {
  Node program;
  std::string text;
  std::string type;
  int affected_id = -1;
};

Node placement_on(Node anchor_chain) {
  return call(Op::OnTop, {std::move(anchor_chain)});
}

Node placement_relative(Relation rel, Node anchor_chain) {
  return call(Op::RelativeTo,
              {word_node(to_word(rel)), std::move(anchor_chain)});
}

std::optional<std::pair<RefExpr, int>> pick_anchor(Rng& rng, const Scene& s,
                                                   int exclude_id) {
  std::vector<int> ids = targetable_ids(s);
  std::erase(ids, exclude_id);
  if (ids.empty()) return std::nullopt;
  const int anchor = ids[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<int>(ids.size()) - 1))];
  auto ref = choose_unique_ref(rng, s, anchor);
  if (!ref) return std::nullopt;
  return std::make_pair(*ref, anchor);
}

std::optional<ActionDraft> draft_add(Rng& rng, const Scene& s) {
  if (s.size() >= kMaxObjects) return std::nullopt;
  ActionDraft d;
  d.type = "add";
  RefExpr spec;
  spec.shape = static_cast<Shape>(rng.uniform_int(0, kShapeCount - 1));
  spec.size = static_cast<Size>(rng.uniform_int(0, kSizeCount - 1));
  spec.material = static_cast<Material>(rng.uniform_int(0, kMaterialCount - 1));
  spec.color = static_cast<Color>(rng.uniform_int(0, kColorCount - 1));
  Node spec_node = call(Op::ObjectSpec, {word_node(to_word(*spec.shape)),
                                         word_node(to_word(*spec.size)),
                                         word_node(to_word(*spec.material)),
                                         word_node(to_word(*spec.color))});
  const std::string np = noun_phrase(rng, spec, false);

  const int mode = rng.uniform_int(0, 2);  // 0 ground, 1 on, 2 relative
  Node placement = call(Op::Ground);
  std::string text;
  if (mode == 0) {
    switch (rng.uniform_int(0, 2)) {
      case 0: text = "add " + indef(np); break;
      case 1: text = "put " + indef("new " + np) + " in the scene"; break;
      default: text = "place " + indef(np) + " on the ground"; break;
    }
  } else {
    auto anchor = pick_anchor(rng, s, -1);
    if (!anchor) return std::nullopt;
    const std::string anchor_np = noun_phrase(rng, anchor->first, false);
    if (mode == 1) {
      placement = placement_on(ref_chain(anchor->first));
      switch (rng.uniform_int(0, 3)) {
        case 0: text = "add " + indef(np) + " on the " + anchor_np; break;
        case 1:
          text = "put " + indef("new " + np) + " on the " + anchor_np;
          break;
        case 2:
          text = "place " + indef(np) + " on top of the " + anchor_np;
          break;
        default: text = "stack " + indef(np) + " on the " + anchor_np; break;
      }
    } else {
      const Relation rel =
          static_cast<Relation>(rng.uniform_int(0, 3));  // not "on"
      placement = placement_relative(rel, ref_chain(anchor->first));
      const std::string rp = rel_phrase(rel);
      switch (rng.uniform_int(0, 2)) {
        case 0: text = "add " + indef(np) + " " + rp + " the " + anchor_np; break;
        case 1:
          text = "put " + indef("new " + np) + " " + rp + " the " + anchor_np;
          break;
        default:
          text = "place " + indef(np) + " " + rp + " the " + anchor_np;
          break;
      }
    }
  }
  d.program = call(Op::AddObject, {std::move(spec_node), std::move(placement)});
  d.text = text;
  d.affected_id = s.size();  // appended object's id after canonicalization
  return d;
}

std::optional<int> pick_target(Rng& rng, const Scene& s, int forced_target) {
  if (forced_target >= 0) {
    return unique_refs(s, forced_target).empty()
               ? std::nullopt
               : std::optional<int>(forced_target);
  }
  std::vector<int> ids = targetable_ids(s);
  if (ids.empty()) return std::nullopt;
  return ids[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<int>(ids.size()) - 1))];
}

std::optional<ActionDraft> draft_remove(Rng& rng, const Scene& s,
                                        int forced_target, bool pronoun) {
  auto target = pick_target(rng, s, forced_target);
  if (!target) return std::nullopt;
  auto ref = choose_unique_ref(rng, s, *target);
  if (!ref) return std::nullopt;
  ActionDraft d;
  d.type = "remove";
  d.program = call(Op::Remove, {ref_chain(*ref)});
  if (pronoun) {
    d.text = rng.coin() ? "remove it" : "take it away";
  } else {
    const std::string np = noun_phrase(rng, *ref, false);
    switch (rng.uniform_int(0, 4)) {
      case 0: d.text = "remove the " + np; break;
      case 1: d.text = "take away the " + np; break;
      case 2: d.text = "delete the " + np; break;
      case 3: d.text = "take the " + np + " out of the scene"; break;
      default: d.text = "get rid of the " + np; break;
    }
  }
  return d;
}

std::optional<ActionDraft> draft_change(Rng& rng, const Scene& s,
                                        int forced_target, bool pronoun) {
  auto target = pick_target(rng, s, forced_target);
  if (!target) return std::nullopt;
  auto ref = choose_unique_ref(rng, s, *target);
  if (!ref) return std::nullopt;
  const SceneObject& obj = s.by_id(*target);

  ActionDraft d;
  d.type = "change";
  d.affected_id = *target;
  const std::string np = noun_phrase(rng, *ref, false);
  const std::string subject = pronoun ? "it" : "the " + np;
  const std::string possessive = pronoun ? "its" : "the";
  const std::string of_part = pronoun ? "" : " of the " + np;

  const int family = rng.uniform_int(0, 3);
  switch (family) {
    case 0: {  // shape
      Shape cur = obj.shape;
      Shape next = cur;
      while (next == cur) {
        next = static_cast<Shape>(rng.uniform_int(0, kShapeCount - 1));
      }
      d.program = call(Op::ChangeShape, {ref_chain(*ref), word_node(to_word(next))});
      const std::string w =
          pick_word(rng, Family::ShapeF, static_cast<int>(next), false);
      switch (rng.uniform_int(0, 2)) {
        case 0: d.text = "turn " + subject + " into " + indef(w); break;
        case 1:
          d.text = "change " + possessive + " shape" + of_part + " to " +
                   indef(w);
          break;
        default: d.text = "make " + subject + " " + indef(w); break;
      }
      break;
    }
    case 1: {  // size
      Size cur = obj.size;
      Size next = cur == Size::small ? Size::big : Size::small;
      d.program = call(Op::ChangeSize, {ref_chain(*ref), word_node(to_word(next))});
      const std::string w =
          pick_word(rng, Family::SizeF, static_cast<int>(next), false);
      if (rng.coin()) {
        d.text = "make " + subject + " " + w;
      } else {
        d.text = "change " + possessive + " size" + of_part + " to " + w;
      }
      break;
    }
    case 2: {  // material
      Material cur = obj.material;
      Material next = cur == Material::metal ? Material::rubber : Material::metal;
      d.program =
          call(Op::ChangeMaterial, {ref_chain(*ref), word_node(to_word(next))});
      const std::string w =
          pick_word(rng, Family::MaterialF, static_cast<int>(next), false);
      switch (rng.uniform_int(0, 2)) {
        case 0: d.text = "make " + subject + " " + w; break;
        case 1:
          d.text = "change " + possessive + " material" + of_part + " to " + w;
          break;
        default: d.text = "turn " + subject + " into " + w; break;
      }
      break;
    }
    default: {  // color
      Color cur = obj.color;
      Color next = cur;
      while (next == cur) {
        next = static_cast<Color>(rng.uniform_int(0, kColorCount - 1));
      }
      d.program = call(Op::ChangeColor, {ref_chain(*ref), word_node(to_word(next))});
      const std::string w =
          pick_word(rng, Family::ColorF, static_cast<int>(next), false);
      switch (rng.uniform_int(0, 2)) {
        case 0: d.text = "paint " + subject + " " + w; break;
        case 1:
          d.text = "change " + possessive + " color" + of_part + " to " + w;
          break;
        default: d.text = "make " + subject + " " + w; break;
      }
      break;
    }
  }
  return d;
}

std::optional<ActionDraft> draft_move(Rng& rng, const Scene& s,
                                      int forced_target, bool pronoun) {
  auto target = pick_target(rng, s, forced_target);
  if (!target) return std::nullopt;
  auto ref = choose_unique_ref(rng, s, *target);
  if (!ref) return std::nullopt;
  auto anchor = pick_anchor(rng, s, *target);
  if (!anchor) return std::nullopt;

  ActionDraft d;
  d.type = "move";
  d.affected_id = *target;
  const std::string np = noun_phrase(rng, *ref, false);
  const std::string subject = pronoun ? "it" : "the " + np;
  const std::string anchor_np = noun_phrase(rng, anchor->first, false);

  if (rng.coin()) {  // on top
    d.program = call(Op::Move, {ref_chain(*ref),
                                placement_on(ref_chain(anchor->first))});
    switch (rng.uniform_int(0, 3)) {
      case 0: d.text = "move " + subject + " on the " + anchor_np; break;
      case 1: d.text = "move " + subject + " onto the " + anchor_np; break;
      case 2: d.text = "put " + subject + " on the " + anchor_np; break;
      default:
        d.text = "place " + subject + " on top of the " + anchor_np;
        break;
    }
  } else {
    const Relation rel = static_cast<Relation>(rng.uniform_int(0, 3));
    d.program =
        call(Op::Move, {ref_chain(*ref),
                        placement_relative(rel, ref_chain(anchor->first))});
    const std::string rp = rel_phrase(rel);
    switch (rng.uniform_int(0, 2)) {
      case 0: d.text = "move " + subject + " " + rp + " the " + anchor_np; break;
      case 1: d.text = "shift " + subject + " " + rp + " the " + anchor_np; break;
      default:
        d.text = "push " + subject + " " + rp + " the " + anchor_np;
        break;
    }
  }
  return d;
}

std::optional<ActionDraft> draft_action(Rng& rng, const Scene& s,
                                        const std::string& type,
                                        int forced_target = -1,
                                        bool pronoun = false) {
  if (type == "add") return draft_add(rng, s);
  if (type == "remove") return draft_remove(rng, s, forced_target, pronoun);
  if (type == "change") return draft_change(rng, s, forced_target, pronoun);
  if (type == "move") return draft_move(rng, s, forced_target, pronoun);
  throw Error("bad-config", "unknown action type " + type);
}

int count_words(const std::string& text) {
  std::istringstream in(text);
  std::string w;
  int n = 0;
  while (in >> w) ++n;
  return n;
}

}  // namespace

GeneratedAction gen_action(Rng& rng, const Scene& s, int hops,
                           std::vector<std::string> force_types) {
  const auto& kinds = action_type_names();
  for (int attempt = 0; attempt < 60; ++attempt) {
    std::vector<std::string> types = force_types;
    if (types.empty()) {
      types.push_back(kinds[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(kinds.size()) - 1))]);
      if (hops == 2) {
        std::string second = types[0];
        while (second == types[0]) {
          second = kinds[static_cast<std::size_t>(
              rng.uniform_int(0, static_cast<int>(kinds.size()) - 1))];
        }
        types.push_back(second);
      }
    }
    auto d1 = draft_action(rng, s, types[0]);
    if (!d1) continue;
    if (hops == 1) {
      if (count_words(d1->text) > kMaxTokens) continue;
      return {d1->text, d1->program, {types[0]}};
    }

    Scene mid;
    try {
      mid = exec_action(d1->program, s);
    } catch (const Error&) {
      continue;
    }
    std::optional<ActionDraft> d2;
    if (d1->affected_id >= 0 && types[1] != "add" && rng.coin(0.5)) {
      d2 = draft_action(rng, mid, types[1], d1->affected_id, /*pronoun=*/true);
    }
    if (!d2) d2 = draft_action(rng, mid, types[1]);
    if (!d2) continue;
    const std::string text = d1->text + " then " + d2->text;
    if (count_words(text) > kMaxTokens) continue;
    Node program = call(Op::Seq, {d1->program, d2->program});
    try {
      exec_action(program, s);
    } catch (const Error&) {
      continue;
    }
    return {text, std::move(program), types};
  }
  throw Error("no-referent", "scene cannot support the sampled action");
}

// --- question drafting ------------------------------------------------------------

namespace {

/// Attribute subset for a (not necessarily unique) description, biased
/// toward values present in the scene.
RefExpr sample_desc(Rng& rng, const Scene& s) {
  RefExpr r;
  const SceneObject* probe =
      s.objects.empty()
          ? nullptr
          : &s.objects[static_cast<std::size_t>(
                rng.uniform_int(0, s.size() - 1))];
  auto biased = [&](auto uniform_value, auto present_value) {
    return (probe && rng.coin(0.7)) ? present_value : uniform_value;
  };
  if (rng.coin(0.45)) {
    r.shape = biased(static_cast<Shape>(rng.uniform_int(0, kShapeCount - 1)),
                     probe ? probe->shape : Shape::cube);
  }
  if (rng.coin(0.35)) {
    r.size = biased(static_cast<Size>(rng.uniform_int(0, kSizeCount - 1)),
                    probe ? probe->size : Size::small);
  }
  if (rng.coin(0.35)) {
    r.material =
        biased(static_cast<Material>(rng.uniform_int(0, kMaterialCount - 1)),
               probe ? probe->material : Material::metal);
  }
  if (rng.coin(0.45)) {
    r.color = biased(static_cast<Color>(rng.uniform_int(0, kColorCount - 1)),
                     probe ? probe->color : Color::red);
  }
  return r;
}

struct QuestionDraft {
  Node program;
  std::string text;
  Answer answer;
  std::string rtype;
};

std::optional<QuestionDraft> draft_count(Rng& rng, const Scene& s) {
  QuestionDraft q;
  q.rtype = "count";
  if (rng.coin(0.25) && !targetable_ids(s).empty()) {
    // spatial variant: how many things are <rel> the <ref>
    auto anchor = pick_anchor(rng, s, -1);
    if (!anchor) return std::nullopt;
    const Relation rel = static_cast<Relation>(rng.uniform_int(0, 4));
    int raw = 0;
    for (const auto& o : s.objects) {
      if (o.id != anchor->second &&
          spatial_relation(s, o.id, anchor->second, rel)) {
        ++raw;
      }
    }
    if (raw > 9) return std::nullopt;
    q.program = call(Op::Count,
                     {call(Op::Relate, {unique_node(ref_chain(anchor->first)),
                                        word_node(to_word(rel))})});
    const std::string noun = rng.coin() ? "things" : "objects";
    q.text = "how many " + noun + " are " + rel_phrase(rel) + " the " +
             noun_phrase(rng, anchor->first, false);
    q.answer = Answer::of_count(raw);
    return q;
  }
  const RefExpr desc = sample_desc(rng, s);
  const int raw = static_cast<int>(ref_resolve(s, desc).size());
  if (raw > 9) return std::nullopt;
  q.program = call(Op::Count, {ref_chain(desc)});
  const std::string np = noun_phrase(rng, desc, true);
  switch (rng.uniform_int(0, 2)) {
    case 0: q.text = "how many " + np + " are there"; break;
    case 1: q.text = "what number of " + np + " are there"; break;
    default: q.text = "how many " + np + " are in the scene"; break;
  }
  q.answer = Answer::of_count(raw);
  return q;
}

std::optional<QuestionDraft> draft_exist(Rng& rng, const Scene& s) {
  QuestionDraft q;
  q.rtype = "exist";
  if (rng.coin(0.2) && !targetable_ids(s).empty()) {
    auto anchor = pick_anchor(rng, s, -1);
    if (!anchor) return std::nullopt;
    const Relation rel = static_cast<Relation>(rng.uniform_int(0, 4));
    bool any = false;
    for (const auto& o : s.objects) {
      if (o.id != anchor->second &&
          spatial_relation(s, o.id, anchor->second, rel)) {
        any = true;
        break;
      }
    }
    q.program = call(Op::Exist,
                     {call(Op::Relate, {unique_node(ref_chain(anchor->first)),
                                        word_node(to_word(rel))})});
    q.text = "is there anything " + rel_phrase(rel) + " the " +
             noun_phrase(rng, anchor->first, false);
    q.answer = Answer::of_bool(any);
    return q;
  }
  const RefExpr desc = sample_desc(rng, s);
  const bool any = !ref_resolve(s, desc).empty();
  q.program = call(Op::Exist, {ref_chain(desc)});
  switch (rng.uniform_int(0, 2)) {
    case 0: q.text = "is there " + indef(noun_phrase(rng, desc, false)); break;
    case 1: q.text = "are there any " + noun_phrase(rng, desc, true); break;
    default:
      q.text = "does the scene contain " + indef(noun_phrase(rng, desc, false));
      break;
  }
  q.answer = Answer::of_bool(any);
  return q;
}

Op query_op(Family f) {
  switch (f) {
    case Family::ShapeF: return Op::QueryShape;
    case Family::SizeF: return Op::QuerySize;
    case Family::MaterialF: return Op::QueryMaterial;
    case Family::ColorF: return Op::QueryColor;
  }
  return Op::QueryColor;
}

Op equal_op(Family f) {
  switch (f) {
    case Family::ShapeF: return Op::EqualShape;
    case Family::SizeF: return Op::EqualSize;
    case Family::MaterialF: return Op::EqualMaterial;
    case Family::ColorF: return Op::EqualColor;
  }
  return Op::EqualColor;
}

Answer attr_answer(const SceneObject& o, Family f) {
  switch (f) {
    case Family::ShapeF: return Answer::of(o.shape);
    case Family::SizeF: return Answer::of(o.size);
    case Family::MaterialF: return Answer::of(o.material);
    case Family::ColorF: return Answer::of(o.color);
  }
  return Answer::of(o.color);
}

std::vector<Family> open_families(const RefExpr& r) {
  std::vector<Family> out;
  if (!r.shape) out.push_back(Family::ShapeF);
  if (!r.size) out.push_back(Family::SizeF);
  if (!r.material) out.push_back(Family::MaterialF);
  if (!r.color) out.push_back(Family::ColorF);
  return out;
}

std::optional<QuestionDraft> draft_query(Rng& rng, const Scene& s) {
  auto target = pick_target(rng, s, -1);
  if (!target) return std::nullopt;
  auto ref = choose_unique_ref(rng, s, *target);
  if (!ref) return std::nullopt;
  const std::vector<Family> families = open_families(*ref);
  if (families.empty()) return std::nullopt;
  const Family f = rng.pick(families);
  QuestionDraft q;
  q.rtype = "query_attribute";
  q.program = call(query_op(f), {unique_node(ref_chain(*ref))});
  const std::string np = noun_phrase(rng, *ref, false);
  const std::string fname(lexicon::family_name(f));
  if (rng.coin()) {
    q.text = "what " + fname + " is the " + np;
  } else {
    q.text = "what is the " + fname + " of the " + np;
  }
  q.answer = attr_answer(s.by_id(*target), f);
  return q;
}

std::optional<QuestionDraft> draft_compare_attr(Rng& rng, const Scene& s) {
  std::vector<int> ids = targetable_ids(s);
  if (ids.size() < 2) return std::nullopt;
  const int a = ids[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<int>(ids.size()) - 1))];
  std::erase(ids, a);
  const int b = ids[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<int>(ids.size()) - 1))];
  auto ra = choose_unique_ref(rng, s, a);
  auto rb = choose_unique_ref(rng, s, b);
  if (!ra || !rb) return std::nullopt;
  std::vector<Family> families;
  for (Family f : open_families(*ra)) {
    for (Family g : open_families(*rb)) {
      if (f == g) families.push_back(f);
    }
  }
  if (families.empty()) return std::nullopt;
  const Family f = rng.pick(families);
  QuestionDraft q;
  q.rtype = "compare_attribute";
  q.program = call(equal_op(f), {unique_node(ref_chain(*ra)),
                                 unique_node(ref_chain(*rb))});
  const std::string npa = noun_phrase(rng, *ra, false);
  const std::string npb = noun_phrase(rng, *rb, false);
  const std::string fname(lexicon::family_name(f));
  if (rng.coin()) {
    q.text = "do the " + npa + " and the " + npb + " have the same " + fname;
  } else {
    q.text = "is the " + fname + " of the " + npa + " the same as the " +
             fname + " of the " + npb;
  }
  q.answer = Answer::of_bool(attr_answer(s.by_id(a), f) ==
                             attr_answer(s.by_id(b), f));
  return q;
}

std::optional<QuestionDraft> draft_compare_int(Rng& rng, const Scene& s) {
  const RefExpr d1 = sample_desc(rng, s);
  const RefExpr d2 = sample_desc(rng, s);
  const int c1 = static_cast<int>(ref_resolve(s, d1).size());
  const int c2 = static_cast<int>(ref_resolve(s, d2).size());
  if (c1 > 9 || c2 > 9) return std::nullopt;
  QuestionDraft q;
  q.rtype = "compare_integer";
  const std::string np1 = noun_phrase(rng, d1, true);
  const std::string np2 = noun_phrase(rng, d2, true);
  if (np1 == np2) return std::nullopt;
  switch (rng.uniform_int(0, 2)) {
    case 0:
      q.program = call(Op::GreaterThan, {call(Op::Count, {ref_chain(d1)}),
                                         call(Op::Count, {ref_chain(d2)})});
      q.text = "are there more " + np1 + " than " + np2;
      q.answer = Answer::of_bool(c1 > c2);
      break;
    case 1:
      q.program = call(Op::LessThan, {call(Op::Count, {ref_chain(d1)}),
                                      call(Op::Count, {ref_chain(d2)})});
      q.text = "are there fewer " + np1 + " than " + np2;
      q.answer = Answer::of_bool(c1 < c2);
      break;
    default:
      q.program = call(Op::EqualInteger, {call(Op::Count, {ref_chain(d1)}),
                                          call(Op::Count, {ref_chain(d2)})});
      q.text = "is the number of " + np1 + " the same as the number of " + np2;
      q.answer = Answer::of_bool(c1 == c2);
      break;
  }
  return q;
}

struct AttrPick {
  Family family;
  int value;
  std::string word;
  Node filter;
};

AttrPick pick_single_attr(Rng& rng, const Scene& s) {
  const SceneObject* probe =
      s.objects.empty()
          ? nullptr
          : &s.objects[static_cast<std::size_t>(
                rng.uniform_int(0, s.size() - 1))];
  const int fam = rng.uniform_int(0, 3);
  AttrPick p;
  p.family = static_cast<Family>(fam);
  const bool from_probe = probe && rng.coin(0.7);
  switch (p.family) {
    case Family::ShapeF:
      p.value = from_probe ? static_cast<int>(probe->shape)
                           : rng.uniform_int(0, kShapeCount - 1);
      p.filter = filter_node(Op::FilterShape, scene_node(),
                             to_word(static_cast<Shape>(p.value)));
      break;
    case Family::SizeF:
      p.value = from_probe ? static_cast<int>(probe->size)
                           : rng.uniform_int(0, kSizeCount - 1);
      p.filter = filter_node(Op::FilterSize, scene_node(),
                             to_word(static_cast<Size>(p.value)));
      break;
    case Family::MaterialF:
      p.value = from_probe ? static_cast<int>(probe->material)
                           : rng.uniform_int(0, kMaterialCount - 1);
      p.filter = filter_node(Op::FilterMaterial, scene_node(),
                             to_word(static_cast<Material>(p.value)));
      break;
    case Family::ColorF:
      p.value = from_probe ? static_cast<int>(probe->color)
                           : rng.uniform_int(0, kColorCount - 1);
      p.filter = filter_node(Op::FilterColor, scene_node(),
                             to_word(static_cast<Color>(p.value)));
      break;
  }
  p.word = pick_word(rng, p.family, p.value, false);
  return p;
}

bool attr_matches(const SceneObject& o, const AttrPick& p) {
  switch (p.family) {
    case Family::ShapeF: return static_cast<int>(o.shape) == p.value;
    case Family::SizeF: return static_cast<int>(o.size) == p.value;
    case Family::MaterialF: return static_cast<int>(o.material) == p.value;
    case Family::ColorF: return static_cast<int>(o.color) == p.value;
  }
  return false;
}

std::optional<QuestionDraft> draft_2hop(Rng& rng, const Scene& s) {
  const int structure = rng.uniform_int(0, 3);  // or, and, not, and-not
  const AttrPick a = pick_single_attr(rng, s);
  AttrPick b = a;
  for (int tries = 0; tries < 40; ++tries) {
    b = pick_single_attr(rng, s);
    if (structure == 0) {  // or: any different pick
      if (b.family != a.family || b.value != a.value) break;
    } else {  // intersections need distinct families
      if (b.family != a.family) break;
    }
  }
  if (structure != 0 && b.family == a.family) return std::nullopt;
  if (structure == 0 && b.family == a.family && b.value == a.value) {
    return std::nullopt;
  }

  int raw = 0;
  for (const auto& o : s.objects) {
    const bool ma = attr_matches(o, a);
    const bool mb = attr_matches(o, b);
    switch (structure) {
      case 0: raw += (ma || mb) ? 1 : 0; break;
      case 1: raw += (ma && mb) ? 1 : 0; break;
      case 2: raw += !ma ? 1 : 0; break;
      default: raw += (ma && !mb) ? 1 : 0; break;
    }
  }
  if (raw > 9) return std::nullopt;

  Node set;
  std::string phrase;
  std::string rtype;
  switch (structure) {
    case 0:
      set = call(Op::Or, {a.filter, b.filter});
      phrase = "either " + a.word + " or " + b.word;
      rtype = "or";
      break;
    case 1:
      set = call(Op::And, {a.filter, b.filter});
      phrase = "both " + a.word + " and " + b.word;
      rtype = "and";
      break;
    case 2:
      set = call(Op::Not, {a.filter});
      phrase = "not " + a.word;
      rtype = "not";
      break;
    default:
      set = call(Op::And, {a.filter, call(Op::Not, {b.filter})});
      phrase = a.word + " but not " + b.word;
      rtype = "not";
      break;
  }

  QuestionDraft q;
  q.rtype = rtype;
  if (rng.coin()) {
    q.program = call(Op::Count, {std::move(set)});
    q.text = "how many objects are " + phrase;
    q.answer = Answer::of_count(raw);
  } else {
    q.program = call(Op::Exist, {std::move(set)});
    q.text = "are there any objects that are " + phrase;
    q.answer = Answer::of_bool(raw > 0);
  }
  return q;
}

}  // namespace

GeneratedQuestion gen_question(
    Rng& rng, const Scene& s_post, int hops,
    const std::function<bool(const Answer&)>& answer_ok) {
  for (int attempt = 0; attempt < 300; ++attempt) {
    std::optional<QuestionDraft> q;
    if (hops == 2) {
      q = draft_2hop(rng, s_post);
    } else {
      switch (rng.uniform_int(0, 4)) {
        case 0: q = draft_count(rng, s_post); break;
        case 1: q = draft_exist(rng, s_post); break;
        case 2: q = draft_query(rng, s_post); break;
        case 3: q = draft_compare_attr(rng, s_post); break;
        default: q = draft_compare_int(rng, s_post); break;
      }
    }
    if (!q) continue;
    if (count_words(q->text) > kMaxTokens) continue;
    if (answer_ok && !answer_ok(q->answer)) continue;
    // cross-check against the executor before emitting
    Answer check = exec_question(q->program, s_post);
    if (!(check == q->answer)) {
      throw Error("degenerate-question",
                  "generator/executor disagree on " + q->text);
    }
    return {q->text, q->program, q->answer, q->rtype};
  }
  throw Error("degenerate-question", "no acceptable question found");
}

// --- dataset assembly ---------------------------------------------------------

namespace {

struct SplitPlan {
  int count = 0;
  int action_hops = 1;
  int question_hops = 1;
  bool balanced = false;
};

SplitPlan plan_for(const GenConfig& cfg, const std::string& split) {
  if (split == "train") return {cfg.train_count, 1, 1, cfg.balance};
  if (split == "val") return {cfg.val_count, 1, 1, false};
  if (split == "test_ordinary") return {cfg.test_ordinary_count, 1, 1, false};
  if (split == "test_2hop_ta") return {cfg.test_2hop_ta_count, 2, 1, false};
  if (split == "test_2hop_qh") return {cfg.test_2hop_qh_count, 1, 2, false};
  throw Error("bad-config", "unknown split " + split);
}

int split_index(const std::string& split) {
  const auto& names = split_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == split) return static_cast<int>(i);
  }
  throw Error("bad-config", "unknown split " + split);
}

std::vector<std::vector<std::string>> type_pairs() {
  const auto& kinds = action_type_names();
  std::vector<std::vector<std::string>> pairs;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    for (std::size_t j = i + 1; j < kinds.size(); ++j) {
      pairs.push_back({kinds[i], kinds[j]});
    }
  }
  return pairs;
}

}  // namespace

std::vector<SampleRecord> generate_split(const GenConfig& cfg,
                                         const std::string& split) {
  const SplitPlan plan = plan_for(cfg, split);
  const int sidx = split_index(split);
  const auto& kinds = action_type_names();
  const auto pairs = type_pairs();

  std::array<int, kAnswerCount> hist{};
  int total = 0;
  auto answer_ok = [&](const Answer& a) {
    int used = 0;
    for (int i = 0; i < kAnswerCount; ++i) {
      if (hist[static_cast<std::size_t>(i)] > 0 || i == a.index()) ++used;
    }
    const double limit =
        std::max(3.0, 5.0 * static_cast<double>(total + 1) / used);
    return hist[static_cast<std::size_t>(a.index())] + 1 <=
           static_cast<int>(limit);
  };

  std::vector<SampleRecord> records;
  records.reserve(static_cast<std::size_t>(plan.count));
  for (int i = 0; i < plan.count; ++i) {
    Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(sidx),
                             static_cast<std::uint64_t>(i));
    std::vector<std::string> force_types;
    if (plan.action_hops == 2) {
      auto pair = pairs[static_cast<std::size_t>(i) % pairs.size()];
      if (rng.coin()) std::swap(pair[0], pair[1]);  // execution order
      force_types = pair;
    } else if (plan.balanced) {
      force_types = {kinds[static_cast<std::size_t>(i) % kinds.size()]};
    }

    bool done = false;
    for (int attempt = 0; attempt < 100 && !done; ++attempt) {
      try {
        Scene pre = gen_scene(rng);
        if (!force_types.empty() && force_types[0] == "add" &&
            pre.size() >= kMaxObjects) {
          continue;
        }
        GeneratedAction action =
            gen_action(rng, pre, plan.action_hops, force_types);
        Scene post = exec_action(action.program, pre);
        GeneratedQuestion question =
            gen_question(rng, post, plan.question_hops, answer_ok);

        SampleRecord r;
        r.id = i;
        r.scene_pre = std::move(pre);
        r.action_text = action.text;
        r.action_program = render_program(action.program);
        r.question_text = question.text;
        r.question_program = render_program(question.program);
        r.answer = question.answer;
        r.scene_post = std::move(post);
        r.split = split;
        r.action_types = action.types;
        r.reasoning_type = question.reasoning_type;
        records.push_back(std::move(r));

        hist[static_cast<std::size_t>(question.answer.index())] += 1;
        ++total;
        done = true;
      } catch (const Error& e) {
        if (e.code() == "no-referent" || e.code() == "degenerate-question" ||
            e.code() == "placement-exhausted") {
          continue;
        }
        throw;
      }
    }
    if (!done) {
      throw Error("degenerate-question",
                  split + " record " + std::to_string(i) +
                      " failed after 100 attempts");
    }
  }
  return records;
}

Vocabulary build_vocabulary() {
  std::vector<std::string> words = lexicon::all_words();
  static const char* kTemplateWords[] = {
      // actions
      "add", "a", "an", "new", "in", "the", "scene", "put", "place", "on",
      "ground", "top", "of", "stack", "to", "left", "right", "front",
      "behind", "remove", "take", "away", "delete", "out", "get", "rid",
      "paint", "change", "make", "turn", "into", "move", "onto", "shift",
      "push", "then", "it", "its",
      // questions
      "how", "many", "are", "there", "what", "number", "is", "does",
      "contain", "any", "do", "and", "have", "same", "as", "more", "than",
      "fewer", "either", "or", "not", "both", "but", "anything", "that",
      // identity actions (training augmentation)
      "nothing", "leave", "everything", "unchanged", "keep",
  };
  for (const char* w : kTemplateWords) words.emplace_back(w);
  return Vocabulary::build(std::move(words));
}

// --- JSONL ----------------------------------------------------------------------

std::string record_to_json(const SampleRecord& r, bool blind) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["scene_pre"] = nlohmann::ordered_json::parse(scene_to_json(r.scene_pre));
  j["action_text"] = r.action_text;
  if (!blind) j["action_program"] = r.action_program;
  j["question_text"] = r.question_text;
  if (!blind) j["question_program"] = r.question_program;
  j["answer"] = r.answer.to_string();
  if (!blind) {
    j["scene_post"] = nlohmann::ordered_json::parse(scene_to_json(r.scene_post));
  }
  j["split"] = r.split;
  j["action_types"] = r.action_types;
  j["reasoning_type"] = r.reasoning_type;
  return j.dump();
}

SampleRecord record_from_json(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad-json", e.what());
  }
  SampleRecord r;
  try {
    r.id = j.at("id").get<long long>();
    r.scene_pre = scene_from_json(j.at("scene_pre").dump());
    r.action_text = j.at("action_text").get<std::string>();
    r.question_text = j.at("question_text").get<std::string>();
    r.answer = Answer::from_string(j.at("answer").get<std::string>());
    r.split = j.value("split", "");
    if (j.contains("action_types")) {
      r.action_types = j.at("action_types").get<std::vector<std::string>>();
    }
    r.reasoning_type = j.value("reasoning_type", "");
    r.has_oracle = j.contains("action_program") && j.contains("scene_post");
    if (r.has_oracle) {
      r.action_program = j.at("action_program").get<std::string>();
      r.question_program = j.at("question_program").get<std::string>();
      r.scene_post = scene_from_json(j.at("scene_post").dump());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad-json", e.what());
  }
  return r;
}

std::vector<SampleRecord> load_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io-error", "cannot read " + path);
  std::vector<SampleRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(record_from_json(line));
  }
  return out;
}

void save_records(const std::vector<SampleRecord>& records,
                  const std::string& path, bool blind) {
  std::ofstream out(path);
  if (!out) throw Error("io-error", "cannot write " + path);
  for (const auto& r : records) {
    out << record_to_json(r, blind) << "\n";
  }
  if (!out) throw Error("io-error", "short write to " + path);
}

void gen_dataset(const GenConfig& cfg, const std::string& outdir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec) throw Error("io-error", "cannot create " + outdir);

  nlohmann::ordered_json meta;
  meta["seed"] = cfg.seed;
  meta["splits"] = nlohmann::ordered_json::object();

  for (const auto& split : split_names()) {
    const auto records = generate_split(cfg, split);
    const bool blind = cfg.blind_tests && split.starts_with("test");
    save_records(records, outdir + "/" + split + ".jsonl", blind);

    std::set<std::string> unique_texts;
    std::map<std::string, int> answers;
    for (const auto& r : records) {
      unique_texts.insert(r.action_text + "|" + r.question_text);
      answers[r.answer.to_string()] += 1;
    }
    nlohmann::ordered_json sj;
    sj["count"] = records.size();
    sj["uniqueness_ratio"] =
        records.empty() ? 1.0
                        : static_cast<double>(unique_texts.size()) /
                              static_cast<double>(records.size());
    sj["answer_histogram"] = answers;
    sj["blind"] = blind;
    meta["splits"][split] = std::move(sj);
  }

  const Vocabulary vocab = build_vocabulary();
  {
    std::ofstream out(outdir + "/vocab.json");
    if (!out) throw Error("io-error", "cannot write vocab.json");
    out << vocab.to_json() << "\n";
  }
  meta["vocab_size"] = vocab.size();
  meta["vocab_hash"] = vocab.hash();
  {
    std::ofstream out(outdir + "/meta.json");
    if (!out) throw Error("io-error", "cannot write meta.json");
    out << meta.dump(2) << "\n";
  }
}

}  // namespace actfx
