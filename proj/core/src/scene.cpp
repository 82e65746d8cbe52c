#include "actfx/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "actfx/error.hpp"
#include "json.hpp"

namespace actfx {

namespace {

constexpr std::string_view kShapeWords[] = {"cube", "sphere", "cylinder"};
constexpr std::string_view kSizeWords[] = {"small", "big"};
constexpr std::string_view kMaterialWords[] = {"metal", "rubber"};
constexpr std::string_view kColorWords[] = {"red",   "green",  "gray",
                                            "blue",  "brown",  "yellow",
                                            "purple", "cyan"};
constexpr std::string_view kRelationWords[] = {"left", "right", "front",
                                               "behind", "on"};

template <typename E, std::size_t N>
E from_word_impl(const std::string_view (&words)[N], std::string_view w,
                 const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (words[i] == w) return static_cast<E>(i);
  }
  throw Error("bad-enum",
              std::string(w) + " is not a " + what);
}

}  // namespace

std::string_view to_word(Shape v) { return kShapeWords[static_cast<int>(v)]; }
std::string_view to_word(Size v) { return kSizeWords[static_cast<int>(v)]; }
std::string_view to_word(Material v) {
  return kMaterialWords[static_cast<int>(v)];
}
std::string_view to_word(Color v) { return kColorWords[static_cast<int>(v)]; }
std::string_view to_word(Relation v) {
  return kRelationWords[static_cast<int>(v)];
}

Shape shape_from_word(std::string_view w) {
  return from_word_impl<Shape>(kShapeWords, w, "shape");
}
Size size_from_word(std::string_view w) {
  return from_word_impl<Size>(kSizeWords, w, "size");
}
Material material_from_word(std::string_view w) {
  return from_word_impl<Material>(kMaterialWords, w, "material");
}
Color color_from_word(std::string_view w) {
  return from_word_impl<Color>(kColorWords, w, "color");
}
Relation relation_from_word(std::string_view w) {
  return from_word_impl<Relation>(kRelationWords, w, "relation");
}

const SceneObject& Scene::by_id(int id) const {
  for (const auto& o : objects) {
    if (o.id == id) return o;
  }
  throw Error("no-such-object", "no object with id " + std::to_string(id));
}

void Scene::canonicalize() {
  for (int i = 0; i < size(); ++i) objects[i].id = i;
}

namespace {

bool on_top_of(const SceneObject& a, const SceneObject& b) {
  return std::abs(a.pos.x - b.pos.x) <= kSpatialTol &&
         std::abs(a.pos.y - b.pos.y) <= kSpatialTol && a.pos.z > b.pos.z;
}

std::string obj_label(const SceneObject& o) {
  return "object " + std::to_string(o.id);
}

}  // namespace

ValidationReport validate_scene(const Scene& s) {
  ValidationReport report;
  if (s.size() > kMaxObjects) {
    report.violations.push_back(
        {"capacity", std::to_string(s.size()) + " objects exceed capacity " +
                         std::to_string(kMaxObjects)});
  }
  for (int i = 0; i < s.size(); ++i) {
    if (s.objects[i].id != i) {
      report.violations.push_back(
          {"id-sequence", obj_label(s.objects[i]) + " at index " +
                              std::to_string(i) + " breaks 0..n-1 ids"});
      break;
    }
  }
  for (const auto& o : s.objects) {
    if (std::abs(o.pos.x) > kCoordRange || std::abs(o.pos.y) > kCoordRange) {
      report.violations.push_back(
          {"position-range", obj_label(o) + " xy outside [-3,3]"});
    }
    if (o.pos.z < 0.0) {
      report.violations.push_back({"position-range", obj_label(o) + " z < 0"});
    }
  }
  for (const auto& a : s.objects) {
    if (a.pos.z <= 0.0) continue;
    bool supported = false;
    for (const auto& b : s.objects) {
      if (a.id != b.id && on_top_of(a, b)) {
        supported = true;
        break;
      }
    }
    if (!supported) {
      report.violations.push_back(
          {"floating", obj_label(a) + " has z > 0 but rests on nothing"});
    }
  }
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    for (std::size_t j = i + 1; j < s.objects.size(); ++j) {
      const auto& a = s.objects[i];
      const auto& b = s.objects[j];
      if (on_top_of(a, b) || on_top_of(b, a)) continue;
      const double dx = a.pos.x - b.pos.x;
      const double dy = a.pos.y - b.pos.y;
      if (std::sqrt(dx * dx + dy * dy) < kMinSeparation) {
        report.violations.push_back(
            {"min-distance",
             obj_label(a) + " and " + obj_label(b) + " are closer than 0.5"});
      }
    }
  }
  return report;
}

bool spatial_relation(const Scene& s, int a, int b, Relation rel) {
  if (a == b) throw Error("no-such-object", "relation of object to itself");
  const auto& oa = s.by_id(a);
  const auto& ob = s.by_id(b);
  switch (rel) {
    case Relation::left:
      return oa.pos.x < ob.pos.x - kSpatialTol;
    case Relation::right:
      return oa.pos.x > ob.pos.x + kSpatialTol;
    case Relation::front:
      return oa.pos.y < ob.pos.y - kSpatialTol;
    case Relation::behind:
      return oa.pos.y > ob.pos.y + kSpatialTol;
    case Relation::on:
      return on_top_of(oa, ob);
  }
  return false;
}

namespace {

bool match_scenes(const Scene& a, const Scene& b, double tol,
                  std::vector<int>& assigned, std::vector<bool>& used,
                  std::size_t i) {
  if (i == a.objects.size()) return true;
  const auto& oa = a.objects[i];
  for (std::size_t j = 0; j < b.objects.size(); ++j) {
    if (used[j]) continue;
    const auto& ob = b.objects[j];
    if (!oa.same_attributes(ob)) continue;
    if (std::abs(oa.pos.x - ob.pos.x) > tol ||
        std::abs(oa.pos.y - ob.pos.y) > tol ||
        std::abs(oa.pos.z - ob.pos.z) > tol) {
      continue;
    }
    used[j] = true;
    assigned[i] = static_cast<int>(j);
    if (match_scenes(a, b, tol, assigned, used, i + 1)) return true;
    used[j] = false;
  }
  return false;
}

}  // namespace

bool scene_equal(const Scene& a, const Scene& b, double coord_tol) {
  if (a.objects.size() != b.objects.size()) return false;
  std::vector<int> assigned(a.objects.size(), -1);
  std::vector<bool> used(b.objects.size(), false);
  return match_scenes(a, b, coord_tol, assigned, used, 0);
}

std::string scene_to_json(const Scene& s) {
  nlohmann::ordered_json objects = nlohmann::ordered_json::array();
  for (const auto& o : s.objects) {
    nlohmann::ordered_json j;
    j["shape"] = std::string(to_word(o.shape));
    j["size"] = std::string(to_word(o.size));
    j["material"] = std::string(to_word(o.material));
    j["color"] = std::string(to_word(o.color));
    j["pos"] = {o.pos.x, o.pos.y, o.pos.z};
    objects.push_back(std::move(j));
  }
  nlohmann::ordered_json root;
  root["objects"] = std::move(objects);
  return root.dump();
}

Scene scene_from_json(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad-json", e.what());
  }
  if (!root.is_object() || !root.contains("objects") ||
      !root["objects"].is_array()) {
    throw Error("bad-json", "scene JSON must be {\"objects\": [...]}");
  }
  Scene s;
  for (const auto& j : root["objects"]) {
    SceneObject o;
    try {
      o.shape = shape_from_word(j.at("shape").get<std::string>());
      o.size = size_from_word(j.at("size").get<std::string>());
      o.material = material_from_word(j.at("material").get<std::string>());
      o.color = color_from_word(j.at("color").get<std::string>());
      const auto& pos = j.at("pos");
      if (!pos.is_array() || pos.size() != 3) {
        throw Error("bad-json", "pos must be [x,y,z]");
      }
      o.pos = {pos[0].get<double>(), pos[1].get<double>(),
               pos[2].get<double>()};
    } catch (const nlohmann::json::exception& e) {
      throw Error("bad-json", e.what());
    }
    s.objects.push_back(o);
  }
  s.canonicalize();
  return s;
}

// --- Answer -----------------------------------------------------------------

const std::array<std::string, kAnswerCount>& answer_vocabulary() {
  static const std::array<std::string, kAnswerCount> vocab = {
      "0",    "1",   "2",        "3",      "4",    "5",     "6",
      "7",    "8",   "9",        "yes",    "no",   "cylinder", "sphere",
      "cube", "small", "big",    "metal",  "rubber", "red",  "green",
      "gray", "blue", "brown",   "yellow", "purple", "cyan"};
  return vocab;
}

Answer Answer::of_count(int n) {
  return Answer(std::clamp(n, 0, 9));
}

Answer Answer::of_bool(bool yes) { return Answer(yes ? 10 : 11); }

Answer Answer::of(Shape v) {
  switch (v) {
    case Shape::cylinder: return Answer(12);
    case Shape::sphere: return Answer(13);
    case Shape::cube: return Answer(14);
  }
  return Answer(14);
}

Answer Answer::of(Size v) {
  return Answer(v == Size::small ? 15 : 16);
}

Answer Answer::of(Material v) {
  return Answer(v == Material::metal ? 17 : 18);
}

Answer Answer::of(Color v) { return Answer(19 + static_cast<int>(v)); }

Answer Answer::from_string(std::string_view text) {
  const auto& vocab = answer_vocabulary();
  for (int i = 0; i < kAnswerCount; ++i) {
    if (vocab[i] == text) return Answer(i);
  }
  throw Error("bad-answer", std::string(text) + " is not an answer symbol");
}

Answer Answer::from_index(int index) {
  if (index < 0 || index >= kAnswerCount) {
    throw Error("bad-answer", "answer index out of range");
  }
  return Answer(index);
}

std::string Answer::to_string() const { return answer_vocabulary()[index_]; }

}  // namespace actfx
