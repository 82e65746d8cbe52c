#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace actfx {

// Closed attribute taxonomy. Enum order is part of the on-disk and
// one-hot-encoding contract; do not reorder.
enum class Shape : std::uint8_t { cube, sphere, cylinder };
enum class Size : std::uint8_t { small, big };
enum class Material : std::uint8_t { metal, rubber };
enum class Color : std::uint8_t {
  red, green, gray, blue, brown, yellow, purple, cyan
};

enum class Relation : std::uint8_t { left, right, front, behind, on };

inline constexpr int kShapeCount = 3;
inline constexpr int kSizeCount = 2;
inline constexpr int kMaterialCount = 2;
inline constexpr int kColorCount = 8;

inline constexpr int kMaxObjects = 10;
inline constexpr double kCoordRange = 3.0;   // x,y in [-3, 3]
inline constexpr double kSpatialTol = 0.25;  // tau for spatial predicates
inline constexpr double kMinSeparation = 0.5;
inline constexpr double kGridStep = 0.5;
inline constexpr double kStackStep = 1.0;  // z gap between stacked objects

std::string_view to_word(Shape v);
std::string_view to_word(Size v);
std::string_view to_word(Material v);
std::string_view to_word(Color v);
std::string_view to_word(Relation v);

// Throw Error("bad-enum") on unknown spellings.
Shape shape_from_word(std::string_view w);
Size size_from_word(std::string_view w);
Material material_from_word(std::string_view w);
Color color_from_word(std::string_view w);
Relation relation_from_word(std::string_view w);

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool operator==(const Vec3&) const = default;
};

struct SceneObject {
  int id = 0;
  Shape shape = Shape::cube;
  Size size = Size::small;
  Material material = Material::metal;
  Color color = Color::red;
  Vec3 pos;

  bool same_attributes(const SceneObject& o) const {
    return shape == o.shape && size == o.size && material == o.material &&
           color == o.color;
  }
};

/// Immutable-by-convention world state. Operations elsewhere return fresh
/// scenes instead of mutating their inputs.
struct Scene {
  std::vector<SceneObject> objects;

  int size() const { return static_cast<int>(objects.size()); }
  const SceneObject& by_id(int id) const;

  /// Reassigns ids to 0..n-1 in list order.
  void canonicalize();
};

struct Violation {
  std::string code;    // "capacity", "min-distance", ...
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_scene(const Scene& s);

/// Raw axis comparison semantics with tolerance kSpatialTol.
/// Throws Error("no-such-object") for unknown ids.
bool spatial_relation(const Scene& s, int a, int b, Relation rel);

/// True iff a bijection matches all categorical attributes exactly and
/// positions within coord_tol per axis. Order-insensitive.
bool scene_equal(const Scene& a, const Scene& b, double coord_tol);

std::string scene_to_json(const Scene& s);
Scene scene_from_json(const std::string& text);

// ---------------------------------------------------------------------------
// Answer: the closed 27-symbol output vocabulary.
// Index order: 0..9, yes, no, cylinder, sphere, cube, small, big, metal,
// rubber, red, green, gray, blue, brown, yellow, purple, cyan.
// ---------------------------------------------------------------------------

inline constexpr int kAnswerCount = 27;

class Answer {
public:
  Answer() = default;

  static Answer of_count(int n);  // saturates at 9; negative clamps to 0
  static Answer of_bool(bool yes);
  static Answer of(Shape v);
  static Answer of(Size v);
  static Answer of(Material v);
  static Answer of(Color v);
  static Answer from_string(std::string_view text);
  static Answer from_index(int index);

  int index() const { return index_; }
  std::string to_string() const;

  bool operator==(const Answer&) const = default;

private:
  explicit Answer(int index) : index_(index) {}
  int index_ = 0;
};

/// All 27 answer spellings in vocabulary order.
const std::array<std::string, kAnswerCount>& answer_vocabulary();

}  // namespace actfx
