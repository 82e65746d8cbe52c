#include <algorithm>

#include "actfx/error.hpp"
#include "actfx/scene.hpp"
#include "actfx/worldgen.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace actfx;
using testsupport::make_obj;
using testsupport::make_scene;

namespace {

bool has_violation(const ValidationReport& r, const std::string& code) {
  return std::any_of(r.violations.begin(), r.violations.end(),
                     [&](const Violation& v) { return v.code == code; });
}

}  // namespace

TEST_CASE("attribute enums have the documented cardinalities") {
  CHECK(kShapeCount == 3);
  CHECK(kSizeCount == 2);
  CHECK(kMaterialCount == 2);
  CHECK(kColorCount == 8);
  CHECK(kShapeCount * kSizeCount * kMaterialCount * kColorCount == 96);
  CHECK(shape_from_word("cube") == Shape::cube);
  CHECK(to_word(Color::cyan) == "cyan");
  CHECK_THROWS_WITH_AS(shape_from_word("pyramid"), "pyramid is not a shape",
                       Error);
}

TEST_CASE("validate_scene reports the documented violations") {
  CHECK(validate_scene(Scene{}).ok());

  Scene close = make_scene({make_obj(0, Shape::cube, Size::small,
                                     Material::rubber, Color::red, 0, 0),
                            make_obj(1, Shape::sphere, Size::big,
                                     Material::metal, Color::blue, 0.1, 0)});
  CHECK(has_violation(validate_scene(close), "min-distance"));

  Scene crowded;
  for (int i = 0; i < 11; ++i) {
    crowded.objects.push_back(make_obj(i, Shape::cube, Size::small,
                                       Material::rubber, Color::red,
                                       -3.0 + 0.6 * i, 0));
  }
  CHECK(has_violation(validate_scene(crowded), "capacity"));

  Scene floating = make_scene({make_obj(0, Shape::cube, Size::small,
                                        Material::rubber, Color::red, 0, 0,
                                        1.0)});
  CHECK(has_violation(validate_scene(floating), "floating"));

  Scene stacked = make_scene({make_obj(0, Shape::cube, Size::small,
                                       Material::rubber, Color::red, 0, 0),
                              make_obj(1, Shape::sphere, Size::small,
                                       Material::metal, Color::blue, 0, 0,
                                       1.0)});
  CHECK(validate_scene(stacked).ok());
}

TEST_CASE("spatial_relation axis semantics") {
  Scene s = make_scene({make_obj(0, Shape::cube, Size::small, Material::rubber,
                                 Color::red, 0, 0),
                        make_obj(1, Shape::sphere, Size::big, Material::metal,
                                 Color::blue, 2, 0)});
  CHECK(spatial_relation(s, 0, 1, Relation::left));
  CHECK_FALSE(spatial_relation(s, 0, 1, Relation::right));

  Scene stacked = make_scene({make_obj(0, Shape::cube, Size::small,
                                       Material::rubber, Color::red, 1, 1, 1),
                              make_obj(1, Shape::cube, Size::small,
                                       Material::rubber, Color::blue, 1, 1,
                                       0)});
  CHECK(spatial_relation(stacked, 0, 1, Relation::on));

  // |dx| = 0.1 <= tau: neither left nor right
  Scene near = make_scene({make_obj(0, Shape::cube, Size::small,
                                    Material::rubber, Color::red, 0, 0),
                           make_obj(1, Shape::cube, Size::small,
                                    Material::rubber, Color::blue, 0.1, 2)});
  CHECK_FALSE(spatial_relation(near, 0, 1, Relation::left));
  CHECK_FALSE(spatial_relation(near, 0, 1, Relation::right));

  CHECK_THROWS_AS(spatial_relation(s, 0, 9, Relation::left), Error);
}

TEST_CASE("spatial relation properties on random scenes") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    Scene s = gen_scene(rng);
    for (const auto& a : s.objects) {
      for (const auto& b : s.objects) {
        if (a.id == b.id) continue;
        const bool l = spatial_relation(s, a.id, b.id, Relation::left);
        const bool r = spatial_relation(s, a.id, b.id, Relation::right);
        CHECK_FALSE((l && r));
        CHECK(l == spatial_relation(s, b.id, a.id, Relation::right));
        if (spatial_relation(s, a.id, b.id, Relation::on)) {
          CHECK_FALSE(spatial_relation(s, b.id, a.id, Relation::on));
        }
      }
    }
  }
}

TEST_CASE("scene_equal is an order-insensitive bijection check") {
  Rng rng(11);
  Scene a = gen_scene(rng);
  CHECK(scene_equal(a, a, 0.0));

  Scene permuted = a;
  std::reverse(permuted.objects.begin(), permuted.objects.end());
  permuted.canonicalize();
  CHECK(scene_equal(a, permuted, 0.0));
  CHECK(scene_equal(permuted, a, 0.0));

  Scene tinted = a;
  tinted.objects[0].color =
      tinted.objects[0].color == Color::red ? Color::cyan : Color::red;
  CHECK_FALSE(scene_equal(a, tinted, 0.0));

  Scene shifted = a;
  shifted.objects[0].pos.x += 0.05;
  CHECK(scene_equal(a, shifted, 0.1));
  CHECK_FALSE(scene_equal(a, shifted, 0.01));

  CHECK_FALSE(scene_equal(a, Scene{}, 1.0));
}

TEST_CASE("scene JSON round-trip preserves equality") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    Scene s = gen_scene(rng);
    Scene back = scene_from_json(scene_to_json(s));
    CHECK(scene_equal(s, back, 0.0));
  }
  CHECK_THROWS_AS(scene_from_json("{"), Error);
  CHECK_THROWS_AS(
      scene_from_json(
          R"({"objects":[{"shape":"dome","size":"small","material":"metal","color":"red","pos":[0,0,0]}]})"),
      Error);
}

TEST_CASE("answer vocabulary is the closed 27-symbol set") {
  const auto& vocab = answer_vocabulary();
  CHECK(vocab.size() == 27);
  for (int i = 0; i < kAnswerCount; ++i) {
    Answer a = Answer::from_index(i);
    CHECK(Answer::from_string(a.to_string()) == a);
  }
  CHECK(Answer::of_count(3).to_string() == "3");
  CHECK(Answer::of_count(12).to_string() == "9");  // saturates
  CHECK(Answer::of_bool(true).to_string() == "yes");
  CHECK(Answer::of(Shape::cylinder).index() == 12);
  CHECK(Answer::of(Color::cyan).index() == 26);
  CHECK_THROWS_AS(Answer::from_string("maybe"), Error);
}
