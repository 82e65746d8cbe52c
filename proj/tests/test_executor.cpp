#include "actfx/error.hpp"
#include "actfx/executor.hpp"
#include "actfx/parser.hpp"
#include "actfx/worldgen.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace actfx;
using testsupport::EvalOutcome;
using testsupport::make_obj;
using testsupport::make_scene;
using testsupport::RefEval;
using testsupport::run_eval;

namespace {

Scene two_object_scene() {
  return make_scene({make_obj(0, Shape::cube, Size::small, Material::rubber,
                              Color::red, -1, 0),
                     make_obj(1, Shape::sphere, Size::big, Material::metal,
                              Color::blue, 1, 0)});
}

Answer run_q(const std::string& text, const Scene& s) {
  return exec_question(parse_program(text), s);
}

Scene run_a(const std::string& text, const Scene& s) {
  return exec_action(parse_program(text), s);
}

}  // namespace

TEST_CASE("question examples against brute-force expectations") {
  // no red metal object among {small red rubber cube, big blue metal sphere}
  CHECK(run_q("count(filter_color(filter_material(scene(),metal),red))",
              two_object_scene())
            .to_string() == "0");

  CHECK(run_q("count(scene())", Scene{}).to_string() == "0");

  // union {red cube, red cylinder} of {red cube, red cylinder, blue sphere}
  Scene trio = make_scene({make_obj(0, Shape::cube, Size::small,
                                    Material::rubber, Color::red, -2, 0),
                           make_obj(1, Shape::cylinder, Size::small,
                                    Material::rubber, Color::red, 0, 0),
                           make_obj(2, Shape::sphere, Size::big,
                                    Material::metal, Color::blue, 2, 0)});
  CHECK(run_q("count(or(filter_color(scene(),red),filter_shape(scene(),"
              "cylinder)))",
              trio)
            .to_string() == "2");

  CHECK(run_q("exist(filter_color(scene(),purple))", trio).to_string() == "no");
  CHECK(run_q("query_color(unique(filter_shape(scene(),sphere)))", trio)
            .to_string() == "blue");
  CHECK(run_q("equal_shape(unique(filter_color(scene(),blue)),"
              "unique(filter_shape(scene(),cylinder)))",
              trio)
            .to_string() == "no");
  CHECK(run_q("greater_than(count(filter_color(scene(),red)),"
              "count(filter_color(scene(),blue)))",
              trio)
            .to_string() == "yes");
}

TEST_CASE("non-unique and unknown-value errors") {
  Scene trio = make_scene({make_obj(0, Shape::cube, Size::small,
                                    Material::rubber, Color::red, -2, 0),
                           make_obj(1, Shape::cube, Size::big,
                                    Material::rubber, Color::red, 0, 0),
                           make_obj(2, Shape::sphere, Size::big,
                                    Material::metal, Color::blue, 2, 0)});
  try {
    run_q("query_size(unique(filter_shape(scene(),cube)))", trio);
    FAIL("expected non-unique");
  } catch (const Error& e) {
    CHECK(e.code() == "non-unique");
  }
}

TEST_CASE("action examples") {
  Scene s = two_object_scene();

  Scene removed = run_a("remove(filter_color(scene(),red))", s);
  REQUIRE(removed.size() == 1);
  CHECK(removed.objects[0].color == Color::blue);
  CHECK(removed.objects[0].id == 0);  // re-canonicalized

  Scene painted = run_a("change_color(filter_shape(scene(),cube),cyan)", s);
  REQUIRE(painted.size() == 2);
  CHECK(painted.objects[0].color == Color::cyan);
  CHECK(painted.objects[0].pos == s.objects[0].pos);
  CHECK(painted.objects[1].pos == s.objects[1].pos);

  // empty-target no-op
  Scene untouched = run_a("remove(filter_color(scene(),purple))", s);
  CHECK(scene_equal(untouched, s, 0.0));

  // input scene never mutated
  CHECK(s.size() == 2);
  CHECK(s.objects[0].color == Color::red);
}

TEST_CASE("add_object placements") {
  Scene s = two_object_scene();

  Scene grown = run_a("add_object(object(cylinder,big,metal,green),ground())", s);
  REQUIRE(grown.size() == 3);
  CHECK(validate_scene(grown).ok());

  Scene stacked = run_a(
      "add_object(object(cube,small,rubber,purple),"
      "on(filter_color(scene(),blue)))",
      s);
  REQUIRE(stacked.size() == 3);
  CHECK(validate_scene(stacked).ok());
  CHECK(run_q("exist(relate(unique(filter_color(scene(),purple)),on))",
              stacked)
            .to_string() == "no");
  CHECK(run_q("count(relate(unique(filter_color(scene(),blue)),on))", stacked)
            .to_string() == "1");

  Scene beside = run_a(
      "add_object(object(cube,big,metal,yellow),"
      "relative(left,filter_color(scene(),red)))",
      s);
  REQUIRE(beside.size() == 3);
  CHECK(validate_scene(beside).ok());
  CHECK(run_q("exist(relate(unique(filter_color(scene(),yellow)),left))",
              beside)
            .to_string() == "no");

  // capacity
  Scene full;
  for (int i = 0; i < kMaxObjects; ++i) {
    full.objects.push_back(make_obj(i, Shape::cube, Size::small,
                                    Material::rubber, Color::red,
                                    -3.0 + 0.6 * i, 0));
  }
  try {
    run_a("add_object(object(cube,small,rubber,red),ground())", full);
    FAIL("expected capacity error");
  } catch (const Error& e) {
    CHECK(e.code() == "capacity");
  }
}

TEST_CASE("move and stacking") {
  Scene s = two_object_scene();

  Scene stacked = run_a(
      "move(filter_color(scene(),red),on(filter_color(scene(),blue)))", s);
  REQUIRE(stacked.size() == 2);
  CHECK(validate_scene(stacked).ok());
  CHECK(run_q("exist(relate(unique(filter_color(scene(),blue)),on))", stacked)
            .to_string() == "yes");

  // moving the base drops the rider back to the ground
  Scene unstacked = run_a(
      "move(filter_color(scene(),blue),relative(right,filter_color(scene(),"
      "red)))",
      stacked);
  CHECK(validate_scene(unstacked).ok());
  for (const auto& o : unstacked.objects) CHECK(o.pos.z == 0.0);
}

TEST_CASE("non-unique anchors are rejected") {
  Scene twins = make_scene({make_obj(0, Shape::cube, Size::small,
                                     Material::rubber, Color::red, -2, 0),
                            make_obj(1, Shape::cube, Size::small,
                                     Material::rubber, Color::red, 2, 0),
                            make_obj(2, Shape::sphere, Size::big,
                                     Material::metal, Color::blue, 0, 0)});
  try {
    run_a("move(filter_color(scene(),blue),on(filter_shape(scene(),cube)))",
          twins);
    FAIL("expected non-unique-anchor");
  } catch (const Error& e) {
    CHECK(e.code() == "non-unique-anchor");
  }
}

TEST_CASE("seq equals sequential execution and object-count deltas hold") {
  Rng rng(31);
  int checked = 0;
  while (checked < 60) {
    Scene s = gen_scene(rng);
    GeneratedAction two_hop = [&]() -> GeneratedAction {
      try {
        return gen_action(rng, s, 2);
      } catch (const Error&) {
        return {"", scene_node(), {}};
      }
    }();
    if (two_hop.types.empty()) continue;
    ++checked;
    REQUIRE(two_hop.program.op == Op::Seq);
    Scene composed = exec_action(two_hop.program, s);
    Scene stepped = exec_action(two_hop.program.args[1],
                                exec_action(two_hop.program.args[0], s));
    CHECK(scene_equal(composed, stepped, 0.0));
    CHECK(validate_scene(composed).ok());
  }
}

TEST_CASE("single actions: size deltas and validity on random scenes") {
  Rng rng(17);
  for (int i = 0; i < 120; ++i) {
    Scene s = gen_scene(rng);
    GeneratedAction action = [&]() -> GeneratedAction {
      try {
        return gen_action(rng, s, 1);
      } catch (const Error&) {
        return {"", scene_node(), {}};
      }
    }();
    if (action.types.empty()) continue;
    Scene out = exec_action(action.program, s);
    CHECK(validate_scene(out).ok());
    const std::string& type = action.types[0];
    if (type == "add") CHECK(out.size() == s.size() + 1);
    if (type == "remove") CHECK(out.size() == s.size() - 1);
    if (type == "change" || type == "move") CHECK(out.size() == s.size());
  }
}

TEST_CASE("executor agrees with the brute-force reference evaluator") {
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    Rng rng(seed + 1000);
    Scene s = gen_scene(rng);
    Node q = testsupport::random_question(rng);
    EvalOutcome fast = run_eval([&] { return exec_question(q, s); });
    EvalOutcome ref = run_eval([&] { return RefEval{s}.eval(q); });
    CHECK(fast == ref);
    if (fast.answer) ++compared;
  }
  CHECK(compared > 50);  // the sampler produces plenty of evaluable programs
}
