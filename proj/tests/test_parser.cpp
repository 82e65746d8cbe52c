#include "actfx/error.hpp"
#include "actfx/parser.hpp"
#include "actfx/rng.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace actfx;

namespace {

const char* kMetalRedCount =
    "count(filter_color(filter_material(scene(),metal),red))";

}  // namespace

TEST_CASE("parses the canonical nested-call example") {
  Node p = parse_program(kMetalRedCount);
  REQUIRE(p.op == Op::Count);
  REQUIRE(p.args.size() == 1);
  const Node& fc = p.args[0];
  CHECK(fc.op == Op::FilterColor);
  CHECK(fc.args[1].word == "red");
  const Node& fm = fc.args[0];
  CHECK(fm.op == Op::FilterMaterial);
  CHECK(fm.args[1].word == "metal");
  CHECK(fm.args[0].op == Op::SceneAll);

  CHECK(render_program(p) == kMetalRedCount);
  CHECK(is_question_root(p));
}

TEST_CASE("whitespace-insensitive parsing") {
  Node a = parse_program(" count( filter_color(\n scene() , red ) ) ");
  Node b = parse_program("count(filter_color(scene(),red))");
  CHECK(a == b);
}

TEST_CASE("root typing rules") {
  Node scene_root = parse_program("scene()");
  CHECK_THROWS_WITH_AS(check_question(scene_root),
                       "ill-typed node scene: not a question root", Error);
  CHECK(is_action_root(parse_program("remove(filter_color(scene(),red))")));
  CHECK_FALSE(is_question_root(parse_program("seq()")));
  CHECK(is_action_root(parse_program("seq()")));
}

TEST_CASE("enum membership is type-checked") {
  try {
    parse_program("count(filter_color(scene(),shiny))");
    FAIL("expected type-error");
  } catch (const Error& e) {
    CHECK(e.code() == "type-error");
  }
}

TEST_CASE("syntax errors carry byte offsets") {
  try {
    parse_program("count(scene()");
    FAIL("expected syntax-error");
  } catch (const Error& e) {
    CHECK(e.code() == "syntax-error");
    CHECK(e.offset() != Error::kNoOffset);
  }
  CHECK_THROWS_AS(parse_program("count(scene())!"), Error);
  CHECK_THROWS_AS(parse_program("cnt(scene())"), Error);
  CHECK_THROWS_AS(parse_program("count(scène())"), Error);  // non-ASCII
}

TEST_CASE("seq composes at most two non-seq actions") {
  CHECK(is_action_root(parse_program(
      "seq(remove(filter_color(scene(),red)),change_color(scene(),cyan))")));
  try {
    parse_program(
        "seq(seq(remove(scene()),move(scene(),ground())),remove(scene()))");
    FAIL("expected type-error");
  } catch (const Error& e) {
    CHECK(e.code() == "type-error");
  }
}

TEST_CASE("action programs render canonically") {
  const char* text =
      "seq(remove(filter_color(scene(),red)),"
      "change_color(filter_shape(scene(),cube),cyan))";
  CHECK(render_program(parse_program(text)) == text);

  const char* add_text =
      "add_object(object(cube,small,rubber,red),"
      "relative(left,filter_color(scene(),blue)))";
  CHECK(render_program(parse_program(add_text)) == add_text);

  const char* abs_text = "move(scene(),absolute(1.5,-2))";
  CHECK(render_program(parse_program(abs_text)) == abs_text);
}

TEST_CASE("parse after render is identity on random ASTs") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    Node p = testsupport::random_question(rng);
    const std::string text = render_program(p);
    Node back = parse_program(text);
    CHECK(back == p);
    CHECK(render_program(back) == text);  // canonical form is idempotent
  }
}

TEST_CASE("placement typing") {
  CHECK_THROWS_AS(parse_program("move(scene(),relative(on,scene()))"), Error);
  CHECK_THROWS_AS(parse_program("add_object(object(cube,small),ground())"),
                  Error);
  CHECK_THROWS_AS(parse_program("count(5)"), Error);
  CHECK_THROWS_AS(parse_program("greater_than(count(scene()),scene())"),
                  Error);
}
