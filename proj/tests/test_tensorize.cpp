#include <cmath>

#include "actfx/error.hpp"
#include "actfx/executor.hpp"
#include "actfx/tensorize.hpp"
#include "actfx/worldgen.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace actfx;
using testsupport::make_obj;
using testsupport::make_scene;

TEST_CASE("empty scene encodes to 190 zeros") {
  const auto v = encode_scene(Scene{});
  REQUIRE(v.size() == kSceneVecDim);
  for (double x : v) CHECK(x == 0.0);
  CHECK(decode_scene(v).size() == 0);
}

TEST_CASE("slot layout for one small red rubber cube at the origin") {
  Scene s = make_scene({make_obj(0, Shape::cube, Size::small, Material::rubber,
                                 Color::red, 0, 0)});
  const auto v = encode_scene(s);
  const std::vector<double> slot0 = {1, 1, 0, 0, 1, 0, 0, 1, 1, 0,
                                     0, 0, 0, 0, 0, 0, 0, 0, 0};
  for (int i = 0; i < kSlotDim; ++i) CHECK(v[i] == slot0[i]);
  for (int i = kSlotDim; i < kSceneVecDim; ++i) CHECK(v[i] == 0.0);
}

TEST_CASE("coordinates scale by one third") {
  Scene s = make_scene({make_obj(0, Shape::sphere, Size::big, Material::metal,
                                 Color::cyan, 3.0, -1.5)});
  const auto v = encode_scene(s);
  CHECK(v[16] == doctest::Approx(1.0));
  CHECK(v[17] == doctest::Approx(-0.5));
  CHECK(v[18] == 0.0);
}

TEST_CASE("encoding is permutation-invariant") {
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    Scene s = gen_scene(rng);
    Scene shuffled = s;
    std::reverse(shuffled.objects.begin(), shuffled.objects.end());
    shuffled.canonicalize();
    CHECK(encode_scene(s) == encode_scene(shuffled));
  }
}

TEST_CASE("decode(encode(s)) round-trips, including stacked scenes") {
  Rng rng(6);
  int stacked_seen = 0;
  for (int i = 0; i < 150; ++i) {
    Scene s = gen_scene(rng);
    try {
      GeneratedAction a = gen_action(rng, s, rng.coin() ? 2 : 1);
      s = exec_action(a.program, s);
    } catch (const Error&) {
      // plain ground scene is fine too
    }
    for (const auto& o : s.objects) stacked_seen += o.pos.z > 0.0 ? 1 : 0;
    Scene back = decode_scene(encode_scene(s), 0.5);
    CHECK(scene_equal(s, back, 1e-6));
  }
  CHECK(stacked_seen > 0);
}

TEST_CASE("decode_scene is total over arbitrary vectors") {
  Rng rng(7);
  for (int i = 0; i < 300; ++i) {
    std::vector<double> v(kSceneVecDim);
    for (auto& x : v) x = rng.uniform_real(-2.0, 2.0);
    Scene s = decode_scene(v, 0.5);
    const auto report = validate_scene(s);
    CHECK(report.ok());
  }
}

TEST_CASE("categorical ties break to the lowest enum index") {
  std::vector<double> v(kSceneVecDim, 0.0);
  v[0] = 0.51;  // presence just above threshold, all logits equal
  Scene s = decode_scene(v, 0.5);
  REQUIRE(s.size() == 1);
  CHECK(s.objects[0].shape == Shape::cube);
  CHECK(s.objects[0].size == Size::small);
  CHECK(s.objects[0].material == Material::metal);
  CHECK(s.objects[0].color == Color::red);
}

TEST_CASE("tokenizer maps words and pads to 24") {
  const Vocabulary vocab = build_vocabulary();
  const auto ids = tokenize("remove the red cube", vocab);
  REQUIRE(ids.size() == kMaxTokens);
  CHECK(ids[0] == vocab.id("remove"));
  CHECK(ids[1] == vocab.id("the"));
  CHECK(ids[2] == vocab.id("red"));
  CHECK(ids[3] == vocab.id("cube"));
  for (int i = 4; i < kMaxTokens; ++i) CHECK(ids[i] == 0);

  try {
    tokenize("remove the glowing cube", vocab);
    FAIL("expected oov-token");
  } catch (const Error& e) {
    CHECK(e.code() == "oov-token");
  }

  std::string long_text = "red";
  for (int i = 0; i < 24; ++i) long_text += " red";
  try {
    tokenize(long_text, vocab);  // 25 words
    FAIL("expected sequence-too-long");
  } catch (const Error& e) {
    CHECK(e.code() == "sequence-too-long");
  }
}

TEST_CASE("vocabulary JSON round-trip and hash") {
  const Vocabulary vocab = build_vocabulary();
  CHECK(vocab.word(0) == "<pad>");
  const Vocabulary back = Vocabulary::from_json(vocab.to_json());
  CHECK(back.size() == vocab.size());
  CHECK(back.hash() == vocab.hash());
  CHECK(back.id("then") == vocab.id("then"));
  CHECK_THROWS_AS(Vocabulary::from_json("[\"first\"]"), Error);
}

TEST_CASE("answer one-hot codec is a bijection") {
  for (int i = 0; i < kAnswerCount; ++i) {
    const Answer a = Answer::from_index(i);
    const auto v = encode_answer(a);
    REQUIRE(v.size() == kAnswerCount);
    double sum = 0;
    for (double x : v) sum += x;
    CHECK(sum == 1.0);
    CHECK(decode_answer(v) == a);
  }
}
