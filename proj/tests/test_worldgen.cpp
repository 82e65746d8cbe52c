#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "actfx/error.hpp"
#include "actfx/executor.hpp"
#include "actfx/parser.hpp"
#include "actfx/worldgen.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace actfx;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("gen_scene is deterministic and always valid") {
  Rng a(0), b(0);
  Scene sa = gen_scene(a);
  Scene sb = gen_scene(b);
  CHECK(sa.objects.size() == sb.objects.size());
  CHECK(scene_to_json(sa) == scene_to_json(sb));  // bit-identical

  Rng rng(123);
  for (int i = 0; i < 2000; ++i) {
    Scene s = gen_scene(rng);
    CHECK(s.size() >= 3);
    CHECK(s.size() <= kMaxObjects);
    CHECK(validate_scene(s).ok());
  }
}

TEST_CASE("attribute marginals are within 3 points of uniform") {
  Rng rng(99);
  std::array<int, kColorCount> colors{};
  std::array<int, kShapeCount> shapes{};
  std::array<int, kSizeCount> sizes{};
  int total = 0;
  for (int i = 0; i < 10000; ++i) {
    Scene s = gen_scene(rng);
    for (const auto& o : s.objects) {
      ++colors[static_cast<std::size_t>(o.color)];
      ++shapes[static_cast<std::size_t>(o.shape)];
      ++sizes[static_cast<std::size_t>(o.size)];
      ++total;
    }
  }
  for (int c : colors) {
    CHECK(std::abs(static_cast<double>(c) / total - 1.0 / 8) < 0.03);
  }
  for (int c : shapes) {
    CHECK(std::abs(static_cast<double>(c) / total - 1.0 / 3) < 0.03);
  }
  for (int c : sizes) {
    CHECK(std::abs(static_cast<double>(c) / total - 1.0 / 2) < 0.03);
  }
}

TEST_CASE("generated actions execute and reference uniquely") {
  Rng rng(7);
  for (int i = 0; i < 150; ++i) {
    Scene s = gen_scene(rng);
    GeneratedAction a = [&]() -> GeneratedAction {
      try {
        return gen_action(rng, s, 1);
      } catch (const Error& e) {
        REQUIRE(e.code() == "no-referent");
        return {"", scene_node(), {}};
      }
    }();
    if (a.types.empty()) continue;
    REQUIRE(a.types.size() == 1);
    Scene post = exec_action(a.program, s);
    CHECK(validate_scene(post).ok());

    // the target set of remove/change/move resolves to exactly one object
    if (a.types[0] != "add") {
      const Node& target_set = a.program.args[0];
      Answer n = exec_question(call(Op::Count, {target_set}), s);
      CHECK(n.to_string() == "1");
    }
    // round-trip through text form
    CHECK(parse_program(render_program(a.program)) == a.program);
  }
}

TEST_CASE("two-hop actions compose two distinct types") {
  Rng rng(8);
  int produced = 0;
  while (produced < 60) {
    Scene s = gen_scene(rng);
    try {
      GeneratedAction a = gen_action(rng, s, 2);
      REQUIRE(a.types.size() == 2);
      CHECK(a.types[0] != a.types[1]);
      CHECK(a.program.op == Op::Seq);
      CHECK(a.text.find(" then ") != std::string::npos);
      ++produced;
    } catch (const Error&) {
    }
  }
}

TEST_CASE("synonymous texts map to one program family") {
  // The synonym table folds surface variants onto canonical attribute words:
  // a "shiny ball" referring expression and a "metallic sphere" one produce
  // the identical filter chain.
  Rng rng(9);
  Scene s = testsupport::make_scene(
      {testsupport::make_obj(0, Shape::sphere, Size::small, Material::metal,
                             Color::red, -2, 0),
       testsupport::make_obj(1, Shape::cube, Size::big, Material::rubber,
                             Color::blue, 2, 0)});
  std::set<std::string> texts;
  std::set<std::string> programs;
  for (int i = 0; i < 300; ++i) {
    GeneratedAction a = gen_action(rng, s, 1, {"remove"});
    if (a.text.find("sphere") != std::string::npos ||
        a.text.find("ball") != std::string::npos) {
      texts.insert(a.text);
      programs.insert(render_program(a.program));
    }
  }
  bool saw_ball = false, saw_sphere = false;
  for (const auto& t : texts) {
    saw_ball = saw_ball || t.find("ball") != std::string::npos;
    saw_sphere = saw_sphere || t.find("sphere") != std::string::npos;
  }
  CHECK(saw_ball);
  CHECK(saw_sphere);
  // every program refers to the sphere by the canonical word
  for (const auto& p : programs) {
    CHECK(p.find("sphere") != std::string::npos);
    CHECK(p.find("ball") == std::string::npos);
  }
}

TEST_CASE("generated questions reproduce executor answers") {
  Rng rng(10);
  std::set<std::string> rtypes;
  for (int i = 0; i < 200; ++i) {
    Scene s = gen_scene(rng);
    GeneratedQuestion q = gen_question(rng, s, 1);
    rtypes.insert(q.reasoning_type);
    CHECK(exec_question(q.program, s) == q.answer);
    CHECK(parse_program(render_program(q.program)) == q.program);
  }
  CHECK(rtypes.count("count"));
  CHECK(rtypes.count("exist"));
  CHECK(rtypes.count("query_attribute"));
  CHECK(rtypes.count("compare_attribute"));
  CHECK(rtypes.count("compare_integer"));
}

TEST_CASE("two-hop questions use and/or/not") {
  Rng rng(11);
  std::set<std::string> rtypes;
  for (int i = 0; i < 120; ++i) {
    Scene s = gen_scene(rng);
    GeneratedQuestion q = gen_question(rng, s, 2);
    rtypes.insert(q.reasoning_type);
    CHECK(exec_question(q.program, s) == q.answer);
    const std::string text = render_program(q.program);
    const bool logical = text.find("and(") != std::string::npos ||
                         text.find("or(") != std::string::npos ||
                         text.find("not(") != std::string::npos;
    CHECK(logical);
  }
  CHECK(rtypes == std::set<std::string>{"and", "or", "not"});
}

TEST_CASE("empty-match existence questions answer no") {
  Scene s = testsupport::make_scene(
      {testsupport::make_obj(0, Shape::cube, Size::small, Material::rubber,
                             Color::red, 0, 0)});
  CHECK(exec_question(parse_program("exist(filter_color(scene(),purple))"), s)
            .to_string() == "no");
}

TEST_CASE("split generation: determinism, balance, oracle consistency") {
  GenConfig cfg;
  cfg.seed = 7;
  cfg.train_count = 240;

  const auto records = generate_split(cfg, "train");
  REQUIRE(records.size() == 240);

  // balance: 4 action types differ by at most 1
  std::map<std::string, int> counts;
  for (const auto& r : records) {
    REQUIRE(r.action_types.size() == 1);
    counts[r.action_types[0]] += 1;
  }
  REQUIRE(counts.size() == 4);
  int lo = 1 << 30, hi = 0;
  for (const auto& [k, v] : counts) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(hi - lo <= 1);

  // oracle consistency on every record
  for (const auto& r : records) {
    Scene post = exec_action(parse_program(r.action_program), r.scene_pre);
    CHECK(scene_equal(post, r.scene_post, 1e-9));
    CHECK(exec_question(parse_program(r.question_program), r.scene_post) ==
          r.answer);
  }

  // determinism: regenerating yields identical serialized records
  const auto again = generate_split(cfg, "train");
  REQUIRE(again.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(record_to_json(records[i], false) ==
          record_to_json(again[i], false));
  }
}

TEST_CASE("two-hop splits carry the right structure") {
  GenConfig cfg;
  cfg.seed = 3;
  cfg.test_2hop_ta_count = 60;
  cfg.test_2hop_qh_count = 60;

  const auto ta = generate_split(cfg, "test_2hop_ta");
  std::set<std::string> pairs;
  for (const auto& r : ta) {
    REQUIRE(r.action_types.size() == 2);
    CHECK(r.action_types[0] != r.action_types[1]);
    std::string key = r.action_types[0] < r.action_types[1]
                          ? r.action_types[0] + "+" + r.action_types[1]
                          : r.action_types[1] + "+" + r.action_types[0];
    pairs.insert(key);
  }
  CHECK(pairs.size() == 6);

  const auto qh = generate_split(cfg, "test_2hop_qh");
  for (const auto& r : qh) {
    REQUIRE(r.action_types.size() == 1);
    const bool logical = r.reasoning_type == "and" ||
                         r.reasoning_type == "or" || r.reasoning_type == "not";
    CHECK(logical);
  }
}

TEST_CASE("dataset files: byte-identical reruns, blind mode, tokenizability") {
  namespace fs = std::filesystem;
  GenConfig cfg;
  cfg.seed = 21;
  cfg.train_count = 60;
  cfg.val_count = 20;
  cfg.test_ordinary_count = 20;
  cfg.test_2hop_ta_count = 12;
  cfg.test_2hop_qh_count = 12;

  const std::string dir1 = "/tmp/actfx_ds_a";
  const std::string dir2 = "/tmp/actfx_ds_b";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  gen_dataset(cfg, dir1);
  gen_dataset(cfg, dir2);
  for (const auto& split : split_names()) {
    CHECK(read_file(dir1 + "/" + split + ".jsonl") ==
          read_file(dir2 + "/" + split + ".jsonl"));
  }
  CHECK(read_file(dir1 + "/vocab.json") == read_file(dir2 + "/vocab.json"));
  CHECK(read_file(dir1 + "/meta.json") == read_file(dir2 + "/meta.json"));

  // loaded records match the in-memory generation and tokenize cleanly
  const Vocabulary vocab = build_vocabulary();
  const auto train = load_records(dir1 + "/train.jsonl");
  REQUIRE(train.size() == 60);
  for (const auto& r : train) {
    CHECK(r.has_oracle);
    CHECK_NOTHROW(tokenize(r.action_text, vocab));
    CHECK_NOTHROW(tokenize(r.question_text, vocab));
  }

  // blind mode strips oracle fields from test splits only
  GenConfig blind_cfg = cfg;
  blind_cfg.blind_tests = true;
  const std::string dir3 = "/tmp/actfx_ds_blind";
  fs::remove_all(dir3);
  gen_dataset(blind_cfg, dir3);
  const auto blind = load_records(dir3 + "/test_ordinary.jsonl");
  for (const auto& r : blind) {
    CHECK_FALSE(r.has_oracle);
    CHECK(r.action_program.empty());
  }
  const auto still_train = load_records(dir3 + "/train.jsonl");
  for (const auto& r : still_train) CHECK(r.has_oracle);
  CHECK(read_file(dir3 + "/train.jsonl") == read_file(dir1 + "/train.jsonl"));
}
