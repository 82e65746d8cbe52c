#include <cmath>
#include <fstream>

#include "actfx/autodiff.hpp"
#include "actfx/error.hpp"
#include "actfx/layers.hpp"
#include "actfx/rng.hpp"
#include "doctest.h"

using namespace actfx;

namespace {

Tensor random_tensor(int r, int c, Rng& rng, double scale = 1.0) {
  Tensor t(r, c);
  for (auto& v : t.v) v = rng.uniform_real(-scale, scale);
  return t;
}

}  // namespace

TEST_CASE("matmul gradient matches central differences on 5x4 * 4x3") {
  Rng rng(1);
  Params params;
  params.add("a", random_tensor(5, 4, rng));
  params.add("b", random_tensor(4, 3, rng));
  Tensor target = random_tensor(5, 3, rng);

  auto f = [&](Params& p, std::map<std::string, Tensor>* grads) {
    Tape tape;
    ValueId a = tape.param(p, "a");
    ValueId b = tape.param(p, "b");
    ValueId loss = tape.squared_error(tape.matmul(a, b), target);
    if (grads) {
      tape.backward(loss);
      *grads = tape.param_grads();
    }
    return tape.value(loss).v[0];
  };
  const auto result = grad_check(f, params, 1e-5);
  CHECK(result.max_rel_err < 1e-6);
  CHECK(result.coords_checked == 32);
}

TEST_CASE("every primitive passes a gradient check in isolation") {
  Rng rng(2);
  Params params;
  params.add("x", random_tensor(4, 6, rng));
  params.add("y", random_tensor(4, 6, rng));
  params.add("bias", random_tensor(1, 6, rng));
  params.add("table", random_tensor(7, 6, rng));
  Tensor target6 = random_tensor(4, 6, rng);
  Tensor target12 = random_tensor(4, 12, rng);
  Tensor onehot = Tensor(4, 6);
  for (int i = 0; i < 4; ++i) onehot.at(i, i % 6) = 1.0;
  const std::vector<double> mask = {1.0, 0.0, 1.0, 1.0};
  const std::vector<int> tokens = {3, 0, 6, 5};

  struct Case {
    const char* name;
    std::function<ValueId(Tape&, Params&)> build;
  };
  const Case cases[] = {
      {"add+tanh",
       [&](Tape& t, Params& p) {
         return t.squared_error(
             t.tanh_of(t.add(t.param(p, "x"), t.param(p, "y"))), target6);
       }},
      {"add_bias+sigmoid",
       [&](Tape& t, Params& p) {
         return t.squared_error(
             t.sigmoid_of(t.add_bias(t.param(p, "x"), t.param(p, "bias"))),
             target6);
       }},
      {"mul+relu",
       [&](Tape& t, Params& p) {
         return t.squared_error(
             t.relu_of(t.mul(t.param(p, "x"), t.param(p, "y"))), target6);
       }},
      {"concat+scale",
       [&](Tape& t, Params& p) {
         return t.scale(
             t.squared_error(
                 t.concat_cols(t.param(p, "x"), t.param(p, "y")), target12),
             0.7);
       }},
      {"slice",
       [&](Tape& t, Params& p) {
         Tensor target(4, 3);
         return t.squared_error(t.slice_cols(t.param(p, "x"), 2, 5), target);
       }},
      {"embed_rows",
       [&](Tape& t, Params& p) {
         return t.squared_error(t.embed_rows(t.param(p, "table"), tokens),
                                target6);
       }},
      {"row_scale",
       [&](Tape& t, Params& p) {
         return t.squared_error(t.row_scale(t.param(p, "x"), {0.5, 1.5, 0.0, 2.0}),
                                target6);
       }},
      {"softmax_ce_masked",
       [&](Tape& t, Params& p) {
         return t.softmax_cross_entropy(t.param(p, "x"), onehot, mask);
       }},
      {"sigmoid_ce",
       [&](Tape& t, Params& p) {
         return t.sigmoid_cross_entropy(t.param(p, "x"), onehot);
       }},
      {"sse_masked",
       [&](Tape& t, Params& p) {
         return t.squared_error(t.param(p, "x"), target6, mask);
       }},
  };

  for (const auto& c : cases) {
    CAPTURE(c.name);
    auto f = [&](Params& p, std::map<std::string, Tensor>* grads) {
      Tape tape;
      ValueId loss = c.build(tape, p);
      if (grads) {
        tape.backward(loss);
        *grads = tape.param_grads();
      }
      return tape.value(loss).v[0];
    };
    const auto result = grad_check(f, params, 1e-5);
    CHECK(result.max_rel_err < 1e-6);
  }
}

TEST_CASE("uniform softmax cross entropy equals ln k") {
  Tape tape;
  Tensor logits(1, 5);  // all equal
  Tensor onehot(1, 5);
  onehot.v[2] = 1.0;
  ValueId loss =
      tape.softmax_cross_entropy(tape.input(logits), onehot);
  CHECK(tape.value(loss).v[0] == doctest::Approx(std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("d tanh / dx at 0 is exactly 1") {
  Params params;
  Tensor x(1, 1);
  params.add("x", x);
  Tape tape;
  ValueId loss = tape.tanh_of(tape.param(params, "x"));
  tape.backward(loss);
  CHECK(tape.param_grads().at("x").v[0] == 1.0);
}

TEST_CASE("linear functions gradient-check almost exactly") {
  Params params;
  Rng rng(3);
  params.add("w", random_tensor(1, 8, rng));
  Tensor direction = random_tensor(1, 8, rng);
  auto f = [&](Params& p, std::map<std::string, Tensor>* grads) {
    Tape tape;
    ValueId w = tape.param(p, "w");
    ValueId loss = tape.squared_error(
        tape.add(w, tape.scale(tape.input(direction), 2.0)), Tensor(1, 8));
    // squared error is quadratic; to keep f linear take only one matmul
    // against a constant vector instead:
    (void)loss;
    Tensor ones(8, 1);
    for (auto& v : ones.v) v = 1.0;
    ValueId lin = tape.matmul(w, tape.input(ones));
    if (grads) {
      tape.backward(lin);
      *grads = tape.param_grads();
    }
    return tape.value(lin).v[0];
  };
  const auto result = grad_check(f, params, 1e-5);
  CHECK(result.max_rel_err < 1e-9);
}

TEST_CASE("frozen tensors are excluded from grad_check") {
  Params params;
  Rng rng(4);
  params.add("w", random_tensor(2, 2, rng));
  params.add("frozen", random_tensor(2, 2, rng), /*trainable=*/false);
  auto f = [&](Params& p, std::map<std::string, Tensor>* grads) {
    Tape tape;
    ValueId loss = tape.squared_error(
        tape.mul(tape.param(p, "w"), tape.param(p, "frozen")), Tensor(2, 2));
    if (grads) {
      tape.backward(loss);
      *grads = tape.param_grads();
    }
    return tape.value(loss).v[0];
  };
  const auto result = grad_check(f, params, 1e-5);
  CHECK(result.coords_checked == 4);  // only w
}

TEST_CASE("optimizer steps") {
  SUBCASE("one sgd step on f(t)=t^2 from t=1 with lr 0.1 gives 0.8") {
    Params params;
    Tensor t(1, 1);
    t.v[0] = 1.0;
    params.add("t", t);
    OptimizerConfig cfg;
    cfg.kind = OptimizerConfig::Kind::Sgd;
    cfg.learning_rate = 0.1;
    Optimizer opt(cfg);
    Tensor g(1, 1);
    g.v[0] = 2.0;  // d/dt t^2 at 1
    opt.step(params, {{"t", g}});
    CHECK(params.at("t").v[0] == doctest::Approx(0.8).epsilon(1e-15));
  }

  SUBCASE("zero gradient leaves parameters bitwise unchanged") {
    Rng rng(5);
    Params params;
    params.add("w", random_tensor(3, 3, rng));
    const Tensor before = params.at("w");
    Optimizer opt(OptimizerConfig{});
    opt.step(params, {{"w", Tensor(3, 3)}});
    // adam with zero gradient: m and v stay zero, update is exactly zero
    CHECK(params.at("w") == before);
  }

  SUBCASE("frozen tensors never change") {
    Rng rng(6);
    Params params;
    params.add("w", random_tensor(3, 3, rng));
    params.add("dec", random_tensor(3, 3, rng), /*trainable=*/false);
    const Tensor before = params.at("dec");
    Optimizer opt(OptimizerConfig{});
    Tensor g = random_tensor(3, 3, rng);
    for (int i = 0; i < 20; ++i) {
      opt.step(params, {{"w", g}, {"dec", g}});
    }
    CHECK(params.at("dec") == before);
    CHECK(params.at("w") != before);
  }
}

TEST_CASE("replaying a tape yields bit-identical losses") {
  Rng rng(7);
  Params params;
  add_dense(params, "l1", 6, 8, rng);
  add_dense(params, "l2", 8, 4, rng);
  Tensor input = random_tensor(5, 6, rng);
  Tensor target = random_tensor(5, 4, rng);

  auto run = [&]() {
    Tape tape;
    ValueId h = tape.tanh_of(dense(tape, params, "l1", tape.input(input)));
    ValueId out = dense(tape, params, "l2", h);
    return tape.value(tape.squared_error(out, target)).v[0];
  };
  const double first = run();
  for (int i = 0; i < 5; ++i) {
    CHECK(run() == first);  // 0 ULP difference
  }
}

TEST_CASE("lstm cell composite gradient check") {
  Rng rng(8);
  Params params;
  const int input_dim = 5, hidden = 7, batch = 3;
  add_lstm(params, "cell", input_dim, hidden, rng);
  params.add("emb", embedding_uniform(9, input_dim, rng));
  Tensor target = random_tensor(batch, hidden, rng);
  const std::vector<int> step1 = {1, 4, 8};
  const std::vector<int> step2 = {2, 0, 3};
  const std::vector<double> keep2 = {1.0, 0.0, 1.0};  // row 2 is padding

  auto f = [&](Params& p, std::map<std::string, Tensor>* grads) {
    Tape tape;
    LstmState state = lstm_initial_state(tape, batch, hidden);
    ValueId table = tape.param(p, "emb");
    state = lstm_step(tape, p, "cell", hidden, tape.embed_rows(table, step1),
                      state, std::vector<double>(batch, 1.0));
    state = lstm_step(tape, p, "cell", hidden, tape.embed_rows(table, step2),
                      state, keep2);
    ValueId loss = tape.squared_error(state.c, target);
    if (grads) {
      tape.backward(loss);
      *grads = tape.param_grads();
    }
    return tape.value(loss).v[0];
  };
  // composite threshold; primitives in isolation hold the tighter 1e-6
  const auto result = grad_check(f, params, 1e-5);
  CHECK(result.max_rel_err < 1e-4);
}

TEST_CASE("params serialization round-trips with the ARLW1 header") {
  Rng rng(9);
  Params params;
  params.add("enc.w", random_tensor(4, 3, rng));
  params.add("dec.w", random_tensor(2, 5, rng), /*trainable=*/false);
  const std::string path = "/tmp/actfx_test_params.arlw";
  params.save(path);

  std::ifstream in(path);
  std::string magic;
  std::getline(in, magic);
  CHECK(magic == "ARLW1");
  in.close();

  Params back = Params::load(path);
  CHECK(back == params);
  CHECK_FALSE(back.trainable("dec.w"));
  CHECK_THROWS_AS(Params::load("/tmp/definitely-missing.arlw"), Error);
}

TEST_CASE("shape mismatches raise bad-shape naming the op") {
  Tape tape;
  ValueId a = tape.input(Tensor(2, 3));
  ValueId b = tape.input(Tensor(2, 3));
  CHECK_THROWS_WITH_AS(tape.matmul(a, b),
                       "matmul: incompatible shapes 2x3 and 2x3", Error);
}
