#include "actfx/learner.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

#include "actfx/error.hpp"
#include "actfx/executor.hpp"
#include "actfx/layers.hpp"
#include "actfx/parser.hpp"
#include "json.hpp"

namespace actfx {

void validate_config(const TrainConfig& cfg) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0)) {
      throw Error("bad-config", std::string(name) + " must be positive");
    }
  };
  positive(cfg.batch_size, "batch_size");
  positive(cfg.learning_rate, "learning_rate");
  positive(cfg.vector_length, "vector_length");
  positive(cfg.embedding_size, "embedding_size");
  positive(cfg.stage1_pairs, "stage1_pairs");
  positive(cfg.patience, "patience");
  if (cfg.stage1_epochs < 0 || cfg.stage2_epochs < 0) {
    throw Error("bad-config", "epoch counts cannot be negative");
  }
  if (cfg.lambda_coord < 0 || cfg.identity_fraction < 0 ||
      cfg.aux_code_weight < 0) {
    throw Error("bad-config", "loss weights cannot be negative");
  }
  if (cfg.optimizer != "adam" && cfg.optimizer != "sgd") {
    throw Error("bad-config", "optimizer must be adam or sgd");
  }
}

namespace {

OptimizerConfig optimizer_config(const TrainConfig& cfg) {
  OptimizerConfig out;
  out.kind = cfg.optimizer == "sgd" ? OptimizerConfig::Kind::Sgd
                                    : OptimizerConfig::Kind::Adam;
  out.learning_rate = cfg.learning_rate;
  return out;
}

void init_encoder(Params& params, int vector_length, Rng& rng) {
  add_dense(params, "enc.l1", 2 * kSceneVecDim, kHiddenWidth, rng);
  add_dense(params, "enc.l2", kHiddenWidth, kHiddenWidth, rng);
  add_dense(params, "enc.out", kHiddenWidth, vector_length, rng);
}

void init_decoder(Params& params, int vector_length, Rng& rng) {
  add_dense(params, "dec.l1", kSceneVecDim + vector_length, kHiddenWidth, rng);
  add_dense(params, "dec.l2", kHiddenWidth, kHiddenWidth, rng);
  add_dense(params, "dec.out", kHiddenWidth, kSceneVecDim, rng);
}

void init_stage2_params(Params& params, int vocab_size, int embedding_size,
                        int vector_length, Rng& rng) {
  params.add("emb", embedding_uniform(vocab_size, embedding_size, rng));
  add_lstm(params, "lstm", embedding_size, kLstmHidden, rng);
  add_dense(params, "proj", kLstmHidden, vector_length, rng);
}

ValueId mlp3(Tape& tape, Params& params, const std::string& prefix,
             ValueId x) {
  ValueId h1 = tape.tanh_of(dense(tape, params, prefix + ".l1", x));
  ValueId h2 = tape.tanh_of(dense(tape, params, prefix + ".l2", h1));
  return dense(tape, params, prefix + ".out", h2);
}

ValueId decoder_forward(Tape& tape, Params& params, ValueId pre,
                        ValueId action_code) {
  return mlp3(tape, params, "dec", tape.concat_cols(pre, action_code));
}

struct EncodedTargets {
  std::array<Tensor, kMaxObjects> presence;
  std::array<Tensor, kMaxObjects> shape;
  std::array<Tensor, kMaxObjects> size;
  std::array<Tensor, kMaxObjects> material;
  std::array<Tensor, kMaxObjects> color;
  std::array<Tensor, kMaxObjects> coords;
  std::array<std::vector<double>, kMaxObjects> mask;
};

EncodedTargets split_targets(
    const std::vector<const std::vector<double>*>& rows) {
  const int batch = static_cast<int>(rows.size());
  EncodedTargets t;
  for (int slot = 0; slot < kMaxObjects; ++slot) {
    const int base = slot * kSlotDim;
    t.presence[slot] = Tensor(batch, 1);
    t.shape[slot] = Tensor(batch, kShapeCount);
    t.size[slot] = Tensor(batch, kSizeCount);
    t.material[slot] = Tensor(batch, kMaterialCount);
    t.color[slot] = Tensor(batch, kColorCount);
    t.coords[slot] = Tensor(batch, 3);
    t.mask[slot].resize(static_cast<std::size_t>(batch));
    for (int i = 0; i < batch; ++i) {
      const std::vector<double>& row = *rows[static_cast<std::size_t>(i)];
      t.presence[slot].at(i, 0) = row[base];
      t.mask[slot][static_cast<std::size_t>(i)] = row[base];
      for (int j = 0; j < kShapeCount; ++j) {
        t.shape[slot].at(i, j) = row[base + 1 + j];
      }
      for (int j = 0; j < kSizeCount; ++j) {
        t.size[slot].at(i, j) = row[base + 4 + j];
      }
      for (int j = 0; j < kMaterialCount; ++j) {
        t.material[slot].at(i, j) = row[base + 6 + j];
      }
      for (int j = 0; j < kColorCount; ++j) {
        t.color[slot].at(i, j) = row[base + 8 + j];
      }
      for (int j = 0; j < 3; ++j) {
        t.coords[slot].at(i, j) = row[base + 16 + j];
      }
    }
  }
  return t;
}

/// Sum over slots of presence BCE + masked categorical CEs + weighted masked
/// coordinate error. Callers divide by the batch size.
ValueId scene_loss_on_tape(Tape& tape, ValueId pred,
                           const EncodedTargets& targets, double lambda_coord) {
  ValueId total = -1;
  auto accumulate = [&](ValueId term) {
    total = total < 0 ? term : tape.add(total, term);
  };
  for (int slot = 0; slot < kMaxObjects; ++slot) {
    const int base = slot * kSlotDim;
    accumulate(tape.sigmoid_cross_entropy(
        tape.slice_cols(pred, base, base + 1), targets.presence[slot]));
    const auto& mask = targets.mask[slot];
    bool any_present = false;
    for (double m : mask) any_present = any_present || m > 0.0;
    if (!any_present) continue;
    accumulate(tape.softmax_cross_entropy(
        tape.slice_cols(pred, base + 1, base + 4), targets.shape[slot], mask));
    accumulate(tape.softmax_cross_entropy(
        tape.slice_cols(pred, base + 4, base + 6), targets.size[slot], mask));
    accumulate(tape.softmax_cross_entropy(
        tape.slice_cols(pred, base + 6, base + 8), targets.material[slot],
        mask));
    accumulate(tape.softmax_cross_entropy(
        tape.slice_cols(pred, base + 8, base + 16), targets.color[slot], mask));
    if (lambda_coord > 0.0) {
      accumulate(tape.scale(
          tape.squared_error(tape.slice_cols(pred, base + 16, base + 19),
                             targets.coords[slot], mask),
          lambda_coord));
    }
  }
  return total;
}

Tensor rows_tensor(const std::vector<const std::vector<double>*>& rows) {
  const int batch = static_cast<int>(rows.size());
  const int width = static_cast<int>(rows[0]->size());
  Tensor t(batch, width);
  for (int i = 0; i < batch; ++i) {
    std::copy(rows[static_cast<std::size_t>(i)]->begin(),
              rows[static_cast<std::size_t>(i)]->end(),
              t.v.begin() + static_cast<std::size_t>(i) * width);
  }
  return t;
}

/// Presence heads are logits; squash them so decode_scene's 0.5 threshold
/// applies in probability space.
void squash_presence(std::vector<double>& row) {
  for (int slot = 0; slot < kMaxObjects; ++slot) {
    double& p = row[static_cast<std::size_t>(slot * kSlotDim)];
    p = 1.0 / (1.0 + std::exp(-p));
  }
}

struct PreparedPairs {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> post;
  std::vector<Scene> post_scenes;
  std::size_t size() const { return pre.size(); }
};

PreparedPairs prepare_pairs(const std::vector<ScenePairSample>& pairs) {
  PreparedPairs out;
  out.pre.reserve(pairs.size());
  for (const auto& p : pairs) {
    out.pre.push_back(encode_scene(p.pre));
    out.post.push_back(encode_scene(p.post));
    out.post_scenes.push_back(p.post);
  }
  return out;
}

std::vector<ScenePairSample> with_identity_pairs(
    const std::vector<ScenePairSample>& pairs, double fraction) {
  std::vector<ScenePairSample> out = pairs;
  const int extra = static_cast<int>(
      std::lround(fraction * static_cast<double>(pairs.size())));
  for (int i = 0; i < extra && !pairs.empty(); ++i) {
    const Scene& s = pairs[static_cast<std::size_t>(i) % pairs.size()].pre;
    out.push_back({s, s});
  }
  return out;
}

const std::vector<std::string>& identity_texts() {
  static const std::vector<std::string> texts = {
      "do nothing", "leave the scene as it is", "keep everything unchanged"};
  return texts;
}

std::vector<SampleRecord> with_identity_records(
    const std::vector<SampleRecord>& records, double fraction) {
  std::vector<SampleRecord> out = records;
  const int extra = static_cast<int>(
      std::lround(fraction * static_cast<double>(records.size())));
  for (int i = 0; i < extra && !records.empty(); ++i) {
    const auto& base = records[static_cast<std::size_t>(i) % records.size()];
    SampleRecord r;
    r.id = -1 - i;
    r.scene_pre = base.scene_pre;
    r.scene_post = base.scene_pre;
    r.action_text =
        identity_texts()[static_cast<std::size_t>(i) % identity_texts().size()];
    r.action_program = "seq()";
    r.action_types = {"none"};
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<int> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<int> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
  for (std::size_t i = n; i > 1; --i) {
    const int j = rng.uniform_int(0, static_cast<int>(i) - 1);
    std::swap(idx[i - 1], idx[static_cast<std::size_t>(j)]);
  }
  return idx;
}

double stage1_batch_accuracy(Params& params, const PreparedPairs& data,
                             std::size_t limit) {
  const std::size_t n = std::min(limit, data.size());
  int correct = 0;
  for (std::size_t begin = 0; begin < n; begin += 64) {
    const std::size_t end = std::min(n, begin + 64);
    std::vector<const std::vector<double>*> pre, post;
    for (std::size_t i = begin; i < end; ++i) {
      pre.push_back(&data.pre[i]);
      post.push_back(&data.post[i]);
    }
    Tape tape;
    ValueId vpre = tape.input(rows_tensor(pre));
    ValueId vpost = tape.input(rows_tensor(post));
    ValueId code = mlp3(tape, params, "enc", tape.concat_cols(vpre, vpost));
    ValueId pred = decoder_forward(tape, params, vpre, code);
    const Tensor& y = tape.value(pred);
    for (std::size_t i = begin; i < end; ++i) {
      std::vector<double> row(
          y.v.begin() + (i - begin) * kSceneVecDim,
          y.v.begin() + (i - begin + 1) * kSceneVecDim);
      squash_presence(row);
      if (scene_equal(decode_scene(row, 0.5), data.post_scenes[i], 0.5)) {
        ++correct;
      }
    }
  }
  return n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n);
}

}  // namespace

double scene_loss_value(const std::vector<double>& pred,
                        const std::vector<double>& target,
                        double lambda_coord) {
  if (pred.size() != kSceneVecDim || target.size() != kSceneVecDim) {
    throw Error("bad-shape", "scene_loss expects length-190 vectors");
  }
  Tape tape;
  Tensor p(1, kSceneVecDim);
  p.v = pred;
  ValueId pv = tape.input(std::move(p));
  const std::vector<const std::vector<double>*> rows = {&target};
  ValueId loss =
      scene_loss_on_tape(tape, pv, split_targets(rows), lambda_coord);
  return tape.value(loss).v[0];
}

Stage1Result train_stage1(const std::vector<ScenePairSample>& pairs,
                          const std::vector<ScenePairSample>& val_pairs,
                          const TrainConfig& cfg) {
  validate_config(cfg);
  if (pairs.empty()) throw Error("bad-config", "stage-1 needs training pairs");

  Stage1Model model;
  model.vector_length = cfg.vector_length;
  Rng init_rng = Rng::substream(cfg.seed, 11, 0);
  init_encoder(model.params, cfg.vector_length, init_rng);
  init_decoder(model.params, cfg.vector_length, init_rng);

  const PreparedPairs train =
      prepare_pairs(with_identity_pairs(pairs, cfg.identity_fraction));
  const PreparedPairs val = prepare_pairs(val_pairs);

  Optimizer opt(optimizer_config(cfg));
  History history;
  Params best_params = model.params;
  double best_val = -1.0;
  int since_best = 0;

  for (int epoch = 0; epoch < cfg.stage1_epochs; ++epoch) {
    Rng epoch_rng =
        Rng::substream(cfg.seed, 12, static_cast<std::uint64_t>(epoch));
    const auto order = shuffled_indices(train.size(), epoch_rng);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(
          order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      std::vector<const std::vector<double>*> pre, post;
      for (std::size_t i = begin; i < end; ++i) {
        pre.push_back(&train.pre[static_cast<std::size_t>(order[i])]);
        post.push_back(&train.post[static_cast<std::size_t>(order[i])]);
      }
      Tape tape;
      ValueId vpre = tape.input(rows_tensor(pre));
      ValueId vpost = tape.input(rows_tensor(post));
      ValueId code =
          mlp3(tape, model.params, "enc", tape.concat_cols(vpre, vpost));
      ValueId pred = decoder_forward(tape, model.params, vpre, code);
      ValueId loss = scene_loss_on_tape(tape, pred, split_targets(post),
                                        cfg.lambda_coord);
      loss = tape.scale(loss, 1.0 / static_cast<double>(pre.size()));
      tape.backward(loss);
      opt.step(model.params, tape.param_grads());
      loss_sum += tape.value(loss).v[0] * static_cast<double>(pre.size());
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.loss = loss_sum / static_cast<double>(train.size());
    stats.train_scene_acc = stage1_batch_accuracy(model.params, train, 500);
    stats.val_scene_acc =
        val.size() ? stage1_batch_accuracy(model.params, val, val.size()) : 0.0;
    history.push_back(stats);

    if (!val_pairs.empty()) {
      if (stats.val_scene_acc > best_val + 1e-12) {
        best_val = stats.val_scene_acc;
        best_params = model.params;
        since_best = 0;
      } else if (++since_best >= cfg.patience) {
        break;
      }
    }
  }
  if (best_val >= 0.0) model.params = best_params;
  return {std::move(model), std::move(history)};
}

// --- stage 2 -------------------------------------------------------------------

namespace {

struct PreparedRecords {
  std::vector<std::vector<int>> tokens;
  std::vector<int> lengths;
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> post;
  std::vector<Scene> post_scenes;
  std::size_t size() const { return tokens.size(); }
};

PreparedRecords prepare_records(const std::vector<SampleRecord>& records,
                                const Vocabulary& vocab) {
  PreparedRecords out;
  for (const auto& r : records) {
    out.tokens.push_back(tokenize(r.action_text, vocab));
    int len = 0;
    for (int id : out.tokens.back()) len += id != 0 ? 1 : 0;
    out.lengths.push_back(std::max(1, len));
    out.pre.push_back(encode_scene(r.scene_pre));
    out.post.push_back(encode_scene(r.scene_post));
    out.post_scenes.push_back(r.scene_post);
  }
  return out;
}

/// Rolls the LSTM over a token batch; projects from the final cell state.
ValueId nl2actionrep(Tape& tape, Params& params,
                     const std::vector<const std::vector<int>*>& tokens,
                     const std::vector<int>& lengths) {
  const int batch = static_cast<int>(tokens.size());
  int max_len = 1;
  for (int len : lengths) max_len = std::max(max_len, len);

  ValueId table = tape.param(params, "emb");
  LstmState state = lstm_initial_state(tape, batch, kLstmHidden);
  for (int t = 0; t < max_len; ++t) {
    std::vector<int> step_tokens(static_cast<std::size_t>(batch));
    std::vector<double> keep(static_cast<std::size_t>(batch));
    for (int i = 0; i < batch; ++i) {
      step_tokens[static_cast<std::size_t>(i)] =
          (*tokens[static_cast<std::size_t>(i)])[static_cast<std::size_t>(t)];
      keep[static_cast<std::size_t>(i)] =
          t < lengths[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    }
    state = lstm_step(tape, params, "lstm", kLstmHidden,
                      tape.embed_rows(table, step_tokens), state, keep);
  }
  return dense(tape, params, "proj", state.c);
}

double stage2_batch_accuracy(Params& params, const PreparedRecords& data,
                             std::size_t limit) {
  const std::size_t n = std::min(limit, data.size());
  int correct = 0;
  for (std::size_t begin = 0; begin < n; begin += 64) {
    const std::size_t end = std::min(n, begin + 64);
    std::vector<const std::vector<int>*> tokens;
    std::vector<int> lengths;
    std::vector<const std::vector<double>*> pre;
    for (std::size_t i = begin; i < end; ++i) {
      tokens.push_back(&data.tokens[i]);
      lengths.push_back(data.lengths[i]);
      pre.push_back(&data.pre[i]);
    }
    Tape tape;
    ValueId code = nl2actionrep(tape, params, tokens, lengths);
    ValueId pred =
        decoder_forward(tape, params, tape.input(rows_tensor(pre)), code);
    const Tensor& y = tape.value(pred);
    for (std::size_t i = begin; i < end; ++i) {
      std::vector<double> row(
          y.v.begin() + (i - begin) * kSceneVecDim,
          y.v.begin() + (i - begin + 1) * kSceneVecDim);
      squash_presence(row);
      if (scene_equal(decode_scene(row, 0.5), data.post_scenes[i], 0.5)) {
        ++correct;
      }
    }
  }
  return n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n);
}

}  // namespace

Stage2Result train_stage2(const std::vector<SampleRecord>& records,
                          const std::vector<SampleRecord>& val_records,
                          const Stage1Model& stage1, const Vocabulary& vocab,
                          const TrainConfig& cfg, DecoderMode mode) {
  validate_config(cfg);
  if (records.empty()) throw Error("bad-config", "stage-2 needs records");

  // One working parameter set: trainable text encoder + the effect decoder.
  Params work;
  Rng init_rng = Rng::substream(cfg.seed, 21, 0);
  init_stage2_params(work, vocab.size(), cfg.embedding_size, cfg.vector_length,
                     init_rng);
  if (mode == DecoderMode::FrozenPretrained) {
    if (stage1.vector_length != cfg.vector_length) {
      throw Error("model-mismatch",
                  "decoder expects action vectors of length " +
                      std::to_string(stage1.vector_length));
    }
    for (const auto& name : stage1.params.names()) {
      if (name.starts_with("dec.")) {
        work.add(name, stage1.params.at(name), /*trainable=*/false);
      }
    }
  } else {
    Rng dec_rng = Rng::substream(cfg.seed, 22, 0);
    init_decoder(work, cfg.vector_length, dec_rng);
  }

  const auto augmented = with_identity_records(records, cfg.identity_fraction);
  const PreparedRecords train = prepare_records(augmented, vocab);
  const PreparedRecords val = prepare_records(val_records, vocab);

  // Optional auxiliary targets: the stage-1 encoder codes for each pair.
  std::vector<std::vector<double>> aux_codes;
  if (cfg.aux_code_weight > 0.0 && mode == DecoderMode::FrozenPretrained) {
    Params enc = stage1.params;
    for (std::size_t i = 0; i < train.size(); ++i) {
      Tape tape;
      Tensor pre(1, kSceneVecDim), post(1, kSceneVecDim);
      pre.v = train.pre[i];
      post.v = train.post[i];
      ValueId code = mlp3(tape, enc, "enc",
                          tape.concat_cols(tape.input(std::move(pre)),
                                           tape.input(std::move(post))));
      aux_codes.push_back(tape.value(code).v);
    }
  }

  Optimizer opt(optimizer_config(cfg));
  History history;
  Params best_params = work;
  double best_val = -1.0;
  int since_best = 0;

  for (int epoch = 0; epoch < cfg.stage2_epochs; ++epoch) {
    Rng epoch_rng =
        Rng::substream(cfg.seed, 23, static_cast<std::uint64_t>(epoch));
    const auto order = shuffled_indices(train.size(), epoch_rng);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(
          order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      std::vector<const std::vector<int>*> tokens;
      std::vector<int> lengths;
      std::vector<const std::vector<double>*> pre, post;
      for (std::size_t i = begin; i < end; ++i) {
        const auto idx = static_cast<std::size_t>(order[i]);
        tokens.push_back(&train.tokens[idx]);
        lengths.push_back(train.lengths[idx]);
        pre.push_back(&train.pre[idx]);
        post.push_back(&train.post[idx]);
      }
      Tape tape;
      ValueId code = nl2actionrep(tape, work, tokens, lengths);
      ValueId pred =
          decoder_forward(tape, work, tape.input(rows_tensor(pre)), code);
      ValueId loss = scene_loss_on_tape(tape, pred, split_targets(post),
                                        cfg.lambda_coord);
      if (!aux_codes.empty()) {
        Tensor target_codes(static_cast<int>(tokens.size()), cfg.vector_length);
        for (std::size_t i = begin; i < end; ++i) {
          const auto idx = static_cast<std::size_t>(order[i]);
          std::copy(
              aux_codes[idx].begin(), aux_codes[idx].end(),
              target_codes.v.begin() +
                  (i - begin) * static_cast<std::size_t>(cfg.vector_length));
        }
        loss = tape.add(loss,
                        tape.scale(tape.squared_error(code, target_codes),
                                   cfg.aux_code_weight));
      }
      loss = tape.scale(loss, 1.0 / static_cast<double>(tokens.size()));
      tape.backward(loss);
      opt.step(work, tape.param_grads());
      loss_sum += tape.value(loss).v[0] * static_cast<double>(tokens.size());
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.loss = loss_sum / static_cast<double>(train.size());
    stats.train_scene_acc = stage2_batch_accuracy(work, train, 500);
    stats.val_scene_acc =
        val.size() ? stage2_batch_accuracy(work, val, val.size()) : 0.0;
    history.push_back(stats);

    if (!val_records.empty()) {
      if (stats.val_scene_acc > best_val + 1e-12) {
        best_val = stats.val_scene_acc;
        best_params = work;
        since_best = 0;
      } else if (++since_best >= cfg.patience) {
        break;
      }
    }
  }
  if (best_val >= 0.0) work = best_params;

  Stage2Result result;
  result.model.vector_length = cfg.vector_length;
  result.model.embedding_size = cfg.embedding_size;
  result.model.vocab_size = vocab.size();
  for (const auto& name : work.names()) {
    if (name.starts_with("dec.")) {
      result.decoder.add(name, work.at(name),
                         mode == DecoderMode::JointFromScratch);
    } else {
      result.model.params.add(name, work.at(name));
    }
  }
  result.history = std::move(history);
  return result;
}

std::vector<double> action_vector(const std::string& action_text,
                                  const Stage2Model& stage2,
                                  const Vocabulary& vocab) {
  Params params = stage2.params;
  const std::vector<int> tokens = tokenize(action_text, vocab);
  int len = 0;
  for (int id : tokens) len += id != 0 ? 1 : 0;
  len = std::max(1, len);
  Tape tape;
  ValueId code = nl2actionrep(tape, params, {&tokens}, {len});
  return tape.value(code).v;
}

Scene predict_scene(const Scene& scene, const std::string& action_text,
                    const Params& decoder, const Stage2Model& stage2,
                    const Vocabulary& vocab) {
  Params params = stage2.params;
  for (const auto& name : decoder.names()) params.add(name, decoder.at(name));
  const std::vector<int> tokens = tokenize(action_text, vocab);
  int len = 0;
  for (int id : tokens) len += id != 0 ? 1 : 0;
  len = std::max(1, len);

  Tape tape;
  ValueId code = nl2actionrep(tape, params, {&tokens}, {len});
  Tensor pre(1, kSceneVecDim);
  pre.v = encode_scene(scene);
  ValueId pred =
      decoder_forward(tape, params, tape.input(std::move(pre)), code);
  std::vector<double> row = tape.value(pred).v;
  squash_presence(row);
  return decode_scene(row, 0.5);
}

double scene_accuracy(const std::vector<SampleRecord>& records,
                      const Params& decoder, const Stage2Model& stage2,
                      const Vocabulary& vocab) {
  if (records.empty()) return 0.0;
  int correct = 0;
  for (const auto& r : records) {
    Scene pred =
        predict_scene(r.scene_pre, r.action_text, decoder, stage2, vocab);
    if (scene_equal(pred, r.scene_post, 0.5)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

// --- checkpoints ------------------------------------------------------------------

namespace {

nlohmann::ordered_json config_json(const TrainConfig& cfg) {
  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  j["stage1_epochs"] = cfg.stage1_epochs;
  j["stage2_epochs"] = cfg.stage2_epochs;
  j["batch_size"] = cfg.batch_size;
  j["learning_rate"] = cfg.learning_rate;
  j["optimizer"] = cfg.optimizer;
  j["vector_length"] = cfg.vector_length;
  j["embedding_size"] = cfg.embedding_size;
  j["stage1_pairs"] = cfg.stage1_pairs;
  j["lambda_coord"] = cfg.lambda_coord;
  j["patience"] = cfg.patience;
  j["identity_fraction"] = cfg.identity_fraction;
  j["aux_code_weight"] = cfg.aux_code_weight;
  return j;
}

void write_sidecar(const std::string& path, const TrainConfig& cfg,
                   std::uint64_t vocab_hash, int vector_length) {
  nlohmann::ordered_json j;
  j["vector_length"] = vector_length;
  j["embedding_size"] = cfg.embedding_size;
  j["vocab_hash"] = vocab_hash;
  j["config"] = config_json(cfg);
  std::ofstream out(path + ".json");
  if (!out) throw Error("io-error", "cannot write " + path + ".json");
  out << j.dump(2) << "\n";
}

nlohmann::json read_sidecar(const std::string& path) {
  std::ifstream in(path + ".json");
  if (!in) throw Error("io-error", "cannot read " + path + ".json");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad-format", e.what());
  }
  return j;
}

}  // namespace

void save_stage1(const Stage1Model& model, const std::string& path,
                 const TrainConfig& cfg, std::uint64_t vocab_hash) {
  model.params.save(path);
  write_sidecar(path, cfg, vocab_hash, model.vector_length);
}

Stage1Model load_stage1(const std::string& path) {
  Stage1Model model;
  model.params = Params::load(path);
  model.vector_length = read_sidecar(path).at("vector_length").get<int>();
  return model;
}

void save_stage2(const Stage2Model& model, const std::string& path,
                 const TrainConfig& cfg, std::uint64_t vocab_hash) {
  model.params.save(path);
  write_sidecar(path, cfg, vocab_hash, model.vector_length);
}

Stage2Model load_stage2(const std::string& path) {
  Stage2Model model;
  model.params = Params::load(path);
  const auto sidecar = read_sidecar(path);
  model.vector_length = sidecar.at("vector_length").get<int>();
  model.embedding_size = sidecar.at("embedding_size").get<int>();
  model.vocab_size = model.params.at("emb").rows;
  return model;
}

std::uint64_t checkpoint_vocab_hash(const std::string& path) {
  return read_sidecar(path).at("vocab_hash").get<std::uint64_t>();
}

// --- sweep -----------------------------------------------------------------------

std::vector<SweepRow> sweep(SweepAxis axis, const std::vector<int>& values,
                            const std::vector<SampleRecord>& train_records,
                            const std::vector<SampleRecord>& val_records,
                            const TrainConfig& cfg) {
  if (values.empty()) throw Error("bad-config", "sweep needs axis values");
  const Vocabulary vocab = build_vocabulary();
  std::vector<SweepRow> rows;
  for (int value : values) {
    TrainConfig run_cfg = cfg;
    std::vector<SampleRecord> train_sub = train_records;
    if (axis == SweepAxis::VectorLength) {
      run_cfg.vector_length = value;
    } else {
      if (value <= 0 || static_cast<std::size_t>(value) > train_records.size()) {
        throw Error("bad-config", "data size exceeds available records");
      }
      train_sub.assign(train_records.begin(), train_records.begin() + value);
      run_cfg.stage1_pairs = value;
    }
    std::vector<ScenePairSample> pairs, val_pairs;
    const std::size_t pair_count = std::min(
        train_sub.size(), static_cast<std::size_t>(run_cfg.stage1_pairs));
    for (std::size_t i = 0; i < pair_count; ++i) {
      pairs.push_back({train_sub[i].scene_pre, train_sub[i].scene_post});
    }
    for (const auto& r : val_records) {
      val_pairs.push_back({r.scene_pre, r.scene_post});
    }

    Stage1Result s1 = train_stage1(pairs, val_pairs, run_cfg);
    Stage2Result s2 = train_stage2(train_sub, val_records, s1.model, vocab,
                                   run_cfg, DecoderMode::FrozenPretrained);

    SweepRow row;
    row.axis_value = value;
    int scene_ok = 0, qa_ok = 0, qa_total = 0;
    for (const auto& r : val_records) {
      Scene pred = predict_scene(r.scene_pre, r.action_text, s2.decoder,
                                 s2.model, vocab);
      if (scene_equal(pred, r.scene_post, 0.5)) ++scene_ok;
      if (!r.question_program.empty()) {
        ++qa_total;
        try {
          if (exec_question(parse_program(r.question_program), pred) ==
              r.answer) {
            ++qa_ok;
          }
        } catch (const Error&) {
          // executor errors on predicted scenes count as wrong answers
        }
      }
    }
    row.scene_acc = val_records.empty()
                        ? 0.0
                        : static_cast<double>(scene_ok) /
                              static_cast<double>(val_records.size());
    row.qa_acc = qa_total == 0 ? 0.0
                               : static_cast<double>(qa_ok) /
                                     static_cast<double>(qa_total);
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "axis_value,scene_acc,qa_acc\n";
  auto append_double = [&out](double v) {
    std::array<char, 32> buf;
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    out.append(buf.data(), res.ptr);
  };
  for (const auto& r : rows) {
    out += std::to_string(r.axis_value);
    out += ',';
    append_double(r.scene_acc);
    out += ',';
    append_double(r.qa_acc);
    out += '\n';
  }
  return out;
}

}  // namespace actfx
