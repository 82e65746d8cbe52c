#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "actfx/autodiff.hpp"
#include "actfx/scene.hpp"
#include "actfx/tensorize.hpp"
#include "actfx/worldgen.hpp"

namespace actfx {

inline constexpr int kHiddenWidth = 256;  // encoder/decoder hidden layers
inline constexpr int kLstmHidden = 200;

struct TrainConfig {
  std::uint64_t seed = 7;
  int stage1_epochs = 200;
  int stage2_epochs = 80;
  int batch_size = 32;
  double learning_rate = 1e-3;
  std::string optimizer = "adam";  // "adam" | "sgd"
  int vector_length = 125;         // L
  int embedding_size = 32;         // E
  int stage1_pairs = 2000;
  double lambda_coord = 1.0;
  int patience = 10;               // early stopping on val scene accuracy
  /// Share of do-nothing (identity) samples appended to the training data.
  double identity_fraction = 0.0;
  /// Optional auxiliary loss tying NL2ActionRep(T_A) to the stage-1 encoder
  /// code for the same pair; 0 disables it.
  double aux_code_weight = 0.0;
};

void validate_config(const TrainConfig& cfg);  // throws Error("bad-config")

/// Action encoder + effect decoder over scene-vector pairs.
struct Stage1Model {
  Params params;  // enc.* and dec.* tensors
  int vector_length = 0;
};

/// Embedding + LSTM + projection from the final cell state.
struct Stage2Model {
  Params params;  // emb, lstm.*, proj.*
  int vector_length = 0;
  int embedding_size = 0;
  int vocab_size = 0;
};

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;            // mean per-sample training loss
  double train_scene_acc = 0.0;
  double val_scene_acc = 0.0;
};
using History = std::vector<EpochStats>;

struct ScenePairSample {
  Scene pre;
  Scene post;
};

/// Factorized negative log-likelihood of a predicted scene vector against a
/// ground-truth encoding: presence BCE per slot, categorical cross-entropies
/// and weighted squared coordinate error on target-present slots.
double scene_loss_value(const std::vector<double>& pred,
                        const std::vector<double>& target,
                        double lambda_coord);

struct Stage1Result {
  Stage1Model model;
  History history;
};

/// Joint encoder-decoder training on scene reconstruction. Deterministic
/// given (seed, config, data). Accuracy = scene_equal after decode at
/// coord_tol 0.5.
Stage1Result train_stage1(const std::vector<ScenePairSample>& pairs,
                          const std::vector<ScenePairSample>& val_pairs,
                          const TrainConfig& cfg);

enum class DecoderMode {
  FrozenPretrained,  // stage(1+2): decoder tensors frozen bitwise
  JointFromScratch,  // stage(2 only) ablation: random-init decoder, trained
};

struct Stage2Result {
  Stage2Model model;
  Params decoder;  // the decoder used at inference time
  History history;
};

/// Trains text -> action-vector through the effect decoder. In
/// FrozenPretrained mode the decoder comes from `stage1` and never changes;
/// in JointFromScratch it is freshly initialized and trained.
Stage2Result train_stage2(const std::vector<SampleRecord>& records,
                          const std::vector<SampleRecord>& val_records,
                          const Stage1Model& stage1, const Vocabulary& vocab,
                          const TrainConfig& cfg,
                          DecoderMode mode = DecoderMode::FrozenPretrained);

/// NL2ActionRep: tokenized text through embedding + LSTM, projecting from
/// the final cell state.
std::vector<double> action_vector(const std::string& action_text,
                                  const Stage2Model& stage2,
                                  const Vocabulary& vocab);

/// decode_scene(decoder(encode_scene(S), NL2ActionRep(T_A))).
Scene predict_scene(const Scene& scene, const std::string& action_text,
                    const Params& decoder, const Stage2Model& stage2,
                    const Vocabulary& vocab);

/// Predictive-path scene accuracy: fraction of records whose predicted
/// post-action scene is scene_equal to the ground truth at coord_tol 0.5.
double scene_accuracy(const std::vector<SampleRecord>& records,
                      const Params& decoder, const Stage2Model& stage2,
                      const Vocabulary& vocab);

// --- checkpoints ---------------------------------------------------------------

void save_stage1(const Stage1Model& model, const std::string& path,
                 const TrainConfig& cfg, std::uint64_t vocab_hash);
Stage1Model load_stage1(const std::string& path);

void save_stage2(const Stage2Model& model, const std::string& path,
                 const TrainConfig& cfg, std::uint64_t vocab_hash);
Stage2Model load_stage2(const std::string& path);

/// Sidecar vocab hash recorded next to a checkpoint ("<path>.json").
std::uint64_t checkpoint_vocab_hash(const std::string& path);

// --- sweeps ----------------------------------------------------------------------

enum class SweepAxis { VectorLength, DataSize };

struct SweepRow {
  int axis_value = 0;
  double scene_acc = 0.0;  // held-out predictive scene accuracy
  double qa_acc = 0.0;     // downstream QA accuracy on the same split
};

/// Full stage-1 + stage-2 retrain per axis value with a fixed seed. QA
/// accuracy executes the stored question programs on predicted scenes.
std::vector<SweepRow> sweep(SweepAxis axis, const std::vector<int>& values,
                            const std::vector<SampleRecord>& train_records,
                            const std::vector<SampleRecord>& val_records,
                            const TrainConfig& cfg);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);

}  // namespace actfx
