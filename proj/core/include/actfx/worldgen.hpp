#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "actfx/program.hpp"
#include "actfx/rng.hpp"
#include "actfx/scene.hpp"
#include "actfx/tensorize.hpp"

namespace actfx {

struct GenConfig {
  std::uint64_t seed = 7;
  int train_count = 2000;
  int val_count = 500;
  int test_ordinary_count = 500;
  int test_2hop_ta_count = 200;
  int test_2hop_qh_count = 200;
  bool balance = true;      // round-robin action types in the train split
  bool blind_tests = false; // omit oracle fields from test split files
};

/// One dataset tuple. Oracle fields (programs, scene_post) are empty when a
/// record was loaded from a blind test file.
struct SampleRecord {
  long long id = 0;
  Scene scene_pre;
  std::string action_text;
  std::string action_program;
  std::string question_text;
  std::string question_program;
  Answer answer;
  Scene scene_post;
  std::string split;
  std::vector<std::string> action_types;
  std::string reasoning_type;
  bool has_oracle = true;
};

const std::vector<std::string>& action_type_names();  // add remove change move
const std::vector<std::string>& split_names();

/// 3-10 objects, uniform attributes, rejection-sampled ground positions.
Scene gen_scene(Rng& rng);

struct GeneratedAction {
  std::string text;
  Node program;
  std::vector<std::string> types;
};

/// Samples an action (or a 2-hop pair of distinct actions) whose referring
/// expressions resolve uniquely on `s`. `force_types` pins the sampled
/// type(s). Throws Error("no-referent") when the scene cannot support the
/// requested action.
GeneratedAction gen_action(Rng& rng, const Scene& s, int hops,
                           std::vector<std::string> force_types = {});

struct GeneratedQuestion {
  std::string text;
  Node program;
  Answer answer;
  std::string reasoning_type;
};

/// Samples a question over the post-action scene: one of the five reasoning
/// types for hops=1, an and/or/not composition for hops=2. `answer_ok`
/// implements the split-level answer-balance guard. Throws
/// Error("degenerate-question") when no acceptable question is found.
GeneratedQuestion gen_question(
    Rng& rng, const Scene& s_post, int hops,
    const std::function<bool(const Answer&)>& answer_ok = {});

/// All split records, deterministically derived from cfg.seed via
/// per-record substreams.
std::vector<SampleRecord> generate_split(const GenConfig& cfg,
                                         const std::string& split);

/// Writes <outdir>/<split>.jsonl for all five splits plus vocab.json and
/// meta.json.
void gen_dataset(const GenConfig& cfg, const std::string& outdir);

/// Closed vocabulary of the template bank + synonym table.
Vocabulary build_vocabulary();

std::string record_to_json(const SampleRecord& r, bool blind);
SampleRecord record_from_json(const std::string& line);
std::vector<SampleRecord> load_records(const std::string& path);
void save_records(const std::vector<SampleRecord>& records,
                  const std::string& path, bool blind);

}  // namespace actfx
