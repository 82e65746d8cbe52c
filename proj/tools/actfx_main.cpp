// actfx: dataset generation, action-representation training, evaluation and
// sweeps over synthetic scene-graph worlds. All commands are deterministic
// given their inputs; reruns produce byte-identical outputs.

#include <array>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "actfx/config.hpp"
#include "actfx/error.hpp"
#include "actfx/learner.hpp"
#include "actfx/metrics.hpp"
#include "actfx/pipeline.hpp"
#include "actfx/worldgen.hpp"

namespace fs = std::filesystem;
using namespace actfx;

namespace {

/// Removes declared outputs when a command fails partway.
class OutputGuard {
public:
  void track(const std::string& path) { paths_.push_back(path); }
  void dismiss() { paths_.clear(); }
  ~OutputGuard() {
    for (const auto& p : paths_) {
      std::error_code ec;
      fs::remove_all(p, ec);
    }
  }

private:
  std::vector<std::string> paths_;
};

int exit_code_for(const Error& e) {
  static const std::set<std::string> config_codes = {"bad-config"};
  static const std::set<std::string> model_codes = {"model-mismatch",
                                                    "bad-format", "bad-param",
                                                    "bad-shape"};
  if (config_codes.count(e.code())) return 2;
  if (model_codes.count(e.code())) return 4;
  return 3;  // data errors
}

std::map<std::string, std::string> load_config_kv(const std::string& path) {
  if (path.empty()) return {};
  return parse_flat_config(path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io-error", "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("io-error", "cannot write " + path);
  out << text;
  if (!out) throw Error("io-error", "short write to " + path);
}

std::string history_csv(const History& history) {
  std::string out = "epoch,loss,train_scene_acc,val_scene_acc\n";
  auto append_double = [&out](double v) {
    std::array<char, 32> buf;
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    out.append(buf.data(), res.ptr);
  };
  for (const auto& e : history) {
    out += std::to_string(e.epoch);
    out += ',';
    append_double(e.loss);
    out += ',';
    append_double(e.train_scene_acc);
    out += ',';
    append_double(e.val_scene_acc);
    out += '\n';
  }
  return out;
}

Vocabulary load_vocab(const std::string& dir) {
  return Vocabulary::from_json(read_text_file(dir + "/vocab.json"));
}

std::vector<ScenePairSample> pairs_from_records(
    const std::vector<SampleRecord>& records, std::size_t limit) {
  std::vector<ScenePairSample> out;
  const std::size_t n = std::min(limit, records.size());
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!records[i].has_oracle) {
      throw Error("missing-oracle", "training records need oracle scenes");
    }
    out.push_back({records[i].scene_pre, records[i].scene_post});
  }
  return out;
}

int cmd_gen(const std::string& config_path, const std::string& outdir) {
  const GenConfig cfg = make_gen_config(load_config_kv(config_path));
  OutputGuard guard;
  guard.track(outdir + "/vocab.json");
  guard.track(outdir + "/meta.json");
  for (const auto& split : split_names()) {
    guard.track(outdir + "/" + split + ".jsonl");
  }
  gen_dataset(cfg, outdir);
  guard.dismiss();
  std::cout << "wrote dataset to " << outdir << "\n";
  return 0;
}

int cmd_train_stage1(const std::string& config_path, const std::string& data,
                     const std::string& outdir) {
  const TrainConfig cfg = make_train_config(load_config_kv(config_path));
  const auto train = load_records(data + "/train.jsonl");
  const auto val = load_records(data + "/val.jsonl");
  const auto pairs =
      pairs_from_records(train, static_cast<std::size_t>(cfg.stage1_pairs));
  const auto val_pairs = pairs_from_records(val, val.size());
  const Vocabulary vocab = load_vocab(data);

  fs::create_directories(outdir);
  OutputGuard guard;
  guard.track(outdir + "/stage1.arlw");
  guard.track(outdir + "/stage1.arlw.json");
  guard.track(outdir + "/stage1_history.csv");
  guard.track(outdir + "/vocab.json");

  Stage1Result result = train_stage1(pairs, val_pairs, cfg);
  save_stage1(result.model, outdir + "/stage1.arlw", cfg, vocab.hash());
  write_text_file(outdir + "/stage1_history.csv", history_csv(result.history));
  write_text_file(outdir + "/vocab.json", vocab.to_json());
  guard.dismiss();

  const EpochStats last =
      result.history.empty() ? EpochStats{} : result.history.back();
  std::printf("stage-1 done: epochs=%zu train_acc=%.3f val_acc=%.3f\n",
              result.history.size(), last.train_scene_acc, last.val_scene_acc);
  return 0;
}

int cmd_train_stage2(const std::string& config_path, const std::string& data,
                     const std::string& model_dir, const std::string& outdir,
                     const std::string& decoder_mode) {
  const TrainConfig cfg = make_train_config(load_config_kv(config_path));
  if (decoder_mode != "frozen" && decoder_mode != "joint") {
    throw Error("bad-config", "--decoder-mode must be frozen or joint");
  }
  const auto train = load_records(data + "/train.jsonl");
  const auto val = load_records(data + "/val.jsonl");
  const Vocabulary vocab = load_vocab(data);

  Stage1Model stage1;
  const DecoderMode mode = decoder_mode == "frozen"
                               ? DecoderMode::FrozenPretrained
                               : DecoderMode::JointFromScratch;
  if (mode == DecoderMode::FrozenPretrained) {
    if (model_dir.empty()) {
      throw Error("bad-config", "--decoder-mode frozen requires --model");
    }
    stage1 = load_stage1(model_dir + "/stage1.arlw");
    if (checkpoint_vocab_hash(model_dir + "/stage1.arlw") != vocab.hash()) {
      throw Error("model-mismatch",
                  "stage-1 checkpoint was trained with a different vocabulary");
    }
  } else {
    stage1.vector_length = cfg.vector_length;
  }

  fs::create_directories(outdir);
  OutputGuard guard;
  guard.track(outdir + "/stage2.arlw");
  guard.track(outdir + "/stage2.arlw.json");
  guard.track(outdir + "/stage2_history.csv");
  guard.track(outdir + "/vocab.json");

  Stage2Result result = train_stage2(train, val, stage1, vocab, cfg, mode);
  save_stage2(result.model, outdir + "/stage2.arlw", cfg, vocab.hash());
  write_text_file(outdir + "/stage2_history.csv", history_csv(result.history));
  write_text_file(outdir + "/vocab.json", vocab.to_json());
  if (mode == DecoderMode::JointFromScratch) {
    // the jointly trained decoder stands in for a stage-1 checkpoint
    guard.track(outdir + "/stage1.arlw");
    guard.track(outdir + "/stage1.arlw.json");
    Stage1Model joint;
    joint.vector_length = cfg.vector_length;
    joint.params = result.decoder;
    save_stage1(joint, outdir + "/stage1.arlw", cfg, vocab.hash());
  }
  guard.dismiss();

  const EpochStats last =
      result.history.empty() ? EpochStats{} : result.history.back();
  std::printf("stage-2 done: epochs=%zu train_acc=%.3f val_acc=%.3f\n",
              result.history.size(), last.train_scene_acc, last.val_scene_acc);
  return 0;
}

int cmd_eval(const std::string& data, const std::string& split,
             const std::string& mode, const std::string& model_dir,
             const std::string& front_end, const std::string& report_path,
             const std::string& predictions_path) {
  const auto records = load_records(data + "/" + split + ".jsonl");

  MetricsReport report;
  std::vector<Prediction> predictions;
  std::vector<Prediction>* pred_out =
      predictions_path.empty() ? nullptr : &predictions;
  if (mode == "oracle") {
    report = evaluate_records(records, split, EvalMode::Oracle, nullptr,
                              pred_out);
  } else if (mode == "learned") {
    if (model_dir.empty()) {
      throw Error("bad-config", "--mode learned requires --model");
    }
    const QuestionFrontEnd fe = front_end == "oracle-program"
                                    ? QuestionFrontEnd::OracleProgram
                                    : QuestionFrontEnd::TemplateParse;
    const PipelineBundle bundle = load_bundle(model_dir, fe);
    report = evaluate_records(records, split, EvalMode::Learned, &bundle,
                              pred_out);
  } else {
    throw Error("bad-config", "--mode must be learned or oracle");
  }

  OutputGuard guard;
  if (!report_path.empty()) {
    guard.track(report_path);
    write_text_file(report_path, report.to_json() + "\n");
  }
  if (!predictions_path.empty()) {
    guard.track(predictions_path);
    save_predictions(predictions, predictions_path);
  }
  guard.dismiss();
  std::cout << report.to_table();
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& data,
              const std::string& axis_name, std::vector<int> values,
              const std::string& out_path) {
  const TrainConfig cfg = make_train_config(load_config_kv(config_path));
  SweepAxis axis;
  if (axis_name == "vector_length") {
    axis = SweepAxis::VectorLength;
    if (values.empty()) values = {25, 50, 75, 100, 125, 150, 175, 200};
  } else if (axis_name == "data_size") {
    axis = SweepAxis::DataSize;
    if (values.empty()) values = {500, 1000, 2000};
  } else {
    throw Error("bad-config", "--axis must be vector_length or data_size");
  }
  const auto train = load_records(data + "/train.jsonl");
  const auto val = load_records(data + "/val.jsonl");

  const auto rows = sweep(axis, values, train, val, cfg);
  const std::string csv = sweep_to_csv(rows);
  OutputGuard guard;
  guard.track(out_path);
  write_text_file(out_path, csv);
  guard.dismiss();
  std::cout << csv;
  return 0;
}

int cmd_export_vectors(const std::string& data, const std::string& model_dir,
                       const std::string& split, const std::string& out_path) {
  const auto records = load_records(data + "/" + split + ".jsonl");
  const PipelineBundle bundle = load_bundle(model_dir);

  std::string csv = "id,action_types";
  for (int i = 0; i < bundle.stage2.vector_length; ++i) {
    csv += ",v" + std::to_string(i);
  }
  csv += '\n';
  auto append_double = [&csv](double v) {
    std::array<char, 32> buf;
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    csv.append(buf.data(), res.ptr);
  };
  for (const auto& r : records) {
    const auto vec = action_vector(r.action_text, bundle.stage2, bundle.vocab);
    csv += std::to_string(r.id);
    csv += ',';
    std::string types;
    for (const auto& t : r.action_types) {
      if (!types.empty()) types += '+';
      types += t;
    }
    csv += types;
    for (double v : vec) {
      csv += ',';
      append_double(v);
    }
    csv += '\n';
  }
  OutputGuard guard;
  guard.track(out_path);
  write_text_file(out_path, csv);
  guard.dismiss();
  std::cout << "wrote " << records.size() << " action vectors to " << out_path
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hypothetical action-effect reasoning over scene graphs"};
  app.require_subcommand(1);

  std::string config_path, data_dir, model_dir, out_path, split = "val";
  std::string mode = "oracle", decoder_mode = "frozen";
  std::string front_end = "template-parse", predictions_path, axis;
  std::vector<int> values;

  auto* gen = app.add_subcommand("gen", "generate a dataset");
  gen->add_option("--config", config_path, "flat key-value config file");
  gen->add_option("--out", out_path, "output directory")->required();

  auto* ts1 = app.add_subcommand("train-stage1",
                                 "train the action encoder / effect decoder");
  ts1->add_option("--config", config_path, "flat key-value config file");
  ts1->add_option("--data", data_dir, "dataset directory")->required();
  ts1->add_option("--out", out_path, "model output directory")->required();

  auto* ts2 = app.add_subcommand(
      "train-stage2", "train text-to-action-vector through the decoder");
  ts2->add_option("--config", config_path, "flat key-value config file");
  ts2->add_option("--data", data_dir, "dataset directory")->required();
  ts2->add_option("--model", model_dir, "directory with stage1.arlw");
  ts2->add_option("--out", out_path, "model output directory")->required();
  ts2->add_option("--decoder-mode", decoder_mode,
                  "frozen (default) or joint (ablation)");

  auto* ev = app.add_subcommand("eval", "score a split");
  ev->add_option("--data", data_dir, "dataset directory")->required();
  ev->add_option("--split", split, "split name")->required();
  ev->add_option("--mode", mode, "learned or oracle")->required();
  ev->add_option("--model", model_dir, "model directory (learned mode)");
  ev->add_option("--question-front-end", front_end,
                 "template-parse (default) or oracle-program");
  ev->add_option("--out", out_path, "write the report JSON here");
  ev->add_option("--predictions", predictions_path,
                 "write per-record predictions JSONL here");

  auto* sw = app.add_subcommand("sweep", "retrain across an axis grid");
  sw->add_option("--config", config_path, "flat key-value config file");
  sw->add_option("--data", data_dir, "dataset directory")->required();
  sw->add_option("--axis", axis, "vector_length or data_size")->required();
  sw->add_option("--values", values, "explicit axis values");
  sw->add_option("--out", out_path, "output CSV path")->required();

  auto* ex = app.add_subcommand("export-vectors",
                                "dump action vectors for a split as CSV");
  ex->add_option("--data", data_dir, "dataset directory")->required();
  ex->add_option("--model", model_dir, "model directory")->required();
  ex->add_option("--split", split, "split name (default val)");
  ex->add_option("--out", out_path, "output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(config_path, out_path);
    if (ts1->parsed()) return cmd_train_stage1(config_path, data_dir, out_path);
    if (ts2->parsed()) {
      return cmd_train_stage2(config_path, data_dir, model_dir, out_path,
                              decoder_mode);
    }
    if (ev->parsed()) {
      return cmd_eval(data_dir, split, mode, model_dir, front_end, out_path,
                      predictions_path);
    }
    if (sw->parsed()) {
      return cmd_sweep(config_path, data_dir, axis, values, out_path);
    }
    if (ex->parsed()) {
      return cmd_export_vectors(data_dir, model_dir, split, out_path);
    }
  } catch (const Error& e) {
    std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
