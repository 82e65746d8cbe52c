#include "actfx/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include "actfx/error.hpp"
#include "actfx/executor.hpp"
#include "actfx/parser.hpp"
#include "json.hpp"

namespace actfx {

namespace {

std::string action_cell_key(const std::vector<std::string>& types) {
  std::vector<std::string> sorted = types;
  std::sort(sorted.begin(), sorted.end());
  std::string key;
  for (const auto& t : sorted) {
    if (!key.empty()) key += '+';
    key += t;
  }
  return key.empty() ? "unknown" : key;
}

std::vector<CellStats> to_cells(const std::map<std::string, CellStats>& m) {
  std::vector<CellStats> out;
  out.reserve(m.size());
  for (const auto& [key, cell] : m) out.push_back(cell);
  return out;
}

nlohmann::ordered_json cells_json(const std::vector<CellStats>& cells) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& c : cells) {
    arr.push_back({{"key", c.key},
                   {"correct", c.correct},
                   {"total", c.total},
                   {"accuracy", c.accuracy()}});
  }
  return arr;
}

void table_cells(std::string& out, const std::vector<CellStats>& cells) {
  char line[128];
  for (const auto& c : cells) {
    std::snprintf(line, sizeof(line), "  %-24s %5.1f%%  (%d/%d)\n",
                  c.key.c_str(), 100.0 * c.accuracy(), c.correct, c.total);
    out += line;
  }
}

}  // namespace

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["split"] = split;
  j["mode"] = mode;
  j["total"] = total;
  j["correct"] = correct;
  j["overall"] = overall();
  if (mode == "learned") {
    j["scene_total"] = scene_total;
    j["scene_correct"] = scene_correct;
    j["scene_accuracy"] = scene_accuracy();
  }
  j["by_action"] = cells_json(by_action);
  j["by_reasoning"] = cells_json(by_reasoning);
  return j.dump(2);
}

std::string MetricsReport::to_table() const {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "split: %s  mode: %s\n", split.c_str(),
                mode.c_str());
  out += line;
  std::snprintf(line, sizeof(line), "overall accuracy: %.1f%%  (%d/%d)\n",
                100.0 * overall(), correct, total);
  out += line;
  if (mode == "learned" && scene_total > 0) {
    std::snprintf(line, sizeof(line),
                  "scene reconstruction: %.1f%%  (%d/%d)\n",
                  100.0 * scene_accuracy(), scene_correct, scene_total);
    out += line;
  }
  out += "by action type\n";
  table_cells(out, by_action);
  out += "by reasoning type\n";
  table_cells(out, by_reasoning);
  return out;
}

MetricsReport evaluate_records(const std::vector<SampleRecord>& records,
                               const std::string& split_name, EvalMode mode,
                               const PipelineBundle* bundle,
                               std::vector<Prediction>* predictions) {
  if (mode == EvalMode::Learned && bundle == nullptr) {
    throw Error("bad-config", "learned evaluation needs a model bundle");
  }
  MetricsReport report;
  report.split = split_name;
  report.mode = mode == EvalMode::Oracle ? "oracle" : "learned";

  std::map<std::string, CellStats> action_cells;
  std::map<std::string, CellStats> reasoning_cells;

  for (const auto& r : records) {
    Answer predicted;
    Scene scene_pred;
    bool answered = true;
    if (mode == EvalMode::Oracle) {
      if (!r.has_oracle) {
        throw Error("missing-oracle",
                    "record " + std::to_string(r.id) +
                        " carries no oracle annotations");
      }
      predicted = answer_oracle(r.scene_pre, parse_program(r.action_program),
                                parse_program(r.question_program));
    } else {
      scene_pred = predict_scene(r.scene_pre, r.action_text, bundle->decoder,
                                 bundle->stage2, bundle->vocab);
      const std::string& question =
          bundle->mode == QuestionFrontEnd::OracleProgram ? r.question_program
                                                          : r.question_text;
      try {
        const Node q = bundle->mode == QuestionFrontEnd::OracleProgram
                           ? parse_program(question)
                           : parse_question(question);
        predicted = exec_question(q, scene_pred);
      } catch (const Error&) {
        // unparseable or non-executable questions score as wrong; the
        // predictions file keeps an in-vocabulary placeholder
        predicted = Answer::of_bool(false);
        answered = false;
      }
      if (r.has_oracle) {
        report.scene_total += 1;
        if (scene_equal(scene_pred, r.scene_post, 0.5)) {
          report.scene_correct += 1;
        }
      }
    }

    const bool ok = answered && predicted == r.answer;
    report.total += 1;
    report.correct += ok ? 1 : 0;

    auto& ac = action_cells[action_cell_key(r.action_types)];
    ac.key = action_cell_key(r.action_types);
    ac.total += 1;
    ac.correct += ok ? 1 : 0;

    auto& rc = reasoning_cells[r.reasoning_type.empty() ? "unknown"
                                                        : r.reasoning_type];
    rc.key = r.reasoning_type.empty() ? "unknown" : r.reasoning_type;
    rc.total += 1;
    rc.correct += ok ? 1 : 0;

    if (predictions) {
      predictions->push_back({r.id, predicted, scene_pred});
    }
  }

  report.by_action = to_cells(action_cells);
  report.by_reasoning = to_cells(reasoning_cells);
  return report;
}

void save_predictions(const std::vector<Prediction>& predictions,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("io-error", "cannot write " + path);
  for (const auto& p : predictions) {
    nlohmann::ordered_json j;
    j["id"] = p.id;
    j["answer"] = p.answer.to_string();
    j["scene_pred"] = nlohmann::ordered_json::parse(scene_to_json(p.scene_pred));
    out << j.dump() << "\n";
  }
  if (!out) throw Error("io-error", "short write to " + path);
}

}  // namespace actfx
