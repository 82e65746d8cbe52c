#pragma once

#include <string>
#include <vector>

#include "actfx/pipeline.hpp"
#include "actfx/worldgen.hpp"

namespace actfx {

struct CellStats {
  std::string key;
  int correct = 0;
  int total = 0;
  double accuracy() const {
    return total == 0 ? 0.0
                      : static_cast<double>(correct) / static_cast<double>(total);
  }
};

/// Accuracy breakdown of one split evaluation. Cells partition the split by
/// action-type combination and by reasoning type; the overall accuracy is
/// their weighted mean by construction.
struct MetricsReport {
  std::string split;
  std::string mode;  // "oracle" | "learned"
  int total = 0;
  int correct = 0;
  std::vector<CellStats> by_action;     // sorted by key
  std::vector<CellStats> by_reasoning;  // sorted by key
  int scene_total = 0;    // learned mode only
  int scene_correct = 0;

  double overall() const {
    return total == 0 ? 0.0
                      : static_cast<double>(correct) / static_cast<double>(total);
  }
  double scene_accuracy() const {
    return scene_total == 0 ? 0.0
                            : static_cast<double>(scene_correct) /
                                  static_cast<double>(scene_total);
  }

  std::string to_json() const;   // full precision
  std::string to_table() const;  // accuracies at 1 decimal place
};

enum class EvalMode { Oracle, Learned };

/// One prediction per record when requested: {id, answer, scene_pred}.
struct Prediction {
  long long id = 0;
  Answer answer;
  Scene scene_pred;
};

/// Scores a split. Oracle mode requires oracle annotations and re-executes
/// the stored programs; learned mode runs the bundle end to end, counting
/// unparseable questions as wrong. Throws Error("missing-oracle") when
/// oracle mode meets blind records.
MetricsReport evaluate_records(const std::vector<SampleRecord>& records,
                               const std::string& split_name, EvalMode mode,
                               const PipelineBundle* bundle,
                               std::vector<Prediction>* predictions = nullptr);

void save_predictions(const std::vector<Prediction>& predictions,
                      const std::string& path);

}  // namespace actfx
