#pragma once

#include <string>

#include "actfx/learner.hpp"
#include "actfx/program.hpp"
#include "actfx/scene.hpp"
#include "actfx/tensorize.hpp"

namespace actfx {

enum class QuestionFrontEnd {
  OracleProgram,  // Q_H is a functional-program string
  TemplateParse,  // Q_H is template-family natural language
};

/// Frozen effect decoder + trained text encoder + the vocabulary they were
/// trained with. Components must agree on the action-vector length and the
/// vocabulary hash.
struct PipelineBundle {
  Params decoder;
  Stage2Model stage2;
  Vocabulary vocab;
  QuestionFrontEnd mode = QuestionFrontEnd::TemplateParse;
};

/// Loads stage1.arlw (decoder part), stage2.arlw and vocab.json from a model
/// directory, verifying the vocabulary hash and matching vector lengths.
/// Throws Error("model-mismatch") on disagreement.
PipelineBundle load_bundle(const std::string& model_dir,
                           QuestionFrontEnd mode = QuestionFrontEnd::TemplateParse);

/// Inverse-template parsing of generator-family question text. Throws
/// Error("unparseable-question") for out-of-family text.
Node parse_question(const std::string& text);

/// Learned path: predicted post-action scene, then symbolic execution of the
/// question. Unparseable questions propagate as errors (scored as wrong).
Answer answer(const Scene& scene, const std::string& action_text,
              const std::string& question, const PipelineBundle& bundle);

/// Oracle path: exec_question(q, exec_action(a, scene)).
Answer answer_oracle(const Scene& scene, const Node& action_program,
                     const Node& question_program);

}  // namespace actfx
