#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "actfx/scene.hpp"

namespace actfx {

/// AST node kinds of the functional-program DSL. Word and Number are leaf
/// literal nodes; everything else is a call.
enum class Op : std::uint8_t {
  // leaves
  Word,
  Number,
  // set / object / value producers
  SceneAll,
  FilterShape,
  FilterSize,
  FilterMaterial,
  FilterColor,
  Unique,
  Relate,
  And,
  Or,
  Not,
  // question roots
  Count,
  Exist,
  QueryShape,
  QuerySize,
  QueryMaterial,
  QueryColor,
  EqualShape,
  EqualSize,
  EqualMaterial,
  EqualColor,
  EqualInteger,
  GreaterThan,
  LessThan,
  // actions
  AddObject,
  Remove,
  ChangeShape,
  ChangeSize,
  ChangeMaterial,
  ChangeColor,
  Move,
  Seq,
  // helpers
  ObjectSpec,   // object(shape,size,material,color)
  Absolute,     // absolute(x,y)
  RelativeTo,   // relative(relation, anchor-set)
  OnTop,        // on(anchor-set)
  Ground,       // ground()
};

std::string_view op_name(Op op);

/// Value-semantic AST. Literal leaves carry `word` or `number`; calls carry
/// ordered children (which may themselves be literal leaves).
struct Node {
  Op op = Op::SceneAll;
  std::vector<Node> args;
  std::string word;     // Op::Word payload
  double number = 0.0;  // Op::Number payload

  bool operator==(const Node&) const = default;
};

// Builders used by the generator and tests.
Node word_node(std::string_view w);
Node number_node(double v);
Node call(Op op, std::vector<Node> args = {});

Node scene_node();
Node filter_node(Op filter_op, Node set, std::string_view value_word);
Node unique_node(Node set);

/// Structural checks over a parsed or constructed tree. Throws
/// Error("type-error") naming the ill-typed node.
void check_question(const Node& root);
void check_action(const Node& root);

bool is_question_root(const Node& root);
bool is_action_root(const Node& root);

}  // namespace actfx
