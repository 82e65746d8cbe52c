#include "actfx/parser.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <map>

#include "actfx/error.hpp"
#include "actfx/program.hpp"

namespace actfx {

namespace {

struct OpInfo {
  std::string_view name;
  Op op;
};

constexpr OpInfo kOps[] = {
    {"scene", Op::SceneAll},
    {"filter_shape", Op::FilterShape},
    {"filter_size", Op::FilterSize},
    {"filter_material", Op::FilterMaterial},
    {"filter_color", Op::FilterColor},
    {"unique", Op::Unique},
    {"relate", Op::Relate},
    {"and", Op::And},
    {"or", Op::Or},
    {"not", Op::Not},
    {"count", Op::Count},
    {"exist", Op::Exist},
    {"query_shape", Op::QueryShape},
    {"query_size", Op::QuerySize},
    {"query_material", Op::QueryMaterial},
    {"query_color", Op::QueryColor},
    {"equal_shape", Op::EqualShape},
    {"equal_size", Op::EqualSize},
    {"equal_material", Op::EqualMaterial},
    {"equal_color", Op::EqualColor},
    {"equal_integer", Op::EqualInteger},
    {"greater_than", Op::GreaterThan},
    {"less_than", Op::LessThan},
    {"add_object", Op::AddObject},
    {"remove", Op::Remove},
    {"change_shape", Op::ChangeShape},
    {"change_size", Op::ChangeSize},
    {"change_material", Op::ChangeMaterial},
    {"change_color", Op::ChangeColor},
    {"move", Op::Move},
    {"seq", Op::Seq},
    {"object", Op::ObjectSpec},
    {"absolute", Op::Absolute},
    {"relative", Op::RelativeTo},
    {"on", Op::OnTop},
    {"ground", Op::Ground},
};

}  // namespace

std::string_view op_name(Op op) {
  for (const auto& info : kOps) {
    if (info.op == op) return info.name;
  }
  switch (op) {
    case Op::Word: return "<word>";
    case Op::Number: return "<number>";
    default: return "<unknown>";
  }
}

Node word_node(std::string_view w) {
  Node n;
  n.op = Op::Word;
  n.word = std::string(w);
  return n;
}

Node number_node(double v) {
  Node n;
  n.op = Op::Number;
  n.number = v;
  return n;
}

Node call(Op op, std::vector<Node> args) {
  Node n;
  n.op = op;
  n.args = std::move(args);
  return n;
}

Node scene_node() { return call(Op::SceneAll); }

Node filter_node(Op filter_op, Node set, std::string_view value_word) {
  return call(filter_op, {std::move(set), word_node(value_word)});
}

Node unique_node(Node set) { return call(Op::Unique, {std::move(set)}); }

// --- type system -------------------------------------------------------------

namespace {

enum class Kind { Set, Obj, Int, Bool, Attr, Spec, Placement, Action };

enum class WordDomain { ShapeW, SizeW, MaterialW, ColorW, RelationW, PlaceRelW };

[[noreturn]] void type_error(const Node& node, const std::string& why) {
  throw Error("type-error",
              "ill-typed node " + std::string(op_name(node.op)) + ": " + why);
}

void check_word(const Node& n, WordDomain domain, const Node& parent) {
  if (n.op != Op::Word) {
    type_error(parent, "expected a bare word argument");
  }
  try {
    switch (domain) {
      case WordDomain::ShapeW: shape_from_word(n.word); break;
      case WordDomain::SizeW: size_from_word(n.word); break;
      case WordDomain::MaterialW: material_from_word(n.word); break;
      case WordDomain::ColorW: color_from_word(n.word); break;
      case WordDomain::RelationW: relation_from_word(n.word); break;
      case WordDomain::PlaceRelW: {
        Relation r = relation_from_word(n.word);
        if (r == Relation::on) {
          type_error(parent, "relative placement cannot use relation on");
        }
        break;
      }
    }
  } catch (const Error& e) {
    if (e.code() == "bad-enum") type_error(parent, e.what());
    throw;
  }
}

Kind kind_of(const Node& n);

void expect_kind(const Node& parent, const Node& arg, Kind want,
                 const char* what) {
  if (arg.op == Op::Word || arg.op == Op::Number) {
    type_error(parent, std::string("expected ") + what + " argument");
  }
  if (kind_of(arg) != want) {
    type_error(parent, std::string("expected ") + what + " argument, got " +
                           std::string(op_name(arg.op)));
  }
}

void expect_arity(const Node& n, std::size_t want) {
  if (n.args.size() != want) {
    type_error(n, "expected " + std::to_string(want) + " arguments, got " +
                      std::to_string(n.args.size()));
  }
}

Kind kind_of(const Node& n) {
  switch (n.op) {
    case Op::Word:
    case Op::Number:
      type_error(n, "literal cannot stand alone");
    case Op::SceneAll:
      expect_arity(n, 0);
      return Kind::Set;
    case Op::FilterShape:
    case Op::FilterSize:
    case Op::FilterMaterial:
    case Op::FilterColor: {
      expect_arity(n, 2);
      expect_kind(n, n.args[0], Kind::Set, "set");
      WordDomain d = n.op == Op::FilterShape     ? WordDomain::ShapeW
                     : n.op == Op::FilterSize    ? WordDomain::SizeW
                     : n.op == Op::FilterMaterial ? WordDomain::MaterialW
                                                   : WordDomain::ColorW;
      check_word(n.args[1], d, n);
      return Kind::Set;
    }
    case Op::Unique:
      expect_arity(n, 1);
      expect_kind(n, n.args[0], Kind::Set, "set");
      return Kind::Obj;
    case Op::Relate:
      expect_arity(n, 2);
      expect_kind(n, n.args[0], Kind::Obj, "object");
      check_word(n.args[1], WordDomain::RelationW, n);
      return Kind::Set;
    case Op::And:
    case Op::Or:
      expect_arity(n, 2);
      expect_kind(n, n.args[0], Kind::Set, "set");
      expect_kind(n, n.args[1], Kind::Set, "set");
      return Kind::Set;
    case Op::Not:
      expect_arity(n, 1);
      expect_kind(n, n.args[0], Kind::Set, "set");
      return Kind::Set;
    case Op::Count:
      expect_arity(n, 1);
      expect_kind(n, n.args[0], Kind::Set, "set");
      return Kind::Int;
    case Op::Exist:
      expect_arity(n, 1);
      expect_kind(n, n.args[0], Kind::Set, "set");
      return Kind::Bool;
    case Op::QueryShape:
    case Op::QuerySize:
    case Op::QueryMaterial:
    case Op::QueryColor:
      expect_arity(n, 1);
      expect_kind(n, n.args[0], Kind::Obj, "object");
      return Kind::Attr;
    case Op::EqualShape:
    case Op::EqualSize:
    case Op::EqualMaterial:
    case Op::EqualColor:
      expect_arity(n, 2);
      expect_kind(n, n.args[0], Kind::Obj, "object");
      expect_kind(n, n.args[1], Kind::Obj, "object");
      return Kind::Bool;
    case Op::EqualInteger:
    case Op::GreaterThan:
    case Op::LessThan:
      expect_arity(n, 2);
      expect_kind(n, n.args[0], Kind::Int, "integer");
      expect_kind(n, n.args[1], Kind::Int, "integer");
      return Kind::Bool;
    case Op::AddObject:
      expect_arity(n, 2);
      expect_kind(n, n.args[0], Kind::Spec, "object spec");
      expect_kind(n, n.args[1], Kind::Placement, "placement");
      return Kind::Action;
    case Op::Remove:
      expect_arity(n, 1);
      expect_kind(n, n.args[0], Kind::Set, "set");
      return Kind::Action;
    case Op::ChangeShape:
    case Op::ChangeSize:
    case Op::ChangeMaterial:
    case Op::ChangeColor: {
      expect_arity(n, 2);
      expect_kind(n, n.args[0], Kind::Set, "set");
      WordDomain d = n.op == Op::ChangeShape     ? WordDomain::ShapeW
                     : n.op == Op::ChangeSize    ? WordDomain::SizeW
                     : n.op == Op::ChangeMaterial ? WordDomain::MaterialW
                                                   : WordDomain::ColorW;
      check_word(n.args[1], d, n);
      return Kind::Action;
    }
    case Op::Move:
      expect_arity(n, 2);
      expect_kind(n, n.args[0], Kind::Set, "set");
      expect_kind(n, n.args[1], Kind::Placement, "placement");
      return Kind::Action;
    case Op::Seq: {
      // seq() is the do-nothing action; seq(a,b) composes two non-seq actions.
      if (n.args.empty()) return Kind::Action;
      expect_arity(n, 2);
      for (const auto& a : n.args) {
        expect_kind(n, a, Kind::Action, "action");
        if (a.op == Op::Seq) type_error(n, "seq cannot nest inside seq");
      }
      return Kind::Action;
    }
    case Op::ObjectSpec:
      expect_arity(n, 4);
      check_word(n.args[0], WordDomain::ShapeW, n);
      check_word(n.args[1], WordDomain::SizeW, n);
      check_word(n.args[2], WordDomain::MaterialW, n);
      check_word(n.args[3], WordDomain::ColorW, n);
      return Kind::Spec;
    case Op::Absolute:
      expect_arity(n, 2);
      if (n.args[0].op != Op::Number || n.args[1].op != Op::Number) {
        type_error(n, "absolute placement takes two numbers");
      }
      return Kind::Placement;
    case Op::RelativeTo:
      expect_arity(n, 2);
      check_word(n.args[0], WordDomain::PlaceRelW, n);
      expect_kind(n, n.args[1], Kind::Set, "set");
      return Kind::Placement;
    case Op::OnTop:
      expect_arity(n, 1);
      expect_kind(n, n.args[0], Kind::Set, "set");
      return Kind::Placement;
    case Op::Ground:
      expect_arity(n, 0);
      return Kind::Placement;
  }
  type_error(n, "unknown op");
}

}  // namespace

void check_question(const Node& root) {
  Kind k = kind_of(root);
  if (k != Kind::Int && k != Kind::Bool && k != Kind::Attr) {
    type_error(root, "not a question root");
  }
}

void check_action(const Node& root) {
  if (kind_of(root) != Kind::Action) {
    type_error(root, "not an action root");
  }
}

bool is_question_root(const Node& root) {
  try {
    check_question(root);
    return true;
  } catch (const Error&) {
    return false;
  }
}

bool is_action_root(const Node& root) {
  try {
    check_action(root);
    return true;
  } catch (const Error&) {
    return false;
  }
}

// --- parsing -----------------------------------------------------------------

namespace {

class Parser {
public:
  explicit Parser(std::string_view text) : text_(text) {}

  Node parse() {
    Node n = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) {
      fail("trailing characters after program");
    }
    if (n.op == Op::Word || n.op == Op::Number) {
      throw Error("type-error", "a bare literal is not a program");
    }
    Kind k = kind_of(n);
    (void)k;  // full root typing is checked by check_question/check_action
    return n;
  }

private:
  [[noreturn]] void fail(const std::string& why) {
    throw Error("syntax-error", why + " at byte " + std::to_string(pos_),
                pos_);
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  char peek() { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  Node parse_expr() {
    skip_ws();
    const char c = peek();
    if (c == '-' || c == '+' || std::isdigit(static_cast<unsigned char>(c))) {
      return parse_number();
    }
    if (!std::isalpha(static_cast<unsigned char>(c)) && c != '_') {
      fail("expected identifier or number");
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_')) {
      ++pos_;
    }
    std::string_view name = text_.substr(start, pos_ - start);
    skip_ws();
    if (peek() != '(') {
      return word_node(name);  // bare-word literal
    }
    ++pos_;  // consume '('
    Node n;
    bool known = false;
    for (const auto& info : kOps) {
      if (info.name == name) {
        n.op = info.op;
        known = true;
        break;
      }
    }
    if (!known) {
      pos_ = start;
      fail("unknown function " + std::string(name));
    }
    skip_ws();
    if (peek() == ')') {
      ++pos_;
      return n;
    }
    while (true) {
      n.args.push_back(parse_expr());
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      if (peek() == ')') {
        ++pos_;
        return n;
      }
      fail("expected , or )");
    }
  }

  Node parse_number() {
    const char* begin = text_.data() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - begin);
    return number_node(v);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void render_node(const Node& n, std::string& out) {
  if (n.op == Op::Word) {
    out += n.word;
    return;
  }
  if (n.op == Op::Number) {
    std::array<char, 32> buf;
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), n.number);
    out.append(buf.data(), res.ptr);
    return;
  }
  out += op_name(n.op);
  out += '(';
  for (std::size_t i = 0; i < n.args.size(); ++i) {
    if (i) out += ',';
    render_node(n.args[i], out);
  }
  out += ')';
}

}  // namespace

Node parse_program(std::string_view text) {
  for (char c : text) {
    if (static_cast<unsigned char>(c) > 127) {
      throw Error("syntax-error", "program text must be ASCII");
    }
  }
  return Parser(text).parse();
}

std::string render_program(const Node& program) {
  std::string out;
  render_node(program, out);
  return out;
}

}  // namespace actfx
