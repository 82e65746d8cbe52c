#include "actfx/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>

#include "actfx/error.hpp"
#include "actfx/executor.hpp"
#include "actfx/lexicon.hpp"
#include "actfx/parser.hpp"
#include "ref_desc.hpp"

namespace actfx {

using lexicon::Family;

namespace {

using Words = std::vector<std::string>;

Words normalize(const std::string& text) {
  std::string clean;
  clean.reserve(text.size());
  for (char c : text) {
    const unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      clean += static_cast<char>(std::tolower(u));
    } else {
      clean += ' ';
    }
  }
  Words words;
  std::istringstream in(clean);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

[[noreturn]] void unparseable(const std::string& why) {
  throw Error("unparseable-question", why);
}

bool match_at(const Words& w, std::size_t pos,
              std::initializer_list<const char*> pattern) {
  if (pos + pattern.size() > w.size()) return false;
  std::size_t i = pos;
  for (const char* p : pattern) {
    if (w[i++] != p) return false;
  }
  return true;
}

bool ends_with(const Words& w, std::initializer_list<const char*> pattern) {
  if (w.size() < pattern.size()) return false;
  return match_at(w, w.size() - pattern.size(), pattern);
}

std::optional<std::size_t> find_seq(const Words& w, std::size_t from,
                                    std::initializer_list<const char*> pattern) {
  if (w.size() < pattern.size()) return std::nullopt;
  for (std::size_t i = from; i + pattern.size() <= w.size(); ++i) {
    if (match_at(w, i, pattern)) return i;
  }
  return std::nullopt;
}

/// Attribute-subset description: optional adjectives then a shape word or
/// a thing/object wildcard.
std::optional<RefExpr> parse_desc(const Words& w, std::size_t begin,
                                  std::size_t end) {
  if (begin >= end) return std::nullopt;
  RefExpr r;
  for (std::size_t i = begin; i + 1 < end; ++i) {
    const auto attr = lexicon::attribute_word(w[i]);
    if (!attr || attr->plural) return std::nullopt;
    switch (attr->family) {
      case Family::SizeF:
        if (r.size) return std::nullopt;
        r.size = static_cast<Size>(attr->value);
        break;
      case Family::MaterialF:
        if (r.material) return std::nullopt;
        r.material = static_cast<Material>(attr->value);
        break;
      case Family::ColorF:
        if (r.color) return std::nullopt;
        r.color = static_cast<Color>(attr->value);
        break;
      case Family::ShapeF:
        return std::nullopt;  // shapes appear only in noun position
    }
  }
  const std::string& noun = w[end - 1];
  if (!lexicon::is_wildcard_noun(noun)) {
    const auto attr = lexicon::attribute_word(noun);
    if (!attr || attr->family != Family::ShapeF) return std::nullopt;
    r.shape = static_cast<Shape>(attr->value);
  }
  return r;
}

Node desc_chain_or_fail(const Words& w, std::size_t begin, std::size_t end) {
  const auto desc = parse_desc(w, begin, end);
  if (!desc) unparseable("not a recognizable object description");
  return ref_chain(*desc);
}

/// Single-attribute predicate word ("red", "cylinder", "shiny", ...).
Node attr_filter_or_fail(const std::string& word) {
  const auto attr = lexicon::attribute_word(word);
  if (!attr || attr->plural) unparseable(word + " is not an attribute word");
  RefExpr r;
  switch (attr->family) {
    case Family::ShapeF: r.shape = static_cast<Shape>(attr->value); break;
    case Family::SizeF: r.size = static_cast<Size>(attr->value); break;
    case Family::MaterialF:
      r.material = static_cast<Material>(attr->value);
      break;
    case Family::ColorF: r.color = static_cast<Color>(attr->value); break;
  }
  return ref_chain(r);
}

/// either/both/not operand grammar shared by count and exist roots.
Node logical_set_or_fail(const Words& w, std::size_t begin) {
  const std::size_t n = w.size() - begin;
  if (match_at(w, begin, {"either"}) && n == 4 && w[begin + 2] == "or") {
    return call(Op::Or, {attr_filter_or_fail(w[begin + 1]),
                         attr_filter_or_fail(w[begin + 3])});
  }
  if (match_at(w, begin, {"both"}) && n == 4 && w[begin + 2] == "and") {
    return call(Op::And, {attr_filter_or_fail(w[begin + 1]),
                          attr_filter_or_fail(w[begin + 3])});
  }
  if (match_at(w, begin, {"not"}) && n == 2) {
    return call(Op::Not, {attr_filter_or_fail(w[begin + 1])});
  }
  if (n == 4 && w[begin + 1] == "but" && w[begin + 2] == "not") {
    return call(Op::And,
                {attr_filter_or_fail(w[begin]),
                 call(Op::Not, {attr_filter_or_fail(w[begin + 3])})});
  }
  unparseable("not a logical attribute composition");
}

/// "to the left of" / "in front of" / "behind" / "on", returning the
/// relation and the index just past the phrase.
std::optional<std::pair<Relation, std::size_t>> parse_rel_phrase(
    const Words& w, std::size_t pos) {
  if (match_at(w, pos, {"to", "the", "left", "of"})) {
    return std::make_pair(Relation::left, pos + 4);
  }
  if (match_at(w, pos, {"to", "the", "right", "of"})) {
    return std::make_pair(Relation::right, pos + 4);
  }
  if (match_at(w, pos, {"in", "front", "of"})) {
    return std::make_pair(Relation::front, pos + 3);
  }
  if (match_at(w, pos, {"behind"})) {
    return std::make_pair(Relation::behind, pos + 1);
  }
  if (match_at(w, pos, {"on"})) return std::make_pair(Relation::on, pos + 1);
  return std::nullopt;
}

Node relate_set_or_fail(const Words& w, std::size_t pos) {
  const auto rel = parse_rel_phrase(w, pos);
  if (!rel) unparseable("expected a spatial phrase");
  if (rel->second >= w.size() || w[rel->second] != "the") {
    unparseable("expected the <description> after the spatial phrase");
  }
  Node anchor = desc_chain_or_fail(w, rel->second + 1, w.size());
  return call(Op::Relate,
              {unique_node(std::move(anchor)), word_node(to_word(rel->first))});
}

Op query_op(Family f) {
  switch (f) {
    case Family::ShapeF: return Op::QueryShape;
    case Family::SizeF: return Op::QuerySize;
    case Family::MaterialF: return Op::QueryMaterial;
    case Family::ColorF: return Op::QueryColor;
  }
  return Op::QueryColor;
}

Op equal_op(Family f) {
  switch (f) {
    case Family::ShapeF: return Op::EqualShape;
    case Family::SizeF: return Op::EqualSize;
    case Family::MaterialF: return Op::EqualMaterial;
    case Family::ColorF: return Op::EqualColor;
  }
  return Op::EqualColor;
}

Node count_of(Node set) { return call(Op::Count, {std::move(set)}); }
Node exist_of(Node set) { return call(Op::Exist, {std::move(set)}); }

Node parse_how_many(const Words& w) {
  // how many <desc> are there | what number of <desc> are there
  // how many <desc> are in the scene
  // how many objects are either a or b / both a and b / not a / a but not b
  // how many things are <rel> the <desc>
  if (ends_with(w, {"are", "there"})) {
    return count_of(desc_chain_or_fail(w, 2, w.size() - 2));
  }
  if (ends_with(w, {"are", "in", "the", "scene"}) && w.size() > 6) {
    return count_of(desc_chain_or_fail(w, 2, w.size() - 4));
  }
  if (w.size() > 4 && (w[2] == "objects" || w[2] == "things") &&
      w[3] == "are") {
    if (parse_rel_phrase(w, 4)) {
      return count_of(relate_set_or_fail(w, 4));
    }
    return count_of(logical_set_or_fail(w, 4));
  }
  unparseable("unsupported counting form");
}

}  // namespace

Node parse_question(const std::string& text) {
  const Words w = normalize(text);
  if (w.size() < 3) unparseable("too short");

  Node program;
  if (match_at(w, 0, {"how", "many"})) {
    program = parse_how_many(w);
  } else if (match_at(w, 0, {"what", "number", "of"}) &&
             ends_with(w, {"are", "there"})) {
    program = count_of(desc_chain_or_fail(w, 3, w.size() - 2));
  } else if (match_at(w, 0, {"is", "there", "anything"})) {
    program = exist_of(relate_set_or_fail(w, 3));
  } else if (match_at(w, 0, {"is", "there"}) &&
             (w[2] == "a" || w[2] == "an")) {
    program = exist_of(desc_chain_or_fail(w, 3, w.size()));
  } else if (match_at(w, 0, {"does", "the", "scene", "contain"}) &&
             w.size() > 5 && (w[4] == "a" || w[4] == "an")) {
    program = exist_of(desc_chain_or_fail(w, 5, w.size()));
  } else if (match_at(w, 0, {"are", "there", "any", "objects", "that",
                             "are"})) {
    program = exist_of(logical_set_or_fail(w, 6));
  } else if (match_at(w, 0, {"are", "there", "any"})) {
    program = exist_of(desc_chain_or_fail(w, 3, w.size()));
  } else if (match_at(w, 0, {"are", "there", "more"}) ||
             match_at(w, 0, {"are", "there", "fewer"})) {
    const auto than = find_seq(w, 3, {"than"});
    if (!than) unparseable("comparison without than");
    Node left = count_of(desc_chain_or_fail(w, 3, *than));
    Node right = count_of(desc_chain_or_fail(w, *than + 1, w.size()));
    program = call(w[2] == "more" ? Op::GreaterThan : Op::LessThan,
                   {std::move(left), std::move(right)});
  } else if (match_at(w, 0, {"is", "the", "number", "of"})) {
    const auto mid = find_seq(w, 4, {"the", "same", "as", "the", "number",
                                     "of"});
    if (!mid) unparseable("malformed number comparison");
    Node left = count_of(desc_chain_or_fail(w, 4, *mid));
    Node right = count_of(desc_chain_or_fail(w, *mid + 6, w.size()));
    program = call(Op::EqualInteger, {std::move(left), std::move(right)});
  } else if (w[0] == "what" && w.size() > 4 &&
             lexicon::family_name_word(w[1]) && w[2] == "is" && w[3] == "the") {
    const Family f = *lexicon::family_name_word(w[1]);
    program = call(query_op(f),
                   {unique_node(desc_chain_or_fail(w, 4, w.size()))});
  } else if (match_at(w, 0, {"what", "is", "the"}) && w.size() > 6 &&
             lexicon::family_name_word(w[3]) &&
             match_at(w, 4, {"of", "the"})) {
    const Family f = *lexicon::family_name_word(w[3]);
    program = call(query_op(f),
                   {unique_node(desc_chain_or_fail(w, 6, w.size()))});
  } else if (match_at(w, 0, {"do", "the"})) {
    // do the <d1> and the <d2> have the same <family>
    const auto split = find_seq(w, 2, {"and", "the"});
    const auto tail =
        split ? find_seq(w, *split + 2, {"have", "the", "same"})
              : std::nullopt;
    const auto fam = lexicon::family_name_word(w.back());
    if (!split || !tail || !fam || *tail + 4 != w.size()) {
      unparseable("malformed attribute comparison");
    }
    Node a = unique_node(desc_chain_or_fail(w, 2, *split));
    Node b = unique_node(desc_chain_or_fail(w, *split + 2, *tail));
    program = call(equal_op(*fam), {std::move(a), std::move(b)});
  } else if (match_at(w, 0, {"is", "the"}) && w.size() > 4 &&
             lexicon::family_name_word(w[2]) &&
             match_at(w, 3, {"of", "the"})) {
    const Family f = *lexicon::family_name_word(w[2]);
    const auto mid = find_seq(w, 5, {"the", "same", "as", "the"});
    if (!mid || !match_at(w, *mid + 4, {w[2].c_str()}) ||
        !match_at(w, *mid + 5, {"of", "the"})) {
      unparseable("malformed attribute comparison");
    }
    Node a = unique_node(desc_chain_or_fail(w, 5, *mid));
    Node b = unique_node(desc_chain_or_fail(w, *mid + 7, w.size()));
    program = call(equal_op(f), {std::move(a), std::move(b)});
  } else {
    unparseable("text is outside the question template family");
  }

  check_question(program);
  return program;
}

PipelineBundle load_bundle(const std::string& model_dir, QuestionFrontEnd mode) {
  PipelineBundle bundle;
  bundle.mode = mode;
  const std::string stage1_path = model_dir + "/stage1.arlw";
  const std::string stage2_path = model_dir + "/stage2.arlw";

  const Stage1Model stage1 = load_stage1(stage1_path);
  for (const auto& name : stage1.params.names()) {
    if (name.starts_with("dec.")) {
      bundle.decoder.add(name, stage1.params.at(name), /*trainable=*/false);
    }
  }
  bundle.stage2 = load_stage2(stage2_path);
  if (bundle.stage2.vector_length != stage1.vector_length) {
    throw Error("model-mismatch",
                "stage-1 and stage-2 action vector lengths differ");
  }

  std::ifstream in(model_dir + "/vocab.json");
  if (!in) throw Error("io-error", "cannot read " + model_dir + "/vocab.json");
  std::stringstream ss;
  ss << in.rdbuf();
  bundle.vocab = Vocabulary::from_json(ss.str());

  const std::uint64_t expected = bundle.vocab.hash();
  if (checkpoint_vocab_hash(stage1_path) != expected ||
      checkpoint_vocab_hash(stage2_path) != expected) {
    throw Error("model-mismatch",
                "checkpoint vocabulary hash does not match vocab.json");
  }
  return bundle;
}

Answer answer(const Scene& scene, const std::string& action_text,
              const std::string& question, const PipelineBundle& bundle) {
  const Scene predicted = predict_scene(scene, action_text, bundle.decoder,
                                        bundle.stage2, bundle.vocab);
  const Node q = bundle.mode == QuestionFrontEnd::OracleProgram
                     ? parse_program(question)
                     : parse_question(question);
  return exec_question(q, predicted);
}

Answer answer_oracle(const Scene& scene, const Node& action_program,
                     const Node& question_program) {
  return exec_question(question_program, exec_action(action_program, scene));
}

}  // namespace actfx
