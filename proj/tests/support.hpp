#pragma once

// Shared test helpers: scene literals, a random well-typed program sampler,
// and an independent brute-force question evaluator used as the semantics
// oracle for the tape-free executor.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "actfx/error.hpp"
#include "actfx/executor.hpp"
#include "actfx/parser.hpp"
#include "actfx/program.hpp"
#include "actfx/rng.hpp"
#include "actfx/scene.hpp"

namespace testsupport {

using namespace actfx;

inline SceneObject make_obj(int id, Shape sh, Size sz, Material m, Color c,
                            double x, double y, double z = 0.0) {
  SceneObject o;
  o.id = id;
  o.shape = sh;
  o.size = sz;
  o.material = m;
  o.color = c;
  o.pos = {x, y, z};
  return o;
}

inline Scene make_scene(std::vector<SceneObject> objects) {
  Scene s;
  s.objects = std::move(objects);
  s.canonicalize();
  return s;
}

// Either an answer or an error code, for comparing evaluator behaviors.
struct EvalOutcome {
  std::optional<Answer> answer;
  std::string error_code;

  bool operator==(const EvalOutcome&) const = default;
};

template <typename F>
EvalOutcome run_eval(F&& f) {
  EvalOutcome out;
  try {
    out.answer = f();
  } catch (const Error& e) {
    out.error_code = e.code();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Brute-force reference evaluator: materializes object subsets by direct
// filtering, kept independent of the production executor.
// ---------------------------------------------------------------------------

struct RefEval {
  const Scene& s;

  std::vector<int> eval_set(const Node& n) const {
    std::vector<int> out;
    switch (n.op) {
      case Op::SceneAll:
        for (const auto& o : s.objects) out.push_back(o.id);
        break;
      case Op::FilterShape:
        for (int id : eval_set(n.args[0])) {
          if (s.by_id(id).shape == shape_from_word(n.args[1].word)) {
            out.push_back(id);
          }
        }
        break;
      case Op::FilterSize:
        for (int id : eval_set(n.args[0])) {
          if (s.by_id(id).size == size_from_word(n.args[1].word)) {
            out.push_back(id);
          }
        }
        break;
      case Op::FilterMaterial:
        for (int id : eval_set(n.args[0])) {
          if (s.by_id(id).material == material_from_word(n.args[1].word)) {
            out.push_back(id);
          }
        }
        break;
      case Op::FilterColor:
        for (int id : eval_set(n.args[0])) {
          if (s.by_id(id).color == color_from_word(n.args[1].word)) {
            out.push_back(id);
          }
        }
        break;
      case Op::Relate: {
        const int target = eval_obj(n.args[0]);
        const Relation rel = relation_from_word(n.args[1].word);
        for (const auto& o : s.objects) {
          if (o.id != target && spatial_relation(s, o.id, target, rel)) {
            out.push_back(o.id);
          }
        }
        break;
      }
      case Op::And:
        for (int id : eval_set(n.args[0])) {
          for (int other : eval_set(n.args[1])) {
            if (other == id) out.push_back(id);
          }
        }
        break;
      case Op::Or: {
        out = eval_set(n.args[0]);
        for (int id : eval_set(n.args[1])) {
          bool seen = false;
          for (int have : out) seen = seen || have == id;
          if (!seen) out.push_back(id);
        }
        std::sort(out.begin(), out.end());
        break;
      }
      case Op::Not: {
        const auto inner = eval_set(n.args[0]);
        for (const auto& o : s.objects) {
          bool inside = false;
          for (int id : inner) inside = inside || id == o.id;
          if (!inside) out.push_back(o.id);
        }
        break;
      }
      default:
        throw Error("type-error", "reference: not a set node");
    }
    return out;
  }

  int eval_obj(const Node& n) const {
    if (n.op != Op::Unique) throw Error("type-error", "reference: not unique");
    const auto set = eval_set(n.args[0]);
    if (set.size() != 1) throw Error("non-unique", "reference: non-unique");
    return set[0];
  }

  int eval_int(const Node& n) const {
    if (n.op != Op::Count) throw Error("type-error", "reference: not count");
    return static_cast<int>(eval_set(n.args[0]).size());
  }

  Answer eval(const Node& n) const {
    switch (n.op) {
      case Op::Count: return Answer::of_count(eval_int(n));
      case Op::Exist: return Answer::of_bool(!eval_set(n.args[0]).empty());
      case Op::QueryShape: return Answer::of(s.by_id(eval_obj(n.args[0])).shape);
      case Op::QuerySize: return Answer::of(s.by_id(eval_obj(n.args[0])).size);
      case Op::QueryMaterial:
        return Answer::of(s.by_id(eval_obj(n.args[0])).material);
      case Op::QueryColor: return Answer::of(s.by_id(eval_obj(n.args[0])).color);
      case Op::EqualShape:
        return Answer::of_bool(s.by_id(eval_obj(n.args[0])).shape ==
                               s.by_id(eval_obj(n.args[1])).shape);
      case Op::EqualSize:
        return Answer::of_bool(s.by_id(eval_obj(n.args[0])).size ==
                               s.by_id(eval_obj(n.args[1])).size);
      case Op::EqualMaterial:
        return Answer::of_bool(s.by_id(eval_obj(n.args[0])).material ==
                               s.by_id(eval_obj(n.args[1])).material);
      case Op::EqualColor:
        return Answer::of_bool(s.by_id(eval_obj(n.args[0])).color ==
                               s.by_id(eval_obj(n.args[1])).color);
      case Op::EqualInteger:
        return Answer::of_bool(eval_int(n.args[0]) == eval_int(n.args[1]));
      case Op::GreaterThan:
        return Answer::of_bool(eval_int(n.args[0]) > eval_int(n.args[1]));
      case Op::LessThan:
        return Answer::of_bool(eval_int(n.args[0]) < eval_int(n.args[1]));
      default:
        throw Error("type-error", "reference: not a question root");
    }
  }
};

// ---------------------------------------------------------------------------
// Random well-typed program sampler (questions).
// ---------------------------------------------------------------------------

inline Node random_set(Rng& rng, int depth) {
  if (depth <= 0) return scene_node();
  switch (rng.uniform_int(0, 6)) {
    case 0: return scene_node();
    case 1:
      return filter_node(Op::FilterShape, random_set(rng, depth - 1),
                         to_word(static_cast<Shape>(rng.uniform_int(0, 2))));
    case 2:
      return filter_node(Op::FilterSize, random_set(rng, depth - 1),
                         to_word(static_cast<Size>(rng.uniform_int(0, 1))));
    case 3:
      return filter_node(Op::FilterMaterial, random_set(rng, depth - 1),
                         to_word(static_cast<Material>(rng.uniform_int(0, 1))));
    case 4:
      return filter_node(Op::FilterColor, random_set(rng, depth - 1),
                         to_word(static_cast<Color>(rng.uniform_int(0, 7))));
    case 5:
      return call(rng.coin() ? Op::And : Op::Or,
                  {random_set(rng, depth - 1), random_set(rng, depth - 1)});
    default:
      return call(Op::Not, {random_set(rng, depth - 1)});
  }
}

inline Node random_object(Rng& rng, int depth) {
  if (rng.coin(0.15)) {
    return unique_node(call(
        Op::Relate, {unique_node(random_set(rng, depth - 1)),
                     word_node(to_word(
                         static_cast<Relation>(rng.uniform_int(0, 4))))}));
  }
  return unique_node(random_set(rng, depth));
}

inline Node random_question(Rng& rng) {
  const int depth = rng.uniform_int(1, 3);
  switch (rng.uniform_int(0, 5)) {
    case 0: return call(Op::Count, {random_set(rng, depth)});
    case 1: return call(Op::Exist, {random_set(rng, depth)});
    case 2: {
      const Op q[] = {Op::QueryShape, Op::QuerySize, Op::QueryMaterial,
                      Op::QueryColor};
      return call(q[rng.uniform_int(0, 3)], {random_object(rng, depth)});
    }
    case 3: {
      const Op q[] = {Op::EqualShape, Op::EqualSize, Op::EqualMaterial,
                      Op::EqualColor};
      return call(q[rng.uniform_int(0, 3)],
                  {random_object(rng, depth), random_object(rng, depth)});
    }
    default: {
      const Op q[] = {Op::EqualInteger, Op::GreaterThan, Op::LessThan};
      return call(q[rng.uniform_int(0, 2)],
                  {call(Op::Count, {random_set(rng, depth)}),
                   call(Op::Count, {random_set(rng, depth)})});
    }
  }
}

}  // namespace testsupport
