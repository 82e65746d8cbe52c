#include "actfx/executor.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "actfx/error.hpp"

namespace actfx {

namespace {

// --- question evaluation ------------------------------------------------------

struct QValue {
  enum class Tag { Set, Obj, Int, Bool, Attr } tag;
  std::vector<int> set;
  int obj = -1;
  int integer = 0;
  bool boolean = false;
  Answer attr;
};

std::vector<int> all_ids(const Scene& s) {
  std::vector<int> ids(s.objects.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = s.objects[i].id;
  std::sort(ids.begin(), ids.end());
  return ids;
}

QValue eval_q(const Node& n, const Scene& s);

std::vector<int> eval_set(const Node& n, const Scene& s) {
  QValue v = eval_q(n, s);
  return std::move(v.set);
}

int eval_obj(const Node& n, const Scene& s) { return eval_q(n, s).obj; }

QValue eval_q(const Node& n, const Scene& s) {
  QValue v{QValue::Tag::Set, {}, -1, 0, false, {}};
  switch (n.op) {
    case Op::SceneAll:
      v.set = all_ids(s);
      return v;
    case Op::FilterShape:
    case Op::FilterSize:
    case Op::FilterMaterial:
    case Op::FilterColor: {
      std::vector<int> in = eval_set(n.args[0], s);
      for (int id : in) {
        const auto& o = s.by_id(id);
        bool keep = false;
        switch (n.op) {
          case Op::FilterShape:
            keep = o.shape == shape_from_word(n.args[1].word);
            break;
          case Op::FilterSize:
            keep = o.size == size_from_word(n.args[1].word);
            break;
          case Op::FilterMaterial:
            keep = o.material == material_from_word(n.args[1].word);
            break;
          default:
            keep = o.color == color_from_word(n.args[1].word);
            break;
        }
        if (keep) v.set.push_back(id);
      }
      return v;
    }
    case Op::Unique: {
      std::vector<int> in = eval_set(n.args[0], s);
      if (in.size() != 1) {
        throw Error("non-unique", "unique() received a set of size " +
                                      std::to_string(in.size()));
      }
      v.tag = QValue::Tag::Obj;
      v.obj = in[0];
      return v;
    }
    case Op::Relate: {
      const int target = eval_obj(n.args[0], s);
      const Relation rel = relation_from_word(n.args[1].word);
      for (int id : all_ids(s)) {
        if (id != target && spatial_relation(s, id, target, rel)) {
          v.set.push_back(id);
        }
      }
      return v;
    }
    case Op::And: {
      std::vector<int> a = eval_set(n.args[0], s);
      std::vector<int> b = eval_set(n.args[1], s);
      std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                            std::back_inserter(v.set));
      return v;
    }
    case Op::Or: {
      std::vector<int> a = eval_set(n.args[0], s);
      std::vector<int> b = eval_set(n.args[1], s);
      std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                     std::back_inserter(v.set));
      return v;
    }
    case Op::Not: {
      std::vector<int> a = eval_set(n.args[0], s);
      for (int id : all_ids(s)) {
        if (!std::binary_search(a.begin(), a.end(), id)) v.set.push_back(id);
      }
      return v;
    }
    case Op::Count:
      v.tag = QValue::Tag::Int;
      v.integer = static_cast<int>(eval_set(n.args[0], s).size());
      return v;
    case Op::Exist:
      v.tag = QValue::Tag::Bool;
      v.boolean = !eval_set(n.args[0], s).empty();
      return v;
    case Op::QueryShape:
    case Op::QuerySize:
    case Op::QueryMaterial:
    case Op::QueryColor: {
      const auto& o = s.by_id(eval_obj(n.args[0], s));
      v.tag = QValue::Tag::Attr;
      switch (n.op) {
        case Op::QueryShape: v.attr = Answer::of(o.shape); break;
        case Op::QuerySize: v.attr = Answer::of(o.size); break;
        case Op::QueryMaterial: v.attr = Answer::of(o.material); break;
        default: v.attr = Answer::of(o.color); break;
      }
      return v;
    }
    case Op::EqualShape:
    case Op::EqualSize:
    case Op::EqualMaterial:
    case Op::EqualColor: {
      const auto& a = s.by_id(eval_obj(n.args[0], s));
      const auto& b = s.by_id(eval_obj(n.args[1], s));
      v.tag = QValue::Tag::Bool;
      switch (n.op) {
        case Op::EqualShape: v.boolean = a.shape == b.shape; break;
        case Op::EqualSize: v.boolean = a.size == b.size; break;
        case Op::EqualMaterial: v.boolean = a.material == b.material; break;
        default: v.boolean = a.color == b.color; break;
      }
      return v;
    }
    case Op::EqualInteger:
    case Op::GreaterThan:
    case Op::LessThan: {
      const int a = eval_q(n.args[0], s).integer;
      const int b = eval_q(n.args[1], s).integer;
      v.tag = QValue::Tag::Bool;
      v.boolean = n.op == Op::EqualInteger ? a == b
                  : n.op == Op::GreaterThan ? a > b
                                            : a < b;
      return v;
    }
    default:
      throw Error("type-error", "op " + std::string(op_name(n.op)) +
                                    " is not part of a question");
  }
}

// --- action evaluation --------------------------------------------------------

bool xy_free(const Scene& s, double x, double y, int ignore_id) {
  for (const auto& o : s.objects) {
    if (o.id == ignore_id) continue;
    const double dx = o.pos.x - x;
    const double dy = o.pos.y - y;
    if (std::sqrt(dx * dx + dy * dy) < kMinSeparation) return false;
  }
  return true;
}

/// Top of the stack column around (x, y): max z among objects within the
/// spatial tolerance, or nullopt for an empty column.
std::optional<double> column_top(const Scene& s, double x, double y,
                                 int ignore_id) {
  std::optional<double> top;
  for (const auto& o : s.objects) {
    if (o.id == ignore_id) continue;
    if (std::abs(o.pos.x - x) <= kSpatialTol &&
        std::abs(o.pos.y - y) <= kSpatialTol) {
      if (!top || o.pos.z > *top) top = o.pos.z;
    }
  }
  return top;
}

/// First free 0.5-spaced grid cell in reading order (y then x, ascending).
Vec3 first_free_grid_cell(const Scene& s, int ignore_id) {
  for (double y = -kCoordRange; y <= kCoordRange + 1e-9; y += kGridStep) {
    for (double x = -kCoordRange; x <= kCoordRange + 1e-9; x += kGridStep) {
      if (xy_free(s, x, y, ignore_id)) return {x, y, 0.0};
    }
  }
  // Unreachable with the object cap: a 13x13 grid cannot be blocked by 10
  // objects of clearance radius 0.5.
  throw Error("placement-exhausted", "no free grid cell");
}

Vec3 nearest_free_grid_cell(const Scene& s, double px, double py,
                            int ignore_id) {
  Vec3 best{0, 0, 0};
  double best_d = -1.0;
  for (double y = -kCoordRange; y <= kCoordRange + 1e-9; y += kGridStep) {
    for (double x = -kCoordRange; x <= kCoordRange + 1e-9; x += kGridStep) {
      if (!xy_free(s, x, y, ignore_id)) continue;
      const double d = std::hypot(x - px, y - py);
      if (best_d < 0.0 || d < best_d - 1e-12) {
        best_d = d;
        best = {x, y, 0.0};
      }
    }
  }
  if (best_d < 0.0) throw Error("placement-exhausted", "no free grid cell");
  return best;
}

int resolve_anchor(const Node& anchor_set, const Scene& s) {
  std::vector<int> ids = eval_set(anchor_set, s);
  if (ids.size() != 1) {
    throw Error("non-unique-anchor",
                "placement anchor resolves to " + std::to_string(ids.size()) +
                    " objects");
  }
  return ids[0];
}

/// Resolves a placement node to a concrete position for one object,
/// avoiding collisions with everything except `ignore_id`.
Vec3 resolve_placement(const Node& placement, const Scene& s, int ignore_id) {
  switch (placement.op) {
    case Op::Ground:
      return first_free_grid_cell(s, ignore_id);
    case Op::Absolute: {
      const double x = std::clamp(placement.args[0].number, -kCoordRange,
                                  kCoordRange);
      const double y = std::clamp(placement.args[1].number, -kCoordRange,
                                  kCoordRange);
      if (xy_free(s, x, y, ignore_id)) return {x, y, 0.0};
      return nearest_free_grid_cell(s, x, y, ignore_id);
    }
    case Op::RelativeTo: {
      const Relation rel = relation_from_word(placement.args[0].word);
      const auto& anchor = s.by_id(resolve_anchor(placement.args[1], s));
      double dx = 0.0, dy = 0.0;
      switch (rel) {
        case Relation::left: dx = -1.0; break;
        case Relation::right: dx = 1.0; break;
        case Relation::front: dy = -1.0; break;
        case Relation::behind: dy = 1.0; break;
        case Relation::on: break;  // excluded by the type checker
      }
      double x = anchor.pos.x + dx;
      double y = anchor.pos.y + dy;
      while (std::abs(x) <= kCoordRange && std::abs(y) <= kCoordRange) {
        if (xy_free(s, x, y, ignore_id)) return {x, y, 0.0};
        x += dx * kGridStep;
        y += dy * kGridStep;
      }
      return nearest_free_grid_cell(s, anchor.pos.x + dx, anchor.pos.y + dy,
                                    ignore_id);
    }
    case Op::OnTop: {
      const auto& anchor = s.by_id(resolve_anchor(placement.args[0], s));
      const auto top = column_top(s, anchor.pos.x, anchor.pos.y, ignore_id);
      const double base = top ? *top : 0.0;
      return {anchor.pos.x, anchor.pos.y, base + kStackStep};
    }
    default:
      throw Error("type-error", "not a placement node");
  }
}

/// Gravity pass: objects with z > 0 that rest on nothing drop to the ground.
void settle(Scene& s) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<int> order(s.objects.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return s.objects[a].pos.z < s.objects[b].pos.z;
    });
    for (int idx : order) {
      auto& o = s.objects[idx];
      if (o.pos.z <= 0.0) continue;
      bool supported = false;
      for (const auto& b : s.objects) {
        if (b.id == o.id) continue;
        if (std::abs(b.pos.x - o.pos.x) <= kSpatialTol &&
            std::abs(b.pos.y - o.pos.y) <= kSpatialTol && b.pos.z < o.pos.z) {
          supported = true;
          break;
        }
      }
      if (!supported) {
        o.pos.z = 0.0;
        changed = true;
      }
    }
  }
}

void apply_action(const Node& n, Scene& s) {
  switch (n.op) {
    case Op::Seq:
      for (const auto& step : n.args) apply_action(step, s);
      return;
    case Op::AddObject: {
      if (s.size() >= kMaxObjects) {
        throw Error("capacity", "add_object would exceed " +
                                    std::to_string(kMaxObjects) + " objects");
      }
      const Node& spec = n.args[0];
      SceneObject o;
      o.shape = shape_from_word(spec.args[0].word);
      o.size = size_from_word(spec.args[1].word);
      o.material = material_from_word(spec.args[2].word);
      o.color = color_from_word(spec.args[3].word);
      o.id = s.size();
      o.pos = resolve_placement(n.args[1], s, /*ignore_id=*/-1);
      s.objects.push_back(o);
      s.canonicalize();
      settle(s);
      return;
    }
    case Op::Remove: {
      std::vector<int> targets = eval_set(n.args[0], s);
      std::erase_if(s.objects, [&](const SceneObject& o) {
        return std::binary_search(targets.begin(), targets.end(), o.id);
      });
      s.canonicalize();
      settle(s);
      return;
    }
    case Op::ChangeShape:
    case Op::ChangeSize:
    case Op::ChangeMaterial:
    case Op::ChangeColor: {
      std::vector<int> targets = eval_set(n.args[0], s);
      for (auto& o : s.objects) {
        if (!std::binary_search(targets.begin(), targets.end(), o.id)) continue;
        switch (n.op) {
          case Op::ChangeShape:
            o.shape = shape_from_word(n.args[1].word);
            break;
          case Op::ChangeSize:
            o.size = size_from_word(n.args[1].word);
            break;
          case Op::ChangeMaterial:
            o.material = material_from_word(n.args[1].word);
            break;
          default:
            o.color = color_from_word(n.args[1].word);
            break;
        }
      }
      return;
    }
    case Op::Move: {
      std::vector<int> targets = eval_set(n.args[0], s);
      for (int id : targets) {
        Vec3 pos = resolve_placement(n.args[1], s, id);
        for (auto& o : s.objects) {
          if (o.id == id) {
            o.pos = pos;
            break;
          }
        }
      }
      settle(s);
      return;
    }
    default:
      throw Error("type-error", "op " + std::string(op_name(n.op)) +
                                    " is not an action");
  }
}

}  // namespace

Answer exec_question(const Node& p, const Scene& s) {
  check_question(p);
  QValue v = eval_q(p, s);
  switch (v.tag) {
    case QValue::Tag::Int: return Answer::of_count(v.integer);
    case QValue::Tag::Bool: return Answer::of_bool(v.boolean);
    case QValue::Tag::Attr: return v.attr;
    default:
      throw Error("type-error", "question did not evaluate to an answer");
  }
}

Scene exec_action(const Node& p, const Scene& s) {
  check_action(p);
  Scene out = s;
  apply_action(p, out);
  out.canonicalize();
  return out;
}

}  // namespace actfx
