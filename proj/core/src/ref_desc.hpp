#pragma once

// Internal: attribute-subset descriptions shared by the generator and the
// question front-end. The filter chain is built in a fixed inner-to-outer
// order (shape, material, color, size) so both sides produce identical
// programs for the same description.

#include <optional>
#include <vector>

#include "actfx/program.hpp"
#include "actfx/scene.hpp"

namespace actfx {

struct RefExpr {
  std::optional<Shape> shape;
  std::optional<Size> size;
  std::optional<Material> material;
  std::optional<Color> color;

  int attr_count() const {
    return (shape ? 1 : 0) + (size ? 1 : 0) + (material ? 1 : 0) +
           (color ? 1 : 0);
  }
};

inline bool ref_matches(const SceneObject& o, const RefExpr& r) {
  if (r.shape && o.shape != *r.shape) return false;
  if (r.size && o.size != *r.size) return false;
  if (r.material && o.material != *r.material) return false;
  if (r.color && o.color != *r.color) return false;
  return true;
}

inline std::vector<int> ref_resolve(const Scene& s, const RefExpr& r) {
  std::vector<int> out;
  for (const auto& o : s.objects) {
    if (ref_matches(o, r)) out.push_back(o.id);
  }
  return out;
}

inline Node ref_chain(const RefExpr& r) {
  Node n = scene_node();
  if (r.shape) {
    n = filter_node(Op::FilterShape, std::move(n), to_word(*r.shape));
  }
  if (r.material) {
    n = filter_node(Op::FilterMaterial, std::move(n), to_word(*r.material));
  }
  if (r.color) {
    n = filter_node(Op::FilterColor, std::move(n), to_word(*r.color));
  }
  if (r.size) {
    n = filter_node(Op::FilterSize, std::move(n), to_word(*r.size));
  }
  return n;
}

}  // namespace actfx
