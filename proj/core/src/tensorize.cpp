#include "actfx/tensorize.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "actfx/error.hpp"
#include "json.hpp"

namespace actfx {

namespace {

auto canonical_key(const SceneObject& o) {
  return std::make_tuple(o.pos.x, o.pos.y, o.pos.z, o.shape, o.size,
                         o.material, o.color);
}

int argmax(std::span<const double> v, int begin, int count) {
  int best = 0;
  for (int i = 1; i < count; ++i) {
    if (v[begin + i] > v[begin + best]) best = i;
  }
  return best;
}

}  // namespace

std::vector<double> encode_scene(const Scene& s) {
  std::vector<const SceneObject*> order;
  order.reserve(s.objects.size());
  for (const auto& o : s.objects) order.push_back(&o);
  std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
    return canonical_key(*a) < canonical_key(*b);
  });

  std::vector<double> v(kSceneVecDim, 0.0);
  for (std::size_t slot = 0; slot < order.size(); ++slot) {
    const auto& o = *order[slot];
    double* p = v.data() + slot * kSlotDim;
    p[0] = 1.0;
    p[1 + static_cast<int>(o.shape)] = 1.0;
    p[4 + static_cast<int>(o.size)] = 1.0;
    p[6 + static_cast<int>(o.material)] = 1.0;
    p[8 + static_cast<int>(o.color)] = 1.0;
    p[16] = o.pos.x / kCoordScale;
    p[17] = o.pos.y / kCoordScale;
    p[18] = o.pos.z / kCoordScale;
  }
  return v;
}

namespace {

bool xy_clear(const Scene& s, double x, double y) {
  for (const auto& o : s.objects) {
    if (std::hypot(o.pos.x - x, o.pos.y - y) < kMinSeparation) return false;
  }
  return true;
}

/// Repairs min-distance violations by moving the offender to the nearest
/// free 0.5-spaced grid cell (reading-order tie-break).
Vec3 nearest_legal_cell(const Scene& accepted, double px, double py) {
  Vec3 best{0.0, 0.0, 0.0};
  double best_d = -1.0;
  for (double y = -kCoordRange; y <= kCoordRange + 1e-9; y += kGridStep) {
    for (double x = -kCoordRange; x <= kCoordRange + 1e-9; x += kGridStep) {
      if (!xy_clear(accepted, x, y)) continue;
      const double d = std::hypot(x - px, y - py);
      if (best_d < 0.0 || d < best_d - 1e-12) {
        best_d = d;
        best = {x, y, 0.0};
      }
    }
  }
  return best;  // a free cell always exists below the capacity limit
}

}  // namespace

Scene decode_scene(std::span<const double> v, double presence_threshold) {
  if (v.size() != kSceneVecDim) {
    throw Error("bad-shape", "scene vector must have length " +
                                 std::to_string(kSceneVecDim));
  }
  Scene raw;
  for (int slot = 0; slot < kMaxObjects; ++slot) {
    const int base = slot * kSlotDim;
    if (!(v[base] > presence_threshold)) continue;
    SceneObject o;
    o.shape = static_cast<Shape>(argmax(v, base + 1, kShapeCount));
    o.size = static_cast<Size>(argmax(v, base + 4, kSizeCount));
    o.material = static_cast<Material>(argmax(v, base + 6, kMaterialCount));
    o.color = static_cast<Color>(argmax(v, base + 8, kColorCount));
    o.pos.x = std::clamp(v[base + 16] * kCoordScale, -kCoordRange, kCoordRange);
    o.pos.y = std::clamp(v[base + 17] * kCoordScale, -kCoordRange, kCoordRange);
    o.pos.z = std::max(0.0, v[base + 18] * kCoordScale);
    raw.objects.push_back(o);
  }

  // Geometry repair: accept objects one by one; an object keeps z > 0 only
  // if it lands on an already-accepted column, and collides only onto the
  // nearest legal grid cell.
  std::sort(raw.objects.begin(), raw.objects.end(),
            [](const SceneObject& a, const SceneObject& b) {
              return canonical_key(a) < canonical_key(b);
            });
  Scene out;
  auto stacked = [](const SceneObject& a, const SceneObject& b) {
    return std::abs(a.pos.x - b.pos.x) <= kSpatialTol &&
           std::abs(a.pos.y - b.pos.y) <= kSpatialTol && a.pos.z != b.pos.z;
  };
  auto has_conflict = [&](const SceneObject& o) {
    for (const auto& b : out.objects) {
      if (stacked(o, b)) continue;
      if (std::hypot(b.pos.x - o.pos.x, b.pos.y - o.pos.y) < kMinSeparation) {
        return true;
      }
    }
    return false;
  };
  for (auto o : raw.objects) {
    if (o.pos.z > 0.0) {
      bool supported = false;
      for (const auto& b : out.objects) {
        if (std::abs(b.pos.x - o.pos.x) <= kSpatialTol &&
            std::abs(b.pos.y - o.pos.y) <= kSpatialTol && b.pos.z < o.pos.z) {
          supported = true;
          break;
        }
      }
      if (!supported || has_conflict(o)) o.pos.z = 0.0;
    }
    if (o.pos.z == 0.0 && has_conflict(o)) {
      o.pos = nearest_legal_cell(out, o.pos.x, o.pos.y);
    }
    out.objects.push_back(o);
  }
  out.canonicalize();
  return out;
}

// --- Vocabulary ----------------------------------------------------------------

Vocabulary Vocabulary::build(std::vector<std::string> words) {
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  std::erase(words, "<pad>");
  Vocabulary v;
  v.words_.reserve(words.size() + 1);
  v.words_.push_back("<pad>");
  for (auto& w : words) v.words_.push_back(std::move(w));
  return v;
}

int Vocabulary::id(std::string_view word) const {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i] == word) return static_cast<int>(i);
  }
  throw Error("oov-token", std::string(word) + " is not in the vocabulary");
}

bool Vocabulary::contains(std::string_view word) const {
  for (const auto& w : words_) {
    if (w == word) return true;
  }
  return false;
}

const std::string& Vocabulary::word(int id) const {
  if (id < 0 || id >= size()) {
    throw Error("oov-token", "token id out of range");
  }
  return words_[id];
}

std::string Vocabulary::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& w : words_) arr.push_back(w);
  return arr.dump();
}

Vocabulary Vocabulary::from_json(const std::string& text) {
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad-json", e.what());
  }
  if (!arr.is_array() || arr.empty() || arr[0] != "<pad>") {
    throw Error("bad-json", "vocabulary must be a JSON array led by <pad>");
  }
  Vocabulary v;
  for (const auto& w : arr) v.words_.push_back(w.get<std::string>());
  return v;
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (const auto& w : words_) {
    for (char c : w) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    h ^= static_cast<unsigned char>('\n');
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<int> tokenize(std::string_view text, const Vocabulary& vocab) {
  std::vector<int> ids;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) {
    if (static_cast<int>(ids.size()) == kMaxTokens) {
      throw Error("sequence-too-long",
                  "text exceeds " + std::to_string(kMaxTokens) + " tokens");
    }
    ids.push_back(vocab.id(w));
  }
  ids.resize(kMaxTokens, 0);
  return ids;
}

std::vector<double> encode_answer(const Answer& a) {
  std::vector<double> v(kAnswerCount, 0.0);
  v[a.index()] = 1.0;
  return v;
}

Answer decode_answer(std::span<const double> v) {
  if (v.size() != kAnswerCount) {
    throw Error("bad-shape", "answer vector must have length 27");
  }
  return Answer::from_index(argmax(v, 0, kAnswerCount));
}

}  // namespace actfx
