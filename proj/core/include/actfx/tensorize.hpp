#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "actfx/scene.hpp"

namespace actfx {

// Slot layout: presence(1) + shape(3) + size(2) + material(2) + color(8)
// + xyz(3), coordinates scaled by 1/3.
inline constexpr int kSlotDim = 19;
inline constexpr int kSceneVecDim = kMaxObjects * kSlotDim;  // 190
inline constexpr int kMaxTokens = 24;
inline constexpr double kCoordScale = 3.0;

/// Objects written in canonical order (sorted by position, then attributes)
/// into leading slots; remaining slots are zero. Permutation-invariant.
std::vector<double> encode_scene(const Scene& s);

/// Total function: any 190-vector decodes to a valid scene. Slots with
/// presence above the threshold become objects (argmax per categorical
/// group, ties to the lowest enum index); invalid geometry is repaired by
/// nudging coordinates to the nearest legal grid cell.
Scene decode_scene(std::span<const double> v, double presence_threshold = 0.5);

/// Frozen word-id table. Id 0 is reserved for padding.
class Vocabulary {
public:
  Vocabulary() = default;

  /// Builds from a word set: pad token first, then sorted unique words.
  static Vocabulary build(std::vector<std::string> words);

  int size() const { return static_cast<int>(words_.size()); }
  /// Throws Error("oov-token") for unknown words.
  int id(std::string_view word) const;
  bool contains(std::string_view word) const;
  const std::string& word(int id) const;

  std::string to_json() const;  // JSON array, index = id
  static Vocabulary from_json(const std::string& text);

  /// FNV-1a over the word list; ties checkpoints to the vocabulary.
  std::uint64_t hash() const;

private:
  std::vector<std::string> words_;
};

/// Whitespace tokenization, left-aligned, zero-padded to kMaxTokens.
/// Throws Error("oov-token") or Error("sequence-too-long").
std::vector<int> tokenize(std::string_view text, const Vocabulary& vocab);

std::vector<double> encode_answer(const Answer& a);  // one-hot length 27
Answer decode_answer(std::span<const double> v);     // argmax

}  // namespace actfx
