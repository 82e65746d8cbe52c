#pragma once

#include <cstdint>
#include <random>

namespace actfx {

/// Deterministic RNG: the std::mt19937_64 engine (whose output sequence is
/// fully specified by the standard) with hand-rolled uniform draws, so
/// streams are identical across standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [lo, hi] via rejection sampling.
  int uniform_int(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return lo + static_cast<int>(x % span);
  }

  /// Uniform real in [lo, hi) from the top 53 bits.
  double uniform_real(double lo, double hi) {
    const double unit =
        static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return lo + unit * (hi - lo);
  }

  bool coin(double p_true = 0.5) { return uniform_real(0.0, 1.0) < p_true; }

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[static_cast<std::size_t>(
        uniform_int(0, static_cast<int>(items.size()) - 1))];
  }

  /// Independent substream for record `index` within stream `tag`
  /// (splitmix64 over the mixed key).
  static Rng substream(std::uint64_t seed, std::uint64_t tag,
                       std::uint64_t index) {
    std::uint64_t z = seed ^ (tag * 0x9e3779b97f4a7c15ull) ^
                      (index + 0x7f4a7c15ull) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return Rng(z ^ (z >> 31));
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace actfx
