#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace alrn {

/// SplitMix64 generator (Steele, Lea & Flood 2014): a 64-bit counter advanced
/// by the golden-ratio increment and passed through a fixed mixing function.
/// Streams are derived with split(), which hashes the parent state together
/// with a stream id, so components can draw numbers independently of the
/// order in which other components consume theirs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept;

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n); n must be positive.
  std::size_t below(std::size_t n) noexcept;

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Independent child stream; does not advance this generator.
  Rng split(std::uint64_t stream) const noexcept;

  std::uint64_t state() const noexcept { return state_; }

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t state_;
};

/// The SplitMix64 finaliser; also used to hash seeds together.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// FNV-1a over the bytes, finalised with mix64. Stable across platforms,
/// unlike std::hash.
std::uint64_t hash64(std::string_view bytes) noexcept;

/// Maps a 64-bit value to [0, 1).
inline double unit_interval(std::uint64_t x) noexcept { return static_cast<double>(x >> 11) * 0x1.0p-53; }

}  // namespace alrn
