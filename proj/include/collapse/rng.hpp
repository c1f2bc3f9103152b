#pragma once

#include <cstdint>
#include <random>

namespace collapse {

__extension__ using uint128 = unsigned __int128;

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Random stream owned by exactly one replicate.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard; the conversions below are written out by hand so draws are
/// identical across standard library implementations (std distributions
/// are not).
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    // Lemire's multiply-shift with rejection; unbiased.
    uint128 product = static_cast<uint128>(engine_()) * bound;
    auto low = static_cast<std::uint64_t>(product);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        product = static_cast<uint128>(engine_()) * bound;
        low = static_cast<std::uint64_t>(product);
      }
    }
    return static_cast<std::uint64_t>(product >> 64);
  }

private:
  std::mt19937_64 engine_;
};

/// Counter-based derivation (seed, stream index) -> stream. Streams for
/// distinct indices are independent of the order in which they are created.
inline RandomStream derive_stream(std::uint64_t seed, std::uint64_t index) {
  return RandomStream(mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL)));
}

} // namespace collapse
