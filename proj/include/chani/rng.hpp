#pragma once

#include <cstdint>

namespace chani {

/// Counter-based keyed random stream.
///
/// A stream is a 64-bit key; `child(tag)` derives an independent sub-stream and
/// `uniform(counter)` is a pure function of (key, counter). The same key always yields
/// the same draws, regardless of which thread asks or in what order.
class RngStream {
 public:
  constexpr RngStream() = default;
  constexpr explicit RngStream(std::uint64_t seed) : key_(mix(seed ^ 0x6A09E667F3BCC909ULL)) {}

  constexpr RngStream child(std::uint64_t tag) const {
    RngStream s;
    s.key_ = mix(key_ ^ mix(tag + kGolden));
    return s;
  }

  constexpr std::uint64_t bits(std::uint64_t counter) const { return mix(key_ + counter * kGolden); }

  /// Uniform on [0,1) with 53 random bits.
  constexpr double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t key() const { return key_; }

  // SplitMix64 finalizer.
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
  std::uint64_t key_ = 0;
};

/// Fisher-Yates permutation of [0, n) driven by a keyed stream (portable across stdlibs).
template <typename Container>
void keyed_shuffle(Container& items, const RngStream& rng) {
  for (std::uint64_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::uint64_t>(rng.uniform(i) * static_cast<double>(i));
    using std::swap;
    swap(items[i - 1], items[j < i ? j : i - 1]);
  }
}

}  // namespace chani
