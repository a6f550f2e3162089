#pragma once

#include <array>
#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "chani/error.hpp"

namespace chani {

inline constexpr std::size_t kMaxFeatures = 128;

/// Set of input features coded by a hidden neuron j_S. Fixed width (128 bits).
///
/// Ordering is lexicographic over the sorted element lists, so {0,1} < {0,2} < {1,2}
/// and a proper prefix sorts first.
class FeatureSet {
 public:
  FeatureSet() = default;

  static FeatureSet singleton(std::size_t feature) {
    FeatureSet s;
    s.insert(feature);
    return s;
  }

  static FeatureSet of(std::initializer_list<std::size_t> features) {
    FeatureSet s;
    for (auto f : features) s.insert(f);
    return s;
  }

  void insert(std::size_t feature) {
    if (feature >= kMaxFeatures) throw InputError("feature index out of range: " + std::to_string(feature));
    words_[feature / 64] |= std::uint64_t{1} << (feature % 64);
  }

  bool contains(std::size_t feature) const {
    return feature < kMaxFeatures && ((words_[feature / 64] >> (feature % 64)) & 1u);
  }

  std::size_t size() const {
    return static_cast<std::size_t>(std::popcount(words_[0]) + std::popcount(words_[1]));
  }
  bool empty() const { return (words_[0] | words_[1]) == 0; }

  bool disjoint(const FeatureSet& other) const {
    return ((words_[0] & other.words_[0]) | (words_[1] & other.words_[1])) == 0;
  }

  bool subset_of(const FeatureSet& other) const {
    return (words_[0] & ~other.words_[0]) == 0 && (words_[1] & ~other.words_[1]) == 0;
  }

  FeatureSet operator|(const FeatureSet& other) const {
    FeatureSet s;
    s.words_ = {words_[0] | other.words_[0], words_[1] | other.words_[1]};
    return s;
  }

  std::vector<std::size_t> elements() const {
    std::vector<std::size_t> out;
    out.reserve(size());
    for (std::size_t w = 0; w < 2; ++w) {
      for (std::uint64_t bits = words_[w]; bits; bits &= bits - 1) {
        out.push_back(w * 64 + static_cast<std::size_t>(std::countr_zero(bits)));
      }
    }
    return out;
  }

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;

  friend std::strong_ordering operator<=>(const FeatureSet& a, const FeatureSet& b) {
    // First differing element decides; if one set runs out first it is a prefix.
    for (std::size_t w = 0; w < 2; ++w) {
      const std::uint64_t diff = a.words_[w] ^ b.words_[w];
      if (!diff) continue;
      const auto x = static_cast<std::size_t>(std::countr_zero(diff));
      const bool in_a = (a.words_[w] >> x) & 1u;
      // The set holding x is smaller unless the other one has nothing left (it is a prefix).
      const FeatureSet& other = in_a ? b : a;
      const bool holder_smaller = other.has_element_at_or_above(w * 64 + x);
      return (in_a == holder_smaller) ? std::strong_ordering::less : std::strong_ordering::greater;
    }
    return std::strong_ordering::equal;
  }

  /// "{0,3,5}"
  std::string to_string() const {
    std::string out = "{";
    bool first = true;
    for (auto e : elements()) {
      if (!first) out += ',';
      out += std::to_string(e);
      first = false;
    }
    return out + "}";
  }

  static FeatureSet parse(std::string_view text) {
    if (text.size() < 2 || text.front() != '{' || text.back() != '}') {
      throw ParseError("feature set must look like {a,b,...}: " + std::string(text));
    }
    FeatureSet s;
    text = text.substr(1, text.size() - 2);
    while (!text.empty()) {
      const auto comma = text.find(',');
      const auto token = text.substr(0, comma);
      std::size_t value = 0;
      if (token.empty()) throw ParseError("empty element in feature set");
      for (char c : token) {
        if (c < '0' || c > '9') throw ParseError("bad feature index: " + std::string(token));
        value = value * 10 + static_cast<std::size_t>(c - '0');
      }
      s.insert(value);
      if (comma == std::string_view::npos) break;
      text = text.substr(comma + 1);
    }
    return s;
  }

  std::size_t hash() const {
    return std::hash<std::uint64_t>{}(words_[0] * 0x9E3779B97F4A7C15ULL ^ words_[1]);
  }

 private:
  bool has_element_at_or_above(std::size_t index) const {
    if (index >= kMaxFeatures) return false;
    const std::size_t w = index / 64;
    if ((words_[w] >> (index % 64)) != 0) return true;
    return w == 0 && words_[1] != 0;
  }

  std::array<std::uint64_t, 2> words_{0, 0};
};

struct FeatureSetHash {
  std::size_t operator()(const FeatureSet& s) const { return s.hash(); }
};

}  // namespace chani
