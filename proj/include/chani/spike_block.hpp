#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "chani/error.hpp"

namespace chani {

/// Binary activity of one layer over steps 1..T.
///
/// Stored twice: bit rows (neuron-major, for correlations and rates) and, per step, the
/// list of active neurons (time-major, what the next layer integrates). Step 0 is the
/// all-zero column and is not stored.
class SpikeBlock {
 public:
  SpikeBlock() = default;
  SpikeBlock(std::size_t neurons, std::size_t T, int layer_id = 0)
      : layer_id_(layer_id), neurons_(neurons), T_(T), words_((T + 63) / 64), bits_(neurons * words_, 0) {
    offsets_.reserve(T + 1);
  }

  int layer_id() const { return layer_id_; }
  std::size_t neurons() const { return neurons_; }
  std::size_t steps() const { return T_; }
  std::size_t words_per_row() const { return words_; }

  /// Appends the active set of the next step (1, 2, ... in order).
  void push_step(std::span<const std::uint32_t> active) {
    if (offsets_.size() > T_) throw InputError("SpikeBlock: more steps than T");
    const std::size_t t = offsets_.size();  // 1-based step being written
    for (auto n : active) {
      bits_[n * words_ + (t - 1) / 64] |= std::uint64_t{1} << ((t - 1) % 64);
      active_.push_back(n);
    }
    offsets_.push_back(active_.size());
  }

  /// Sets a single spike without the active list; only for hand-built blocks in tests.
  void set(std::size_t neuron, std::size_t t) {
    bits_[neuron * words_ + (t - 1) / 64] |= std::uint64_t{1} << ((t - 1) % 64);
  }

  /// Rebuilds the per-step lists from the bit rows (after using set()).
  void rebuild_steps() {
    offsets_.assign(1, 0);
    active_.clear();
    for (std::size_t t = 1; t <= T_; ++t) {
      for (std::size_t n = 0; n < neurons_; ++n) {
        if (get(n, t)) active_.push_back(static_cast<std::uint32_t>(n));
      }
      offsets_.push_back(active_.size());
    }
  }

  bool get(std::size_t neuron, std::size_t t) const {
    if (t == 0) return false;
    return (bits_[neuron * words_ + (t - 1) / 64] >> ((t - 1) % 64)) & 1u;
  }

  std::span<const std::uint64_t> row(std::size_t neuron) const { return {bits_.data() + neuron * words_, words_}; }

  /// Active neurons at step t; empty for t = 0.
  std::span<const std::uint32_t> active(std::size_t t) const {
    if (t == 0 || t >= offsets_.size()) return {};
    return {active_.data() + offsets_[t - 1], offsets_[t] - offsets_[t - 1]};
  }

  std::size_t count(std::size_t neuron) const {
    std::size_t c = 0;
    for (auto w : row(neuron)) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  double rate(std::size_t neuron) const { return T_ ? static_cast<double>(count(neuron)) / static_cast<double>(T_) : 0.0; }

  std::size_t total_spikes() const { return active_.size(); }

 private:
  int layer_id_ = 0;
  std::size_t neurons_ = 0;
  std::size_t T_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::uint32_t> active_;
};

/// Mean over t of the product of the given rows.
inline double empirical_correlation(const SpikeBlock& block, std::span<const std::size_t> rows) {
  if (block.steps() == 0) return 0.0;
  std::size_t c = 0;
  for (std::size_t w = 0; w < block.words_per_row(); ++w) {
    std::uint64_t acc = ~std::uint64_t{0};
    if (w + 1 == block.words_per_row() && block.steps() % 64) acc = (std::uint64_t{1} << (block.steps() % 64)) - 1;
    for (auto r : rows) acc &= block.row(r)[w];
    c += static_cast<std::size_t>(std::popcount(acc));
  }
  return static_cast<double>(c) / static_cast<double>(block.steps());
}

}  // namespace chani
