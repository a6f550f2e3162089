#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "chani/error.hpp"
#include "chani/feature_set.hpp"

namespace chani {

struct Candidate {
  FeatureSet set;
  std::size_t parent1 = 0;  // indices into LayerCatalog::prev, parent1 < parent2 in FeatureSet order
  std::size_t parent2 = 0;
};

/// Candidate layer J_l built from the previous selected layer, and the subset kept.
struct LayerCatalog {
  std::size_t depth = 0;
  std::vector<FeatureSet> prev;        // previous selected layer, sorted
  std::vector<Candidate> candidates;   // sorted by set
  std::vector<std::size_t> selected;   // indices into candidates, ascending

  std::vector<FeatureSet> selected_sets() const {
    std::vector<FeatureSet> out;
    out.reserve(selected.size());
    for (auto i : selected) out.push_back(candidates[i].set);
    return out;
  }

  std::size_t index_of(const FeatureSet& s) const {
    auto it = std::lower_bound(candidates.begin(), candidates.end(), s,
                               [](const Candidate& c, const FeatureSet& v) { return c.set < v; });
    if (it == candidates.end() || it->set != s) return candidates.size();
    return static_cast<std::size_t>(it - candidates.begin());
  }
};

/// All disjoint unions of two sets of the previous layer, one neuron per distinct union.
/// The parent pair kept is the lexicographically smallest one.
inline LayerCatalog build_candidates(std::vector<FeatureSet> prev_selected, std::size_t depth = 0) {
  if (prev_selected.empty()) throw InputError("build_candidates: previous layer is empty");
  const std::size_t card = prev_selected.front().size();
  for (const auto& s : prev_selected) {
    if (s.size() != card) throw InputError("build_candidates: previous layer mixes cardinalities");
  }
  std::sort(prev_selected.begin(), prev_selected.end());
  prev_selected.erase(std::unique(prev_selected.begin(), prev_selected.end()), prev_selected.end());

  LayerCatalog cat;
  cat.depth = depth;
  cat.prev = std::move(prev_selected);
  std::unordered_map<FeatureSet, std::size_t, FeatureSetHash> seen;
  const auto& p = cat.prev;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      if (!p[i].disjoint(p[j])) continue;
      const FeatureSet u = p[i] | p[j];
      if (seen.emplace(u, cat.candidates.size()).second) cat.candidates.push_back({u, i, j});
    }
  }
  std::sort(cat.candidates.begin(), cat.candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.set < b.set; });
  return cat;
}

/// rates[o][c]: empirical rate of candidate c during the selection presentation of nature o.
using RateTable = std::vector<std::vector<double>>;

inline std::vector<double> max_rates(const RateTable& rates, std::size_t n_candidates) {
  std::vector<double> best(n_candidates, 0.0);
  for (const auto& row : rates) {
    if (row.size() != n_candidates) throw InputError("rate table row does not cover every candidate");
    for (std::size_t c = 0; c < n_candidates; ++c) best[c] = std::max(best[c], row[c]);
  }
  return best;
}

/// Keeps a candidate when some nature drives it at rate >= s.
inline std::vector<std::size_t> select_threshold(const RateTable& rates, std::size_t n_candidates, double s,
                                                 std::size_t depth = 0) {
  if (!(s > 0.0 && s <= 1.0)) throw InputError("selection threshold must lie in (0,1]");
  const auto best = max_rates(rates, n_candidates);
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < n_candidates; ++c) {
    if (best[c] >= s) keep.push_back(c);
  }
  if (keep.empty()) {
    const double top = best.empty() ? 0.0 : *std::max_element(best.begin(), best.end());
    throw SelectionEmpty(depth, n_candidates, top);
  }
  return keep;
}

/// Keeps the n candidates with the largest max-over-natures rate. Candidates are assumed
/// to be listed in FeatureSet order, so the index breaks ties.
inline std::vector<std::size_t> select_top_n(const RateTable& rates, std::size_t n_candidates, std::size_t n,
                                             std::string* warning = nullptr) {
  if (n < 1) throw InputError("select_top_n needs n >= 1");
  const auto best = max_rates(rates, n_candidates);
  std::vector<std::size_t> order(n_candidates);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (n >= n_candidates) {
    if (n > n_candidates && warning) {
      *warning = "requested " + std::to_string(n) + " neurons but only " + std::to_string(n_candidates) +
                 " candidates exist; keeping all";
    }
    return order;
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return best[a] > best[b]; });
  order.resize(n);
  std::sort(order.begin(), order.end());
  return order;
}

/// True when every set in `layers[l]` is a disjoint union of two sets of `layers[l-1]`,
/// down to singletons at layers[0].
inline bool valid_union_chain(const std::vector<std::vector<FeatureSet>>& layers) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (const auto& s : layers[l]) {
      if (l == 0) {
        if (s.size() != 1) return false;
        continue;
      }
      if (s.size() != (std::size_t{1} << l)) return false;
      bool ok = false;
      const auto& prev = layers[l - 1];
      for (std::size_t i = 0; i < prev.size() && !ok; ++i) {
        for (std::size_t j = i + 1; j < prev.size() && !ok; ++j) {
          ok = prev[i].disjoint(prev[j]) && (prev[i] | prev[j]) == s;
        }
      }
      if (!ok) return false;
    }
  }
  return true;
}

}  // namespace chani
