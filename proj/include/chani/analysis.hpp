#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chani/datasets.hpp"
#include "chani/dynamics.hpp"
#include "chani/error.hpp"
#include "chani/feature_set.hpp"
#include "chani/spike_block.hpp"

namespace chani {

// ---- correlations -------------------------------------------------------------

/// Probability that every input of S spikes at a given step (independent inputs).
inline double rho_object(const FeatureSet& S, const FiringProfile& profile) {
  double r = 1.0;
  for (auto i : S.elements()) {
    if (i >= profile.rates.size()) throw InputError("rho_object: feature outside the profile");
    r *= profile.rates[i];
  }
  return r;
}

inline double rho_mean(const FeatureSet& S, std::span<const FiringProfile> profiles) {
  if (profiles.empty()) return 0.0;
  double s = 0.0;
  for (const auto& p : profiles) s += rho_object(S, p);
  return s / static_cast<double>(profiles.size());
}

inline double empirical_rho(const SpikeBlock& block, const FeatureSet& subset) {
  const auto rows = subset.elements();
  return empirical_correlation(block, rows);
}

inline double ideal_gamma(std::size_t l, double nu = 0.5) {
  return std::pow(1.0 - nu, std::ldexp(1.0, static_cast<int>(l)) - 1.0);
}

/// J̄_0 = all singletons; J̄_l = disjoint unions of J̄_{l-1} pairs with some rho_o > 2^{2^l-1} s_l.
inline std::vector<std::vector<FeatureSet>> bar_layers(std::span<const FiringProfile> profiles, std::size_t n_features,
                                                       std::span<const double> thresholds) {
  std::vector<std::vector<FeatureSet>> J(1);
  for (std::size_t i = 0; i < n_features; ++i) J[0].push_back(FeatureSet::singleton(i));
  for (std::size_t l = 1; l <= thresholds.size(); ++l) {
    const double bar = std::ldexp(1.0, (1 << l) - 1) * thresholds[l - 1];
    std::vector<FeatureSet> next;
    const auto& prev = J[l - 1];
    for (std::size_t a = 0; a < prev.size(); ++a) {
      for (std::size_t b = a + 1; b < prev.size(); ++b) {
        if (!prev[a].disjoint(prev[b])) continue;
        const FeatureSet u = prev[a] | prev[b];
        bool keep = false;
        for (const auto& p : profiles) {
          if (rho_object(u, p) > bar) {
            keep = true;
            break;
          }
        }
        if (keep) next.push_back(u);
      }
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    J.push_back(std::move(next));
  }
  return J;
}

/// Limit rate of j_S (depth l) on a nature with frozen limit weights. For nu >= 1/2 it is
/// gamma_l * rho_o(S); for nu < 1/2 only depth 1 has a closed form here.
inline double limit_rate(const FeatureSet& S, std::size_t depth, const FiringProfile& profile, double nu) {
  if (depth == 0) return rho_object(S, profile);
  if (nu >= 0.5) return ideal_gamma(depth, nu) * rho_object(S, profile);
  if (depth != 1 || S.size() != 2) throw InputError("limit_rate: nu < 1/2 is only modelled at depth 1");
  const auto e = S.elements();
  const double a = profile.rates[e[0]], b = profile.rates[e[1]];
  return a * b * (1.0 - nu) + (a * (1.0 - b) + b * (1.0 - a)) * (0.5 - nu);
}

/// R[o][j] = limit rate of neuron j of `layer` (depth l) on nature o.
inline std::vector<std::vector<double>> limit_rate_table(std::span<const FeatureSet> layer, std::size_t depth,
                                                         std::span<const FiringProfile> profiles, double nu) {
  std::vector<std::vector<double>> R(profiles.size(), std::vector<double>(layer.size()));
  for (std::size_t o = 0; o < profiles.size(); ++o) {
    for (std::size_t j = 0; j < layer.size(); ++j) R[o][j] = limit_rate(layer[j], depth, profiles[o], nu);
  }
  return R;
}

inline std::vector<std::vector<double>> rho_table(std::span<const FeatureSet> layer,
                                                  std::span<const FiringProfile> profiles) {
  return limit_rate_table(layer, 0, profiles, 0.5);
}

// ---- discrepancies --------------------------------------------------------------

inline std::vector<int> labels_of(std::span<const FiringProfile> profiles) {
  std::vector<int> out;
  for (const auto& p : profiles) out.push_back(p.class_label);
  return out;
}

/// Class means of each column of R: out[k][j] = mean_{o in k} R[o][j].
inline std::vector<std::vector<double>> class_means(const std::vector<std::vector<double>>& R,
                                                    std::span<const int> labels, std::size_t K) {
  const std::size_t J = R.empty() ? 0 : R[0].size();
  std::vector<std::vector<double>> m(K, std::vector<double>(J, 0.0));
  std::vector<std::size_t> n(K, 0);
  for (std::size_t o = 0; o < R.size(); ++o) {
    const auto k = static_cast<std::size_t>(labels[o]);
    ++n[k];
    for (std::size_t j = 0; j < J; ++j) m[k][j] += R[o][j];
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (n[k] == 0) throw InputError("class " + std::to_string(k) + " has no nature");
    for (auto& v : m[k]) v /= static_cast<double>(n[k]);
  }
  return m;
}

/// Disc[k][j] = mean_{o in k} R[o][j] - mean_{k' != k} mean_{o in k'} R[o][j].
inline std::vector<std::vector<double>> feature_discrepancy(const std::vector<std::vector<double>>& R,
                                                            std::span<const int> labels, std::size_t K) {
  if (K < 2) throw InputError("feature discrepancy needs at least two classes");
  const auto m = class_means(R, labels, K);
  const std::size_t J = R.empty() ? 0 : R[0].size();
  std::vector<std::vector<double>> d(K, std::vector<double>(J, 0.0));
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < J; ++j) {
      double others = 0.0;
      for (std::size_t k2 = 0; k2 < K; ++k2) {
        if (k2 != k) others += m[k2][j];
      }
      d[k][j] = m[k][j] - others / static_cast<double>(K - 1);
    }
  }
  return d;
}

struct LimitOutput {
  std::vector<std::vector<std::size_t>> argmax;  // J̄_L^k as indices into the layer
  std::vector<std::vector<double>> weights;      // w̄^k
  std::vector<std::vector<double>> disc;         // Disc^{j->k} (or its nu-analogue)
  std::vector<double> delta;                     // max Disc minus the runner-up outside the argmax, per class
};

inline constexpr double kArgmaxTol = 1e-12;

/// Uniform weights on the argmax of the discrepancy of each class.
inline LimitOutput limit_output_from_rates(const std::vector<std::vector<double>>& R, std::span<const int> labels,
                                           std::size_t K) {
  LimitOutput out;
  out.disc = feature_discrepancy(R, labels, K);
  const std::size_t J = R.empty() ? 0 : R[0].size();
  if (J == 0) throw InputError("limit output weights need a non-empty last layer");
  for (std::size_t k = 0; k < K; ++k) {
    const auto& d = out.disc[k];
    const double top = *std::max_element(d.begin(), d.end());
    std::vector<std::size_t> arg;
    double runner = -INFINITY;
    for (std::size_t j = 0; j < J; ++j) {
      if (d[j] >= top - kArgmaxTol) {
        arg.push_back(j);
      } else {
        runner = std::max(runner, d[j]);
      }
    }
    std::vector<double> w(J, 0.0);
    for (auto j : arg) w[j] = 1.0 / static_cast<double>(arg.size());
    out.argmax.push_back(std::move(arg));
    out.weights.push_back(std::move(w));
    out.delta.push_back(std::isfinite(runner) ? top - runner : 0.0);
  }
  return out;
}

inline LimitOutput limit_output_weights(std::span<const FeatureSet> last_layer, std::span<const FiringProfile> profiles,
                                        std::size_t K) {
  const auto labels = labels_of(profiles);
  return limit_output_from_rates(rho_table(last_layer, profiles), labels, K);
}

/// Mean over k, over objects m of class k, of a[m][k] - mean_{k' != k} a[m][k'].
/// Returns the per-class values; the network value is their mean.
inline std::vector<double> class_discrepancy(const std::vector<std::vector<double>>& activity,
                                             std::span<const int> labels, std::size_t K) {
  if (K < 2) throw InputError("class discrepancy needs at least two classes");
  std::vector<double> sum(K, 0.0);
  std::vector<std::size_t> n(K, 0);
  for (std::size_t m = 0; m < activity.size(); ++m) {
    const auto k = static_cast<std::size_t>(labels[m]);
    double others = 0.0;
    for (std::size_t k2 = 0; k2 < K; ++k2) {
      if (k2 != k) others += activity[m][k2];
    }
    sum[k] += activity[m][k] - others / static_cast<double>(K - 1);
    ++n[k];
  }
  for (std::size_t k = 0; k < K; ++k) sum[k] = n[k] ? sum[k] / static_cast<double>(n[k]) : 0.0;
  return sum;
}

inline double mean_of(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// a[m][k] = q^k . r_m
inline std::vector<std::vector<double>> activities(const std::vector<std::vector<double>>& q,
                                                   const std::vector<std::vector<double>>& rates) {
  std::vector<std::vector<double>> a(rates.size(), std::vector<double>(q.size(), 0.0));
  for (std::size_t m = 0; m < rates.size(); ++m) {
    for (std::size_t k = 0; k < q.size(); ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < rates[m].size(); ++j) s += q[k][j] * rates[m][j];
      a[m][k] = s;
    }
  }
  return a;
}

/// Ideal discrepancy of q^K on an ideal layer with constant 1, natures weighted within their class.
inline double ideal_discrepancy(const std::vector<std::vector<double>>& q, const std::vector<std::vector<double>>& rho,
                                std::span<const int> labels, std::size_t K) {
  return mean_of(class_discrepancy(activities(q, rho), labels, K));
}

/// max over q^K of the ideal discrepancy: it separates per class, so it is attained at vertices.
inline double max_ideal_discrepancy(const std::vector<std::vector<double>>& rho, std::span<const int> labels,
                                    std::size_t K) {
  const auto d = feature_discrepancy(rho, labels, K);
  double s = 0.0;
  for (const auto& dk : d) s += *std::max_element(dk.begin(), dk.end());
  return s / static_cast<double>(K);
}

// ---- class decomposition and strong feasibility ---------------------------------

struct BinaryCorrelationAudit {
  bool holds = false;
  double p = 0.0;
  std::string detail;
};

/// Every nonzero rho_o(S) equals one p and every O^S has the same size.
inline BinaryCorrelationAudit audit_binary_correlations(const std::vector<std::vector<double>>& rho) {
  BinaryCorrelationAudit a;
  a.holds = true;
  std::optional<std::size_t> size;
  const std::size_t J = rho.empty() ? 0 : rho[0].size();
  for (std::size_t j = 0; j < J && a.holds; ++j) {
    std::size_t n = 0;
    for (std::size_t o = 0; o < rho.size(); ++o) {
      const double v = rho[o][j];
      if (v == 0.0) continue;
      ++n;
      if (a.p == 0.0) a.p = v;
      if (std::abs(v - a.p) > 1e-12) {
        a.holds = false;
        a.detail = "neuron " + std::to_string(j) + " has two distinct nonzero correlations";
      }
    }
    if (!size) size = n;
    if (a.holds && n != *size) {
      a.holds = false;
      a.detail = "object sets O^S differ in size";
    }
  }
  return a;
}

struct Decomposition {
  bool success = false;
  std::vector<std::vector<std::size_t>> E;  // maximal E^k (indices into the layer)
  std::optional<std::size_t> failing_class;
  std::optional<std::size_t> witness;       // nature of the failing class covered by no O^S inside it
};

/// Maximal E^k = {S : O^S non-empty and O^S within k}; class k decomposes iff these cover k.
inline Decomposition check_class_decomposition(const std::vector<std::vector<double>>& rho,
                                               std::span<const int> labels, std::size_t K) {
  Decomposition d;
  d.E.resize(K);
  const std::size_t J = rho.empty() ? 0 : rho[0].size();
  for (std::size_t j = 0; j < J; ++j) {
    std::optional<int> cls;
    bool inside = true, any = false;
    for (std::size_t o = 0; o < rho.size(); ++o) {
      if (rho[o][j] <= 0.0) continue;
      any = true;
      if (!cls) cls = labels[o];
      if (labels[o] != *cls) inside = false;
    }
    if (any && inside) d.E[static_cast<std::size_t>(*cls)].push_back(j);
  }
  d.success = true;
  for (std::size_t k = 0; k < K && d.success; ++k) {
    for (std::size_t o = 0; o < rho.size(); ++o) {
      if (labels[o] != static_cast<int>(k)) continue;
      bool covered = false;
      for (auto j : d.E[k]) covered |= rho[o][j] > 0.0;
      if (!covered) {
        d.success = false;
        d.failing_class = k;
        d.witness = o;
        break;
      }
    }
  }
  return d;
}

/// Strong feasibility of q^K: q^k . rho_o > 0 exactly when o is in k.
inline bool is_strong_feasible(const std::vector<std::vector<double>>& q, const std::vector<std::vector<double>>& rho,
                               std::span<const int> labels) {
  const auto a = activities(q, rho);
  for (std::size_t o = 0; o < rho.size(); ++o) {
    for (std::size_t k = 0; k < q.size(); ++k) {
      if ((a[o][k] > 0.0) != (labels[o] == static_cast<int>(k))) return false;
    }
  }
  return true;
}

/// Brute force over supports: the sign pattern of q^k . rho_o depends only on supp(q^k),
/// so a strong feasible family exists iff each class has a good non-empty support.
inline bool strong_feasible_exists(const std::vector<std::vector<double>>& rho, std::span<const int> labels,
                                   std::size_t K) {
  const std::size_t J = rho.empty() ? 0 : rho[0].size();
  if (J == 0) return false;
  if (J > 24) throw InputError("strong_feasible_exists: layer too large for exhaustive search");
  // hits[o] = bitmask of neurons active on nature o
  std::vector<std::uint32_t> hits(rho.size(), 0);
  for (std::size_t o = 0; o < rho.size(); ++o) {
    for (std::size_t j = 0; j < J; ++j) {
      if (rho[o][j] > 0.0) hits[o] |= 1u << j;
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    bool found = false;
    for (std::uint32_t supp = 1; supp < (1u << J) && !found; ++supp) {
      bool ok = true;
      for (std::size_t o = 0; o < rho.size() && ok; ++o) {
        ok = ((hits[o] & supp) != 0) == (labels[o] == static_cast<int>(k));
      }
      found = ok;
    }
    if (!found) return false;
  }
  return true;
}

// ---- VC dimension ---------------------------------------------------------------

/// Points are objects as feature bitmasks; neuron S is activated by x when S is inside x.
inline std::uint64_t activation_mask(std::uint32_t point, std::span<const std::uint32_t> family) {
  std::uint64_t m = 0;
  for (std::size_t j = 0; j < family.size(); ++j) {
    if ((family[j] & point) == family[j]) m |= std::uint64_t{1} << j;
  }
  return m;
}

/// Literal definition: every labelling of `points` is produced by some 1_F, F within the family.
inline bool shattered_by_enumeration(std::span<const std::uint32_t> points, std::span<const std::uint32_t> family) {
  if (points.size() > 20 || family.size() > 20) throw InputError("shattered_by_enumeration: instance too large");
  std::vector<std::uint64_t> act;
  for (auto x : points) act.push_back(activation_mask(x, family));
  std::vector<bool> seen(std::size_t{1} << points.size(), false);
  for (std::uint64_t F = 0; F < (std::uint64_t{1} << family.size()); ++F) {
    std::size_t lab = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (act[i] & F) lab |= std::size_t{1} << i;
    }
    seen[lab] = true;
  }
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

/// A set is shattered iff every point activates a neuron no other point of the set activates.
inline bool shattered_by_private_neurons(std::span<const std::uint32_t> points, std::span<const std::uint32_t> family) {
  std::vector<std::uint64_t> act;
  for (auto x : points) act.push_back(activation_mask(x, family));
  for (std::size_t i = 0; i < act.size(); ++i) {
    std::uint64_t priv = act[i];
    for (std::size_t k = 0; k < act.size(); ++k) {
      if (k != i) priv &= ~act[k];
    }
    if (!priv) return false;
  }
  return true;
}

namespace detail {
struct VcSearch {
  std::vector<std::uint64_t> act;  // activation mask of each candidate point
  std::size_t best = 0;
  std::size_t cap = 0;

  // chosen: activation masks of the points picked so far; priv: their private neurons.
  void dfs(std::size_t start, std::vector<std::uint64_t>& chosen, std::vector<std::uint64_t>& priv, std::uint64_t used) {
    best = std::max(best, chosen.size());
    if (best == cap) return;
    // Each further point needs a private neuron outside `used`.
    const auto free = static_cast<std::size_t>(std::popcount(~used & ((cap == 64) ? ~0ULL : ((1ULL << cap) - 1))));
    if (chosen.size() + free <= best) return;
    for (std::size_t p = start; p < act.size(); ++p) {
      const std::uint64_t a = act[p];
      if (!(a & ~used)) continue;
      bool ok = true;
      for (auto pv : priv) {
        if (!(pv & ~a)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      std::vector<std::uint64_t> saved = priv;
      for (auto& pv : priv) pv &= ~a;
      priv.push_back(a & ~used);
      chosen.push_back(a);
      dfs(p + 1, chosen, priv, used | a);
      chosen.pop_back();
      priv = std::move(saved);
      if (best == cap) return;
    }
  }
};
}  // namespace detail

/// Largest shattered set of binary objects over n_features for H = {1_F : F within family}.
/// Exhaustive over all 2^n points with branch and bound; capped at 16 features.
inline std::size_t vc_shatter(std::span<const FeatureSet> family, std::size_t n_features) {
  if (n_features > 16) throw InputError("vc_shatter: at most 16 features");
  if (family.size() > 64) throw InputError("vc_shatter: at most 64 neurons");
  if (family.empty()) return 0;
  std::vector<std::uint32_t> fam;
  for (const auto& s : family) {
    std::uint32_t m = 0;
    for (auto i : s.elements()) {
      if (i >= n_features) throw InputError("vc_shatter: feature outside I");
      m |= 1u << i;
    }
    fam.push_back(m);
  }
  detail::VcSearch search;
  search.cap = fam.size();
  for (std::uint32_t x = 0; x < (1u << n_features); ++x) {
    const auto a = activation_mask(x, fam);
    if (a) search.act.push_back(a);
  }
  // Points with fewer activated neurons are more likely to keep a private one; try them first.
  std::stable_sort(search.act.begin(), search.act.end(),
                   [](std::uint64_t a, std::uint64_t b) { return std::popcount(a) < std::popcount(b); });
  search.act.erase(std::unique(search.act.begin(), search.act.end()), search.act.end());
  std::vector<std::uint64_t> chosen, priv;
  search.dfs(0, chosen, priv, 0);
  return search.best;
}

/// The indicator objects o^j (features of S only), one per neuron.
inline std::vector<std::uint32_t> vc_witness(std::span<const FeatureSet> family) {
  std::vector<std::uint32_t> pts;
  for (const auto& s : family) {
    std::uint32_t m = 0;
    for (auto i : s.elements()) m |= 1u << i;
    pts.push_back(m);
  }
  return pts;
}

// ---- bias counterexample --------------------------------------------------------

struct NuCounterexample {
  double nu = 0.0;
  double p = 0.0;  // rate of a pair neuron when both features are present
  double q = 0.0;  // rate when exactly one is present
  std::vector<FeatureSet> layer;               // J̄_1
  LimitOutput limit;                           // computed from limit hidden rates
  std::vector<std::vector<double>> activity;   // [nature][class] limit output rate
  std::vector<std::size_t> predicted;          // argmax class per nature, ties to the smallest index
  std::vector<bool> tie;
  double blue_square_k2 = 0.0;
  bool blue_square_misclassified = false;
};

/// Shapes natures with k1 = {red square, green square, blue circle, blue triangle}, depth 1,
/// limit weights built from the limit hidden rates under bias nu.
inline NuCounterexample nu_counterexample(double nu, double p_prime,
                                          std::optional<std::vector<int>> labels_override = std::nullopt) {
  if (!(nu >= 0.0 && nu < 1.0)) throw InputError("nu must lie in [0,1)");
  if (!(p_prime > 0.0 && p_prime <= 1.0)) throw InputError("p' must lie in (0,1]");
  // natures in shapes order: B○ B□ B△ R○ R□ R△ G○ G□ G△
  std::vector<int> labels = labels_override ? *labels_override : std::vector<int>{0, 1, 0, 1, 0, 1, 1, 0, 1};
  const auto profiles = shapes_profiles_labelled(p_prime, labels);
  NuCounterexample r;
  r.nu = nu;
  r.q = std::max(0.5 - nu, 0.0) * p_prime;
  r.p = p_prime * p_prime * (1.0 - nu) + 2.0 * p_prime * (1.0 - p_prime) * std::max(0.5 - nu, 0.0);
  const double s1 = 0.5 * p_prime * p_prime;  // any s in (0, p'^2) gives the nine colour-shape pairs
  const double th[1] = {s1 / 2.0};
  r.layer = bar_layers(profiles, 6, th)[1];
  const auto R = limit_rate_table(r.layer, 1, profiles, nu);
  std::size_t K = 0;
  for (int l : labels) K = std::max(K, static_cast<std::size_t>(l) + 1);
  r.limit = limit_output_from_rates(R, labels, K);
  r.activity = activities(r.limit.weights, R);
  for (std::size_t o = 0; o < profiles.size(); ++o) {
    const auto& a = r.activity[o];
    std::size_t best = 0;
    for (std::size_t k = 1; k < a.size(); ++k) {
      if (a[k] > a[best] + kArgmaxTol) best = k;
    }
    std::size_t n_best = 0;
    for (double v : a) n_best += std::abs(v - a[best]) <= kArgmaxTol;
    r.predicted.push_back(best);
    r.tie.push_back(n_best > 1);
  }
  constexpr std::size_t blue_square = 1;
  r.blue_square_k2 = r.activity[blue_square][1];
  r.blue_square_misclassified = r.predicted[blue_square] != static_cast<std::size_t>(labels[blue_square]) ||
                                r.tie[blue_square];
  return r;
}

// ---- assumption audits ----------------------------------------------------------

struct AuditResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Adding a feature to a set with positive mean correlation strictly lowers it. Exhaustive
/// for |I| <= 16, otherwise sets of size <= max_size.
inline AuditResult audit_decreasing_correlation(std::span<const FiringProfile> profiles, std::size_t n_features,
                                                std::size_t max_size = 2) {
  AuditResult a{"decreasing-correlation", true, ""};
  auto check = [&](const FeatureSet& S) {
    const double base = rho_mean(S, profiles);
    if (base <= 0.0) return true;
    for (std::size_t i = 0; i < n_features; ++i) {
      if (S.contains(i)) continue;
      FeatureSet T = S;
      T.insert(i);
      if (!(rho_mean(T, profiles) < base)) {
        a.pass = false;
        a.detail = "adding feature " + std::to_string(i) + " to " + S.to_string() + " keeps the correlation";
        return false;
      }
    }
    return true;
  };
  if (n_features <= 16) {
    for (std::uint32_t m = 0; m < (1u << n_features); ++m) {
      FeatureSet S;
      for (std::size_t i = 0; i < n_features; ++i) {
        if (m >> i & 1u) S.insert(i);
      }
      if (!check(S)) return a;
    }
    a.detail = "exhaustive over all subsets";
  } else {
    if (!check(FeatureSet{})) return a;
    for (std::size_t i = 0; i < n_features; ++i) {
      if (!check(FeatureSet::singleton(i))) return a;
      if (max_size < 2) continue;
      for (std::size_t j = i + 1; j < n_features; ++j) {
        if (!check(FeatureSet::of({i, j}))) return a;
      }
    }
    a.detail = "subsets of size <= " + std::to_string(max_size);
  }
  return a;
}

/// At most half of each J̄_l active per nature, and every non-selected set of size 2^l
/// stays strictly below the scaled threshold (checked exhaustively when C(|I|, 2^l) is small).
inline AuditResult audit_sparse_features(std::span<const FiringProfile> profiles, std::size_t n_features,
                                         std::span<const double> thresholds) {
  AuditResult a{"sparse-features", true, ""};
  const auto J = bar_layers(profiles, n_features, thresholds);
  for (std::size_t l = 0; l < J.size(); ++l) {
    for (const auto& p : profiles) {
      std::size_t active = 0;
      for (const auto& S : J[l]) active += rho_object(S, p) > 0.0;
      if (2 * active > J[l].size()) {
        a.pass = false;
        a.detail = "nature " + p.nature_id + " activates " + std::to_string(active) + " of " +
                   std::to_string(J[l].size()) + " neurons at depth " + std::to_string(l);
        return a;
      }
    }
  }
  for (std::size_t l = 1; l < J.size(); ++l) {
    const std::size_t size = std::size_t{1} << l;
    if (size > n_features) continue;
    // C(n, size) bound to keep the audit tractable
    double comb = 1.0;
    for (std::size_t i = 0; i < size; ++i) comb = comb * static_cast<double>(n_features - i) / static_cast<double>(i + 1);
    if (comb > 5e4) {
      a.detail = "separation at depth " + std::to_string(l) + " not audited (too many subsets)";
      continue;
    }
    const double bar = std::ldexp(1.0, static_cast<int>(size) - 1) * thresholds[l - 1];
    std::vector<std::size_t> idx(size);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (;;) {
      FeatureSet S;
      for (auto i : idx) S.insert(i);
      if (!std::binary_search(J[l].begin(), J[l].end(), S)) {
        for (const auto& p : profiles) {
          if (!(rho_object(S, p) < bar)) {
            a.pass = false;
            a.detail = S.to_string() + " is outside J̄_" + std::to_string(l) + " but reaches the threshold";
            return a;
          }
        }
      }
      std::size_t i = size;
      while (i > 0 && idx[i - 1] == n_features - size + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t k = i; k < size; ++k) idx[k] = idx[k - 1] + 1;
    }
  }
  return a;
}

inline AuditResult audit_binary_correlations(std::span<const FeatureSet> last_layer,
                                             std::span<const FiringProfile> profiles) {
  const auto b = audit_binary_correlations(rho_table(last_layer, profiles));
  return {"binary-correlations", b.holds, b.holds ? "p = " + std::to_string(b.p) : b.detail};
}

}  // namespace chani
