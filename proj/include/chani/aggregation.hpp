#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chani/error.hpp"

namespace chani {

/// Cumulative gains of one forecaster (a postsynaptic neuron) and its experts.
class GainLedger {
 public:
  GainLedger() = default;
  explicit GainLedger(std::size_t n_experts) : expert_gains_(n_experts, 0.0) {}

  std::size_t size() const { return expert_gains_.size(); }
  std::span<const double> expert_gains() const { return expert_gains_; }
  double forecaster_gain() const { return forecaster_gain_; }
  std::uint64_t rounds() const { return rounds_; }

  /// G^e += g^e, G += w.g, m += 1. `weights` are the ones used during the round.
  void accumulate(std::span<const double> gains, std::span<const double> weights) {
    if (gains.size() != expert_gains_.size() || weights.size() != expert_gains_.size()) {
      throw InputError("ledger dimension mismatch: " + std::to_string(expert_gains_.size()) + " experts, " +
                       std::to_string(gains.size()) + " gains, " + std::to_string(weights.size()) + " weights");
    }
    double dot = 0.0;
    for (std::size_t e = 0; e < gains.size(); ++e) {
      expert_gains_[e] += gains[e];
      dot += weights[e] * gains[e];
    }
    forecaster_gain_ += dot;
    ++rounds_;
  }

 private:
  std::vector<double> expert_gains_;
  double forecaster_gain_ = 0.0;
  std::uint64_t rounds_ = 0;
};

struct AggregatorSpec {
  enum class Kind { ewa, pwa };
  Kind kind = Kind::ewa;
  double eta = 1.0;
  double b = 2.0;

  static AggregatorSpec ewa(double eta) { return {Kind::ewa, eta, 2.0}; }
  static AggregatorSpec pwa(double b) { return {Kind::pwa, 1.0, b}; }

  void validate() const {
    if (kind == Kind::ewa && !(eta > 0.0 && std::isfinite(eta))) throw InputError("EWA needs a finite eta > 0");
    if (kind == Kind::pwa && !(b >= 2.0 && std::isfinite(b))) throw InputError("PWA needs b >= 2");
  }
};

inline const char* to_string(AggregatorSpec::Kind k) { return k == AggregatorSpec::Kind::ewa ? "ewa" : "pwa"; }

namespace detail {
inline void check_finite(std::span<const double> g) {
  for (double x : g) {
    if (!std::isfinite(x)) throw InputError("non-finite cumulative gain");
  }
}
}  // namespace detail

/// Softmax of eta*G with the maximum subtracted first.
inline void ewa_weights(std::span<const double> gains, double eta, std::span<double> out) {
  if (gains.empty()) throw InputError("ewa_weights: no experts");
  if (!std::isfinite(eta)) throw InputError("ewa_weights: eta must be finite");
  detail::check_finite(gains);
  const double top = *std::max_element(gains.begin(), gains.end());
  double sum = 0.0;
  for (std::size_t e = 0; e < gains.size(); ++e) {
    out[e] = std::exp(eta * (gains[e] - top));
    sum += out[e];
  }
  for (double& w : out) w /= sum;
}

inline std::vector<double> ewa_weights(const GainLedger& ledger, double eta) {
  std::vector<double> w(ledger.size());
  ewa_weights(ledger.expert_gains(), eta, w);
  return w;
}

/// (G^e - G)_+^{b-1}, normalised; uniform when every expert is at or below the forecaster.
inline void pwa_weights(std::span<const double> gains, double forecaster, double b, std::span<double> out) {
  if (gains.empty()) throw InputError("pwa_weights: no experts");
  detail::check_finite(gains);
  if (!std::isfinite(forecaster)) throw InputError("non-finite forecaster gain");
  double sum = 0.0;
  for (std::size_t e = 0; e < gains.size(); ++e) {
    const double r = gains[e] - forecaster;
    out[e] = r > 0.0 ? (b == 2.0 ? r : std::pow(r, b - 1.0)) : 0.0;
    sum += out[e];
  }
  if (sum > 0.0) {
    for (double& w : out) w /= sum;
  } else {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
  }
}

inline std::vector<double> pwa_weights(const GainLedger& ledger, double b) {
  std::vector<double> w(ledger.size());
  pwa_weights(ledger.expert_gains(), ledger.forecaster_gain(), b, w);
  return w;
}

inline void weights(const GainLedger& ledger, const AggregatorSpec& spec, std::span<double> out) {
  if (spec.kind == AggregatorSpec::Kind::ewa) {
    ewa_weights(ledger.expert_gains(), spec.eta, out);
  } else {
    pwa_weights(ledger.expert_gains(), ledger.forecaster_gain(), spec.b, out);
  }
}

inline std::vector<double> weights(const GainLedger& ledger, const AggregatorSpec& spec) {
  std::vector<double> w(ledger.size());
  weights(ledger, spec, w);
  return w;
}

inline double regret(const GainLedger& ledger) {
  if (ledger.size() == 0 || ledger.rounds() == 0) throw InputError("regret of an empty ledger");
  const auto g = ledger.expert_gains();
  return *std::max_element(g.begin(), g.end()) - ledger.forecaster_gain();
}

// Real-valued expert count so that closed forms like |E| = e^2 can be checked directly.
inline double recommended_eta_hidden(double n_experts, double M) {
  if (!(n_experts > 1.0)) throw InputError("recommended_eta_hidden needs more than one expert");
  if (!(M >= 1.0)) throw InputError("recommended_eta_hidden needs M >= 1");
  return std::sqrt(8.0 * std::log(n_experts) / M);
}

inline double recommended_eta_output(double n_natures, double n_experts, double N) {
  if (!(n_experts > 1.0)) throw InputError("recommended_eta_output needs more than one expert");
  if (!(n_natures >= 1.0) || !(N >= 1.0)) throw InputError("recommended_eta_output needs |O| >= 1 and N >= 1");
  return std::sqrt(2.0 * std::log(n_experts) / N) / n_natures;
}

}  // namespace chani
