#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "chani/error.hpp"
#include "chani/rng.hpp"
#include "chani/spike_block.hpp"

namespace chani {

/// Input firing rates of one object nature, plus its class.
struct FiringProfile {
  std::string nature_id;
  std::vector<double> rates;
  int class_label = 0;

  void validate() const {
    for (double p : rates) {
      if (!(p >= 0.0 && p <= 1.0)) throw InputError("rate outside [0,1] in nature " + nature_id);
    }
  }
};

inline double hidden_intensity(std::span<const double> w, std::span<const std::uint8_t> x_prev, double nu) {
  double s = -nu;
  for (std::size_t e = 0; e < w.size(); ++e) s += x_prev[e] ? w[e] : 0.0;
  return s > 0.0 ? s : 0.0;
}

/// Plain output: w.x. With `input_count` > 0 the first `input_count` experts are input
/// neurons and their contribution is scaled by beta.
inline double output_intensity(std::span<const double> w, std::span<const std::uint8_t> x_prev, double beta,
                               std::size_t input_count = 0) {
  double in = 0.0, hid = 0.0;
  for (std::size_t e = 0; e < w.size(); ++e) {
    if (!x_prev[e]) continue;
    (e < input_count ? in : hid) += w[e];
  }
  return std::clamp(hid + beta * in, 0.0, 1.0);
}

/// Weights of one layer, stored expert-major (w[e * neurons + j]) so that a spiking
/// presynaptic neuron adds one contiguous row to every postsynaptic potential.
struct LayerWeights {
  enum class Kind { hidden, output };
  Kind kind = Kind::hidden;
  std::size_t neurons = 0;
  std::size_t experts = 0;
  double nu = 0.5;              // hidden only
  double beta = 1.0;            // output only, applied to the first input_experts experts
  std::size_t input_experts = 0;
  std::vector<double> w;

  static LayerWeights uniform(Kind kind, std::size_t neurons, std::size_t experts) {
    LayerWeights lw;
    lw.kind = kind;
    lw.neurons = neurons;
    lw.experts = experts;
    lw.w.assign(neurons * experts, experts ? 1.0 / static_cast<double>(experts) : 0.0);
    return lw;
  }

  double at(std::size_t neuron, std::size_t expert) const { return w[expert * neurons + neuron]; }

  std::vector<double> neuron_weights(std::size_t neuron) const {
    std::vector<double> out(experts);
    for (std::size_t e = 0; e < experts; ++e) out[e] = at(neuron, e);
    return out;
  }

  void set_neuron(std::size_t neuron, std::span<const double> wn) {
    if (wn.size() != experts) throw InputError("set_neuron: expected " + std::to_string(experts) + " weights");
    for (std::size_t e = 0; e < experts; ++e) w[e * neurons + neuron] = wn[e];
  }

  /// Keeps only the listed neurons (in the given order).
  LayerWeights subset(std::span<const std::size_t> keep) const {
    LayerWeights out = *this;
    out.neurons = keep.size();
    out.w.assign(out.neurons * experts, 0.0);
    for (std::size_t e = 0; e < experts; ++e) {
      for (std::size_t k = 0; k < keep.size(); ++k) out.w[e * out.neurons + k] = w[e * neurons + keep[k]];
    }
    return out;
  }
};

/// A stack of hidden layers (layer l reads layer l-1, layer 0 being the inputs) and an
/// optional output layer reading the last hidden layer, plus the inputs when
/// input_experts > 0.
struct NetworkView {
  std::span<const LayerWeights> hidden;
  const LayerWeights* output = nullptr;
};

struct CascadeResult {
  std::vector<SpikeBlock> blocks;     // [0] inputs, [1..L] hidden, then output if simulated
  std::uint64_t bernoulli_calls = 0;  // (neuron, step) pairs simulated
  std::uint64_t uniform_draws = 0;    // draws actually consumed (intensity strictly inside (0,1))
};

namespace detail {

inline std::vector<RngStream> neuron_streams(const RngStream& layer_rng, std::size_t n) {
  std::vector<RngStream> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) out.push_back(layer_rng.child(j));
  return out;
}

inline bool bernoulli(double p, const RngStream& s, std::uint64_t t, std::uint64_t& draws) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  ++draws;
  return s.uniform(t) < p;
}

}  // namespace detail

inline SpikeBlock simulate_input(const FiringProfile& profile, std::size_t T, const RngStream& rng) {
  if (T < 1) throw InputError("simulate_input needs T >= 1");
  profile.validate();
  const auto streams = detail::neuron_streams(rng.child(0), profile.rates.size());
  SpikeBlock block(profile.rates.size(), T, 0);
  std::vector<std::uint32_t> active;
  std::uint64_t draws = 0;
  for (std::size_t t = 1; t <= T; ++t) {
    active.clear();
    for (std::size_t i = 0; i < profile.rates.size(); ++i) {
      if (detail::bernoulli(profile.rates[i], streams[i], t, draws)) active.push_back(static_cast<std::uint32_t>(i));
    }
    block.push_step(active);
  }
  return block;
}

/// Simulates inputs, the first `depth` hidden layers of `net`, and the output layer when
/// `with_output` is set. Within a step layers are updated bottom-up, each reading the
/// previous step of the layer below. Neuron j of layer a draws uniform(t) from
/// rng.child(a).child(j), so results do not depend on evaluation order.
inline CascadeResult simulate_cascade(const NetworkView& net, std::size_t depth, bool with_output,
                                      const FiringProfile& profile, std::size_t T, const RngStream& rng) {
  if (T < 1) throw InputError("simulate_cascade needs T >= 1");
  if (depth > net.hidden.size()) throw InputError("simulate_cascade: depth exceeds the layer stack");
  if (with_output && !net.output) throw InputError("simulate_cascade: no output layer");
  profile.validate();
  const std::size_t n_in = profile.rates.size();
  for (std::size_t l = 0; l < depth; ++l) {
    const auto& lw = net.hidden[l];
    const std::size_t expect = l == 0 ? n_in : net.hidden[l - 1].neurons;
    if (lw.neurons == 0) throw InputError("simulate_cascade: empty hidden layer " + std::to_string(l + 1));
    if (lw.experts != expect) throw InputError("simulate_cascade: layer " + std::to_string(l + 1) + " expects " +
                                               std::to_string(lw.experts) + " presynaptic neurons, got " +
                                               std::to_string(expect));
  }
  if (with_output) {
    const std::size_t last = depth == 0 ? n_in : net.hidden[depth - 1].neurons;
    const auto& ow = *net.output;
    if (ow.neurons == 0) throw InputError("simulate_cascade: empty output layer");
    if (ow.experts != last + ow.input_experts || (ow.input_experts && (ow.input_experts != n_in || depth == 0))) {
      throw InputError("simulate_cascade: output layer does not match the network");
    }
  }

  const std::size_t n_layers = 1 + depth + (with_output ? 1 : 0);
  CascadeResult res;
  res.blocks.reserve(n_layers);
  std::vector<std::vector<RngStream>> streams(n_layers);
  streams[0] = detail::neuron_streams(rng.child(0), n_in);
  res.blocks.emplace_back(n_in, T, 0);
  for (std::size_t l = 1; l <= depth; ++l) {
    streams[l] = detail::neuron_streams(rng.child(l), net.hidden[l - 1].neurons);
    res.blocks.emplace_back(net.hidden[l - 1].neurons, T, static_cast<int>(l));
  }
  if (with_output) {
    streams[depth + 1] = detail::neuron_streams(rng.child(depth + 1), net.output->neurons);
    res.blocks.emplace_back(net.output->neurons, T, static_cast<int>(depth + 1));
  }

  std::vector<std::uint32_t> active;
  std::vector<double> acc;
  std::uint64_t draws = 0;
  for (std::size_t t = 1; t <= T; ++t) {
    active.clear();
    for (std::size_t i = 0; i < n_in; ++i) {
      if (detail::bernoulli(profile.rates[i], streams[0][i], t, draws)) active.push_back(static_cast<std::uint32_t>(i));
    }
    res.blocks[0].push_step(active);

    for (std::size_t l = 1; l <= depth; ++l) {
      const auto& lw = net.hidden[l - 1];
      const auto prev = res.blocks[l - 1].active(t - 1);
      active.clear();
      if (!prev.empty()) {
        acc.assign(lw.neurons, -lw.nu);
        for (auto e : prev) {
          const double* row = lw.w.data() + static_cast<std::size_t>(e) * lw.neurons;
          for (std::size_t j = 0; j < lw.neurons; ++j) acc[j] += row[j];
        }
        for (std::size_t j = 0; j < lw.neurons; ++j) {
          if (detail::bernoulli(acc[j], streams[l][j], t, draws)) active.push_back(static_cast<std::uint32_t>(j));
        }
      }
      res.blocks[l].push_step(active);
    }

    if (with_output) {
      const auto& ow = *net.output;
      const std::size_t a = depth + 1;
      active.clear();
      acc.assign(ow.neurons, 0.0);
      bool any = false;
      for (auto e : res.blocks[depth].active(t - 1)) {
        const double* row = ow.w.data() + (ow.input_experts + e) * ow.neurons;
        for (std::size_t k = 0; k < ow.neurons; ++k) acc[k] += row[k];
        any = true;
      }
      if (ow.input_experts) {
        for (auto e : res.blocks[0].active(t - 1)) {
          const double* row = ow.w.data() + static_cast<std::size_t>(e) * ow.neurons;
          for (std::size_t k = 0; k < ow.neurons; ++k) acc[k] += ow.beta * row[k];
          any = true;
        }
      }
      if (any) {
        for (std::size_t k = 0; k < ow.neurons; ++k) {
          if (detail::bernoulli(std::clamp(acc[k], 0.0, 1.0), streams[a][k], t, draws)) {
            active.push_back(static_cast<std::uint32_t>(k));
          }
        }
      }
      res.blocks[a].push_step(active);
    }
  }

  std::uint64_t neurons = 0;
  for (const auto& b : res.blocks) neurons += b.neurons();
  res.bernoulli_calls = neurons * T;
  res.uniform_draws = draws;
  return res;
}

/// One line "layer,neuron,t" per spike.
inline void write_spike_dump(std::ostream& os, const CascadeResult& res) {
  os << "layer,neuron,t\n";
  for (const auto& b : res.blocks) {
    for (std::size_t t = 1; t <= b.steps(); ++t) {
      for (auto n : b.active(t)) os << b.layer_id() << ',' << n << ',' << t << '\n';
    }
  }
}

}  // namespace chani
