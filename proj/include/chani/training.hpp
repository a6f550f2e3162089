#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "chani/aggregation.hpp"
#include "chani/datasets.hpp"
#include "chani/dynamics.hpp"
#include "chani/error.hpp"
#include "chani/feature_set.hpp"
#include "chani/parallel.hpp"
#include "chani/rng.hpp"
#include "chani/spike_block.hpp"
#include "chani/topology.hpp"

namespace chani {

// ---- gains ------------------------------------------------------------------

/// Mean over t of X^{p1}_t X^{p2}_t X^{expert}_t on one block of the layer below.
inline double hidden_gain(const SpikeBlock& prev, std::size_t p1, std::size_t p2, std::size_t expert) {
  const std::size_t rows[3] = {p1, p2, expert};
  return empirical_correlation(prev, rows);
}

/// hidden_gain for every expert of the block at once.
inline void hidden_gains(const SpikeBlock& prev, std::size_t p1, std::size_t p2, std::span<double> out,
                         std::vector<std::uint64_t>& scratch) {
  const std::size_t W = prev.words_per_row();
  scratch.resize(W);
  const auto a = prev.row(p1);
  const auto b = prev.row(p2);
  bool any = false;
  for (std::size_t w = 0; w < W; ++w) {
    scratch[w] = a[w] & b[w];
    any |= scratch[w] != 0;
  }
  if (!any) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double inv_T = 1.0 / static_cast<double>(prev.steps());
  for (std::size_t e = 0; e < out.size(); ++e) {
    const auto r = prev.row(e);
    std::size_t c = 0;
    for (std::size_t w = 0; w < W; ++w) c += static_cast<std::size_t>(std::popcount(scratch[w] & r[w]));
    out[e] = static_cast<double>(c) * inv_T;
  }
}

/// Gain of a presynaptic neuron with rate r for output neuron `target` when an object of
/// class `presented` is shown. counts[k] = N^k over the whole output schedule.
inline double output_gain(double r, std::size_t presented, std::size_t target, std::span<const std::size_t> counts,
                          double alpha = 1.0) {
  if (presented >= counts.size() || target >= counts.size()) throw InputError("output_gain: class outside K");
  if (counts[presented] == 0) throw InputError("output_gain: zero class count");
  double N = 0.0;
  for (auto c : counts) N += static_cast<double>(c);
  const double K = static_cast<double>(counts.size());
  double g = 0.0;
  if (presented == target) {
    g = r * N / static_cast<double>(counts[target]);
  } else {
    g = -r * (N / static_cast<double>(counts[presented])) / (K - 1.0);
  }
  return alpha * g;
}

// ---- per-neuron learner -------------------------------------------------------

class NeuronTrainer {
 public:
  NeuronTrainer() = default;
  NeuronTrainer(std::size_t n_experts, AggregatorSpec spec)
      : ledger_(n_experts), spec_(spec), w_(n_experts, n_experts ? 1.0 / static_cast<double>(n_experts) : 0.0) {
    spec_.validate();
  }

  void update(std::span<const double> gains) {
    if (frozen_) throw InputError("update on a frozen neuron");
    ledger_.accumulate(gains, w_);
    weights(ledger_, spec_, w_);
  }

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }
  std::span<const double> w() const { return w_; }
  const GainLedger& ledger() const { return ledger_; }
  const AggregatorSpec& spec() const { return spec_; }

 private:
  GainLedger ledger_;
  AggregatorSpec spec_;
  std::vector<double> w_;
  bool frozen_ = false;
};

// ---- configuration ------------------------------------------------------------

struct SelectionRule {
  enum class Mode { threshold, top_n };
  Mode mode = Mode::threshold;
  double s = 0.1;
  std::size_t n = 100;
};

struct HiddenLayerConfig {
  AggregatorSpec agg = AggregatorSpec::ewa(3.0);
  bool eta_theory = false;  // use recommended_eta_hidden instead of agg.eta
  SelectionRule select;
};

struct TrainingConfig {
  std::size_t L = 0;
  std::size_t T = 2000;
  std::size_t M = 40;
  std::size_t N = 360;
  double nu = 0.5;
  std::vector<HiddenLayerConfig> hidden;  // one per hidden layer
  AggregatorSpec output = AggregatorSpec::ewa(0.05);
  bool output_eta_theory = false;
  bool variant = false;  // output neurons also read the inputs
  double alpha = 1.0;
  double beta = 1.0;
  std::size_t epoch_length = 0;  // objects per output-training epoch; 0 = number of training natures
  bool evaluate_each_epoch = true;
};

/// Training material for one run.
struct TrainingData {
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  std::vector<FiringProfile> natures;    // training natures (schedules index into this)
  std::vector<FiringProfile> selection;  // presented once each in every selection phase
  std::vector<FiringProfile> test;       // evaluation objects
};

// ---- model --------------------------------------------------------------------

struct TrainedModel {
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  double nu = 0.5;
  std::vector<std::vector<FeatureSet>> layers;  // selected sets of depth 1..L
  std::vector<LayerWeights> hidden;             // frozen weights of each selected layer
  LayerWeights output;

  std::size_t depth() const { return hidden.size(); }
  NetworkView view() const { return {hidden, &output}; }
};

struct ClassifyResult {
  std::size_t label = 0;
  std::vector<std::size_t> counts;
  bool tie = false;
};

/// Output neuron with most spikes; ties go to the smallest class index and are flagged.
inline ClassifyResult classify(const TrainedModel& model, const FiringProfile& profile, std::size_t T,
                               const RngStream& rng) {
  const auto res = simulate_cascade(model.view(), model.depth(), true, profile, T, rng);
  const auto& out = res.blocks.back();
  ClassifyResult c;
  c.counts.resize(out.neurons());
  for (std::size_t k = 0; k < out.neurons(); ++k) c.counts[k] = out.count(k);
  std::size_t best = 0;
  for (std::size_t k = 1; k < c.counts.size(); ++k) {
    if (c.counts[k] > c.counts[best]) best = k;
  }
  c.label = best;
  c.tie = std::count(c.counts.begin(), c.counts.end(), c.counts[best]) > 1;
  return c;
}

// ---- hidden round -------------------------------------------------------------

struct HiddenRound {
  LayerCatalog catalog;               // candidates and the selected subset
  LayerWeights candidate_weights;     // w_{M+1} of every candidate
  LayerWeights frozen;                // selected neurons only
  RateTable selection_rates;          // [selection object][candidate]
  std::vector<GainLedger> ledgers;    // per candidate
  std::vector<std::size_t> schedule;  // nature index of each training object
  bool balanced = true;
  double eta = 0.0;
  std::string warning;
  std::uint64_t bernoulli_calls = 0;
};

/// Round l of the hidden training: M objects through the frozen layers below l, gains on
/// every candidate of J_l, then one selection pass with the frozen candidate weights.
inline HiddenRound train_hidden_layer(std::size_t l, std::span<const LayerWeights> frozen_below,
                                      const std::vector<FeatureSet>& prev_selected, const TrainingData& data,
                                      const TrainingConfig& cfg, const RngStream& round_rng, std::size_t workers) {
  if (l < 1 || l > cfg.hidden.size()) throw InputError("train_hidden_layer: layer index out of range");
  if (frozen_below.size() != l - 1) throw InputError("train_hidden_layer: layers below l must be trained first");
  const auto& lc = cfg.hidden[l - 1];

  HiddenRound out;
  out.catalog = build_candidates(prev_selected, l);
  const auto& cands = out.catalog.candidates;
  const std::size_t n_prev = out.catalog.prev.size();
  if (cands.empty()) throw SelectionEmpty(l, 0, 0.0);

  AggregatorSpec spec = lc.agg;
  if (lc.eta_theory && spec.kind == AggregatorSpec::Kind::ewa) spec.eta = recommended_eta_hidden(n_prev, cfg.M);
  out.eta = spec.eta;

  const Schedule sched = schedule_of_length(data.natures.size(), cfg.M, round_rng.child(2));
  out.schedule = sched.items;
  out.balanced = sched.balanced;

  // Layers below l are frozen, so all M presentations can be simulated up front.
  std::vector<SpikeBlock> below(cfg.M);
  std::vector<std::uint64_t> calls(cfg.M, 0);
  const NetworkView lower{frozen_below, nullptr};
  parallel_for(cfg.M, workers, [&](std::size_t m) {
    auto res = simulate_cascade(lower, l - 1, false, data.natures[sched.items[m]], cfg.T, round_rng.child(0).child(m));
    calls[m] = res.bernoulli_calls;
    below[m] = std::move(res.blocks.back());
  });
  for (auto c : calls) out.bernoulli_calls += c;

  std::vector<NeuronTrainer> trainers;
  trainers.reserve(cands.size());
  for (std::size_t c = 0; c < cands.size(); ++c) trainers.emplace_back(n_prev, spec);
  std::vector<double> gains(n_prev);
  std::vector<std::uint64_t> scratch;
  for (std::size_t m = 0; m < cfg.M; ++m) {
    for (std::size_t c = 0; c < cands.size(); ++c) {
      hidden_gains(below[m], cands[c].parent1, cands[c].parent2, gains, scratch);
      trainers[c].update(gains);
    }
  }
  below.clear();

  out.candidate_weights = LayerWeights::uniform(LayerWeights::Kind::hidden, cands.size(), n_prev);
  out.candidate_weights.nu = cfg.nu;
  out.ledgers.reserve(cands.size());
  for (std::size_t c = 0; c < cands.size(); ++c) {
    trainers[c].freeze();
    out.candidate_weights.set_neuron(c, trainers[c].w());
    out.ledgers.push_back(trainers[c].ledger());
  }

  // Selection phase: every selection object once, candidates with frozen w_{M+1}.
  std::vector<LayerWeights> stack(frozen_below.begin(), frozen_below.end());
  stack.push_back(out.candidate_weights);
  const NetworkView full{stack, nullptr};
  out.selection_rates.assign(data.selection.size(), {});
  std::vector<std::uint64_t> sel_calls(data.selection.size(), 0);
  parallel_for(data.selection.size(), workers, [&](std::size_t o) {
    const auto res = simulate_cascade(full, l, false, data.selection[o], cfg.T, round_rng.child(1).child(o));
    const auto& blk = res.blocks.back();
    auto& row = out.selection_rates[o];
    row.resize(blk.neurons());
    for (std::size_t c = 0; c < blk.neurons(); ++c) row[c] = blk.rate(c);
    sel_calls[o] = res.bernoulli_calls;
  });
  for (auto c : sel_calls) out.bernoulli_calls += c;

  if (lc.select.mode == SelectionRule::Mode::threshold) {
    out.catalog.selected = select_threshold(out.selection_rates, cands.size(), lc.select.s, l);
  } else {
    out.catalog.selected = select_top_n(out.selection_rates, cands.size(), lc.select.n, &out.warning);
  }
  out.frozen = out.candidate_weights.subset(out.catalog.selected);
  return out;
}

// ---- output round -------------------------------------------------------------

struct EvalRecord {
  std::size_t epoch = 0;
  std::size_t objects_seen = 0;
  double accuracy = 0.0;
  std::vector<double> per_class_accuracy;
  std::size_t ties = 0;
  double network_discrepancy = 0.0;  // mean_k G^k / objects seen
};

struct OutputRound {
  LayerWeights weights;
  std::vector<GainLedger> ledgers;  // per class neuron
  std::vector<std::size_t> class_counts;
  std::vector<std::size_t> schedule;
  bool balanced = true;
  double eta = 0.0;
  std::uint64_t bernoulli_calls = 0;
  std::vector<std::vector<double>> presynaptic_rates;  // [object][expert], kept for discrepancy checks
};

/// Called with (epoch, objects seen, current output weights, ledgers).
using EpochHook = std::function<void(std::size_t, std::size_t, const LayerWeights&, const std::vector<GainLedger>&)>;

inline LayerWeights output_layer_from(const std::vector<NeuronTrainer>& trainers, std::size_t experts,
                                      std::size_t input_experts, double beta) {
  auto lw = LayerWeights::uniform(LayerWeights::Kind::output, trainers.size(), experts);
  lw.input_experts = input_experts;
  lw.beta = beta;
  for (std::size_t k = 0; k < trainers.size(); ++k) lw.set_neuron(k, trainers[k].w());
  return lw;
}

inline OutputRound train_output(std::span<const LayerWeights> hidden, const TrainingData& data,
                                const TrainingConfig& cfg, const RngStream& round_rng, std::size_t workers,
                                const EpochHook& hook = {}) {
  const std::size_t L = hidden.size();
  if (cfg.variant && L == 0) throw InputError("the input-connection variant needs at least one hidden layer");
  const std::size_t n_last = L == 0 ? data.n_features : hidden.back().neurons;
  const std::size_t n_inputs = cfg.variant ? data.n_features : 0;
  const std::size_t experts = n_inputs + n_last;
  const std::size_t K = data.n_classes;
  if (K < 1) throw InputError("train_output: no classes");

  OutputRound out;
  const Schedule sched = schedule_of_length(data.natures.size(), cfg.N, round_rng.child(2));
  out.schedule = sched.items;
  out.balanced = sched.balanced;
  out.class_counts = class_counts(sched, data.natures, K);

  AggregatorSpec spec = cfg.output;
  if (cfg.output_eta_theory && spec.kind == AggregatorSpec::Kind::ewa) {
    spec.eta = recommended_eta_output(static_cast<double>(data.natures.size()), static_cast<double>(n_last),
                                      static_cast<double>(cfg.N));
  }
  out.eta = spec.eta;

  // Hidden layers are frozen and output spikes do not enter the gains, so presynaptic
  // rates of all N objects can be computed up front.
  out.presynaptic_rates.assign(cfg.N, {});
  std::vector<std::uint64_t> calls(cfg.N, 0);
  const NetworkView net{hidden, nullptr};
  parallel_for(cfg.N, workers, [&](std::size_t m) {
    const auto res = simulate_cascade(net, L, false, data.natures[sched.items[m]], cfg.T, round_rng.child(0).child(m));
    auto& r = out.presynaptic_rates[m];
    r.resize(experts);
    for (std::size_t i = 0; i < n_inputs; ++i) r[i] = res.blocks[0].rate(i);
    for (std::size_t j = 0; j < n_last; ++j) r[n_inputs + j] = res.blocks[L].rate(j);
    calls[m] = res.bernoulli_calls;
  });
  for (auto c : calls) out.bernoulli_calls += c;

  std::vector<NeuronTrainer> trainers;
  for (std::size_t k = 0; k < K; ++k) trainers.emplace_back(experts, spec);
  const std::size_t epoch_len = cfg.epoch_length ? cfg.epoch_length : data.natures.size();
  std::vector<double> gains(experts);
  std::size_t epoch = 0;
  for (std::size_t m = 0; m < cfg.N; ++m) {
    const auto presented = static_cast<std::size_t>(data.natures[sched.items[m]].class_label);
    const auto& r = out.presynaptic_rates[m];
    for (std::size_t k = 0; k < K; ++k) {
      const double unit = output_gain(1.0, presented, k, out.class_counts);
      for (std::size_t e = 0; e < experts; ++e) gains[e] = (e < n_inputs ? cfg.alpha : 1.0) * unit * r[e];
      trainers[k].update(gains);
    }
    const bool epoch_end = (m + 1) % epoch_len == 0;
    if (hook && cfg.evaluate_each_epoch && epoch_end && m + 1 < cfg.N) {
      hook(++epoch, m + 1, output_layer_from(trainers, experts, n_inputs, cfg.beta), [&] {
        std::vector<GainLedger> ls;
        for (const auto& t : trainers) ls.push_back(t.ledger());
        return ls;
      }());
    }
  }
  for (auto& t : trainers) {
    t.freeze();
    out.ledgers.push_back(t.ledger());
  }
  out.weights = output_layer_from(trainers, experts, n_inputs, cfg.beta);
  if (hook) hook(++epoch, cfg.N, out.weights, out.ledgers);
  return out;
}

// ---- evaluation ---------------------------------------------------------------

inline EvalRecord evaluate(const TrainedModel& model, const std::vector<FiringProfile>& test, std::size_t T,
                           const RngStream& rng, std::size_t workers) {
  std::vector<ClassifyResult> results(test.size());
  parallel_for(test.size(), workers, [&](std::size_t i) { results[i] = classify(model, test[i], T, rng.child(i)); });
  EvalRecord rec;
  std::vector<std::size_t> hit(model.n_classes, 0), seen(model.n_classes, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto k = static_cast<std::size_t>(test[i].class_label);
    ++seen[k];
    if (results[i].label == k) {
      ++correct;
      ++hit[k];
    }
    if (results[i].tie) ++rec.ties;
  }
  rec.accuracy = test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.size());
  rec.per_class_accuracy.resize(model.n_classes);
  for (std::size_t k = 0; k < model.n_classes; ++k) {
    rec.per_class_accuracy[k] = seen[k] ? static_cast<double>(hit[k]) / static_cast<double>(seen[k]) : 0.0;
  }
  return rec;
}

inline double network_discrepancy(const std::vector<GainLedger>& ledgers, std::size_t objects_seen) {
  if (ledgers.empty() || objects_seen == 0) return 0.0;
  double s = 0.0;
  for (const auto& l : ledgers) s += l.forecaster_gain();
  return s / static_cast<double>(ledgers.size()) / static_cast<double>(objects_seen);
}

// ---- whole algorithm ----------------------------------------------------------

struct RunResult {
  TrainedModel model;
  std::vector<HiddenRound> rounds;
  OutputRound output;
  std::vector<EvalRecord> evals;
  std::uint64_t bernoulli_calls = 0;
};

// Child tags of the per-run stream; rounds use 1..L+1.
inline constexpr std::uint64_t kEvalTag = 1000;

/// L hidden rounds then the output round. Evaluates on data.test after every output
/// epoch (when enabled) and once at the end.
inline RunResult run_chani(const TrainingConfig& cfg, const TrainingData& data, const RngStream& run_rng,
                           std::size_t workers) {
  if (cfg.hidden.size() != cfg.L) throw InputError("run_chani: need one hidden-layer config per layer");
  if (!(cfg.nu >= 0.0 && cfg.nu < 1.0)) throw InputError("run_chani: nu must lie in [0,1)");
  if (cfg.T < 1 || cfg.M < 1 || cfg.N < 1) throw InputError("run_chani: T, M and N must be >= 1");
  RunResult res;
  auto& model = res.model;
  model.n_features = data.n_features;
  model.n_classes = data.n_classes;
  model.nu = cfg.nu;

  std::vector<FeatureSet> prev;
  for (std::size_t i = 0; i < data.n_features; ++i) prev.push_back(FeatureSet::singleton(i));
  for (std::size_t l = 1; l <= cfg.L; ++l) {
    auto round = train_hidden_layer(l, model.hidden, prev, data, cfg, run_rng.child(l), workers);
    prev = round.catalog.selected_sets();
    model.layers.push_back(prev);
    model.hidden.push_back(round.frozen);
    res.bernoulli_calls += round.bernoulli_calls;
    res.rounds.push_back(std::move(round));
  }

  const auto eval_rng = run_rng.child(kEvalTag);
  auto hook = [&](std::size_t epoch, std::size_t seen, const LayerWeights& w, const std::vector<GainLedger>& ledgers) {
    model.output = w;
    auto rec = evaluate(model, data.test, cfg.T, eval_rng.child(epoch), workers);
    rec.epoch = epoch;
    rec.objects_seen = seen;
    rec.network_discrepancy = network_discrepancy(ledgers, seen);
    res.evals.push_back(std::move(rec));
  };
  res.output = train_output(model.hidden, data, cfg, run_rng.child(cfg.L + 1), workers, hook);
  model.output = res.output.weights;
  res.bernoulli_calls += res.output.bernoulli_calls;
  return res;
}

}  // namespace chani
