#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "chani/analysis.hpp"
#include "chani/config.hpp"
#include "chani/datasets.hpp"
#include "chani/model_io.hpp"
#include "chani/training.hpp"

namespace chani {

using json = nlohmann::json;

// ---- data -----------------------------------------------------------------------

/// Natures and test objects shared by every run of a config.
struct BaseData {
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  std::vector<FiringProfile> natures;
  std::vector<FiringProfile> test;
};

/// "auto" resolves to $CHANI_DIGITS, then to the corpus location found at build time.
inline std::string resolve_digits_path(const std::string& p) {
  if (p != "auto") return p;
  if (const char* env = std::getenv("CHANI_DIGITS")) return env;
#ifdef CHANI_DIGITS_PATH
  return CHANI_DIGITS_PATH;
#else
  throw ConfigError("digits.path = auto but no corpus location is known; set CHANI_DIGITS");
#endif
}

inline BaseData prepare_data(const ExperimentConfig& cfg) {
  BaseData d;
  if (cfg.dataset == "shapes") {
    d.natures = shapes_profiles(cfg.shapes_p, cfg.shapes_task == 1 ? ShapesTask::task1 : ShapesTask::task2);
    d.n_features = kShapeFeatures.size();
    d.n_classes = 2;
    for (std::size_t r = 0; r < cfg.shapes_test_per_nature; ++r) {
      d.test.insert(d.test.end(), d.natures.begin(), d.natures.end());
    }
  } else {
    DigitsSource src{resolve_digits_path(cfg.digits_path), cfg.digits_split, cfg.digits_split_seed, cfg.digits_scale};
    auto split = load_digits(src);
    d.natures = std::move(split.train);
    d.test = std::move(split.test);
    d.n_features = 64;
    d.n_classes = 10;
  }
  return d;
}

inline constexpr std::uint64_t kSelectionTag = 999;

inline RngStream run_stream(std::uint64_t seed, std::size_t run) { return RngStream(seed).child(run); }

/// Per-run training data: the selection set is a keyed subsample of the training natures
/// when selection_size is smaller than the nature list (digits), otherwise all natures.
inline TrainingData run_data(const BaseData& base, const ExperimentConfig& cfg, std::size_t run) {
  TrainingData td;
  td.n_features = base.n_features;
  td.n_classes = base.n_classes;
  td.natures = base.natures;
  td.test = base.test;
  const std::size_t k = cfg.dataset == "digits" ? cfg.digits_selection_size : 0;
  if (k == 0 || k >= base.natures.size()) {
    td.selection = base.natures;
  } else {
    std::vector<std::size_t> idx(base.natures.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    keyed_shuffle(idx, run_stream(cfg.seed, run).child(kSelectionTag));
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    for (auto i : idx) td.selection.push_back(base.natures[i]);
  }
  return td;
}

// ---- small helpers ----------------------------------------------------------------

inline std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

/// Empirical quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double l2_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline std::vector<double> thresholds_of(const ExperimentConfig& cfg) {
  std::vector<double> s;
  for (const auto& l : cfg.layers) s.push_back(l.s);
  return s;
}

/// Largest distance between the trained weights of a target neuron j_S and its limit
/// 1/2 on each parent. Infinite when a target is not among the candidates.
inline double limit_hidden_distance(const HiddenRound& round, std::span<const FeatureSet> targets) {
  double worst = 0.0;
  std::vector<double> limit(round.candidate_weights.experts);
  for (const auto& S : targets) {
    const auto c = round.catalog.index_of(S);
    if (c == round.catalog.candidates.size()) return std::numeric_limits<double>::infinity();
    std::fill(limit.begin(), limit.end(), 0.0);
    limit[round.catalog.candidates[c].parent1] = 0.5;
    limit[round.catalog.candidates[c].parent2] = 0.5;
    worst = std::max(worst, l2_distance(round.candidate_weights.neuron_weights(c), limit));
  }
  return worst;
}

/// Distance of each output neuron to its limit weights; empty when the last layer differs
/// from the limit layer or the variant is on.
inline std::vector<double> limit_output_distance(const TrainedModel& model, std::span<const FeatureSet> bar_last,
                                                 const LimitOutput& limit) {
  std::vector<double> out;
  if (model.output.input_experts) return out;
  std::vector<FeatureSet> last;
  if (model.depth() == 0) {
    for (std::size_t i = 0; i < model.n_features; ++i) last.push_back(FeatureSet::singleton(i));
  } else {
    last = model.layers.back();
  }
  if (!std::equal(last.begin(), last.end(), bar_last.begin(), bar_last.end())) return out;
  for (std::size_t k = 0; k < model.n_classes; ++k) {
    out.push_back(l2_distance(model.output.neuron_weights(k), limit.weights[k]));
  }
  return out;
}

// ---- run --------------------------------------------------------------------------

struct RunOutcome {
  RunResult result;
  double seconds = 0.0;
};

inline RunOutcome execute_run(const ExperimentConfig& cfg, const BaseData& base, std::size_t run, std::size_t workers) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto data = run_data(base, cfg, run);
  RunOutcome o;
  o.result = run_chani(cfg.training(), data, run_stream(cfg.seed, run), workers);
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return o;
}

inline const char* kMetricsHeader =
    "run,epoch,objects_seen,accuracy,per_class_accuracy,ties,network_discrepancy,selected_counts";

inline std::string metrics_rows(std::size_t run, const RunResult& r) {
  std::ostringstream os;
  std::string counts;
  for (std::size_t l = 0; l < r.model.layers.size(); ++l) {
    if (l) counts += ';';
    counts += std::to_string(r.model.layers[l].size());
  }
  for (const auto& e : r.evals) {
    std::string pc;
    for (std::size_t k = 0; k < e.per_class_accuracy.size(); ++k) {
      if (k) pc += ';';
      pc += fmt_num(e.per_class_accuracy[k]);
    }
    os << run << ',' << e.epoch << ',' << e.objects_seen << ',' << fmt_num(e.accuracy) << ',' << pc << ',' << e.ties
       << ',' << fmt_num(e.network_discrepancy) << ',' << counts << '\n';
  }
  return os.str();
}

struct RunSummary {
  std::vector<double> final_accuracy;
  std::vector<double> hidden_distance;  // layer-1 distance to the limit weights (shapes only)
  json summary;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

/// Runs every seed of the config, writes model_run<i>.txt, metrics.csv, summary.json and
/// timing.json into `out`. Runs are sequential; each uses `workers` threads internally.
inline RunSummary cmd_run(const ExperimentConfig& cfg, const std::filesystem::path& out, std::size_t workers,
                          std::ostream* log = nullptr) {
  cfg.validate();
  std::filesystem::create_directories(out);
  const BaseData base = prepare_data(cfg);
  std::optional<std::vector<FeatureSet>> bar1;
  if (cfg.dataset == "shapes" && cfg.L >= 1) {
    const double s1[1] = {cfg.layers[0].s};
    bar1 = bar_layers(base.natures, base.n_features, s1)[1];
  }

  RunSummary rs;
  std::string metrics = std::string(kMetricsHeader) + "\n";
  json runs = json::array(), timing = json::array(), notes = json::array();
  for (std::size_t r = 0; r < cfg.runs; ++r) {
    const auto o = execute_run(cfg, base, r, workers);
    const auto& res = o.result;
    std::ostringstream model;
    write_model(model, res.model, cfg);
    write_text(out / ("model_run" + std::to_string(r) + ".txt"), model.str());
    metrics += metrics_rows(r, res);

    const auto& fin = res.evals.back();
    rs.final_accuracy.push_back(fin.accuracy);
    json jr = {{"run", r}, {"final_accuracy", fin.accuracy}, {"ties", fin.ties},
               {"network_discrepancy", fin.network_discrepancy}, {"bernoulli_calls", res.bernoulli_calls}};
    json counts = json::array();
    for (std::size_t l = 0; l < res.rounds.size(); ++l) {
      const auto& round = res.rounds[l];
      counts.push_back(round.catalog.selected.size());
      if (!round.warning.empty()) notes.push_back("run " + std::to_string(r) + ": " + round.warning);
      if (!round.balanced && r == 0) {
        notes.push_back("hidden round " + std::to_string(l + 1) + " schedule is unbalanced (M = " +
                        std::to_string(cfg.M) + " over " + std::to_string(base.natures.size()) + " natures)");
      }
    }
    if (!res.output.balanced && r == 0) {
      notes.push_back("output schedule is unbalanced (N = " + std::to_string(cfg.N) + " over " +
                      std::to_string(base.natures.size()) + " natures)");
    }
    jr["selected_counts"] = counts;
    if (bar1) {
      const double d = limit_hidden_distance(res.rounds[0], *bar1);
      rs.hidden_distance.push_back(d);
      jr["hidden_distance"] = std::isfinite(d) ? json(d) : json(nullptr);
    }
    runs.push_back(jr);
    timing.push_back({{"run", r}, {"seconds", o.seconds}});
    if (log) *log << "run " << r << ": accuracy " << fmt_num(fin.accuracy) << " (" << fmt_num(o.seconds) << " s)\n";
  }
  write_text(out / "metrics.csv", metrics);

  rs.summary = {{"dataset", cfg.dataset},
                {"runs", cfg.runs},
                {"seed", cfg.seed},
                {"final_accuracy",
                 {{"mean", mean(rs.final_accuracy)},
                  {"q05", quantile(rs.final_accuracy, 0.05)},
                  {"q95", quantile(rs.final_accuracy, 0.95)}}},
                {"per_run", runs},
                {"notes", notes}};
  write_text(out / "summary.json", rs.summary.dump(2) + "\n");
  write_text(out / "timing.json", json({{"runs", timing}}).dump(2) + "\n");
  return rs;
}

// ---- sweep ------------------------------------------------------------------------

/// Applies one sweep value. Aliases: selected_n (last hidden layer, top-n mode), M, N, T, nu;
/// any config key is accepted as well.
inline void apply_axis(ExperimentConfig& cfg, const std::string& axis, const std::string& value) {
  if (axis == "selected_n") {
    if (cfg.L == 0) throw ConfigError("selected_n: config has no hidden layer");
    cfg.layers.back().select = SelectionRule::Mode::top_n;
    cfg.layers.back().n = detail::parse_u64(axis, value);
  } else if (axis == "M") {
    cfg.M = detail::parse_u64(axis, value);
  } else if (axis == "N") {
    cfg.N = detail::parse_u64(axis, value);
  } else if (axis == "T") {
    cfg.T = detail::parse_u64(axis, value);
  } else if (axis == "nu") {
    cfg.nu = detail::parse_double(axis, value);
  } else {
    try {
      set_config_value(cfg, axis, value);
    } catch (const ConfigError& e) {
      throw ConfigError("unknown axis '" + axis + "' (" + e.what() + ")");
    }
  }
  finish_config(cfg);
}

struct SweepPoint {
  std::string value;
  RunSummary summary;
};

inline std::vector<SweepPoint> cmd_sweep(const ExperimentConfig& cfg, const std::string& axis,
                                         const std::vector<std::string>& values, const std::filesystem::path& out,
                                         std::size_t workers, std::ostream* log = nullptr) {
  if (values.empty()) throw ConfigError("sweep: no values");
  std::vector<ExperimentConfig> cfgs;
  for (const auto& v : values) {
    auto c = cfg;
    apply_axis(c, axis, v);
    cfgs.push_back(c);
  }
  std::filesystem::create_directories(out);
  std::vector<SweepPoint> points;
  std::string csv = "axis,value,runs,mean_accuracy,q05_accuracy,q95_accuracy,mean_hidden_distance\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (log) *log << axis << " = " << values[i] << '\n';
    auto s = cmd_run(cfgs[i], out / (axis + "_" + values[i]), workers, log);
    csv += axis + ',' + values[i] + ',' + std::to_string(cfgs[i].runs) + ',' + fmt_num(mean(s.final_accuracy)) +
           ',' + fmt_num(quantile(s.final_accuracy, 0.05)) + ',' + fmt_num(quantile(s.final_accuracy, 0.95)) + ',' +
           (s.hidden_distance.empty() ? std::string() : fmt_num(mean(s.hidden_distance))) + '\n';
    points.push_back({values[i], std::move(s)});
  }
  write_text(out / "sweep.csv", csv);
  return points;
}

// ---- oracle -----------------------------------------------------------------------

inline json sets_json(std::span<const FeatureSet> sets) {
  json a = json::array();
  for (const auto& s : sets) a.push_back(s.to_string());
  return a;
}

inline json counterexample_json(const NuCounterexample& c) {
  json j = {{"nu", c.nu},
            {"p", c.p},
            {"q", c.q},
            {"blue_square_k2_activity", c.blue_square_k2},
            {"blue_square_misclassified", c.blue_square_misclassified}};
  j["k2_argmax"] = json::array();
  for (auto i : c.limit.argmax[1]) j["k2_argmax"].push_back(c.layer[i].to_string());
  j["predicted"] = c.predicted;
  return j;
}

/// Closed-form report for the config's dataset: J̄ layers, limit output weights,
/// discrepancies, decomposition, feasibility, VC dimension and assumption audits.
inline json cmd_oracle(const ExperimentConfig& cfg) {
  cfg.validate();
  const BaseData base = prepare_data(cfg);
  const auto& natures = base.natures;
  const std::size_t K = base.n_classes;
  const auto labels = labels_of(natures);
  json rep;
  rep["dataset"] = cfg.dataset;
  rep["L"] = cfg.L;
  rep["nu"] = cfg.nu;

  std::vector<double> th = thresholds_of(cfg);
  const bool large = base.n_features > 16;
  if (large && th.size() > 1) {
    rep["notes"].push_back("J̄ layers beyond depth 1 are not enumerated for this input size");
    th.resize(1);
  }
  const auto bar = bar_layers(natures, base.n_features, th);
  rep["bar_layers"] = json::array();
  for (std::size_t l = 0; l < bar.size(); ++l) {
    json jl = {{"depth", l}, {"size", bar[l].size()}};
    if (!large || l == 0) jl["sets"] = sets_json(bar[l]);
    rep["bar_layers"].push_back(jl);
  }
  rep["gamma"] = ideal_gamma(cfg.L, 0.5);

  json audits = json::array();
  for (const auto& a : {audit_decreasing_correlation(natures, base.n_features),
                        audit_sparse_features(natures, base.n_features, th)}) {
    audits.push_back({{"assumption", a.name}, {"pass", a.pass}, {"detail", a.detail}});
  }

  if (bar.size() == cfg.L + 1 && !bar.back().empty() && K >= 2) {
    const auto& last = bar.back();
    const auto rho = rho_table(last, natures);
    const auto lim = limit_output_from_rates(rho, labels, K);
    json lo = json::array();
    for (std::size_t k = 0; k < K; ++k) {
      json jk = {{"class", k}, {"delta", lim.delta[k]}};
      json arg = json::array();
      for (auto j : lim.argmax[k]) arg.push_back(last[j].to_string());
      jk["argmax"] = arg;
      jk["max_disc"] = lim.disc[k][lim.argmax[k].front()];
      if (!large) {
        json d = json::object();
        for (std::size_t j = 0; j < last.size(); ++j) d[last[j].to_string()] = lim.disc[k][j];
        jk["disc"] = d;
      }
      lo.push_back(jk);
    }
    rep["limit_output"] = lo;
    rep["max_ideal_discrepancy"] = max_ideal_discrepancy(rho, labels, K);
    rep["limit_ideal_discrepancy"] = ideal_discrepancy(lim.weights, rho, labels, K);
    rep["limit_strong_feasible"] = is_strong_feasible(lim.weights, rho, labels);

    const auto bin = audit_binary_correlations(rho);
    audits.push_back({{"assumption", "binary-correlations"}, {"pass", bin.holds},
                      {"detail", bin.holds ? "p = " + fmt_num(bin.p) : bin.detail}});
    const auto dec = check_class_decomposition(rho, labels, K);
    json jd = {{"success", dec.success}};
    jd["E"] = json::array();
    for (const auto& e : dec.E) {
      json s = json::array();
      for (auto j : e) s.push_back(last[j].to_string());
      jd["E"].push_back(s);
    }
    if (!dec.success) {
      jd["failing_class"] = *dec.failing_class;
      jd["witness"] = natures[*dec.witness].nature_id;
    }
    rep["decomposition"] = jd;
    if (last.size() <= 24) rep["strong_feasible_exists"] = strong_feasible_exists(rho, labels, K);
    if (base.n_features <= 16 && last.size() <= 64) {
      rep["vc"] = {{"value", vc_shatter(last, base.n_features)}, {"layer_size", last.size()}};
    }
  } else if (bar.size() == cfg.L + 1) {
    rep["notes"].push_back("last limit layer is empty; no limit output weights");
  }
  rep["audits"] = audits;

  if (cfg.dataset == "shapes") {
    json sweep = json::array();
    for (double nu : {0.0, 0.25, 0.4, 0.49, 0.5}) sweep.push_back(counterexample_json(nu_counterexample(nu, cfg.shapes_p)));
    rep["nu_counterexample"] = sweep;
    if (cfg.nu < 0.5) rep["nu_counterexample_at_config"] = counterexample_json(nu_counterexample(cfg.nu, cfg.shapes_p));
  }
  return rep;
}

// ---- verify -----------------------------------------------------------------------

struct Check {
  std::string name;
  bool pass = false;
  bool skipped = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<Check> checks;
  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass || c.skipped; });
  }
};

/// Prop. 7 style bound on the mean regret of each output neuron, with C = 1.
inline bool output_regret_bound(const OutputRound& out, std::size_t n_last, double* worst_ratio = nullptr) {
  const double N = static_cast<double>(out.schedule.size());
  const double K = static_cast<double>(out.class_counts.size());
  const double xi = static_cast<double>(*std::min_element(out.class_counts.begin(), out.class_counts.end())) / N;
  const double bound = K / (xi * (K - 1.0)) * std::sqrt(std::log(static_cast<double>(n_last)) / N);
  double worst = 0.0;
  for (const auto& l : out.ledgers) worst = std::max(worst, regret(l) / N / bound);
  if (worst_ratio) *worst_ratio = worst;
  return worst <= 1.0;
}

/// Trains cfg.runs runs and compares them with the limit model: selected layers, hidden and
/// output weights, the Cor. 3 discrepancy inequality and the output regret bound. Theory
/// checks are skipped when an assumption audit fails.
inline VerifyReport cmd_verify(const ExperimentConfig& cfg, std::size_t workers, std::ostream* log = nullptr) {
  cfg.validate();
  VerifyReport rep;
  const BaseData base = prepare_data(cfg);
  const auto& natures = base.natures;
  const std::size_t K = base.n_classes;
  const auto labels = labels_of(natures);
  const auto th = thresholds_of(cfg);
  if (base.n_features > 16 && cfg.L > 1) {
    rep.checks.push_back({"limit-model", false, true, "J̄ layers are only enumerated up to depth 1 for this input"});
    return rep;
  }

  const auto a4 = audit_decreasing_correlation(natures, base.n_features);
  const auto a5 = audit_sparse_features(natures, base.n_features, th);
  rep.checks.push_back({"audit-" + a4.name, a4.pass, false, a4.detail});
  rep.checks.push_back({"audit-" + a5.name, a5.pass, false, a5.detail});
  const auto bar = bar_layers(natures, base.n_features, th);
  const auto& last = bar.back();
  const bool theory_ok = a4.pass && a5.pass && !last.empty() && cfg.nu == 0.5;

  std::optional<LimitOutput> lim;
  double rhs = 0.0;
  if (theory_ok) {
    const auto rho = rho_table(last, natures);
    lim = limit_output_from_rates(rho, labels, K);
    rhs = ideal_gamma(cfg.L) * max_ideal_discrepancy(rho, labels, K) - cfg.verify_slack;
  }

  std::size_t layers_ok = 0, hidden_ok = 0, output_ok = 0, output_cmp = 0, cor3_ok = 0, regret_ok = 0;
  double worst_hidden = 0.0, worst_output = 0.0, worst_regret = 0.0, min_disc = INFINITY;
  for (std::size_t r = 0; r < cfg.runs; ++r) {
    const auto o = execute_run(cfg, base, r, workers);
    const auto& res = o.result;
    bool same = true;
    for (std::size_t l = 0; l < cfg.L; ++l) same &= res.model.layers[l] == bar[l + 1];
    layers_ok += same;
    if (cfg.L >= 1) {
      const double d = limit_hidden_distance(res.rounds[0], bar[1]);
      worst_hidden = std::max(worst_hidden, d);
      hidden_ok += d <= cfg.verify_hidden_tol;
    }
    if (lim) {
      const auto d = limit_output_distance(res.model, last, *lim);
      if (!d.empty()) {
        ++output_cmp;
        const double w = *std::max_element(d.begin(), d.end());
        worst_output = std::max(worst_output, w);
        output_ok += w <= cfg.verify_output_tol;
      }
      const double disc = res.evals.back().network_discrepancy;
      min_disc = std::min(min_disc, disc);
      cor3_ok += disc >= rhs;
    }
    double ratio = 0.0;
    const std::size_t n_last = cfg.L == 0 ? base.n_features : res.model.layers.back().size();
    if (n_last > 1) regret_ok += output_regret_bound(res.output, n_last, &ratio);
    worst_regret = std::max(worst_regret, ratio);
    if (log) *log << "verify run " << r << " done\n";
  }
  const double R = static_cast<double>(cfg.runs);
  auto frac = [&](std::size_t n) { return static_cast<double>(n) / R; };
  if (cfg.L >= 1) {
    rep.checks.push_back({"selected-layers", frac(layers_ok) >= 0.95, false,
                          fmt_num(frac(layers_ok)) + " of runs select exactly the limit layers"});
    rep.checks.push_back({"hidden-weights", frac(hidden_ok) >= 0.95, false,
                          "worst layer-1 distance " + fmt_num(worst_hidden)});
  }
  if (!theory_ok) {
    rep.checks.push_back({"output-weights", false, true, "assumptions fail, nu != 1/2 or the limit layer is empty"});
    rep.checks.push_back({"discrepancy-bound", false, true, "assumptions fail, nu != 1/2 or the limit layer is empty"});
  } else {
    if (output_cmp == 0) {
      rep.checks.push_back({"output-weights", false, true, "trained last layer never matched the limit layer"});
    } else {
      rep.checks.push_back({"output-weights", output_ok == output_cmp, false,
                            "worst distance " + fmt_num(worst_output) + " over " + std::to_string(output_cmp) + " runs"});
    }
    rep.checks.push_back({"discrepancy-bound", cor3_ok == cfg.runs, false,
                          "min network discrepancy " + fmt_num(min_disc) + " vs " + fmt_num(rhs)});
  }
  rep.checks.push_back({"output-regret", regret_ok == cfg.runs, false, "worst ratio to bound " + fmt_num(worst_regret)});
  return rep;
}

inline json verify_json(const VerifyReport& r) {
  json a = json::array();
  for (const auto& c : r.checks) {
    a.push_back({{"check", c.name}, {"status", c.skipped ? "skipped" : (c.pass ? "pass" : "fail")}, {"detail", c.detail}});
  }
  return {{"pass", r.all_pass()}, {"checks", a}};
}

}  // namespace chani
