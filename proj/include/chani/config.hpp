#pragma once

// Flat "key = value" experiment configuration with dotted sections.
//
//   # comment
//   dataset = shapes            # shapes | digits
//   shapes.task = 1
//   layer1.eta = theory         # or a number
//
// Hidden layers are layer1..layerL; keys of a layer beyond model.L are rejected.

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "chani/aggregation.hpp"
#include "chani/error.hpp"
#include "chani/training.hpp"

namespace chani {

struct LayerSpec {
  AggregatorSpec::Kind kind = AggregatorSpec::Kind::ewa;
  double eta = 3.0;
  bool eta_theory = false;
  double b = 2.0;
  SelectionRule::Mode select = SelectionRule::Mode::threshold;
  double s = 0.1;
  std::size_t n = 100;

  bool operator==(const LayerSpec&) const = default;
};

struct ExperimentConfig {
  std::string dataset = "shapes";
  int shapes_task = 1;
  double shapes_p = 0.5;
  std::size_t shapes_test_per_nature = 11;  // 99 test objects
  std::string digits_path;
  double digits_split = 0.8;
  std::uint64_t digits_split_seed = 0;
  double digits_scale = 1.0;
  std::size_t digits_selection_size = 200;  // 0 = whole training set
  std::size_t L = 0;
  double nu = 0.5;
  std::size_t T = 2000;
  std::size_t M = 40;
  std::size_t N = 360;
  std::size_t epoch_length = 0;
  std::vector<LayerSpec> layers;  // size L
  LayerSpec output{AggregatorSpec::Kind::ewa, 0.05, false, 2.0, SelectionRule::Mode::threshold, 0.1, 100};
  bool variant = false;
  double alpha = 1.0;
  double beta = 1.0;
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  std::string cadence = "epoch";  // epoch | final
  double verify_hidden_tol = 0.1;
  double verify_output_tol = 0.15;
  double verify_slack = 0.05;

  bool operator==(const ExperimentConfig&) const = default;

  void validate() const {
    auto fail = [](const std::string& key, const std::string& why) { throw ConfigError(key + ": " + why); };
    if (dataset != "shapes" && dataset != "digits") fail("dataset", "must be shapes or digits");
    if (shapes_task != 1 && shapes_task != 2) fail("shapes.task", "must be 1 or 2");
    if (!(shapes_p > 0.0 && shapes_p <= 1.0)) fail("shapes.p", "must lie in (0,1]");
    if (shapes_test_per_nature < 1) fail("shapes.test_per_nature", "must be >= 1");
    if (dataset == "digits" && digits_path.empty()) fail("digits.path", "required for the digits dataset");
    if (!(digits_split > 0.0 && digits_split < 1.0)) fail("digits.split", "must lie in (0,1)");
    if (!(digits_scale >= 0.0)) fail("digits.scale", "must be >= 0");
    if (!(nu >= 0.0 && nu < 1.0)) fail("model.nu", "must lie in [0,1)");
    if (T < 1) fail("model.T", "must be >= 1");
    if (M < 1) fail("train.M", "must be >= 1");
    if (N < 1) fail("train.N", "must be >= 1");
    if (layers.size() != L) fail("model.L", "layer sections do not match L");
    auto check_layer = [&](const std::string& p, const LayerSpec& ls, bool hidden) {
      if (ls.kind == AggregatorSpec::Kind::ewa && !ls.eta_theory && !(ls.eta > 0.0 && std::isfinite(ls.eta))) {
        fail(p + ".eta", "must be > 0 or theory");
      }
      if (ls.kind == AggregatorSpec::Kind::pwa && !(ls.b >= 2.0 && std::isfinite(ls.b))) fail(p + ".b", "must be >= 2");
      if (hidden && ls.select == SelectionRule::Mode::threshold && !(ls.s > 0.0 && ls.s <= 1.0)) {
        fail(p + ".s", "must lie in (0,1]");
      }
      if (hidden && ls.select == SelectionRule::Mode::top_n && ls.n < 1) fail(p + ".n", "must be >= 1");
    };
    for (std::size_t l = 0; l < layers.size(); ++l) check_layer("layer" + std::to_string(l + 1), layers[l], true);
    check_layer("output", output, false);
    if (variant && L == 0) fail("variant.enabled", "needs at least one hidden layer");
    if (!std::isfinite(alpha) || !std::isfinite(beta)) fail("variant", "alpha and beta must be finite");
    if (runs < 1) fail("run.runs", "must be >= 1");
    if (cadence != "epoch" && cadence != "final") fail("eval.cadence", "must be epoch or final");
  }

  TrainingConfig training() const {
    TrainingConfig c;
    c.L = L;
    c.T = T;
    c.M = M;
    c.N = N;
    c.nu = nu;
    for (const auto& ls : layers) {
      HiddenLayerConfig h;
      h.agg = ls.kind == AggregatorSpec::Kind::ewa ? AggregatorSpec::ewa(ls.eta_theory ? 1.0 : ls.eta)
                                                   : AggregatorSpec::pwa(ls.b);
      h.eta_theory = ls.eta_theory;
      h.select.mode = ls.select;
      h.select.s = ls.s;
      h.select.n = ls.n;
      c.hidden.push_back(h);
    }
    c.output = output.kind == AggregatorSpec::Kind::ewa ? AggregatorSpec::ewa(output.eta_theory ? 1.0 : output.eta)
                                                        : AggregatorSpec::pwa(output.b);
    c.output_eta_theory = output.eta_theory;
    c.variant = variant;
    c.alpha = variant ? alpha : 1.0;
    c.beta = variant ? beta : 1.0;
    c.epoch_length = epoch_length;
    c.evaluate_each_epoch = cadence == "epoch";
    return c;
  }
};

namespace detail {

inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(d)) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return d;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  if (v.empty() || v[0] == '-') throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  const unsigned long long u = std::strtoull(v.c_str(), &end, 10);
  if (*end != '\0' || errno == ERANGE) throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return u;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

inline AggregatorSpec::Kind parse_kind(const std::string& key, const std::string& v) {
  if (v == "ewa") return AggregatorSpec::Kind::ewa;
  if (v == "pwa") return AggregatorSpec::Kind::pwa;
  throw ConfigError(key + ": expected ewa or pwa, got '" + v + "'");
}

}  // namespace detail

/// Sets one key. Layer keys may name layers up to model.L only once the whole file is read,
/// so layers are grown on demand here and checked in finish_config().
inline void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& v) {
  using namespace detail;
  auto layer_field = [&](LayerSpec& ls, const std::string& field, bool hidden) {
    if (field == "aggregator") {
      ls.kind = parse_kind(key, v);
    } else if (field == "eta") {
      ls.eta_theory = v == "theory";
      ls.eta = ls.eta_theory ? 0.0 : parse_double(key, v);  // 0 keeps round trips exact
    } else if (field == "b") {
      ls.b = parse_double(key, v);
    } else if (hidden && field == "select") {
      if (v == "threshold") {
        ls.select = SelectionRule::Mode::threshold;
      } else if (v == "top_n") {
        ls.select = SelectionRule::Mode::top_n;
      } else {
        throw ConfigError(key + ": expected threshold or top_n, got '" + v + "'");
      }
    } else if (hidden && field == "s") {
      ls.s = parse_double(key, v);
    } else if (hidden && field == "n") {
      ls.n = parse_u64(key, v);
    } else {
      throw ConfigError(key + ": unknown key");
    }
  };

  if (key == "dataset") c.dataset = v;
  else if (key == "shapes.task") c.shapes_task = static_cast<int>(parse_u64(key, v));
  else if (key == "shapes.p") c.shapes_p = parse_double(key, v);
  else if (key == "shapes.test_per_nature") c.shapes_test_per_nature = parse_u64(key, v);
  else if (key == "digits.path") c.digits_path = v;
  else if (key == "digits.split") c.digits_split = parse_double(key, v);
  else if (key == "digits.split_seed") c.digits_split_seed = parse_u64(key, v);
  else if (key == "digits.scale") c.digits_scale = parse_double(key, v);
  else if (key == "digits.selection_size") c.digits_selection_size = parse_u64(key, v);
  else if (key == "model.L") c.L = parse_u64(key, v);
  else if (key == "model.nu") c.nu = parse_double(key, v);
  else if (key == "model.T") c.T = parse_u64(key, v);
  else if (key == "train.M") c.M = parse_u64(key, v);
  else if (key == "train.N") c.N = parse_u64(key, v);
  else if (key == "train.epoch_length") c.epoch_length = parse_u64(key, v);
  else if (key == "variant.enabled") c.variant = parse_bool(key, v);
  else if (key == "variant.alpha") c.alpha = parse_double(key, v);
  else if (key == "variant.beta") c.beta = parse_double(key, v);
  else if (key == "run.runs") c.runs = parse_u64(key, v);
  else if (key == "run.seed") c.seed = parse_u64(key, v);
  else if (key == "eval.cadence") c.cadence = v;
  else if (key == "verify.hidden_tol") c.verify_hidden_tol = parse_double(key, v);
  else if (key == "verify.output_tol") c.verify_output_tol = parse_double(key, v);
  else if (key == "verify.slack") c.verify_slack = parse_double(key, v);
  else if (key.rfind("output.", 0) == 0) layer_field(c.output, key.substr(7), false);
  else if (key.rfind("layer", 0) == 0 && key.find('.') != std::string::npos) {
    const auto dot = key.find('.');
    const std::string num = key.substr(5, dot - 5);
    if (num.empty() || num.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError(key + ": unknown key");
    }
    const auto l = std::stoul(num);
    if (l < 1 || l > 64) throw ConfigError(key + ": layer index out of range");
    if (c.layers.size() < l) c.layers.resize(l);
    layer_field(c.layers[l - 1], key.substr(dot + 1), true);
  } else {
    throw ConfigError(key + ": unknown key");
  }
}

/// Pads or checks the layer list against model.L, then validates.
inline void finish_config(ExperimentConfig& c) {
  if (c.layers.size() > c.L) {
    throw ConfigError("layer" + std::to_string(c.layers.size()) + ": beyond model.L = " + std::to_string(c.L));
  }
  c.layers.resize(c.L);
  c.validate();
}

inline ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig c;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));
    set_config_value(c, key, value);
  }
  finish_config(c);
  return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path);
  return parse_config(f);
}

/// Every key, in a fixed order; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const ExperimentConfig& c) {
  using detail::fmt_double;
  std::ostringstream os;
  auto kv = [&](const std::string& k, const std::string& v) { os << k << " = " << v << '\n'; };
  auto layer = [&](const std::string& p, const LayerSpec& ls, bool hidden) {
    kv(p + ".aggregator", to_string(ls.kind));
    kv(p + ".eta", ls.eta_theory ? "theory" : fmt_double(ls.eta));
    kv(p + ".b", fmt_double(ls.b));
    if (!hidden) return;
    kv(p + ".select", ls.select == SelectionRule::Mode::threshold ? "threshold" : "top_n");
    kv(p + ".s", fmt_double(ls.s));
    kv(p + ".n", std::to_string(ls.n));
  };
  kv("dataset", c.dataset);
  kv("shapes.task", std::to_string(c.shapes_task));
  kv("shapes.p", fmt_double(c.shapes_p));
  kv("shapes.test_per_nature", std::to_string(c.shapes_test_per_nature));
  kv("digits.path", c.digits_path);
  kv("digits.split", fmt_double(c.digits_split));
  kv("digits.split_seed", std::to_string(c.digits_split_seed));
  kv("digits.scale", fmt_double(c.digits_scale));
  kv("digits.selection_size", std::to_string(c.digits_selection_size));
  kv("model.L", std::to_string(c.L));
  kv("model.nu", fmt_double(c.nu));
  kv("model.T", std::to_string(c.T));
  kv("train.M", std::to_string(c.M));
  kv("train.N", std::to_string(c.N));
  kv("train.epoch_length", std::to_string(c.epoch_length));
  for (std::size_t l = 0; l < c.layers.size(); ++l) layer("layer" + std::to_string(l + 1), c.layers[l], true);
  layer("output", c.output, false);
  kv("variant.enabled", c.variant ? "true" : "false");
  kv("variant.alpha", fmt_double(c.alpha));
  kv("variant.beta", fmt_double(c.beta));
  kv("run.runs", std::to_string(c.runs));
  kv("run.seed", std::to_string(c.seed));
  kv("eval.cadence", c.cadence);
  kv("verify.hidden_tol", fmt_double(c.verify_hidden_tol));
  kv("verify.output_tol", fmt_double(c.verify_output_tol));
  kv("verify.slack", fmt_double(c.verify_slack));
  return os.str();
}

}  // namespace chani
