#pragma once

// Model file layout (text, one record per line):
//
//   chani-model 1
//   config-begin
//   <serialized ExperimentConfig>
//   config-end
//   features <n> classes <K> nu <nu> depth <L>
//   layer <l> neurons <n> experts <e>
//   neuron <set> <w_0> ... <w_{e-1}>          (one line per selected neuron)
//   output neurons <K> experts <e> input_experts <i> beta <beta>
//   class <k> <w_0> ... <w_{e-1}>
//
// Weights are printed with 17 significant digits, so reading a file back gives the same doubles.

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "chani/config.hpp"
#include "chani/error.hpp"
#include "chani/training.hpp"

namespace chani {

inline void write_model(std::ostream& os, const TrainedModel& m, const ExperimentConfig& cfg) {
  using detail::fmt_double;
  os << "chani-model 1\nconfig-begin\n" << serialize_config(cfg) << "config-end\n";
  os << "features " << m.n_features << " classes " << m.n_classes << " nu " << fmt_double(m.nu) << " depth "
     << m.depth() << '\n';
  for (std::size_t l = 0; l < m.hidden.size(); ++l) {
    const auto& lw = m.hidden[l];
    os << "layer " << l + 1 << " neurons " << lw.neurons << " experts " << lw.experts << '\n';
    for (std::size_t j = 0; j < lw.neurons; ++j) {
      os << "neuron " << m.layers[l][j].to_string();
      for (std::size_t e = 0; e < lw.experts; ++e) os << ' ' << fmt_double(lw.at(j, e));
      os << '\n';
    }
  }
  const auto& ow = m.output;
  os << "output neurons " << ow.neurons << " experts " << ow.experts << " input_experts " << ow.input_experts
     << " beta " << fmt_double(ow.beta) << '\n';
  for (std::size_t k = 0; k < ow.neurons; ++k) {
    os << "class " << k;
    for (std::size_t e = 0; e < ow.experts; ++e) os << ' ' << fmt_double(ow.at(k, e));
    os << '\n';
  }
}

struct LoadedModel {
  TrainedModel model;
  ExperimentConfig config;
};

inline LoadedModel read_model(std::istream& is) {
  LoadedModel out;
  std::string line;
  std::size_t line_no = 0;
  auto next = [&](const char* what) {
    if (!std::getline(is, line)) throw ParseError(std::string("model: missing ") + what, line_no + 1);
    ++line_no;
  };
  auto expect_word = [&](std::istringstream& ss, const char* w) {
    std::string tok;
    if (!(ss >> tok) || tok != w) throw ParseError(std::string("model: expected '") + w + "'", line_no);
  };
  auto read_weights = [&](std::istringstream& ss, LayerWeights& lw, std::size_t neuron) {
    std::vector<double> w(lw.experts);
    for (auto& v : w) {
      std::string tok;
      if (!(ss >> tok)) throw ParseError("model: too few weights", line_no);
      v = detail::parse_double("weight", tok);
    }
    std::string extra;
    if (ss >> extra) throw ParseError("model: too many weights", line_no);
    lw.set_neuron(neuron, w);
  };

  next("header");
  if (line != "chani-model 1") throw ParseError("model: bad header", line_no);
  next("config");
  if (line != "config-begin") throw ParseError("model: expected config-begin", line_no);
  std::string cfg_text;
  for (;;) {
    next("config-end");
    if (line == "config-end") break;
    cfg_text += line + '\n';
  }
  try {
    out.config = parse_config_text(cfg_text);
  } catch (const ConfigError& e) {
    throw ParseError(std::string("model: embedded config: ") + e.what(), line_no);
  }

  auto& m = out.model;
  std::size_t depth = 0;
  {
    next("shape line");
    std::istringstream ss(line);
    std::string nu;
    expect_word(ss, "features");
    ss >> m.n_features;
    expect_word(ss, "classes");
    ss >> m.n_classes;
    expect_word(ss, "nu");
    ss >> nu;
    expect_word(ss, "depth");
    ss >> depth;
    if (!ss) throw ParseError("model: malformed shape line", line_no);
    m.nu = detail::parse_double("nu", nu);
  }
  for (std::size_t l = 0; l < depth; ++l) {
    next("layer");
    std::istringstream ss(line);
    std::size_t idx = 0, neurons = 0, experts = 0;
    expect_word(ss, "layer");
    ss >> idx;
    expect_word(ss, "neurons");
    ss >> neurons;
    expect_word(ss, "experts");
    ss >> experts;
    if (!ss || idx != l + 1) throw ParseError("model: malformed layer line", line_no);
    auto lw = LayerWeights::uniform(LayerWeights::Kind::hidden, neurons, experts);
    lw.nu = m.nu;
    std::vector<FeatureSet> sets;
    for (std::size_t j = 0; j < neurons; ++j) {
      next("neuron");
      std::istringstream ns(line);
      std::string set;
      expect_word(ns, "neuron");
      ns >> set;
      try {
        sets.push_back(FeatureSet::parse(set));
      } catch (const std::exception& e) {
        throw ParseError(std::string("model: ") + e.what(), line_no);
      }
      read_weights(ns, lw, j);
    }
    m.layers.push_back(std::move(sets));
    m.hidden.push_back(std::move(lw));
  }
  {
    next("output");
    std::istringstream ss(line);
    std::size_t neurons = 0, experts = 0, inputs = 0;
    std::string beta;
    expect_word(ss, "output");
    expect_word(ss, "neurons");
    ss >> neurons;
    expect_word(ss, "experts");
    ss >> experts;
    expect_word(ss, "input_experts");
    ss >> inputs;
    expect_word(ss, "beta");
    ss >> beta;
    if (!ss) throw ParseError("model: malformed output line", line_no);
    m.output = LayerWeights::uniform(LayerWeights::Kind::output, neurons, experts);
    m.output.input_experts = inputs;
    m.output.beta = detail::parse_double("beta", beta);
    for (std::size_t k = 0; k < neurons; ++k) {
      next("class");
      std::istringstream cs(line);
      std::size_t idx = 0;
      expect_word(cs, "class");
      cs >> idx;
      if (!cs || idx != k) throw ParseError("model: malformed class line", line_no);
      read_weights(cs, m.output, k);
    }
  }
  return out;
}

}  // namespace chani
