#pragma once

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "chani/dynamics.hpp"
#include "chani/error.hpp"
#include "chani/rng.hpp"

namespace chani {

// ---- colored shapes --------------------------------------------------------

enum class ShapesTask { task1 = 1, task2 = 2 };

inline constexpr std::array<const char*, 6> kShapeFeatures = {"circle", "square", "triangle", "blue", "red", "green"};
inline constexpr std::size_t kCircle = 0, kSquare = 1, kTriangle = 2, kBlue = 3, kRed = 4, kGreen = 5;

/// Class index (0 = k1, 1 = k2) of the nature with the given shape/color features.
inline int shapes_label(ShapesTask task, std::size_t shape, std::size_t color) {
  if (task == ShapesTask::task1) return shape == kCircle ? 0 : 1;
  // k1 = blue circle, blue triangle, red square, green circle, green square
  const bool k1 = (color == kBlue && shape != kSquare) || (color == kRed && shape == kSquare) ||
                  (color == kGreen && shape != kTriangle);
  return k1 ? 0 : 1;
}

/// The nine natures, color-major: blue circle, blue square, ..., green triangle.
inline std::vector<FiringProfile> shapes_profiles(double p, ShapesTask task) {
  if (!(p > 0.0 && p <= 1.0)) throw InputError("shapes: p must lie in (0,1]");
  std::vector<FiringProfile> out;
  for (std::size_t color : {kBlue, kRed, kGreen}) {
    for (std::size_t shape : {kCircle, kSquare, kTriangle}) {
      FiringProfile f;
      f.nature_id = std::string(kShapeFeatures[color]) + "_" + kShapeFeatures[shape];
      f.rates.assign(kShapeFeatures.size(), 0.0);
      f.rates[shape] = p;
      f.rates[color] = p;
      f.class_label = shapes_label(task, shape, color);
      out.push_back(std::move(f));
    }
  }
  return out;
}

/// Same natures with an arbitrary labelling (labels[i] for nature i in shapes order).
inline std::vector<FiringProfile> shapes_profiles_labelled(double p, const std::vector<int>& labels) {
  auto out = shapes_profiles(p, ShapesTask::task1);
  if (labels.size() != out.size()) throw InputError("shapes: need one label per nature");
  for (std::size_t i = 0; i < out.size(); ++i) out[i].class_label = labels[i];
  return out;
}

// ---- digits ---------------------------------------------------------------

struct DigitsSource {
  std::string path;
  double split = 0.8;
  std::uint64_t split_seed = 0;
  double scale = 1.0;
};

struct DigitRecord {
  std::array<int, 64> pixels{};
  int label = 0;
};

namespace detail {

inline std::string read_maybe_gz(const std::string& path) {
  gzFile f = gzopen(path.c_str(), "rb");  // reads plain files transparently too
  if (!f) throw ParseError("cannot open " + path);
  std::string out;
  char buf[1 << 16];
  int n = 0;
  while ((n = gzread(f, buf, sizeof buf)) > 0) out.append(buf, static_cast<std::size_t>(n));
  const bool failed = n < 0;
  gzclose(f);
  if (failed) throw ParseError("read error in " + path);
  return out;
}

inline bool parse_int_field(std::string_view tok, int& out) {
  // Accept "7" and "7.0" (the public CSV writes integers, some mirrors write floats).
  if (tok.empty()) return false;
  double v = 0.0;
  std::size_t pos = 0;
  try {
    v = std::stod(std::string(tok), &pos);
  } catch (...) {
    return false;
  }
  if (pos != tok.size() || v != std::floor(v)) return false;
  out = static_cast<int>(v);
  return true;
}

}  // namespace detail

/// Parses 64 pixels (0..16) then a label (0..9) per non-empty line; commas or blanks separate fields.
inline std::vector<DigitRecord> parse_digits(std::string_view text) {
  std::vector<DigitRecord> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    if (line.front() == '#') continue;

    std::vector<int> fields;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ',' || line[i] == ' ' || line[i] == '\t')) ++i;
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && line[j] != ',' && line[j] != ' ' && line[j] != '\t') ++j;
      int v = 0;
      if (!detail::parse_int_field(line.substr(i, j - i), v)) {
        throw ParseError("digits: non-integer field '" + std::string(line.substr(i, j - i)) + "'", line_no);
      }
      fields.push_back(v);
      i = j;
    }
    if (fields.size() != 65) {
      throw ParseError("digits: expected 65 fields, found " + std::to_string(fields.size()), line_no);
    }
    DigitRecord r;
    for (std::size_t k = 0; k < 64; ++k) {
      if (fields[k] < 0 || fields[k] > 16) throw ParseError("digits: pixel outside [0,16]", line_no);
      r.pixels[k] = fields[k];
    }
    if (fields[64] < 0 || fields[64] > 9) throw ParseError("digits: label outside [0,9]", line_no);
    r.label = fields[64];
    out.push_back(r);
  }
  return out;
}

inline FiringProfile digit_profile(const DigitRecord& r, double scale, std::size_t index) {
  FiringProfile f;
  f.nature_id = "digit" + std::to_string(index);
  f.rates.resize(64);
  for (std::size_t k = 0; k < 64; ++k) f.rates[k] = std::clamp(scale * r.pixels[k] / 16.0, 0.0, 1.0);
  f.class_label = r.label;
  return f;
}

struct DigitsSplit {
  std::vector<FiringProfile> train;
  std::vector<FiringProfile> test;
};

/// Every image is its own nature; the split is a keyed permutation, train = first floor(split * n).
inline DigitsSplit split_digits(const std::vector<DigitRecord>& records, const DigitsSource& src) {
  if (!(src.split > 0.0 && src.split < 1.0)) throw InputError("digits split must lie in (0,1)");
  if (!(src.scale >= 0.0)) throw InputError("digits rate scale must be >= 0");
  std::vector<std::size_t> idx(records.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  keyed_shuffle(idx, RngStream(src.split_seed).child(0x5b117));
  const auto n_train = static_cast<std::size_t>(std::floor(src.split * static_cast<double>(records.size())));
  DigitsSplit out;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    auto f = digit_profile(records[idx[i]], src.scale, idx[i]);
    (i < n_train ? out.train : out.test).push_back(std::move(f));
  }
  return out;
}

inline DigitsSplit load_digits(const DigitsSource& src) {
  return split_digits(parse_digits(detail::read_maybe_gz(src.path)), src);
}

/// Writes the plain-text format read by load_digits.
inline void write_digits(std::ostream& os, const std::vector<DigitRecord>& records) {
  for (const auto& r : records) {
    for (std::size_t k = 0; k < 64; ++k) os << r.pixels[k] << ',';
    os << r.label << '\n';
  }
}

// ---- schedules ------------------------------------------------------------

struct Schedule {
  std::vector<std::size_t> items;       // indices into the nature list
  std::vector<std::size_t> per_nature;  // presentation count of each nature
  bool balanced = true;                 // every nature presented equally often
};

/// Concatenated keyed permutations of [0, n_natures), truncated to `length`.
inline Schedule schedule_of_length(std::size_t n_natures, std::size_t length, const RngStream& rng) {
  if (n_natures == 0) throw InputError("schedule: empty nature list");
  Schedule s;
  s.items.reserve(length);
  s.per_nature.assign(n_natures, 0);
  std::vector<std::size_t> perm(n_natures);
  for (std::uint64_t epoch = 0; s.items.size() < length; ++epoch) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    keyed_shuffle(perm, rng.child(epoch));
    for (auto i : perm) {
      if (s.items.size() == length) break;
      s.items.push_back(i);
      ++s.per_nature[i];
    }
  }
  s.balanced = length % n_natures == 0;
  return s;
}

inline Schedule balanced_schedule(std::size_t n_natures, std::size_t repetitions, const RngStream& rng) {
  if (repetitions < 1) throw InputError("schedule: repetitions must be >= 1");
  return schedule_of_length(n_natures, n_natures * repetitions, rng);
}

/// Objects per class in a schedule.
inline std::vector<std::size_t> class_counts(const Schedule& s, const std::vector<FiringProfile>& natures,
                                             std::size_t n_classes) {
  std::vector<std::size_t> out(n_classes, 0);
  for (auto i : s.items) {
    const int k = natures[i].class_label;
    if (k < 0 || static_cast<std::size_t>(k) >= n_classes) throw InputError("schedule: class outside K");
    ++out[static_cast<std::size_t>(k)];
  }
  return out;
}

}  // namespace chani
