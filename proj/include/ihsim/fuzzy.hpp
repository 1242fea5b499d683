#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ihsim/errors.hpp"

// Two-input / one-output Mamdani inference on the normalized universe [-1, 1]:
// triangular partitions with 50% overlap, sup-min rule activation, max
// aggregation over rules sharing a consequent, center-of-gravity
// defuzzification on a fixed uniform grid.

namespace ihsim {

enum class Shoulder { left, none, right };

// One linguistic set. Shoulder sets saturate to 1 beyond their center.
struct FuzzySet {
  std::string label;
  double center = 0.0;
  double half_width = 1.0;
  Shoulder shoulder = Shoulder::none;
};

// Piecewise-linear membership in [0, 1]; equals 1 at the center.
inline double membership(const FuzzySet& set, double x) {
  if (set.shoulder == Shoulder::left && x <= set.center) return 1.0;
  if (set.shoulder == Shoulder::right && x >= set.center) return 1.0;
  return std::max(0.0, 1.0 - std::abs(x - set.center) / set.half_width);
}

// Ordered sets spanning [-1, 1]. Adjacent memberships sum to 1 everywhere.
struct FuzzyPartition {
  std::vector<FuzzySet> sets;

  // Evenly spaced triangular sets with saturating shoulders at both ends.
  static FuzzyPartition uniform(std::span<const std::string_view> labels) {
    FuzzyPartition p;
    const int n = static_cast<int>(labels.size());
    if (n < 2) throw ConfigError("fuzzy partition needs at least 2 sets");
    const double step = 2.0 / (n - 1);
    p.sets.reserve(labels.size());
    for (int i = 0; i < n; ++i) {
      Shoulder sh = Shoulder::none;
      if (i == 0) sh = Shoulder::left;
      if (i == n - 1) sh = Shoulder::right;
      p.sets.push_back({std::string(labels[i]), -1.0 + step * i, step, sh});
    }
    return p;
  }

  int size() const { return static_cast<int>(sets.size()); }

  int index_of(std::string_view label) const {
    for (int i = 0; i < size(); ++i)
      if (sets[i].label == label) return i;
    return -1;
  }

  void validate() const {
    const int n = size();
    if (n < 2) throw ConfigError("fuzzy partition needs at least 2 sets");
    const double step = 2.0 / (n - 1);
    for (int i = 0; i < n; ++i) {
      const FuzzySet& s = sets[i];
      if (std::abs(s.center - (-1.0 + step * i)) > 1e-12)
        throw ConfigError("fuzzy partition centers must be evenly spaced on [-1,1]");
      if (std::abs(s.half_width - step) > 1e-12)
        throw ConfigError("fuzzy partition requires 50% overlap (half_width == spacing)");
      const Shoulder want = i == 0 ? Shoulder::left
                          : i == n - 1 ? Shoulder::right
                                       : Shoulder::none;
      if (s.shoulder != want)
        throw ConfigError("fuzzy partition shoulders must saturate only at the ends");
    }
  }
};

// Degree of each set at x (clamped to the universe). At most two are nonzero
// and they sum to 1.
inline std::vector<double> fuzzify(const FuzzyPartition& partition, double x) {
  x = std::clamp(x, -1.0, 1.0);
  std::vector<double> degrees(partition.sets.size());
  for (size_t i = 0; i < partition.sets.size(); ++i)
    degrees[i] = membership(partition.sets[i], x);
  return degrees;
}

// Rule grid: rows follow input A's sets, columns input B's, each cell names an
// output set by index.
struct RuleBase {
  int rows = 0;
  int cols = 0;
  int out_size = 0;
  std::vector<int> cell;  // row-major output indices

  int at(int row, int col) const { return cell[static_cast<size_t>(row) * cols + col]; }

  void validate(const FuzzyPartition& in_a, const FuzzyPartition& in_b,
                const FuzzyPartition& out) const {
    if (rows != in_a.size() || cols != in_b.size())
      throw ConfigError("rule grid dimensions do not match the input partitions");
    if (out_size != out.size())
      throw ConfigError("rule grid output size does not match the output partition");
    if (cell.size() != static_cast<size_t>(rows) * cols)
      throw ConfigError("rule grid is not fully populated");
    for (int c : cell)
      if (c < 0 || c >= out_size)
        throw ConfigError("rule grid cell names an unknown output set");
  }
};

// One aggregated consequent: output set index and its clipping level.
struct Activation {
  int label;
  double degree;
};

// Sup-min inference: each fired rule contributes min(degA, degB); rules with
// the same consequent combine by max. Returns the fired consequents only.
inline std::vector<Activation> infer(const RuleBase& rules,
                                     std::span<const double> deg_a,
                                     std::span<const double> deg_b) {
  if (static_cast<int>(deg_a.size()) != rules.rows ||
      static_cast<int>(deg_b.size()) != rules.cols)
    throw ConfigError("degree vectors do not match the rule grid dimensions");
  std::array<double, 32> acc{};
  if (rules.out_size > static_cast<int>(acc.size()))
    throw ConfigError("rule grid output partition too large");
  for (int i = 0; i < rules.rows; ++i) {
    if (deg_a[i] <= 0.0) continue;
    for (int j = 0; j < rules.cols; ++j) {
      if (deg_b[j] <= 0.0) continue;
      const double a = std::min(deg_a[i], deg_b[j]);
      const int out = rules.at(i, j);
      acc[out] = std::max(acc[out], a);
    }
  }
  std::vector<Activation> fired;
  for (int k = 0; k < rules.out_size; ++k)
    if (acc[k] > 0.0) fired.push_back({k, acc[k]});
  return fired;
}

inline constexpr int kCentroidGridPoints = 1001;

struct DefuzzResult {
  double value = 0.0;
  bool fired = false;  // false: no rule fired, value defaults to 0
};

// Centroid of the pointwise max of the clipped output sets, by trapezoid rule
// on a uniform grid over [-1, 1].
inline DefuzzResult defuzzify_centroid(std::span<const Activation> aggregate,
                                       const FuzzyPartition& output,
                                       int grid_points = kCentroidGridPoints) {
  double num = 0.0;
  double den = 0.0;
  const double dx = 2.0 / (grid_points - 1);
  for (int k = 0; k < grid_points; ++k) {
    const double x = -1.0 + dx * k;
    double mu = 0.0;
    for (const Activation& a : aggregate)
      mu = std::max(mu, std::min(a.degree, membership(output.sets[a.label], x)));
    const double w = (k == 0 || k == grid_points - 1) ? 0.5 : 1.0;
    num += w * x * mu;
    den += w * mu;
  }
  if (den <= 0.0) return {0.0, false};
  return {num / den, true};
}

// A complete two-input controller: partitions, rule grid, defuzzifier grid.
struct FuzzyController {
  std::string name;
  FuzzyPartition input_error;
  FuzzyPartition input_delta;
  FuzzyPartition output;
  RuleBase rules;
  int grid_points = kCentroidGridPoints;

  // fuzzify -> infer -> centroid; inputs clamped to [-1, 1]. Pure.
  double eval(double e, double de) const {
    const auto deg_a = fuzzify(input_error, e);
    const auto deg_b = fuzzify(input_delta, de);
    const auto fired = infer(rules, deg_a, deg_b);
    return defuzzify_centroid(fired, output, grid_points).value;
  }

  void validate() const {
    input_error.validate();
    input_delta.validate();
    output.validate();
    rules.validate(input_error, input_delta, output);
    if (grid_points < 3) throw ConfigError("defuzzifier grid needs at least 3 points");
  }
};

inline constexpr std::array<std::string_view, 5> kLabels5 = {"NL", "NS", "Z",
                                                             "PS", "PL"};
inline constexpr std::array<std::string_view, 9> kLabels9 = {
    "NVL", "NL", "NM", "NS", "Z", "PS", "PM", "PL", "PVL"};

namespace detail {

inline RuleBase grid_from_labels(const FuzzyPartition& out,
                                 std::span<const std::string_view> cells,
                                 int n) {
  RuleBase rb;
  rb.rows = rb.cols = n;
  rb.out_size = out.size();
  rb.cell.reserve(cells.size());
  for (std::string_view label : cells) {
    const int idx = out.index_of(label);
    if (idx < 0) throw ConfigError("rule grid cell names an unknown output set");
    rb.cell.push_back(idx);
  }
  return rb;
}

}  // namespace detail

// Resonance-tracking grid: 5x5 over (reactive-power error, its delta).
// Rows run NL..PL down, columns NL..PL across.
inline const FuzzyController& resonance5() {
  static const FuzzyController ctl = [] {
    constexpr std::array<std::string_view, 25> cells = {
        "PL", "PL", "PS", "PS", "Z",   //
        "PL", "PS", "PS", "Z",  "NS",  //
        "PS", "PS", "Z",  "NS", "NS",  //
        "PS", "Z",  "NS", "NS", "NL",  //
        "Z",  "NS", "NS", "NL", "NL",
    };
    FuzzyController c;
    c.name = "resonance5";
    c.input_error = FuzzyPartition::uniform(kLabels5);
    c.input_delta = FuzzyPartition::uniform(kLabels5);
    c.output = FuzzyPartition::uniform(kLabels5);
    c.rules = detail::grid_from_labels(c.output, cells, 5);
    c.validate();
    return c;
  }();
  return ctl;
}

// Power-regulation grid: 9x9 over (power error, its delta).
inline const FuzzyController& power9() {
  static const FuzzyController ctl = [] {
    constexpr std::array<std::string_view, 81> cells = {
        "NVL", "NVL", "NVL", "NVL", "NVL", "NL",  "NM",  "NS",  "Z",    //
        "NVL", "NVL", "NVL", "NVL", "NL",  "NM",  "NS",  "Z",   "PS",   //
        "NVL", "NVL", "NVL", "NL",  "NM",  "NS",  "Z",   "PS",  "PM",   //
        "NVL", "NVL", "NL",  "NM",  "NS",  "Z",   "PS",  "PM",  "PL",   //
        "NVL", "NL",  "NM",  "NS",  "Z",   "PS",  "PM",  "PL",  "PVL",  //
        "NL",  "NM",  "NS",  "Z",   "PS",  "PM",  "PL",  "PVL", "PVL",  //
        "NM",  "NS",  "Z",   "PS",  "PM",  "PL",  "PVL", "PVL", "PVL",  //
        "NS",  "Z",   "PS",  "PM",  "PL",  "PVL", "PVL", "PVL", "PVL",  //
        "Z",   "PS",  "PM",  "PL",  "PVL", "PVL", "PVL", "PVL", "PVL",
    };
    FuzzyController c;
    c.name = "power9";
    c.input_error = FuzzyPartition::uniform(kLabels9);
    c.input_delta = FuzzyPartition::uniform(kLabels9);
    c.output = FuzzyPartition::uniform(kLabels9);
    c.rules = detail::grid_from_labels(c.output, cells, 9);
    c.validate();
    return c;
  }();
  return ctl;
}

// Builds a controller from a preset name ("resonance5", "power9") or an
// inline grid: rows separated by ';', cells by ',', square, 5x5 or 9x9.
inline FuzzyController controller_from_config(std::string_view text) {
  if (text == "resonance5") return resonance5();
  if (text == "power9") return power9();
  if (text.find(',') == std::string_view::npos)
    throw ConfigError("unknown fuzzy controller preset '" + std::string(text) + "'");

  std::vector<std::vector<std::string>> grid;
  std::stringstream rows{std::string(text)};
  std::string row;
  while (std::getline(rows, row, ';')) {
    std::vector<std::string> cells;
    std::stringstream cols{row};
    std::string cell;
    while (std::getline(cols, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t");
      const auto e = cell.find_last_not_of(" \t");
      if (b == std::string::npos) throw ConfigError("empty cell in inline rule grid");
      cells.push_back(cell.substr(b, e - b + 1));
    }
    if (!cells.empty()) grid.push_back(std::move(cells));
  }
  const int n = static_cast<int>(grid.size());
  if (n != 5 && n != 9)
    throw ConfigError("inline rule grid must be 5x5 or 9x9");
  for (const auto& r : grid)
    if (static_cast<int>(r.size()) != n)
      throw ConfigError("inline rule grid must be square");

  FuzzyController c;
  c.name = "inline";
  if (n == 5) {
    c.input_error = FuzzyPartition::uniform(kLabels5);
  } else {
    c.input_error = FuzzyPartition::uniform(kLabels9);
  }
  c.input_delta = c.input_error;
  c.output = c.input_error;
  c.rules.rows = c.rules.cols = n;
  c.rules.out_size = n;
  for (const auto& r : grid)
    for (const auto& cell : r) {
      const int idx = c.output.index_of(cell);
      if (idx < 0)
        throw ConfigError("inline rule grid cell '" + cell + "' is not a valid label");
      c.rules.cell.push_back(idx);
    }
  c.validate();
  return c;
}

}  // namespace ihsim
