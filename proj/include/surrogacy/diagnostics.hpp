#pragma once

// 2x2 bookkeeping for a binary prediction against a binary outcome.

#include <cstddef>
#include <iterator>
#include <ranges>
#include <string>

#include "surrogacy/error.hpp"

namespace surrogacy {

struct ConfusionTable {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  std::size_t actual_positive() const { return tp + fn; }
  std::size_t actual_negative() const { return fp + tn; }
  std::size_t predicted_positive() const { return tp + fp; }

  // Same outcomes, predictions negated.
  ConfusionTable flipped_prediction() const { return {fn, tn, tp, fp}; }

  friend bool operator==(const ConfusionTable&, const ConfusionTable&) = default;
};

template <std::ranges::input_range Predicted, std::ranges::input_range Actual>
ConfusionTable cross_table(const Predicted& predicted, const Actual& actual) {
  ConfusionTable t;
  auto p = std::ranges::begin(predicted);
  auto a = std::ranges::begin(actual);
  for (; p != std::ranges::end(predicted) && a != std::ranges::end(actual); ++p, ++a) {
    const bool pred = static_cast<bool>(*p);
    const bool act = static_cast<bool>(*a);
    if (pred && act) {
      ++t.tp;
    } else if (pred) {
      ++t.fp;
    } else if (act) {
      ++t.fn;
    } else {
      ++t.tn;
    }
  }
  if (p != std::ranges::end(predicted) || a != std::ranges::end(actual)) {
    throw DimensionError("cross_table: predicted and actual label lists differ in length");
  }
  if (t.total() == 0) throw EmptyInputError("cross_table: no observations");
  return t;
}

/// (tp*tn)/(fp*fn). A zero cell is an error unless `haldane` is set, in which
/// case 0.5 is added to every cell of a table that has a zero.
inline double odds_ratio(const ConfusionTable& t, bool haldane = false) {
  const bool has_zero = t.tp == 0 || t.fp == 0 || t.fn == 0 || t.tn == 0;
  if (has_zero && !haldane) {
    throw DegenerateError("odds ratio undefined: table (" + std::to_string(t.tp) + "," + std::to_string(t.fp) +
                          "," + std::to_string(t.fn) + "," + std::to_string(t.tn) + ") has a zero cell");
  }
  const double add = has_zero ? 0.5 : 0.0;
  const double tp = static_cast<double>(t.tp) + add;
  const double fp = static_cast<double>(t.fp) + add;
  const double fn = static_cast<double>(t.fn) + add;
  const double tn = static_cast<double>(t.tn) + add;
  return (tp * tn) / (fp * fn);
}

struct SensSpec {
  double sensitivity = 0.0;
  double specificity = 0.0;
};

inline SensSpec sens_spec(const ConfusionTable& t) {
  if (t.actual_positive() == 0 || t.actual_negative() == 0) {
    throw DegenerateError("sensitivity/specificity undefined: a label class is empty");
  }
  return {static_cast<double>(t.tp) / static_cast<double>(t.actual_positive()),
          static_cast<double>(t.tn) / static_cast<double>(t.actual_negative())};
}

}  // namespace surrogacy
