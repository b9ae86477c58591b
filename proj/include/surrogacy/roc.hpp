#pragma once

// Empirical ROC analysis of a continuous marker against a binary label.
//
// Markers are oriented so that a single rule applies everywhere: with
// higher_predicts_positive a case is called positive when marker >= t; with
// lower_predicts_positive when marker <= t (internally the marker is negated).
// One operating point is produced per unique marker value, bracketed by two
// sentinel points at (0,0) and (1,1) whose thresholds are infinite.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ranges>
#include <string_view>
#include <vector>

#include "surrogacy/error.hpp"

namespace surrogacy {

enum class MarkerOrientation { higher_predicts_positive, lower_predicts_positive };

inline std::string_view describe(MarkerOrientation o) {
  return o == MarkerOrientation::higher_predicts_positive ? "higher predicts positive" : "lower predicts positive";
}

inline std::string_view to_string_token(MarkerOrientation o) {
  return o == MarkerOrientation::higher_predicts_positive ? "higher_predicts_positive" : "lower_predicts_positive";
}

struct RocPoint {
  double threshold = 0.0;  // original marker scale
  double fpr = 0.0;
  double tpr = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;

  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  MarkerOrientation orientation = MarkerOrientation::higher_predicts_positive;

  std::size_t n_used() const { return n_pos + n_neg; }

  friend bool operator==(const RocCurve&, const RocCurve&) = default;
};

namespace detail {

inline std::optional<double> as_marker(const std::optional<double>& v) {
  return v && !std::isnan(*v) ? v : std::nullopt;
}
inline std::optional<double> as_marker(double v) {
  return std::isnan(v) ? std::nullopt : std::optional<double>(v);
}

}  // namespace detail

/// Builds the empirical ROC curve. Absent (or NaN) markers are deleted
/// listwise together with their labels.
template <std::ranges::input_range Markers, std::ranges::input_range Labels>
RocCurve roc_curve(const Markers& marker, const Labels& label,
                   MarkerOrientation orient = MarkerOrientation::higher_predicts_positive) {
  const double sign = orient == MarkerOrientation::higher_predicts_positive ? 1.0 : -1.0;
  struct Obs {
    double adjusted;
    bool positive;
  };
  std::vector<Obs> obs;
  auto m = std::ranges::begin(marker);
  auto l = std::ranges::begin(label);
  for (; m != std::ranges::end(marker) && l != std::ranges::end(label); ++m, ++l) {
    if (auto v = detail::as_marker(*m)) obs.push_back({sign * *v, static_cast<bool>(*l)});
  }
  if (m != std::ranges::end(marker) || l != std::ranges::end(label)) {
    throw DimensionError("roc_curve: marker and label lists differ in length");
  }

  RocCurve curve;
  curve.orientation = orient;
  for (const auto& o : obs) (o.positive ? curve.n_pos : curve.n_neg) += 1;
  if (curve.n_pos == 0 || curve.n_neg == 0) {
    throw DegenerateError("ROC undefined: after removing missing markers there are " +
                          std::to_string(curve.n_pos) + " positive and " + std::to_string(curve.n_neg) +
                          " negative cases");
  }

  std::sort(obs.begin(), obs.end(), [](const Obs& a, const Obs& b) { return a.adjusted > b.adjusted; });

  const double inf = std::numeric_limits<double>::infinity();
  const double pos = static_cast<double>(curve.n_pos);
  const double neg = static_cast<double>(curve.n_neg);
  curve.points.push_back({sign * inf, 0.0, 0.0, 0, 0});

  // Twice the concordance count: 2*#(pos > neg) + #(pos == neg).
  std::uint64_t twice_area = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < obs.size();) {
    const double value = obs[i].adjusted;
    std::size_t dtp = 0;
    std::size_t dfp = 0;
    for (; i < obs.size() && obs[i].adjusted == value; ++i) (obs[i].positive ? dtp : dfp) += 1;
    twice_area += static_cast<std::uint64_t>(dfp) * (2 * tp + dtp);
    tp += dtp;
    fp += dfp;
    curve.points.push_back({sign * value, static_cast<double>(fp) / neg, static_cast<double>(tp) / pos, tp, fp});
  }
  curve.points.push_back({-sign * inf, 1.0, 1.0, tp, fp});
  curve.auc = static_cast<double>(twice_area) / (2.0 * pos * neg);
  return curve;
}

/// Mann-Whitney form of the AUC by explicit enumeration of all pairs.
inline double auc_pairs(const std::vector<double>& marker_pos, const std::vector<double>& marker_neg) {
  if (marker_pos.empty() || marker_neg.empty()) {
    throw DegenerateError("auc_pairs: both groups must be non-empty");
  }
  std::uint64_t twice = 0;
  for (double p : marker_pos) {
    for (double n : marker_neg) {
      if (p > n) {
        twice += 2;
      } else if (p == n) {
        twice += 1;
      }
    }
  }
  return static_cast<double>(twice) /
         (2.0 * static_cast<double>(marker_pos.size()) * static_cast<double>(marker_neg.size()));
}

struct YoudenPoint {
  double threshold = 0.0;
  double j = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;

  friend bool operator==(const YoudenPoint&, const YoudenPoint&) = default;
};

/// Operating point maximising J = TPR - FPR over the non-sentinel thresholds.
/// Ties go to the higher specificity, then to the smaller threshold. J is
/// compared exactly through the integer form tp*n_neg - fp*n_pos.
inline YoudenPoint youden(const RocCurve& curve) {
  if (curve.points.size() < 3) throw DegenerateError("youden: curve has no finite operating point");
  const auto score = [&](const RocPoint& p) {
    return static_cast<std::int64_t>(p.tp * curve.n_neg) - static_cast<std::int64_t>(p.fp * curve.n_pos);
  };
  const RocPoint* best = &curve.points[1];
  for (std::size_t i = 2; i + 1 < curve.points.size(); ++i) {
    const RocPoint& p = curve.points[i];
    const auto s = score(p);
    const auto b = score(*best);
    if (s > b || (s == b && (p.fp < best->fp || (p.fp == best->fp && p.threshold < best->threshold)))) {
      best = &p;
    }
  }
  return {best->threshold, best->tpr - best->fpr, best->tpr, 1.0 - best->fpr, best->tp, best->fp};
}

}  // namespace surrogacy
