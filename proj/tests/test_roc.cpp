#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "surrogacy/roc.hpp"
#include "test_support.hpp"

using namespace surrogacy;
using surrogacy::testkit::Labelled;

namespace {

Labelled groups(std::vector<double> pos, std::vector<double> neg) {
  Labelled d;
  for (double v : pos) {
    d.marker.push_back(v);
    d.label.push_back(true);
  }
  for (double v : neg) {
    d.marker.push_back(v);
    d.label.push_back(false);
  }
  return d;
}

RocCurve curve_of(const Labelled& d, MarkerOrientation o = MarkerOrientation::higher_predicts_positive) {
  return roc_curve(d.marker, d.label, o);
}

}  // namespace

TEST(RocCurve, SpecExamples) {
  EXPECT_DOUBLE_EQ(curve_of(groups({2, 3}, {0, 1})).auc, 1.0);
  EXPECT_DOUBLE_EQ(curve_of(groups({1, 3}, {0, 2})).auc, 0.75);
  EXPECT_DOUBLE_EQ(curve_of(groups({5}, {5})).auc, 0.5);
  EXPECT_DOUBLE_EQ(curve_of(groups({0.5}, {0.9}), MarkerOrientation::lower_predicts_positive).auc, 1.0);
  EXPECT_DOUBLE_EQ(curve_of(groups({0.5}, {0.9}), MarkerOrientation::higher_predicts_positive).auc, 0.0);
}

TEST(RocCurve, PointsAndSentinels) {
  const auto c = curve_of(groups({1, 3}, {0, 2}));
  ASSERT_EQ(c.points.size(), 6u);  // 4 unique values + 2 sentinels
  EXPECT_EQ(c.points.front().threshold, std::numeric_limits<double>::infinity());
  EXPECT_EQ(c.points.back().threshold, -std::numeric_limits<double>::infinity());
  EXPECT_EQ(c.points[1].threshold, 3.0);
  EXPECT_DOUBLE_EQ(c.points[1].tpr, 0.5);
  EXPECT_DOUBLE_EQ(c.points[1].fpr, 0.0);
  EXPECT_DOUBLE_EQ(c.points[2].fpr, 0.5);
  EXPECT_EQ(c.n_pos, 2u);
  EXPECT_EQ(c.n_neg, 2u);
}

TEST(RocCurve, LowerOrientationThresholdsOnOriginalScale) {
  const auto c = curve_of(groups({0.5, 0.6}, {0.9}), MarkerOrientation::lower_predicts_positive);
  EXPECT_EQ(c.points.front().threshold, -std::numeric_limits<double>::infinity());
  EXPECT_DOUBLE_EQ(c.points[1].threshold, 0.5);
  EXPECT_DOUBLE_EQ(c.points[2].threshold, 0.6);
  EXPECT_DOUBLE_EQ(youden(c).threshold, 0.6);
}

TEST(RocCurve, MissingMarkersAreDeleted) {
  std::vector<std::optional<double>> marker{1.0, std::nullopt, 3.0, 0.0, 2.0, std::nullopt};
  std::vector<bool> label{true, true, true, false, false, false};
  const auto c = roc_curve(marker, label);
  EXPECT_EQ(c.n_used(), 4u);
  EXPECT_DOUBLE_EQ(c.auc, 0.75);
}

TEST(RocCurve, DegenerateLabels) {
  std::vector<std::optional<double>> marker{1.0, std::nullopt};
  std::vector<bool> label{true, false};
  EXPECT_THROW(roc_curve(marker, label), DegenerateError);
  EXPECT_THROW(roc_curve(std::vector<double>{1, 2}, std::vector<bool>{true, true}), DegenerateError);
  EXPECT_THROW(roc_curve(std::vector<double>{1, 2}, std::vector<bool>{true}), DimensionError);
}

TEST(AucPairs, Examples) {
  EXPECT_DOUBLE_EQ(auc_pairs({2, 3}, {0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(auc_pairs({1, 3}, {0, 2}), 0.75);
  EXPECT_DOUBLE_EQ(auc_pairs({1}, {1}), 0.5);
  EXPECT_THROW(auc_pairs({}, {1}), DegenerateError);
}

TEST(RocCurve, TrapezoidMatchesPairCount) {
  std::mt19937_64 rng(20240601);
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = testkit::random_labelled(rng, 2, 50, 1 + trial % 12);
    std::vector<double> pos, neg;
    testkit::split_by_label(d, pos, neg);
    const auto c = curve_of(d);
    EXPECT_NEAR(c.auc, auc_pairs(pos, neg), 1e-12);
    EXPECT_NEAR(c.auc, testkit::trapezoid(c), 1e-12);
  }
}

TEST(RocCurve, ShapeInvariants) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = testkit::random_labelled(rng, 2, 50, 8);
    const auto c = curve_of(d);
    EXPECT_EQ(c.points.front().fpr, 0.0);
    EXPECT_EQ(c.points.front().tpr, 0.0);
    EXPECT_EQ(c.points.back().fpr, 1.0);
    EXPECT_EQ(c.points.back().tpr, 1.0);
    for (std::size_t i = 1; i < c.points.size(); ++i) {
      EXPECT_LE(c.points[i - 1].fpr, c.points[i].fpr);
      EXPECT_LE(c.points[i - 1].tpr, c.points[i].tpr);
    }
    EXPECT_GE(c.auc, 0.0);
    EXPECT_LE(c.auc, 1.0);
  }
}

TEST(RocCurve, RankInvariance) {
  std::mt19937_64 rng(78);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = testkit::random_labelled(rng, 2, 50, 10);
    auto t = d;
    for (auto& v : t.marker) v = std::exp(v) * 3.0 + 1.0;
    const auto a = curve_of(d);
    const auto b = curve_of(t);
    EXPECT_EQ(a.auc, b.auc);
    ASSERT_EQ(a.points.size(), b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      EXPECT_EQ(a.points[i].fpr, b.points[i].fpr);
      EXPECT_EQ(a.points[i].tpr, b.points[i].tpr);
    }
    EXPECT_DOUBLE_EQ(youden(b).threshold, std::exp(youden(a).threshold) * 3.0 + 1.0);
  }
}

TEST(RocCurve, OrientationAntisymmetryWithoutTies) {
  std::mt19937_64 rng(79);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 100; ++trial) {
    auto d = testkit::random_labelled(rng, 2, 50, 2);
    for (auto& v : d.marker) v = z(rng);  // continuous: no ties
    const double up = curve_of(d, MarkerOrientation::higher_predicts_positive).auc;
    const double down = curve_of(d, MarkerOrientation::lower_predicts_positive).auc;
    EXPECT_NEAR(up + down, 1.0, 1e-12);
  }
}

TEST(Youden, Examples) {
  auto y = youden(curve_of(groups({3, 4}, {1, 2})));
  EXPECT_DOUBLE_EQ(y.threshold, 3.0);
  EXPECT_DOUBLE_EQ(y.j, 1.0);
  EXPECT_DOUBLE_EQ(y.sensitivity, 1.0);
  EXPECT_DOUBLE_EQ(y.specificity, 1.0);

  // J = 0.5 at thresholds 3 (sens .5, spec 1) and 1 (sens 1, spec .5).
  y = youden(curve_of(groups({1, 3}, {0, 2})));
  EXPECT_DOUBLE_EQ(y.threshold, 3.0);
  EXPECT_DOUBLE_EQ(y.j, 0.5);
  EXPECT_DOUBLE_EQ(y.sensitivity, 0.5);
  EXPECT_DOUBLE_EQ(y.specificity, 1.0);
}

TEST(Youden, MatchesExhaustiveScan) {
  std::mt19937_64 rng(80);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = testkit::random_labelled(rng, 2, 50, 1 + trial % 9);
    for (auto o : {MarkerOrientation::higher_predicts_positive, MarkerOrientation::lower_predicts_positive}) {
      const auto c = curve_of(d, o);
      const auto y = youden(c);
      const auto s = testkit::youden_scan(d, o);
      EXPECT_NEAR(y.j, s.j, 1e-12);
      EXPECT_EQ(y.threshold, s.threshold);
      EXPECT_NEAR(y.specificity, s.specificity, 1e-12);
      for (std::size_t i = 1; i + 1 < c.points.size(); ++i) {
        EXPECT_LE(c.points[i].tpr - c.points[i].fpr, y.j + 1e-12);
      }
    }
  }
}
