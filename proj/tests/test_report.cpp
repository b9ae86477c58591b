#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "surrogacy/emit.hpp"
#include "surrogacy/report.hpp"
#include "surrogacy/serialize.hpp"
#include "test_support.hpp"

using namespace surrogacy;
using surrogacy::testkit::make_record;

namespace {

std::vector<ComparisonRecord> toy() {
  std::vector<ComparisonRecord> r{make_record("A", 4.0, 8.0, 0.01), make_record("B", 4.0, 6.0, 0.20),
                                  make_record("C", 5.0, 5.5, 0.50), make_record("D", 3.0, 6.0, 0.03)};
  r[0].hr_pfs = 0.5;
  r[0].pfs_p_value = 0.001;
  r[1].hr_pfs = 0.7;
  r[1].pfs_p_value = 0.01;
  r[2].hr_pfs = 0.95;
  r[2].pfs_p_value = 0.6;
  r[3].hr_pfs = 0.6;
  r[3].pfs_p_value = 0.2;
  return r;
}

AnalysisOptions fast_options() {
  AnalysisOptions o;
  o.bagging.n_trees = 25;
  o.bagging.seed = 42;
  o.cart.min_split = 2;
  o.cart.min_leaf = 1;
  return o;
}

std::vector<ComparisonRecord> fixture() { return read_csv_file(testkit::fixture_path("shaped_58.csv")); }

AnalysisOptions fixture_options() {
  AnalysisOptions o;
  o.bagging.n_trees = 100;
  o.bagging.seed = 7;
  return o;
}

}  // namespace

TEST(Report, ToyDatasetPopulatesAllSections) {
  const auto rep = run_analysis(toy(), fast_options());
  EXPECT_EQ(rep.n_records, 4u);
  EXPECT_EQ(rep.n_os_significant, 2u);
  ASSERT_TRUE(rep.cross_table);
  EXPECT_EQ(rep.cross_table->table, (ConfusionTable{1, 1, 1, 1}));
  EXPECT_EQ(rep.cross_table->n_used, 4u);
  ASSERT_TRUE(rep.cross_table->odds_ratio);
  EXPECT_DOUBLE_EQ(*rep.cross_table->odds_ratio, 1.0);
  ASSERT_EQ(rep.measures.size(), 3u);
  for (const auto& m : rep.measures) {
    EXPECT_TRUE(m.curve);
    EXPECT_TRUE(m.youden);
    EXPECT_EQ(m.n_used, 4u);
  }
  EXPECT_EQ(rep.measures[0].orientation, MarkerOrientation::lower_predicts_positive);
  ASSERT_EQ(rep.trees.size(), 1u);
  EXPECT_EQ(rep.importance.report.features.size(), default_tree_features().size());
  EXPECT_EQ(rep.provenance.input_digest.size(), 16u);
  EXPECT_EQ(rep.provenance.seed, 42u);

  const auto j = to_json(rep);
  for (const char* key : {"schema_version", "provenance", "dataset", "cross_table", "measures", "trees", "importance", "ste"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}

TEST(Report, MissingPfsSignificanceDropsCrossTable) {
  auto recs = toy();
  for (auto& r : recs) {
    r.hr_pfs.reset();
    r.pfs_p_value.reset();
  }
  auto opt = fast_options();
  opt.tree_features = {"delta_med", "pct_delta_med"};
  const auto rep = run_analysis(recs, opt);
  EXPECT_FALSE(rep.cross_table);
  EXPECT_TRUE(to_json(rep)["cross_table"].is_null());
  // hr_pfs has no values: the measure carries a note instead of a curve.
  EXPECT_FALSE(rep.measures[0].curve);
  EXPECT_TRUE(rep.measures[0].note);
}

TEST(Report, HaldaneFlag) {
  auto recs = toy();
  recs[1].os_p_value = 0.01;  // PFS+ / OS+ : makes fp zero
  auto opt = fast_options();
  auto rep = run_analysis(recs, opt);
  EXPECT_FALSE(rep.cross_table->odds_ratio);
  EXPECT_TRUE(rep.cross_table->odds_ratio_note);
  opt.haldane = true;
  rep = run_analysis(recs, opt);
  EXPECT_TRUE(rep.cross_table->odds_ratio);
  EXPECT_TRUE(rep.cross_table->haldane_applied);
}

TEST(Report, SingleClassIsDegenerate) {
  auto recs = toy();
  for (auto& r : recs) r.os_p_value = 0.5;
  try {
    run_analysis(recs, fast_options());
    FAIL() << "expected an error";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "labels");
    EXPECT_EQ(e.exit_code(), 4);
  }
}

TEST(Report, TooFewRecords) {
  auto recs = toy();
  recs.resize(1);
  try {
    run_analysis(recs, fast_options());
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.exit_code(), 4);
  }
}

TEST(Report, InvalidOptionsNameTheStage) {
  auto opt = fast_options();
  opt.alpha = 1.5;
  try {
    run_analysis(toy(), opt);
    FAIL() << "expected an error";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "options");
    EXPECT_EQ(e.kind(), ErrorKind::validation);
  }
  opt = fast_options();
  opt.tree_features = {"no_such_feature"};
  try {
    run_analysis(toy(), opt);
    FAIL() << "expected an error";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "features");
    EXPECT_EQ(e.exit_code(), 3);
  }
}

TEST(Report, ShapedFixtureSte) {
  const auto rep = run_analysis(fixture(), fixture_options());
  ASSERT_EQ(rep.trees.size(), 1u);
  ASSERT_EQ(rep.ste.tree_thresholds.size(), 2u);
  EXPECT_EQ(rep.ste.tree_thresholds[0].feature, "pct_delta_med");
  EXPECT_NEAR(rep.ste.tree_thresholds[0].threshold, 48.27, 1e-9);
  EXPECT_TRUE(rep.ste.tree_thresholds[0].at_or_above);
  EXPECT_EQ(rep.ste.tree_thresholds[1].feature, "deaths");
  EXPECT_DOUBLE_EQ(rep.ste.tree_thresholds[1].threshold, 227.0);
  EXPECT_TRUE(rep.ste.tree_thresholds[1].at_or_above);

  const auto j = to_json(rep);
  std::vector<std::string> narratives;
  for (const auto& leaf : j["ste"]["tree_leaves"]) narratives.push_back(leaf["narrative"]);
  EXPECT_EQ(narratives, (std::vector<std::string>{"3/39", "5/12", "6/7"}));
  EXPECT_EQ(rep.ste.roc.size(), 3u);
}

TEST(Report, ByteIdenticalAcrossRunsAndThreads) {
  auto opt = fixture_options();
  const auto a = dump_canonical(to_json(run_analysis(fixture(), opt)));
  const auto b = dump_canonical(to_json(run_analysis(fixture(), opt)));
  opt.threads = 3;
  const auto c = dump_canonical(to_json(run_analysis(fixture(), opt)));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST(Report, ExcludeTtpDropsOneRow) {
  auto opt = fixture_options();
  opt.exclude_ttp = true;
  const auto rep = run_analysis(fixture(), opt);
  EXPECT_EQ(rep.n_records, 57u);
  EXPECT_EQ(rep.n_ttp_excluded, 1u);
  EXPECT_TRUE(rep.provenance.exclude_ttp);
}

TEST(Report, MissingFeatureValuesRunBothPolicies) {
  auto recs = fixture();
  recs[3].deaths.reset();
  recs[10].deaths.reset();
  const auto rep = run_analysis(recs, fixture_options());
  ASSERT_EQ(rep.trees.size(), 2u);
  EXPECT_EQ(rep.trees[0].policy, MissingPolicy::majority_direction);
  EXPECT_EQ(rep.trees[1].policy, MissingPolicy::listwise);
  EXPECT_EQ(rep.trees[0].n_used, 58u);
  EXPECT_EQ(rep.trees[1].n_used, 56u);
  EXPECT_EQ(rep.ste.tree_policy, MissingPolicy::listwise);
}

TEST(CanonicalJson, NumbersAndSentinels) {
  EXPECT_EQ(canonical_number(0.1 + 0.2).dump(), "0.30000000000000004");
  EXPECT_EQ(canonical_number(-0.0).dump(), "0.0");
  EXPECT_EQ(canonical_number(48.27).dump(), "48.27");
  EXPECT_EQ(canonical_number(2.0).dump(), "2.0");
  EXPECT_EQ(canonical_number(std::numeric_limits<double>::infinity()).dump(), "\"inf\"");
  EXPECT_EQ(canonical_number(-std::numeric_limits<double>::infinity()).dump(), "\"-inf\"");
}

TEST(Emit, TreeDotAndCsv) {
  const auto recs = fixture();
  const auto m = build_feature_matrix(recs, derive_all(recs, 0.05), default_tree_features());
  const auto t = fit_tree(m);
  const auto dot = tree_dot(t, m.feature_names);
  EXPECT_NE(dot.find("digraph"), std::string::npos);
  EXPECT_NE(dot.find("48.27%"), std::string::npos);
  EXPECT_NE(dot.find("227"), std::string::npos);
  EXPECT_NE(dot.find("3/39"), std::string::npos);

  const auto c = roc_curve(std::vector<double>{1, 3, 0, 2}, std::vector<bool>{true, true, false, false});
  const auto csv = roc_csv(c);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "threshold,fpr,tpr");
  const auto svg = roc_svg(c, "x");
  EXPECT_NE(svg.find("AUC = 0.75"), std::string::npos);
  EXPECT_NE(svg.find("class=\"roc\""), std::string::npos);
}
