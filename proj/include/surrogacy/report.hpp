#pragma once

// End-to-end surrogacy analysis: labels, descriptive summaries, the PFS/OS
// significance cross-table, per-measure ROC with Youden cut-offs, the
// classification tree(s), bagged importance and the threshold summary.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "surrogacy/cart.hpp"
#include "surrogacy/dataset.hpp"
#include "surrogacy/diagnostics.hpp"
#include "surrogacy/ensemble.hpp"
#include "surrogacy/error.hpp"
#include "surrogacy/roc.hpp"
#include "surrogacy/version.hpp"

namespace surrogacy {

enum class Measure { hr_pfs, delta_med, pct_delta_med };

inline constexpr std::array<Measure, 3> kAllMeasures{Measure::hr_pfs, Measure::delta_med, Measure::pct_delta_med};

inline std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::hr_pfs: return "hr_pfs";
    case Measure::delta_med: return "delta_med";
    case Measure::pct_delta_med: return "pct_delta_med";
  }
  return "";
}

inline std::optional<Measure> parse_measure(std::string_view s) {
  for (auto m : kAllMeasures) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

/// A lower hazard ratio means more benefit; larger median gains mean more benefit.
inline MarkerOrientation default_orientation(Measure m) {
  return m == Measure::hr_pfs ? MarkerOrientation::lower_predicts_positive
                              : MarkerOrientation::higher_predicts_positive;
}

inline std::optional<double> measure_value(const DerivedMeasures& d, Measure m) {
  switch (m) {
    case Measure::hr_pfs: return d.hr_pfs;
    case Measure::delta_med: return d.delta_med;
    case Measure::pct_delta_med: return d.pct_delta_med;
  }
  return std::nullopt;
}

inline const std::vector<std::string>& default_tree_features() {
  static const std::vector<std::string> names{"hr_pfs", "delta_med", "pct_delta_med", "sample_size", "deaths"};
  return names;
}

inline std::vector<ComparisonRecord> without_ttp(const std::vector<ComparisonRecord>& records) {
  std::vector<ComparisonRecord> out;
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [](const ComparisonRecord& r) { return !r.endpoint_is_ttp; });
  return out;
}

/// Outcome labels for every record, in order.
inline std::vector<DerivedMeasures> derive_all(const std::vector<ComparisonRecord>& records, double alpha) {
  std::vector<DerivedMeasures> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(derive_measures(r, alpha));
  return out;
}

/// Predictor matrix over the named features; row ids index `records`.
inline FeatureMatrix build_feature_matrix(const std::vector<ComparisonRecord>& records,
                                          const std::vector<DerivedMeasures>& derived,
                                          const std::vector<std::string>& features) {
  FeatureMatrix m;
  m.feature_names = features;
  for (std::size_t i = 0; i < records.size(); ++i) {
    FeatureRow row;
    row.id = i;
    row.label = derived[i].os_significant;
    for (const auto& name : features) {
      std::optional<double> v;
      if (name == "hr_pfs") {
        v = derived[i].hr_pfs;
      } else if (name == "delta_med") {
        v = derived[i].delta_med;
      } else if (name == "pct_delta_med") {
        v = derived[i].pct_delta_med;
      } else if (name == "sample_size") {
        v = static_cast<double>(records[i].sample_size);
      } else if (name == "deaths") {
        if (records[i].deaths) v = static_cast<double>(*records[i].deaths);
      } else if (name == "hr_os") {
        v = records[i].hr_os;
      } else {
        throw ValidationError("unknown tree feature '" + name + "'");
      }
      row.values.push_back(v);
    }
    m.rows.push_back(std::move(row));
  }
  return m;
}

struct AnalysisOptions {
  double alpha = 0.05;
  CartConfig cart;
  // bagging.base is replaced by `cart` so the forest grows the same trees.
  BaggingConfig bagging;
  std::vector<Measure> measures{kAllMeasures.begin(), kAllMeasures.end()};
  std::vector<std::string> tree_features = default_tree_features();
  bool exclude_ttp = false;
  bool haldane = false;
  unsigned threads = 1;
};

struct Provenance {
  std::string input_digest;
  std::string tool_version;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  bool exclude_ttp = false;
  bool haldane = false;
};

struct CrossTableSection {
  std::size_t n_used = 0;
  ConfusionTable table;
  std::optional<double> odds_ratio;
  bool haldane_applied = false;
  std::optional<std::string> odds_ratio_note;
  std::optional<double> os_given_pfs_significant;  // tp / (tp + fp)
};

struct MeasureSection {
  Measure measure = Measure::pct_delta_med;
  MarkerOrientation orientation = MarkerOrientation::higher_predicts_positive;
  std::size_t n_used = 0;
  std::optional<RocCurve> curve;
  std::optional<YoudenPoint> youden;
  std::optional<std::string> note;  // why the curve is absent
};

struct TreeRun {
  MissingPolicy policy = MissingPolicy::majority_direction;
  std::size_t n_used = 0;
  CartConfig config;
  Tree tree;
};

struct ImportanceSection {
  std::size_t n_used = 0;
  MissingPolicy policy = MissingPolicy::majority_direction;
  BaggingConfig config;
  double oob_error = 0.0;
  std::size_t oob_rows_scored = 0;
  ImportanceReport report;
};

struct PathStep {
  std::string feature;
  double threshold = 0.0;
  bool at_or_above = false;  // took the >= branch
};

struct LeafSummary {
  std::vector<PathStep> path;
  std::size_t n_pos = 0;
  std::size_t n = 0;
};

struct SteSummary {
  struct RocThreshold {
    Measure measure;
    double threshold;
  };
  std::vector<RocThreshold> roc;
  MissingPolicy tree_policy = MissingPolicy::listwise;
  std::vector<PathStep> tree_thresholds;  // root toward the highest-positive-rate leaf
  std::vector<LeafSummary> leaves;        // pre-order
};

struct AnalysisReport {
  Provenance provenance;
  std::size_t n_records = 0;
  std::size_t n_ttp_excluded = 0;
  std::size_t n_os_significant = 0;
  SummaryStats summary;
  std::optional<CrossTableSection> cross_table;
  std::vector<MeasureSection> measures;
  std::vector<std::string> tree_features;
  std::vector<TreeRun> trees;
  ImportanceSection importance;
  SteSummary ste;
};

namespace detail {

inline std::string fnv1a64_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
  return out;
}

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

inline void collect_leaves(const Tree& tree, const std::vector<std::string>& names, std::size_t at,
                           std::vector<PathStep>& path, std::vector<LeafSummary>& out) {
  const TreeNode& n = tree.node(at);
  if (n.is_leaf()) {
    out.push_back({path, n.counts.pos, n.counts.total()});
    return;
  }
  const Split& s = *n.split;
  path.push_back({names[s.feature_index], s.threshold, false});
  collect_leaves(tree, names, n.left, path, out);
  path.back().at_or_above = true;
  collect_leaves(tree, names, n.right, path, out);
  path.pop_back();
}

}  // namespace detail

inline std::vector<LeafSummary> summarize_leaves(const Tree& tree, const std::vector<std::string>& feature_names) {
  std::vector<LeafSummary> leaves;
  std::vector<PathStep> path;
  detail::collect_leaves(tree, feature_names, 0, path, leaves);
  return leaves;
}

/// Path to the leaf with the highest positive rate (ties: larger leaf, then
/// earlier in pre-order).
inline std::vector<PathStep> threshold_path(const std::vector<LeafSummary>& leaves) {
  const LeafSummary* best = nullptr;
  for (const auto& l : leaves) {
    if (!best) {
      best = &l;
      continue;
    }
    // Compare l.n_pos / l.n with best->n_pos / best->n exactly.
    const auto lhs = l.n_pos * best->n;
    const auto rhs = best->n_pos * l.n;
    if (lhs > rhs || (lhs == rhs && l.n > best->n)) best = &l;
  }
  return best ? best->path : std::vector<PathStep>{};
}

inline AnalysisReport run_analysis(const std::vector<ComparisonRecord>& all_records, const AnalysisOptions& opt) {
  detail::stage("options", [&] {
    check_alpha(opt.alpha);
    opt.cart.validate();
    opt.bagging.validate();
    if (opt.measures.empty()) throw ValidationError("at least one measure must be selected");
    if (opt.tree_features.empty()) throw ValidationError("at least one tree feature must be selected");
    return 0;
  });

  AnalysisReport rep;
  const auto records = opt.exclude_ttp ? without_ttp(all_records) : all_records;
  rep.n_ttp_excluded = all_records.size() - records.size();
  rep.n_records = records.size();
  if (records.size() < 2) {
    throw StageError("input", EmptyInputError("analysis needs at least 2 records, got " + std::to_string(records.size())));
  }

  rep.provenance = {detail::fnv1a64_hex(to_csv(records)), std::string(kToolVersion), opt.bagging.seed, opt.alpha,
                    opt.exclude_ttp, opt.haldane};

  const auto derived = detail::stage("labels", [&] { return derive_all(records, opt.alpha); });
  std::vector<bool> os_sig;
  for (const auto& d : derived) os_sig.push_back(d.os_significant);
  rep.n_os_significant = static_cast<std::size_t>(std::count(os_sig.begin(), os_sig.end(), true));
  if (rep.n_os_significant == 0 || rep.n_os_significant == records.size()) {
    throw StageError("labels", DegenerateError("all " + std::to_string(records.size()) + " comparisons have OS significance = " +
                                                   (rep.n_os_significant ? "true" : "false") +
                                                   "; diagnostic accuracy needs both outcomes"));
  }

  rep.summary = detail::stage("summarize", [&] { return summarize(records); });

  detail::stage("cross_table", [&] {
    std::vector<bool> predicted;
    std::vector<bool> actual;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (auto p = pfs_significant(records[i], opt.alpha)) {
        predicted.push_back(*p);
        actual.push_back(os_sig[i]);
      }
    }
    if (predicted.empty()) return 0;
    CrossTableSection ct;
    ct.n_used = predicted.size();
    ct.table = cross_table(predicted, actual);
    const auto& t = ct.table;
    ct.haldane_applied = opt.haldane && (t.tp == 0 || t.fp == 0 || t.fn == 0 || t.tn == 0);
    try {
      ct.odds_ratio = odds_ratio(t, opt.haldane);
    } catch (const DegenerateError& e) {
      ct.odds_ratio_note = e.what();
    }
    if (t.predicted_positive() > 0) {
      ct.os_given_pfs_significant = static_cast<double>(t.tp) / static_cast<double>(t.predicted_positive());
    }
    rep.cross_table = ct;
    return 0;
  });

  detail::stage("roc", [&] {
    for (auto m : opt.measures) {
      MeasureSection sec;
      sec.measure = m;
      sec.orientation = default_orientation(m);
      std::vector<std::optional<double>> marker;
      for (const auto& d : derived) marker.push_back(measure_value(d, m));
      sec.n_used = static_cast<std::size_t>(std::count_if(marker.begin(), marker.end(), [](const auto& v) { return v.has_value(); }));
      try {
        sec.curve = roc_curve(marker, os_sig, sec.orientation);
        sec.youden = youden(*sec.curve);
      } catch (const DegenerateError& e) {
        sec.note = e.what();
      }
      rep.measures.push_back(std::move(sec));
    }
    return 0;
  });

  rep.tree_features = opt.tree_features;
  const FeatureMatrix matrix =
      detail::stage("features", [&] { return build_feature_matrix(records, derived, opt.tree_features); });

  detail::stage("tree", [&] {
    std::vector<MissingPolicy> policies{opt.cart.missing_policy};
    if (matrix.has_missing()) policies = {MissingPolicy::majority_direction, MissingPolicy::listwise};
    for (auto p : policies) {
      TreeRun run;
      run.policy = p;
      run.config = opt.cart;
      run.config.missing_policy = p;
      run.n_used = training_rows(matrix, p).size();
      run.tree = fit_tree(matrix, run.config);
      rep.trees.push_back(std::move(run));
    }
    return 0;
  });

  detail::stage("importance", [&] {
    ImportanceSection sec;
    sec.policy = opt.cart.missing_policy;
    sec.config = opt.bagging;
    sec.config.base = opt.cart;
    sec.n_used = training_rows(matrix, sec.policy).size();
    const Forest forest = fit_bagging(matrix, sec.config, opt.threads);
    const auto oob = oob_error_detail(forest, matrix);
    sec.oob_error = oob.error;
    sec.oob_rows_scored = oob.rows_scored;
    sec.report = importance(forest, matrix, sec.config.importance_method);
    rep.importance = std::move(sec);
    return 0;
  });

  detail::stage("ste", [&] {
    for (const auto& m : rep.measures) {
      if (m.youden) rep.ste.roc.push_back({m.measure, m.youden->threshold});
    }
    const TreeRun* run = &rep.trees.front();
    for (const auto& r : rep.trees) {
      if (rep.trees.size() > 1 && r.policy == MissingPolicy::listwise) run = &r;
    }
    rep.ste.tree_policy = run->policy;
    rep.ste.leaves = summarize_leaves(run->tree, opt.tree_features);
    rep.ste.tree_thresholds = threshold_path(rep.ste.leaves);
    return 0;
  });
  return rep;
}

}  // namespace surrogacy
