#pragma once

// JSON views of the analysis types. Output is canonical: object keys are
// sorted, numbers are written in their shortest round-trip form and
// non-finite values become the strings "inf", "-inf" and "nan".

#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"
#include "surrogacy/report.hpp"

namespace surrogacy {

using json = nlohmann::json;

inline json canonical_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return 0.0;  // drop negative zero
  return v;
}

inline json optional_number(const std::optional<double>& v) { return v ? canonical_number(*v) : json(nullptr); }

inline json to_json(const SummaryStats& s) {
  json numeric = json::object();
  for (const auto& v : s.numeric) {
    numeric[v.variable] = {{"n", v.n},
                           {"median", canonical_number(v.median)},
                           {"min", canonical_number(v.min)},
                           {"max", canonical_number(v.max)}};
  }
  json categorical = json::object();
  for (const auto& c : s.categorical) {
    json levels = json::object();
    for (const auto& l : c.levels) levels[l.level] = {{"count", l.count}, {"percent", canonical_number(l.percent)}};
    categorical[c.variable] = levels;
  }
  return {{"n_records", s.n_records}, {"numeric", numeric}, {"categorical", categorical}};
}

inline json to_json(const ConfusionTable& t) {
  return {{"tp", t.tp}, {"fp", t.fp}, {"fn", t.fn}, {"tn", t.tn}};
}

inline json to_json(const RocCurve& c) {
  json points = json::array();
  for (const auto& p : c.points) {
    points.push_back({{"threshold", canonical_number(p.threshold)},
                      {"fpr", canonical_number(p.fpr)},
                      {"tpr", canonical_number(p.tpr)}});
  }
  return {{"auc", canonical_number(c.auc)},
          {"n_pos", c.n_pos},
          {"n_neg", c.n_neg},
          {"orientation", to_string_token(c.orientation)},
          {"points", points}};
}

inline json to_json(const YoudenPoint& y) {
  return {{"threshold", canonical_number(y.threshold)},
          {"j", canonical_number(y.j)},
          {"sensitivity", canonical_number(y.sensitivity)},
          {"specificity", canonical_number(y.specificity)}};
}

inline json to_json(const CartConfig& c) {
  return {{"min_split", c.min_split},
          {"min_leaf", c.min_leaf},
          {"max_depth", c.max_depth},
          {"cp", canonical_number(c.cp)},
          {"missing_policy", to_string(c.missing_policy)}};
}

namespace detail {

inline json tree_node_json(const Tree& tree, const std::vector<std::string>& names, std::size_t at) {
  const TreeNode& n = tree.node(at);
  json out = {{"n_neg", n.counts.neg},
              {"n_pos", n.counts.pos},
              {"predicted", n.predicted},
              {"prob_positive", canonical_number(static_cast<double>(n.counts.pos) / static_cast<double>(n.counts.total()))}};
  if (n.split) {
    const Split& s = *n.split;
    out["split"] = {{"feature", names.at(s.feature_index)},
                    {"feature_index", s.feature_index},
                    {"threshold", canonical_number(s.threshold)},
                    {"gain", canonical_number(s.gain)},
                    {"missing_goes_right", s.missing_goes_right}};
    out["left"] = tree_node_json(tree, names, n.left);
    out["right"] = tree_node_json(tree, names, n.right);
  }
  return out;
}

}  // namespace detail

/// Nested tree: each internal node carries `split`, `left` (< threshold) and `right` (>= threshold).
inline json tree_to_json(const Tree& tree, const std::vector<std::string>& feature_names) {
  return detail::tree_node_json(tree, feature_names, 0);
}

inline json to_json(const BaggingConfig& c) {
  return {{"n_trees", c.n_trees},
          {"seed", c.seed},
          {"sample_fraction", canonical_number(c.sample_fraction)},
          {"importance_method", to_string(c.importance_method)},
          {"base", to_json(c.base)}};
}

inline json to_json(const ImportanceReport& r) {
  json features = json::array();
  for (const auto& f : r.features) {
    features.push_back({{"name", f.name}, {"score", canonical_number(f.score)}, {"rank", f.rank}});
  }
  return {{"method", to_string(r.method)}, {"n_trees", r.n_trees}, {"seed", r.seed}, {"features", features}};
}

inline json to_json(const PathStep& s) {
  return {{"feature", s.feature}, {"threshold", canonical_number(s.threshold)}, {"rule", s.at_or_above ? ">=" : "<"}};
}

inline json to_json(const AnalysisReport& r) {
  json out;
  out["schema_version"] = 1;
  out["provenance"] = {{"input_digest", r.provenance.input_digest},
                       {"digest_algorithm", "fnv1a64 over canonical CSV"},
                       {"tool_version", r.provenance.tool_version},
                       {"seed", r.provenance.seed},
                       {"alpha", canonical_number(r.provenance.alpha)},
                       {"exclude_ttp", r.provenance.exclude_ttp},
                       {"haldane", r.provenance.haldane}};
  out["dataset"] = {{"n_records", r.n_records},
                    {"n_ttp_excluded", r.n_ttp_excluded},
                    {"n_os_significant", r.n_os_significant},
                    {"summary", to_json(r.summary)}};

  if (r.cross_table) {
    const auto& c = *r.cross_table;
    out["cross_table"] = {{"n_used", c.n_used},
                          {"table", to_json(c.table)},
                          {"odds_ratio", optional_number(c.odds_ratio)},
                          {"odds_ratio_note", c.odds_ratio_note ? json(*c.odds_ratio_note) : json(nullptr)},
                          {"haldane_applied", c.haldane_applied},
                          {"os_significant_given_pfs_significant", optional_number(c.os_given_pfs_significant)}};
  } else {
    out["cross_table"] = nullptr;
  }

  json measures = json::array();
  for (const auto& m : r.measures) {
    json j = {{"measure", to_string(m.measure)},
              {"orientation", to_string_token(m.orientation)},
              {"n_used", m.n_used},
              {"roc", m.curve ? to_json(*m.curve) : json(nullptr)},
              {"youden", m.youden ? to_json(*m.youden) : json(nullptr)},
              {"note", m.note ? json(*m.note) : json(nullptr)}};
    measures.push_back(std::move(j));
  }
  out["measures"] = measures;

  json trees = json::array();
  for (const auto& t : r.trees) {
    trees.push_back({{"missing_policy", to_string(t.policy)},
                     {"n_used", t.n_used},
                     {"config", to_json(t.config)},
                     {"features", r.tree_features},
                     {"tree", tree_to_json(t.tree, r.tree_features)}});
  }
  out["trees"] = trees;

  out["importance"] = {{"n_used", r.importance.n_used},
                       {"missing_policy", to_string(r.importance.policy)},
                       {"config", to_json(r.importance.config)},
                       {"oob_error", canonical_number(r.importance.oob_error)},
                       {"oob_rows_scored", r.importance.oob_rows_scored},
                       {"ranking", to_json(r.importance.report)}};

  json roc = json::array();
  for (const auto& t : r.ste.roc) roc.push_back({{"measure", to_string(t.measure)}, {"threshold", canonical_number(t.threshold)}});
  json path = json::array();
  for (const auto& s : r.ste.tree_thresholds) path.push_back(to_json(s));
  json leaves = json::array();
  for (const auto& l : r.ste.leaves) {
    json lp = json::array();
    for (const auto& s : l.path) lp.push_back(to_json(s));
    leaves.push_back({{"path", lp},
                      {"n_pos", l.n_pos},
                      {"n", l.n},
                      {"narrative", std::to_string(l.n_pos) + "/" + std::to_string(l.n)}});
  }
  out["ste"] = {{"roc", roc}, {"tree_policy", to_string(r.ste.tree_policy)}, {"tree_thresholds", path}, {"tree_leaves", leaves}};
  return out;
}

inline std::string dump_canonical(const json& j) { return j.dump(2) + "\n"; }

}  // namespace surrogacy
