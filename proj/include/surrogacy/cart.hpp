#pragma once

// Binary CART on continuous predictors: Gini impurity, exhaustive midpoint
// search, size/depth stopping rules, weakest-link cost-complexity pruning and
// a majority-direction rule for missing values.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "surrogacy/error.hpp"

namespace surrogacy {

enum class MissingPolicy { listwise, majority_direction };

inline std::string_view to_string(MissingPolicy p) {
  return p == MissingPolicy::listwise ? "listwise" : "majority_direction";
}

struct CartConfig {
  std::size_t min_split = 10;
  std::size_t min_leaf = 5;
  std::size_t max_depth = 5;
  double cp = 0.01;
  MissingPolicy missing_policy = MissingPolicy::majority_direction;

  void validate() const {
    if (min_split < 2) throw ValidationError("min_split must be at least 2");
    if (min_leaf < 1) throw ValidationError("min_leaf must be at least 1");
    if (max_depth < 1) throw ValidationError("max_depth must be at least 1");
    if (!(cp >= 0.0)) throw ValidationError("cp must be non-negative");
  }

  friend bool operator==(const CartConfig&, const CartConfig&) = default;
};

struct FeatureRow {
  std::vector<std::optional<double>> values;
  bool label = false;
  std::size_t id = 0;  // index of the source record

  friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

struct FeatureMatrix {
  std::vector<std::string> feature_names;
  std::vector<FeatureRow> rows;

  std::size_t n_features() const { return feature_names.size(); }
  std::size_t n_rows() const { return rows.size(); }

  void validate() const {
    if (rows.empty()) throw EmptyInputError("feature matrix has no rows");
    if (feature_names.empty()) throw EmptyInputError("feature matrix has no features");
    for (const auto& r : rows) {
      if (r.values.size() != feature_names.size()) {
        throw DimensionError("feature row " + std::to_string(r.id) + " has " + std::to_string(r.values.size()) +
                             " values for " + std::to_string(feature_names.size()) + " features");
      }
    }
  }

  bool has_missing() const {
    return std::any_of(rows.begin(), rows.end(), [](const FeatureRow& r) {
      return std::any_of(r.values.begin(), r.values.end(), [](const auto& v) { return !v.has_value(); });
    });
  }

  FeatureMatrix complete_cases() const {
    FeatureMatrix out{feature_names, {}};
    for (const auto& r : rows) {
      if (std::all_of(r.values.begin(), r.values.end(), [](const auto& v) { return v.has_value(); })) {
        out.rows.push_back(r);
      }
    }
    return out;
  }

  std::optional<std::size_t> feature_index(std::string_view name) const {
    for (std::size_t i = 0; i < feature_names.size(); ++i) {
      if (feature_names[i] == name) return i;
    }
    return std::nullopt;
  }
};

struct ClassCounts {
  std::size_t neg = 0;
  std::size_t pos = 0;

  std::size_t total() const { return neg + pos; }
  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

inline double gini(ClassCounts c) {
  if (c.total() == 0) throw DegenerateError("Gini impurity of an empty node is undefined");
  const double n = static_cast<double>(c.total());
  const double pn = static_cast<double>(c.neg) / n;
  const double pp = static_cast<double>(c.pos) / n;
  return 1.0 - pn * pn - pp * pp;
}

/// Rule: value >= threshold goes right.
struct Split {
  std::size_t feature_index = 0;
  double threshold = 0.0;
  double gain = 0.0;
  bool missing_goes_right = false;

  friend bool operator==(const Split&, const Split&) = default;
};

struct TreeNode {
  ClassCounts counts;
  bool predicted = false;  // majority; a tie predicts negative
  std::optional<Split> split;
  std::size_t left = 0;   // child indices into Tree::nodes, valid when split is set
  std::size_t right = 0;
  std::size_t depth = 0;

  bool is_leaf() const { return !split.has_value(); }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Prediction {
  bool predicted = false;
  double prob_positive = 0.0;
};

/// Fitted tree stored as a flat pre-order node array; nodes[0] is the root.
class Tree {
 public:
  Tree() = default;
  Tree(std::vector<TreeNode> nodes, std::size_t n_features) : nodes_(std::move(nodes)), n_features_(n_features) {}

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& root() const { return nodes_.front(); }
  const TreeNode& node(std::size_t i) const { return nodes_[i]; }
  std::size_t n_features() const { return n_features_; }

  std::size_t n_leaves() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
  }

  /// Index of the leaf reached by `row`.
  std::size_t leaf_index(const std::vector<std::optional<double>>& row) const {
    if (row.size() != n_features_) {
      throw DimensionError("predict: row has " + std::to_string(row.size()) + " values, tree expects " +
                           std::to_string(n_features_));
    }
    std::size_t at = 0;
    while (!nodes_[at].is_leaf()) {
      const Split& s = *nodes_[at].split;
      const auto& v = row[s.feature_index];
      const bool right = v ? *v >= s.threshold : s.missing_goes_right;
      at = right ? nodes_[at].right : nodes_[at].left;
    }
    return at;
  }

  Prediction predict(const std::vector<std::optional<double>>& row) const {
    const TreeNode& leaf = nodes_[leaf_index(row)];
    return {leaf.predicted, static_cast<double>(leaf.counts.pos) / static_cast<double>(leaf.counts.total())};
  }

  friend bool operator==(const Tree&, const Tree&) = default;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t n_features_ = 0;
};

inline Prediction predict(const Tree& tree, const std::vector<std::optional<double>>& row) {
  return tree.predict(row);
}

namespace detail {

inline constexpr double kGainTolerance = 1e-12;

inline ClassCounts count_rows(const FeatureMatrix& m, const std::vector<std::size_t>& rows) {
  ClassCounts c;
  for (auto i : rows) (m.rows[i].label ? c.pos : c.neg) += 1;
  return c;
}

}  // namespace detail

/// Best admissible split of the rows `rows` (indices into `m`) on one feature.
/// Candidates are midpoints between adjacent distinct present values. Impurity
/// and child weights are computed over rows where the feature is present and
/// both children must hold at least min_leaf of those rows. Returns nullopt
/// when the node is below min_split or no candidate has positive gain.
inline std::optional<Split> best_split(const FeatureMatrix& m, const std::vector<std::size_t>& rows,
                                       std::size_t feature, const CartConfig& config) {
  if (rows.size() < config.min_split) return std::nullopt;
  struct Obs {
    double value;
    bool positive;
  };
  std::vector<Obs> obs;
  obs.reserve(rows.size());
  for (auto i : rows) {
    const auto& v = m.rows[i].values.at(feature);
    if (v) obs.push_back({*v, m.rows[i].label});
  }
  if (obs.size() < 2) return std::nullopt;
  std::sort(obs.begin(), obs.end(), [](const Obs& a, const Obs& b) { return a.value < b.value; });

  ClassCounts all;
  for (const auto& o : obs) (o.positive ? all.pos : all.neg) += 1;
  const double parent = gini(all);
  const double n = static_cast<double>(obs.size());

  std::optional<Split> best;
  ClassCounts left;
  for (std::size_t i = 1; i < obs.size(); ++i) {
    (obs[i - 1].positive ? left.pos : left.neg) += 1;
    if (obs[i].value == obs[i - 1].value) continue;
    const ClassCounts right{all.neg - left.neg, all.pos - left.pos};
    if (left.total() < config.min_leaf || right.total() < config.min_leaf) continue;
    const double gain = parent - static_cast<double>(left.total()) / n * gini(left) -
                        static_cast<double>(right.total()) / n * gini(right);
    if (gain <= detail::kGainTolerance) continue;
    if (best && !(gain > best->gain + detail::kGainTolerance)) continue;
    const double lo = obs[i - 1].value;
    const double hi = obs[i].value;
    double mid = lo + (hi - lo) / 2.0;
    if (!(mid > lo)) mid = hi;
    best = Split{feature, mid, gain, right.total() > left.total()};
  }
  return best;
}

namespace detail {

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& m, const CartConfig& c) : m_(m), config_(c) {}

  std::size_t grow(const std::vector<std::size_t>& rows, std::size_t depth) {
    const std::size_t at = nodes_.size();
    TreeNode node;
    node.counts = count_rows(m_, rows);
    node.predicted = node.counts.pos > node.counts.neg;
    node.depth = depth;
    nodes_.push_back(node);

    const bool pure = node.counts.neg == 0 || node.counts.pos == 0;
    if (pure || rows.size() < config_.min_split || depth >= config_.max_depth) return at;

    std::optional<Split> best;
    for (std::size_t f = 0; f < m_.n_features(); ++f) {
      auto s = best_split(m_, rows, f, config_);
      if (s && (!best || s->gain > best->gain + kGainTolerance)) best = s;
    }
    if (!best) return at;

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (auto i : rows) {
      const auto& v = m_.rows[i].values[best->feature_index];
      if (!v && config_.missing_policy == MissingPolicy::listwise) continue;
      const bool right = v ? *v >= best->threshold : best->missing_goes_right;
      (right ? right_rows : left_rows).push_back(i);
    }
    const std::size_t l = grow(left_rows, depth + 1);
    const std::size_t r = grow(right_rows, depth + 1);
    nodes_[at].split = best;
    nodes_[at].left = l;
    nodes_[at].right = r;
    return at;
  }

  std::vector<TreeNode> take() { return std::move(nodes_); }

 private:
  const FeatureMatrix& m_;
  const CartConfig& config_;
  std::vector<TreeNode> nodes_;
};

inline double node_risk(const TreeNode& n) { return static_cast<double>(n.counts.total()) * gini(n.counts); }

struct SubtreeRisk {
  double leaf_risk = 0.0;
  std::size_t leaves = 0;
};

inline SubtreeRisk subtree_risk(const std::vector<TreeNode>& nodes, std::size_t at) {
  const TreeNode& n = nodes[at];
  if (n.is_leaf()) return {node_risk(n), 1};
  const auto l = subtree_risk(nodes, n.left);
  const auto r = subtree_risk(nodes, n.right);
  return {l.leaf_risk + r.leaf_risk, l.leaves + r.leaves};
}

// Weakest-link pruning. A subtree's complexity is its impurity decrease per
// extra leaf relative to root impurity; the lowest is collapsed while below cp.
inline void prune(std::vector<TreeNode>& nodes, double cp) {
  const double root_risk = node_risk(nodes.front());
  if (root_risk <= 0.0) return;
  for (;;) {
    std::optional<std::size_t> weakest;
    double weakest_alpha = 0.0;
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
      const std::size_t at = stack.back();
      stack.pop_back();
      const TreeNode& n = nodes[at];
      if (n.is_leaf()) continue;
      const auto sub = subtree_risk(nodes, at);
      const double alpha =
          (node_risk(n) - sub.leaf_risk) / (static_cast<double>(sub.leaves - 1) * root_risk);
      if (!weakest || alpha < weakest_alpha - kGainTolerance) {
        weakest = at;
        weakest_alpha = alpha;
      }
      stack.push_back(n.right);
      stack.push_back(n.left);
    }
    if (!weakest || weakest_alpha >= cp) return;
    nodes[*weakest].split.reset();
  }
}

// Drops nodes no longer reachable after pruning and renumbers in pre-order.
inline std::vector<TreeNode> compact(const std::vector<TreeNode>& nodes) {
  std::vector<TreeNode> out;
  std::function<std::size_t(std::size_t)> copy = [&](std::size_t at) {
    const std::size_t idx = out.size();
    out.push_back(nodes[at]);
    if (!nodes[at].is_leaf()) {
      const std::size_t l = copy(nodes[at].left);
      const std::size_t r = copy(nodes[at].right);
      out[idx].left = l;
      out[idx].right = r;
    } else {
      out[idx].left = out[idx].right = 0;
    }
    return idx;
  };
  copy(0);
  return out;
}

}  // namespace detail

/// Rows the tree is trained on: all rows, or complete cases under listwise.
inline std::vector<std::size_t> training_rows(const FeatureMatrix& m, MissingPolicy policy) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    const auto& v = m.rows[i].values;
    if (policy == MissingPolicy::listwise &&
        std::any_of(v.begin(), v.end(), [](const auto& x) { return !x.has_value(); })) {
      continue;
    }
    rows.push_back(i);
  }
  return rows;
}

/// Fits on the given row multiset (duplicates allowed, as in a bootstrap bag).
inline Tree fit_tree_rows(const FeatureMatrix& m, const std::vector<std::size_t>& rows, const CartConfig& config) {
  config.validate();
  m.validate();
  if (rows.empty()) throw EmptyInputError("no rows available to fit a tree");
  detail::TreeBuilder builder(m, config);
  builder.grow(rows, 0);
  auto nodes = builder.take();
  detail::prune(nodes, config.cp);
  return Tree(detail::compact(nodes), m.n_features());
}

/// Grows the tree on `m`, then prunes it with config.cp. Under the listwise
/// policy only complete cases are used.
inline Tree fit_tree(const FeatureMatrix& m, const CartConfig& config = {}) {
  m.validate();
  const auto rows = training_rows(m, config.missing_policy);
  if (rows.empty()) throw EmptyInputError("no complete cases remain after listwise deletion");
  return fit_tree_rows(m, rows, config);
}

}  // namespace surrogacy
