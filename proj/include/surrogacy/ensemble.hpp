#pragma once

// Bagged CART ensemble: bootstrap fitting, out-of-bag error and variable
// importance.
//
// All randomness comes from counter-based streams keyed by (seed, tree,
// purpose), so the forest does not depend on the order in which trees are fit
// and serial and threaded runs agree bit for bit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "surrogacy/cart.hpp"
#include "surrogacy/error.hpp"

namespace surrogacy {

enum class ImportanceMethod { permutation_oob, mean_decrease_gini };

inline std::string_view to_string(ImportanceMethod m) {
  return m == ImportanceMethod::permutation_oob ? "permutation_oob" : "mean_decrease_gini";
}

struct BaggingConfig {
  std::size_t n_trees = 500;
  std::uint64_t seed = 0;
  double sample_fraction = 1.0;
  ImportanceMethod importance_method = ImportanceMethod::permutation_oob;
  CartConfig base;

  void validate() const {
    if (n_trees < 1) throw ValidationError("n_trees must be at least 1");
    if (!(sample_fraction > 0.0 && sample_fraction <= 1.0)) throw ValidationError("sample_fraction must lie in (0, 1]");
    base.validate();
  }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Deterministic random stream for one (seed, tree, purpose) triple. Bounded
/// draws use rejection sampling so results do not depend on the standard
/// library's distribution implementations.
class StreamRng {
 public:
  static constexpr std::uint64_t kBootstrap = 0;
  static constexpr std::uint64_t kPermutationBase = 1;  // + feature index

  StreamRng(std::uint64_t seed, std::uint64_t tree, std::uint64_t purpose)
      : engine_(detail::splitmix64(detail::splitmix64(detail::splitmix64(seed) ^ tree) ^ purpose)) {}

  // Uniform on [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = 0;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

struct BaggedTree {
  Tree tree;
  std::vector<std::size_t> in_bag;  // drawn row indices, sorted, with repeats
  std::vector<std::size_t> oob;     // eligible rows never drawn, sorted

  friend bool operator==(const BaggedTree&, const BaggedTree&) = default;
};

struct Forest {
  std::vector<BaggedTree> trees;
  std::size_t n_features = 0;
  std::size_t n_eligible = 0;
  BaggingConfig config;

  std::size_t n_trees() const { return trees.size(); }
};

inline std::size_t bag_size(std::size_t n, double sample_fraction) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(sample_fraction * static_cast<double>(n) - 1e-9)));
}

inline BaggedTree fit_bagged_tree(const FeatureMatrix& m, const std::vector<std::size_t>& eligible,
                                  const BaggingConfig& config, std::size_t tree_index) {
  StreamRng rng(config.seed, tree_index, StreamRng::kBootstrap);
  const std::size_t k = bag_size(eligible.size(), config.sample_fraction);
  BaggedTree bt;
  bt.in_bag.reserve(k);
  for (std::size_t i = 0; i < k; ++i) bt.in_bag.push_back(eligible[rng.below(eligible.size())]);
  std::sort(bt.in_bag.begin(), bt.in_bag.end());
  std::set_difference(eligible.begin(), eligible.end(), bt.in_bag.begin(), bt.in_bag.end(),
                      std::back_inserter(bt.oob));
  bt.tree = fit_tree_rows(m, bt.in_bag, config.base);
  return bt;
}

/// Fits config.n_trees bootstrap trees. `threads` > 1 fits trees concurrently;
/// the result is identical to the serial fit.
inline Forest fit_bagging(const FeatureMatrix& m, const BaggingConfig& config, unsigned threads = 1) {
  config.validate();
  m.validate();
  const auto eligible = training_rows(m, config.base.missing_policy);
  if (eligible.size() < 2) throw DegenerateError("bagging needs at least 2 usable rows");
  const auto positives =
      std::count_if(eligible.begin(), eligible.end(), [&](std::size_t i) { return m.rows[i].label; });
  if (positives == 0 || static_cast<std::size_t>(positives) == eligible.size()) {
    throw DegenerateError("bagging needs both outcome classes; all " + std::to_string(eligible.size()) +
                          " usable rows share one label");
  }

  Forest forest;
  forest.n_features = m.n_features();
  forest.n_eligible = eligible.size();
  forest.config = config;
  forest.trees.resize(config.n_trees);

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(config.n_trees)));
  if (threads == 1) {
    for (std::size_t t = 0; t < config.n_trees; ++t) forest.trees[t] = fit_bagged_tree(m, eligible, config, t);
    return forest;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t t = w; t < config.n_trees; t += threads) {
            forest.trees[t] = fit_bagged_tree(m, eligible, config, t);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return forest;
}

namespace detail {

inline void check_forest_matrix(const Forest& f, const FeatureMatrix& m) {
  if (m.n_features() != f.n_features) {
    throw DimensionError("matrix has " + std::to_string(m.n_features()) + " features, forest was fit on " +
                         std::to_string(f.n_features));
  }
  for (const auto& bt : f.trees) {
    if (!bt.oob.empty() && bt.oob.back() >= m.n_rows()) throw DimensionError("forest refers to rows outside the matrix");
  }
}

}  // namespace detail

struct OobResult {
  double error = 0.0;
  std::size_t rows_scored = 0;
};

/// Majority vote over the trees for which each row is out of bag (a tied vote
/// predicts negative). Rows with no out-of-bag vote are left out.
inline OobResult oob_error_detail(const Forest& f, const FeatureMatrix& m) {
  detail::check_forest_matrix(f, m);
  std::vector<std::size_t> votes(m.n_rows(), 0);
  std::vector<std::size_t> positive(m.n_rows(), 0);
  for (const auto& bt : f.trees) {
    for (auto i : bt.oob) {
      ++votes[i];
      if (bt.tree.predict(m.rows[i].values).predicted) ++positive[i];
    }
  }
  OobResult r;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    if (votes[i] == 0) continue;
    ++r.rows_scored;
    const bool pred = 2 * positive[i] > votes[i];
    if (pred != m.rows[i].label) ++wrong;
  }
  if (r.rows_scored == 0) throw DegenerateError("no row is out of bag for any tree; add more trees");
  r.error = static_cast<double>(wrong) / static_cast<double>(r.rows_scored);
  return r;
}

inline double oob_error(const Forest& f, const FeatureMatrix& m) { return oob_error_detail(f, m).error; }

struct FeatureImportance {
  std::string name;
  double score = 0.0;
  std::size_t rank = 0;

  friend bool operator==(const FeatureImportance&, const FeatureImportance&) = default;
};

struct ImportanceReport {
  std::vector<FeatureImportance> features;  // declaration order
  ImportanceMethod method = ImportanceMethod::permutation_oob;
  std::size_t n_trees = 0;
  std::uint64_t seed = 0;

  std::size_t rank_of(std::string_view name) const {
    for (const auto& f : features) {
      if (f.name == name) return f.rank;
    }
    throw DimensionError("unknown feature '" + std::string(name) + "'");
  }

  friend bool operator==(const ImportanceReport&, const ImportanceReport&) = default;
};

namespace detail {

inline std::vector<bool> features_used(const Tree& tree) {
  std::vector<bool> used(tree.n_features(), false);
  for (const auto& n : tree.nodes()) {
    if (n.split) used[n.split->feature_index] = true;
  }
  return used;
}

inline double misclassified(const Tree& tree, const FeatureMatrix& m, const std::vector<std::size_t>& rows,
                            std::size_t feature, const std::vector<std::optional<double>>* replacement) {
  std::size_t wrong = 0;
  std::vector<std::optional<double>> row;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& src = m.rows[rows[k]];
    bool pred = false;
    if (replacement) {
      row = src.values;
      row[feature] = (*replacement)[k];
      pred = tree.predict(row).predicted;
    } else {
      pred = tree.predict(src.values).predicted;
    }
    if (pred != src.label) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(rows.size());
}

inline void assign_ranks(std::vector<FeatureImportance>& features) {
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return features[a].score > features[b].score; });
  for (std::size_t r = 0; r < order.size(); ++r) features[order[r]].rank = r + 1;
}

}  // namespace detail

inline ImportanceReport importance(const Forest& f, const FeatureMatrix& m, ImportanceMethod method) {
  detail::check_forest_matrix(f, m);
  ImportanceReport report;
  report.method = method;
  report.n_trees = f.n_trees();
  report.seed = f.config.seed;
  std::vector<double> score(m.n_features(), 0.0);

  if (method == ImportanceMethod::mean_decrease_gini) {
    for (const auto& bt : f.trees) {
      for (const auto& n : bt.tree.nodes()) {
        if (n.split) score[n.split->feature_index] += n.split->gain;
      }
    }
    for (auto& s : score) s /= static_cast<double>(f.n_trees());
  } else {
    std::size_t scored_trees = 0;
    for (std::size_t t = 0; t < f.trees.size(); ++t) {
      const auto& bt = f.trees[t];
      if (bt.oob.empty()) continue;
      ++scored_trees;
      const auto used = detail::features_used(bt.tree);
      const double base = detail::misclassified(bt.tree, m, bt.oob, 0, nullptr);
      for (std::size_t j = 0; j < m.n_features(); ++j) {
        if (!used[j]) continue;
        std::vector<std::optional<double>> permuted;
        permuted.reserve(bt.oob.size());
        for (auto i : bt.oob) permuted.push_back(m.rows[i].values[j]);
        StreamRng rng(f.config.seed, t, StreamRng::kPermutationBase + j);
        rng.shuffle(permuted);
        score[j] += detail::misclassified(bt.tree, m, bt.oob, j, &permuted) - base;
      }
    }
    if (scored_trees == 0) throw DegenerateError("permutation importance needs at least one tree with out-of-bag rows");
    for (auto& s : score) s /= static_cast<double>(scored_trees);
  }

  for (std::size_t j = 0; j < m.n_features(); ++j) report.features.push_back({m.feature_names[j], score[j], 0});
  detail::assign_ranks(report.features);
  return report;
}

inline ImportanceReport importance(const Forest& f, const FeatureMatrix& m) {
  return importance(f, m, f.config.importance_method);
}

}  // namespace surrogacy
