#pragma once

// Shared helpers for the test suites: record builders, random data generators
// and brute-force oracles that are independent of the library code paths.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "surrogacy/cart.hpp"
#include "surrogacy/dataset.hpp"
#include "surrogacy/roc.hpp"

namespace surrogacy::testkit {

inline std::string fixture_path(const std::string& name) { return std::string(SURROGACY_TEST_DATA) + "/" + name; }

inline ComparisonRecord make_record(std::string id, double med_c, double med_t, double os_p) {
  ComparisonRecord r;
  r.study_id = std::move(id);
  r.pub_year = 2010;
  r.phase = Phase::iii;
  r.sample_size = 300;
  r.deaths = 150;
  r.med_pfs_control = med_c;
  r.med_pfs_treatment = med_t;
  r.hr_pfs = 0.8;
  r.os_p_value = os_p;
  return r;
}

// Values on a coarse grid so duplicates are common.
inline std::vector<double> grid_values(std::mt19937_64& rng, std::size_t n, int levels) {
  std::uniform_int_distribution<int> d(0, levels - 1);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng) * 0.5 - 2.0;
  return v;
}

struct Labelled {
  std::vector<double> marker;
  std::vector<bool> label;
};

// Random marker/label data with both classes present.
inline Labelled random_labelled(std::mt19937_64& rng, std::size_t n_min, std::size_t n_max, int levels) {
  std::uniform_int_distribution<std::size_t> size(n_min, n_max);
  const std::size_t n = size(rng);
  Labelled out;
  out.marker = grid_values(rng, n, levels);
  std::bernoulli_distribution coin(0.5);
  out.label.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.label[i] = coin(rng);
  out.label[0] = true;
  out.label[1] = false;
  std::shuffle(out.label.begin(), out.label.end(), rng);
  return out;
}

inline void split_by_label(const Labelled& d, std::vector<double>& pos, std::vector<double>& neg) {
  for (std::size_t i = 0; i < d.marker.size(); ++i) (d.label[i] ? pos : neg).push_back(d.marker[i]);
}

// Trapezoid rule over the curve's (fpr, tpr) coordinates.
inline double trapezoid(const RocCurve& c) {
  double area = 0.0;
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    area += (c.points[i].fpr - c.points[i - 1].fpr) * (c.points[i].tpr + c.points[i - 1].tpr) / 2.0;
  }
  return area;
}

// Exhaustive threshold scan for the "marker >= t" rule on the original scale
// (or "marker <= t" for lower orientation). Returns the best J under the
// documented tie rules: higher specificity, then smaller threshold.
struct ScanResult {
  double threshold;
  double j;
  double sensitivity;
  double specificity;
};

inline ScanResult youden_scan(const Labelled& d, MarkerOrientation o) {
  std::vector<double> values = d.marker;
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::size_t npos = static_cast<std::size_t>(std::count(d.label.begin(), d.label.end(), true));
  std::size_t nneg = d.label.size() - npos;
  std::optional<ScanResult> best;
  for (double t : values) {
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < d.marker.size(); ++i) {
      const bool call = o == MarkerOrientation::higher_predicts_positive ? d.marker[i] >= t : d.marker[i] <= t;
      if (call && d.label[i]) ++tp;
      if (call && !d.label[i]) ++fp;
    }
    const double sens = static_cast<double>(tp) / static_cast<double>(npos);
    const double spec = 1.0 - static_cast<double>(fp) / static_cast<double>(nneg);
    const double j = sens - (1.0 - spec);
    const bool better = !best || j > best->j + 1e-12 ||
                        (std::abs(j - best->j) <= 1e-12 &&
                         (spec > best->specificity + 1e-12 ||
                          (std::abs(spec - best->specificity) <= 1e-12 && t < best->threshold)));
    if (better) best = ScanResult{t, j, sens, spec};
  }
  return *best;
}

// Brute-force root split: every feature, every midpoint between adjacent
// distinct values, children >= min_leaf; ties to lower feature then smaller
// threshold. Complete data only.
struct BruteSplit {
  std::size_t feature;
  double threshold;
  double gain;
};

inline double gini_of(std::size_t neg, std::size_t pos) {
  const double n = static_cast<double>(neg + pos);
  return 1.0 - (neg / n) * (neg / n) - (pos / n) * (pos / n);
}

inline std::optional<BruteSplit> brute_root_split(const FeatureMatrix& m, std::size_t min_leaf) {
  std::size_t pos = 0;
  for (const auto& r : m.rows) pos += r.label;
  const std::size_t n = m.rows.size();
  const double parent = gini_of(n - pos, pos);
  std::optional<BruteSplit> best;
  for (std::size_t f = 0; f < m.n_features(); ++f) {
    std::vector<double> vals;
    for (const auto& r : m.rows) vals.push_back(*r.values[f]);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t k = 1; k < vals.size(); ++k) {
      const double mid = (vals[k - 1] + vals[k]) / 2.0;
      std::size_t ln = 0, lp = 0, rn = 0, rp = 0;
      for (const auto& r : m.rows) {
        if (*r.values[f] < mid) {
          (r.label ? lp : ln) += 1;
        } else {
          (r.label ? rp : rn) += 1;
        }
      }
      if (ln + lp < min_leaf || rn + rp < min_leaf) continue;
      const double gain = parent - static_cast<double>(ln + lp) / n * gini_of(ln, lp) -
                          static_cast<double>(rn + rp) / n * gini_of(rn, rp);
      if (gain <= 1e-12) continue;
      if (!best || gain > best->gain + 1e-12) best = BruteSplit{f, mid, gain};
    }
  }
  return best;
}

inline FeatureMatrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t features, int levels) {
  FeatureMatrix m;
  for (std::size_t f = 0; f < features; ++f) m.feature_names.push_back("x" + std::to_string(f));
  std::uniform_int_distribution<int> d(0, levels - 1);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < n; ++i) {
    FeatureRow row;
    row.id = i;
    for (std::size_t f = 0; f < features; ++f) row.values.push_back(static_cast<double>(d(rng)));
    row.label = coin(rng);
    m.rows.push_back(std::move(row));
  }
  return m;
}

// Label equals (A >= 0); B is independent noise.
inline FeatureMatrix informative_vs_noise(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  FeatureMatrix m;
  m.feature_names = {"A", "B"};
  for (std::size_t i = 0; i < n; ++i) {
    const double a = z(rng);
    const double b = z(rng);
    m.rows.push_back({{a, b}, a >= 0.0, i});
  }
  return m;
}

}  // namespace surrogacy::testkit
