#pragma once

// Plain-text artifacts: ROC CSV and SVG, tree DOT, importance CSV and the
// human-readable descriptive table.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "surrogacy/cart.hpp"
#include "surrogacy/dataset.hpp"
#include "surrogacy/ensemble.hpp"
#include "surrogacy/roc.hpp"

namespace surrogacy {

inline std::string fixed(double v, int decimals) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

// Shortest text that reads back to the same double.
inline std::string round_trip(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// threshold,fpr,tpr with the two sentinel rows written as -inf/inf.
inline std::string roc_csv(const RocCurve& c) {
  std::string out = "threshold,fpr,tpr\n";
  for (const auto& p : c.points) out += round_trip(p.threshold) + "," + round_trip(p.fpr) + "," + round_trip(p.tpr) + "\n";
  return out;
}

/// 640x640 plot, axes at 10% margins, chance diagonal, empirical polyline
/// and the AUC annotation.
inline std::string roc_svg(const RocCurve& c, const std::string& title) {
  constexpr double kSize = 640.0;
  constexpr double kMargin = 64.0;
  constexpr double kSpan = kSize - 2 * kMargin;
  auto x = [&](double fpr) { return kMargin + fpr * kSpan; };
  auto y = [&](double tpr) { return kSize - kMargin - tpr * kSpan; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 640 640\" width=\"640\" height=\"640\">\n";
  s << "  <rect x=\"0\" y=\"0\" width=\"640\" height=\"640\" fill=\"white\"/>\n";
  s << "  <line class=\"axis\" x1=\"" << x(0) << "\" y1=\"" << y(0) << "\" x2=\"" << x(1) << "\" y2=\"" << y(0)
    << "\" stroke=\"black\"/>\n";
  s << "  <line class=\"axis\" x1=\"" << x(0) << "\" y1=\"" << y(0) << "\" x2=\"" << x(0) << "\" y2=\"" << y(1)
    << "\" stroke=\"black\"/>\n";
  s << "  <line class=\"diagonal\" x1=\"" << x(0) << "\" y1=\"" << y(0) << "\" x2=\"" << x(1) << "\" y2=\"" << y(1)
    << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double t = i / 4.0;
    s << "  <text x=\"" << x(t) << "\" y=\"" << y(0) + 20 << "\" font-size=\"12\" text-anchor=\"middle\">"
      << fixed(t, 2) << "</text>\n";
    s << "  <text x=\"" << x(0) - 8 << "\" y=\"" << y(t) + 4 << "\" font-size=\"12\" text-anchor=\"end\">"
      << fixed(t, 2) << "</text>\n";
  }
  s << "  <text x=\"320\" y=\"" << kSize - 20 << "\" font-size=\"14\" text-anchor=\"middle\">False positive rate</text>\n";
  s << "  <text x=\"20\" y=\"320\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 20 320)\">"
       "True positive rate</text>\n";
  s << "  <text x=\"320\" y=\"36\" font-size=\"16\" text-anchor=\"middle\">" << title << "</text>\n";
  s << "  <polyline class=\"roc\" fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    s << (i ? " " : "") << fixed(x(c.points[i].fpr), 2) << "," << fixed(y(c.points[i].tpr), 2);
  }
  s << "\"/>\n";
  s << "  <text class=\"auc\" x=\"" << x(0.6) << "\" y=\"" << y(0.1) << "\" font-size=\"16\">AUC = " << fixed(c.auc, 2)
    << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

namespace detail {

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

inline std::string threshold_label(const std::string& feature, double threshold) {
  std::string t = fixed(threshold, 2);
  if (feature == "pct_delta_med") t += "%";
  return t;
}

}  // namespace detail

/// Graphviz digraph: internal nodes show the split variable, edges carry
/// "<t" / "≥t" rules, leaves show "n_pos/n" and the class called.
inline std::string tree_dot(const Tree& tree, const std::vector<std::string>& feature_names) {
  std::ostringstream s;
  s << "digraph tree {\n";
  s << "  node [fontname=\"Helvetica\"];\n";
  for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
    const TreeNode& n = tree.node(i);
    const std::string counts = std::to_string(n.counts.pos) + "/" + std::to_string(n.counts.total());
    if (n.is_leaf()) {
      s << "  n" << i << " [shape=box, label=\"" << (n.predicted ? "significant" : "not significant") << "\\n"
        << counts << "\"];\n";
    } else {
      const auto& name = feature_names.at(n.split->feature_index);
      s << "  n" << i << " [shape=ellipse, label=\"" << detail::dot_escape(name) << "\\n" << counts << "\"];\n";
    }
  }
  for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
    const TreeNode& n = tree.node(i);
    if (n.is_leaf()) continue;
    const auto t = detail::threshold_label(feature_names.at(n.split->feature_index), n.split->threshold);
    const char* miss_left = n.split->missing_goes_right ? "" : " (missing)";
    const char* miss_right = n.split->missing_goes_right ? " (missing)" : "";
    s << "  n" << i << " -> n" << n.left << " [label=\"<" << t << miss_left << "\"];\n";
    s << "  n" << i << " -> n" << n.right << " [label=\"≥" << t << miss_right << "\"];\n";
  }
  s << "}\n";
  return s.str();
}

inline std::string importance_csv(const ImportanceReport& r) {
  std::string out = "feature,score,rank\n";
  for (const auto& f : r.features) out += f.name + "," + round_trip(f.score) + "," + std::to_string(f.rank) + "\n";
  return out;
}

/// Descriptive table: Median (Min, Max) per numeric variable and n (%) per
/// categorical level.
inline std::string summary_table(const SummaryStats& s) {
  std::ostringstream out;
  out << "Summary of " << s.n_records << " comparisons\n";
  char line[160];
  for (const auto& c : s.categorical) {
    out << c.variable << " -- n(%)\n";
    for (const auto& l : c.levels) {
      std::snprintf(line, sizeof line, "  %-28s %zu (%s%%)\n", l.level.c_str(), l.count, fixed(l.percent, 1).c_str());
      out << line;
    }
  }
  for (const auto& v : s.numeric) {
    out << v.variable << " (n=" << v.n << ")\n";
    std::snprintf(line, sizeof line, "  %-28s %s (%s, %s)\n", "Median (Min, Max)", fixed(v.median, 2).c_str(),
                  fixed(v.min, 2).c_str(), fixed(v.max, 2).c_str());
    out << line;
  }
  return out.str();
}

}  // namespace surrogacy
