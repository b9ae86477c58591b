// surrogacy: command-line front end for the trial-level surrogacy analysis.
//
//   surrogacy summarize  data.csv [--format json]
//   surrogacy roc        data.csv --measure pct_delta_med [--svg roc.svg] [--out DIR]
//   surrogacy tree       data.csv [--min-split 10 --min-leaf 5 --max-depth 5 --cp 0.01] [--out DIR]
//   surrogacy importance data.csv --seed N [--n-trees 500 --importance permutation] [--out DIR]
//   surrogacy report     data.csv --seed N [--out DIR]
//
// Exit codes: 0 success, 1 usage, 2 schema, 3 validation, 4 degenerate input,
// 5 internal error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "surrogacy/surrogacy.hpp"

namespace fs = std::filesystem;
using namespace surrogacy;

namespace {

struct Options {
  std::string input;
  std::string out_dir = ".";
  std::string format = "text";
  double alpha = 0.05;
  bool exclude_ttp = false;
  bool haldane = false;

  std::string measure = "pct_delta_med";
  std::string orientation;  // empty: measure default
  std::string svg;

  std::size_t min_split = 10;
  std::size_t min_leaf = 5;
  std::size_t max_depth = 5;
  double cp = 0.01;
  std::string missing = "majority";
  std::vector<std::string> features;

  std::size_t n_trees = 500;
  std::optional<std::uint64_t> seed;
  double sample_fraction = 1.0;
  std::string importance = "permutation";
  unsigned threads = 1;
};

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::internal, "cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.flush()) throw Error(ErrorKind::internal, "short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::vector<ComparisonRecord> load(const Options& o) {
  auto records = read_csv_file(o.input);
  return o.exclude_ttp ? without_ttp(records) : records;
}

CartConfig cart_config(const Options& o) {
  CartConfig c;
  c.min_split = o.min_split;
  c.min_leaf = o.min_leaf;
  c.max_depth = o.max_depth;
  c.cp = o.cp;
  c.missing_policy = o.missing == "listwise" ? MissingPolicy::listwise : MissingPolicy::majority_direction;
  return c;
}

BaggingConfig bagging_config(const Options& o) {
  BaggingConfig b;
  b.n_trees = o.n_trees;
  b.seed = o.seed.value_or(0);
  b.sample_fraction = o.sample_fraction;
  b.importance_method = o.importance == "gini" ? ImportanceMethod::mean_decrease_gini : ImportanceMethod::permutation_oob;
  b.base = cart_config(o);
  return b;
}

std::vector<std::string> tree_features(const Options& o) {
  return o.features.empty() ? default_tree_features() : o.features;
}

std::string percent(double fraction) { return fixed(100.0 * fraction, 2) + "%"; }

std::string youden_line(const YoudenPoint& y, Measure m) {
  std::string t = fixed(y.threshold, 2);
  if (m == Measure::pct_delta_med) t += "%";
  return "Youden: threshold = " + t + ", J = " + fixed(y.j, 4) + ", sensitivity = " + percent(y.sensitivity) +
         ", specificity = " + percent(y.specificity);
}

std::string leaf_rule(const LeafSummary& l) {
  if (l.path.empty()) return "all comparisons";
  std::string s;
  for (std::size_t i = 0; i < l.path.size(); ++i) {
    const auto& p = l.path[i];
    std::string t = fixed(p.threshold, 2);
    if (p.feature == "pct_delta_med") t += "%";
    s += (i ? " and " : "") + p.feature + (p.at_or_above ? " >= " : " < ") + t;
  }
  return s;
}

int cmd_summarize(const Options& o) {
  const auto records = load(o);
  const auto stats = summarize(records);
  if (o.format == "json") {
    std::cout << dump_canonical(to_json(stats));
  } else {
    std::cout << summary_table(stats);
  }
  return 0;
}

int cmd_roc(const Options& o) {
  const auto records = load(o);
  const auto measure = parse_measure(o.measure);
  const auto derived = derive_all(records, o.alpha);
  MarkerOrientation orient = default_orientation(*measure);
  if (o.orientation == "higher") orient = MarkerOrientation::higher_predicts_positive;
  if (o.orientation == "lower") orient = MarkerOrientation::lower_predicts_positive;

  std::vector<std::optional<double>> marker;
  std::vector<bool> label;
  for (const auto& d : derived) {
    marker.push_back(measure_value(d, *measure));
    label.push_back(d.os_significant);
  }
  const auto curve = roc_curve(marker, label, orient);
  const auto best = youden(curve);

  const std::string name(to_string(*measure));
  write_atomic(fs::path(o.out_dir) / ("roc_" + name + ".csv"), roc_csv(curve));
  if (!o.svg.empty()) write_atomic(o.svg, roc_svg(curve, "ROC: " + name));

  if (o.format == "json") {
    json j = {{"measure", name}, {"n_used", curve.n_used()}, {"roc", to_json(curve)}, {"youden", to_json(best)}};
    std::cout << dump_canonical(j);
  } else {
    std::cout << "measure: " << name << "\n"
              << "orientation: " << describe(orient) << "\n"
              << "n used: " << curve.n_used() << " (" << curve.n_pos << " positive, " << curve.n_neg << " negative)\n"
              << "AUC = " << fixed(curve.auc, 2) << "\n"
              << youden_line(best, *measure) << "\n";
  }
  return 0;
}

FeatureMatrix matrix_for(const Options& o, const std::vector<ComparisonRecord>& records) {
  const auto derived = derive_all(records, o.alpha);
  return build_feature_matrix(records, derived, tree_features(o));
}

int cmd_tree(const Options& o) {
  const auto records = load(o);
  const auto matrix = matrix_for(o, records);
  const auto config = cart_config(o);
  const auto tree = fit_tree(matrix, config);
  const auto names = tree_features(o);

  write_atomic(fs::path(o.out_dir) / "tree.dot", tree_dot(tree, names));
  const json j = {{"missing_policy", to_string(config.missing_policy)},
                  {"n_used", training_rows(matrix, config.missing_policy).size()},
                  {"config", to_json(config)},
                  {"features", names},
                  {"tree", tree_to_json(tree, names)}};
  write_atomic(fs::path(o.out_dir) / "tree.json", dump_canonical(j));

  if (o.format == "json") {
    std::cout << dump_canonical(j);
  } else {
    std::cout << "tree on " << training_rows(matrix, config.missing_policy).size() << " comparisons ("
              << to_string(config.missing_policy) << "), " << tree.n_leaves() << " leaves\n";
    for (const auto& l : summarize_leaves(tree, names)) {
      std::cout << "  " << leaf_rule(l) << ": " << l.n_pos << "/" << l.n << " significant ("
                << percent(static_cast<double>(l.n_pos) / static_cast<double>(l.n)) << ")\n";
    }
  }
  return 0;
}

int cmd_importance(const Options& o) {
  const auto records = load(o);
  const auto matrix = matrix_for(o, records);
  const auto config = bagging_config(o);
  const auto forest = fit_bagging(matrix, config, o.threads);
  const auto rep = importance(forest, matrix, config.importance_method);
  const auto oob = oob_error_detail(forest, matrix);

  write_atomic(fs::path(o.out_dir) / "importance.csv", importance_csv(rep));
  if (o.format == "json") {
    json j = to_json(rep);
    j["oob_error"] = canonical_number(oob.error);
    j["oob_rows_scored"] = oob.rows_scored;
    std::cout << dump_canonical(j);
  } else {
    std::cout << "importance (" << to_string(rep.method) << ", " << rep.n_trees << " trees, seed " << rep.seed
              << "), OOB error " << fixed(oob.error, 4) << "\n";
    std::vector<const FeatureImportance*> order;
    for (const auto& f : rep.features) order.push_back(&f);
    std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->rank < b->rank; });
    for (auto* f : order) std::cout << "  " << f->rank << ". " << f->name << " " << round_trip(f->score) << "\n";
  }
  return 0;
}

int cmd_report(const Options& o) {
  const auto records = read_csv_file(o.input);
  AnalysisOptions opt;
  opt.alpha = o.alpha;
  opt.cart = cart_config(o);
  opt.bagging = bagging_config(o);
  opt.tree_features = tree_features(o);
  opt.exclude_ttp = o.exclude_ttp;
  opt.haldane = o.haldane;
  opt.threads = o.threads;
  const auto rep = run_analysis(records, opt);

  const fs::path dir(o.out_dir);
  write_atomic(dir / "report.json", dump_canonical(to_json(rep)));
  for (std::size_t i = 0; i < rep.trees.size(); ++i) {
    const auto& t = rep.trees[i];
    const std::string file = i == 0 ? "tree.dot" : "tree_" + std::string(to_string(t.policy)) + ".dot";
    write_atomic(dir / file, tree_dot(t.tree, rep.tree_features));
  }
  for (const auto& m : rep.measures) {
    if (!m.curve) continue;
    const std::string name(to_string(m.measure));
    write_atomic(dir / ("roc_" + name + ".csv"), roc_csv(*m.curve));
    write_atomic(dir / ("roc_" + name + ".svg"), roc_svg(*m.curve, "ROC: " + name));
  }
  write_atomic(dir / "importance.csv", importance_csv(rep.importance.report));

  if (o.format == "json") {
    std::cout << dump_canonical(to_json(rep));
    return 0;
  }
  std::cout << "comparisons: " << rep.n_records << " (" << rep.n_os_significant << " with significant OS";
  if (rep.n_ttp_excluded) std::cout << ", " << rep.n_ttp_excluded << " TTP excluded";
  std::cout << ")\n";
  if (rep.cross_table) {
    const auto& c = *rep.cross_table;
    std::cout << "PFS vs OS significance (n=" << c.n_used << "): tp=" << c.table.tp << " fp=" << c.table.fp
              << " fn=" << c.table.fn << " tn=" << c.table.tn;
    if (c.odds_ratio) std::cout << ", odds ratio " << fixed(*c.odds_ratio, 2);
    if (c.odds_ratio_note) std::cout << ", " << *c.odds_ratio_note;
    std::cout << "\n";
  } else {
    std::cout << "PFS vs OS significance: no PFS significance data\n";
  }
  for (const auto& m : rep.measures) {
    std::cout << to_string(m.measure) << " (n=" << m.n_used << ", " << describe(m.orientation) << "): ";
    if (m.curve) {
      std::cout << "AUC = " << fixed(m.curve->auc, 2) << "; " << youden_line(*m.youden, m.measure) << "\n";
    } else {
      std::cout << *m.note << "\n";
    }
  }
  for (const auto& t : rep.trees) {
    std::cout << "tree (" << to_string(t.policy) << ", n=" << t.n_used << "):\n";
    for (const auto& l : summarize_leaves(t.tree, rep.tree_features)) {
      std::cout << "  " << leaf_rule(l) << ": " << l.n_pos << "/" << l.n << " significant ("
                << percent(static_cast<double>(l.n_pos) / static_cast<double>(l.n)) << ")\n";
    }
  }
  std::cout << "importance (" << to_string(rep.importance.report.method) << "): ";
  std::vector<const FeatureImportance*> order;
  for (const auto& f : rep.importance.report.features) order.push_back(&f);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->rank < b->rank; });
  for (std::size_t i = 0; i < order.size(); ++i) std::cout << (i ? ", " : "") << order[i]->name;
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trial-level surrogacy analysis of PFS measures for significant OS benefit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));
  Options o;

  const std::map<std::string, std::string> measure_map{
      {"hr_pfs", "hr_pfs"}, {"delta_med", "delta_med"}, {"pct_delta_med", "pct_delta_med"}};

  auto common = [&](CLI::App* sub) {
    sub->add_option("input", o.input, "comparison CSV")->required()->check(CLI::ExistingFile);
    sub->add_option("--alpha", o.alpha, "significance level for p-values (strict p < alpha)")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    sub->add_flag("--exclude-ttp", o.exclude_ttp, "drop comparisons whose endpoint is time to progression");
    sub->add_option("--format", o.format, "stdout format")->check(CLI::IsMember({"text", "json"}))->capture_default_str();
    sub->add_option("--out", o.out_dir, "directory for written artifacts")->capture_default_str();
  };
  auto cart = [&](CLI::App* sub) {
    sub->add_option("--min-split", o.min_split, "smallest node eligible for splitting")->capture_default_str()->check(CLI::Range(2, 1000000));
    sub->add_option("--min-leaf", o.min_leaf, "smallest child allowed")->capture_default_str()->check(CLI::Range(1, 1000000));
    sub->add_option("--max-depth", o.max_depth, "maximum tree depth")->capture_default_str()->check(CLI::Range(1, 64));
    sub->add_option("--cp", o.cp, "complexity parameter for pruning")->capture_default_str()->check(CLI::NonNegativeNumber);
    sub->add_option("--missing", o.missing, "missing-value policy")
        ->check(CLI::IsMember({"listwise", "majority"}))
        ->capture_default_str();
    sub->add_option("--features", o.features, "tree predictors (comma separated)")->delimiter(',');
  };
  auto bagging = [&](CLI::App* sub) {
    sub->add_option("--n-trees", o.n_trees, "bagged trees")->capture_default_str()->check(CLI::Range(1, 100000));
    sub->add_option("--seed", o.seed, "random seed (required)")->required();
    sub->add_option("--sample-fraction", o.sample_fraction, "bag size as a fraction of n")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--importance", o.importance, "importance method")
        ->check(CLI::IsMember({"permutation", "gini"}))
        ->capture_default_str();
    sub->add_option("--threads", o.threads, "worker threads for fitting (output does not depend on it)")
        ->capture_default_str()
        ->check(CLI::Range(1u, 256u));
  };

  auto* summ = app.add_subcommand("summarize", "descriptive summary table");
  common(summ);
  auto* roc = app.add_subcommand("roc", "empirical ROC curve, AUC and Youden cut-off for one measure");
  common(roc);
  roc->add_option("--measure", o.measure, "PFS measure")->check(CLI::IsMember(measure_map))->capture_default_str();
  roc->add_option("--orientation", o.orientation, "override the measure's default orientation")
      ->check(CLI::IsMember({"higher", "lower"}));
  roc->add_option("--svg", o.svg, "write the ROC plot to this SVG file");
  auto* tree = app.add_subcommand("tree", "fit a classification tree");
  common(tree);
  cart(tree);
  auto* imp = app.add_subcommand("importance", "bagged-tree variable importance");
  common(imp);
  cart(imp);
  bagging(imp);
  auto* rep = app.add_subcommand("report", "full analysis: report.json plus all artifacts");
  common(rep);
  cart(rep);
  bagging(rep);
  rep->add_flag("--haldane", o.haldane, "add 0.5 to every cell of a cross-table with a zero cell");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*summ) return cmd_summarize(o);
    if (*roc) return cmd_roc(o);
    if (*tree) return cmd_tree(o);
    if (*imp) return cmd_importance(o);
    if (*rep) return cmd_report(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::internal);
  }
  return 1;
}
