#pragma once

// Trial-level comparison records: CSV ingest, validation, derived effect
// measures and descriptive summaries.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "surrogacy/error.hpp"

namespace surrogacy {

enum class Phase { ii, iib, iii, unknown };
enum class Blinding { open, blinded, unknown };
enum class ControlType { active, placebo, standard_care };
enum class TherapyLine { first, second_plus };

inline constexpr std::array<std::string_view, 4> kPhaseTokens{"ii", "iib", "iii", "unknown"};
inline constexpr std::array<std::string_view, 3> kBlindingTokens{"open", "blinded", "unknown"};
inline constexpr std::array<std::string_view, 3> kControlTokens{"active", "placebo", "standard_care"};
inline constexpr std::array<std::string_view, 2> kLineTokens{"first", "second_plus"};

inline std::string_view to_string(Phase v) { return kPhaseTokens[static_cast<std::size_t>(v)]; }
inline std::string_view to_string(Blinding v) { return kBlindingTokens[static_cast<std::size_t>(v)]; }
inline std::string_view to_string(ControlType v) { return kControlTokens[static_cast<std::size_t>(v)]; }
inline std::string_view to_string(TherapyLine v) { return kLineTokens[static_cast<std::size_t>(v)]; }

/// One treatment-to-control comparison as extracted from a publication.
/// Medians are in months; sample size and deaths are totals over both arms.
struct ComparisonRecord {
  std::string study_id;
  int pub_year = 0;
  Phase phase = Phase::unknown;
  bool randomized = true;
  Blinding blinding = Blinding::unknown;
  ControlType control_type = ControlType::active;
  TherapyLine therapy_line = TherapyLine::first;
  std::int64_t sample_size = 0;
  std::optional<std::int64_t> deaths;
  std::optional<double> med_pfs_control;
  std::optional<double> med_pfs_treatment;
  std::optional<double> hr_pfs;
  std::optional<double> pfs_p_value;
  std::optional<bool> pfs_significant_reported;
  std::optional<double> hr_os;
  std::optional<double> os_p_value;
  std::optional<bool> os_significant_reported;
  bool endpoint_is_ttp = false;

  friend bool operator==(const ComparisonRecord&, const ComparisonRecord&) = default;
};

inline constexpr std::array<std::string_view, 18> kCsvColumns{
    "study_id",        "pub_year",          "phase",        "randomized",
    "blinding",        "control_type",      "therapy_line", "sample_size",
    "deaths",          "med_pfs_control",   "med_pfs_treatment", "hr_pfs",
    "pfs_p_value",     "pfs_significant_reported", "hr_os", "os_p_value",
    "os_significant_reported", "endpoint_is_ttp"};

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits one CSV line. Double-quoted fields may contain commas and "" escapes.
inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

inline std::string quote_csv(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

template <typename Enum, std::size_t N>
std::optional<Enum> parse_token(std::string_view cell, const std::array<std::string_view, N>& tokens) {
  const std::string key = lower(cell);
  for (std::size_t i = 0; i < N; ++i) {
    if (key == tokens[i]) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

class RowReader {
 public:
  RowReader(std::size_t row, const std::vector<std::string>& cells,
            const std::array<std::size_t, kCsvColumns.size()>& index)
      : row_(row), cells_(cells), index_(index) {}

  std::string_view cell(std::size_t column) const {
    const std::size_t at = index_[column];
    return at < cells_.size() ? trim(cells_[at]) : std::string_view{};
  }

  [[noreturn]] void fail(std::size_t column, std::string_view expected) const {
    const std::string name(kCsvColumns[column]);
    throw RowParseError(row_, name,
                        "row " + std::to_string(row_) + ", column '" + name + "': expected " +
                            std::string(expected) + ", got '" + std::string(cell(column)) + "'");
  }

  std::optional<double> opt_decimal(std::size_t column) const {
    const auto s = cell(column);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) fail(column, "a number");
    return v;
  }

  std::optional<std::int64_t> opt_integer(std::size_t column) const {
    const auto s = cell(column);
    if (s.empty()) return std::nullopt;
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) fail(column, "an integer");
    return v;
  }

  std::optional<bool> opt_bool(std::size_t column) const {
    const auto s = cell(column);
    if (s.empty()) return std::nullopt;
    const std::string key = lower(s);
    if (key == "true") return true;
    if (key == "false") return false;
    fail(column, "true or false");
  }

  template <typename Enum, std::size_t N>
  std::optional<Enum> opt_enum(std::size_t column, const std::array<std::string_view, N>& tokens) const {
    const auto s = cell(column);
    if (s.empty()) return std::nullopt;
    if (auto v = parse_token<Enum>(s, tokens)) return v;
    std::string expected = "one of";
    for (auto t : tokens) expected += " " + std::string(t);
    fail(column, expected);
  }

  template <typename T>
  T required(std::optional<T> v, std::size_t column, std::string_view expected) const {
    if (!v) fail(column, expected);
    return *v;
  }

 private:
  std::size_t row_;
  const std::vector<std::string>& cells_;
  const std::array<std::size_t, kCsvColumns.size()>& index_;
};

}  // namespace detail

/// Names of fields violating the record invariants; empty when valid.
inline std::vector<std::string> invalid_fields(const ComparisonRecord& r) {
  std::vector<std::string> bad;
  auto positive = [&](const std::optional<double>& v, const char* name) {
    if (v && !(std::isfinite(*v) && *v > 0.0)) bad.emplace_back(name);
  };
  auto probability = [&](const std::optional<double>& v, const char* name) {
    if (v && !(std::isfinite(*v) && *v >= 0.0 && *v <= 1.0)) bad.emplace_back(name);
  };
  if (r.study_id.empty()) bad.emplace_back("study_id");
  if (r.sample_size < 2) bad.emplace_back("sample_size");
  if (r.deaths && (*r.deaths < 0 || *r.deaths > r.sample_size)) bad.emplace_back("deaths");
  positive(r.med_pfs_control, "med_pfs_control");
  positive(r.med_pfs_treatment, "med_pfs_treatment");
  positive(r.hr_pfs, "hr_pfs");
  probability(r.pfs_p_value, "pfs_p_value");
  positive(r.hr_os, "hr_os");
  probability(r.os_p_value, "os_p_value");
  if (!r.os_p_value && !r.os_significant_reported) bad.emplace_back("os_p_value|os_significant_reported");
  return bad;
}

inline void validate(const ComparisonRecord& r, std::size_t row = 0) {
  const auto bad = invalid_fields(r);
  if (bad.empty()) return;
  std::string msg = row ? "row " + std::to_string(row) + " (" + r.study_id + "): invalid "
                        : "record '" + r.study_id + "': invalid ";
  for (std::size_t i = 0; i < bad.size(); ++i) msg += (i ? ", " : "") + bad[i];
  throw ValidationError(msg);
}

/// Parses the comparison CSV. Column order is free; every schema column must
/// appear in the header and unknown extra columns are ignored. Empty cells are
/// absent values; an empty `phase` or `blinding` reads as `unknown` and an
/// empty `endpoint_is_ttp` as false.
inline std::vector<ComparisonRecord> parse_csv(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw SchemaError("study_id", "missing header row");

  const auto header = detail::split_csv_line(lines.front());
  std::array<std::size_t, kCsvColumns.size()> index{};
  for (std::size_t c = 0; c < kCsvColumns.size(); ++c) {
    auto it = std::find_if(header.begin(), header.end(), [&](const std::string& h) {
      return detail::lower(detail::trim(h)) == kCsvColumns[c];
    });
    if (it == header.end()) {
      const std::string name(kCsvColumns[c]);
      throw SchemaError(name, "missing required column '" + name + "'");
    }
    index[c] = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<ComparisonRecord> records;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (detail::trim(lines[li]).empty()) continue;
    const std::size_t row = li;
    const auto cells = detail::split_csv_line(lines[li]);
    const detail::RowReader rd(row, cells, index);

    ComparisonRecord r;
    r.study_id = std::string(rd.cell(0));
    r.pub_year = static_cast<int>(rd.required(rd.opt_integer(1), 1, "an integer year"));
    r.phase = rd.opt_enum<Phase>(2, kPhaseTokens).value_or(Phase::unknown);
    r.randomized = rd.required(rd.opt_bool(3), 3, "true or false");
    r.blinding = rd.opt_enum<Blinding>(4, kBlindingTokens).value_or(Blinding::unknown);
    r.control_type = rd.required(rd.opt_enum<ControlType>(5, kControlTokens), 5, "a control type");
    r.therapy_line = rd.required(rd.opt_enum<TherapyLine>(6, kLineTokens), 6, "a therapy line");
    r.sample_size = rd.required(rd.opt_integer(7), 7, "an integer");
    r.deaths = rd.opt_integer(8);
    r.med_pfs_control = rd.opt_decimal(9);
    r.med_pfs_treatment = rd.opt_decimal(10);
    r.hr_pfs = rd.opt_decimal(11);
    r.pfs_p_value = rd.opt_decimal(12);
    r.pfs_significant_reported = rd.opt_bool(13);
    r.hr_os = rd.opt_decimal(14);
    r.os_p_value = rd.opt_decimal(15);
    r.os_significant_reported = rd.opt_bool(16);
    r.endpoint_is_ttp = rd.opt_bool(17).value_or(false);
    validate(r, row);
    records.push_back(std::move(r));
  }
  return records;
}

inline std::vector<ComparisonRecord> read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open input '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

/// Writes records in the canonical column order; parse_csv(to_csv(x)) == x.
inline std::string to_csv(const std::vector<ComparisonRecord>& records) {
  std::string out;
  for (std::size_t c = 0; c < kCsvColumns.size(); ++c) {
    out += (c ? "," : "") + std::string(kCsvColumns[c]);
  }
  out += '\n';
  auto dec = [](const std::optional<double>& v) { return v ? detail::format_double(*v) : std::string(); };
  auto boolean = [](bool v) { return std::string(v ? "true" : "false"); };
  auto opt_bool = [&](const std::optional<bool>& v) { return v ? boolean(*v) : std::string(); };
  for (const auto& r : records) {
    const std::array<std::string, kCsvColumns.size()> cells{
        detail::quote_csv(r.study_id),
        std::to_string(r.pub_year),
        std::string(to_string(r.phase)),
        boolean(r.randomized),
        std::string(to_string(r.blinding)),
        std::string(to_string(r.control_type)),
        std::string(to_string(r.therapy_line)),
        std::to_string(r.sample_size),
        r.deaths ? std::to_string(*r.deaths) : std::string(),
        dec(r.med_pfs_control),
        dec(r.med_pfs_treatment),
        dec(r.hr_pfs),
        dec(r.pfs_p_value),
        opt_bool(r.pfs_significant_reported),
        dec(r.hr_os),
        dec(r.os_p_value),
        opt_bool(r.os_significant_reported),
        boolean(r.endpoint_is_ttp)};
    for (std::size_t c = 0; c < cells.size(); ++c) out += (c ? "," : "") + cells[c];
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Derived measures
// ---------------------------------------------------------------------------

struct DerivedMeasures {
  std::optional<double> hr_pfs;
  std::optional<double> delta_med;      // months
  std::optional<double> pct_delta_med;  // percent
  bool os_significant = false;

  friend bool operator==(const DerivedMeasures&, const DerivedMeasures&) = default;
};

struct MedianChange {
  std::optional<double> delta;
  std::optional<double> percent;
};

inline MedianChange median_change(const ComparisonRecord& r) {
  MedianChange m;
  if (r.med_pfs_control && r.med_pfs_treatment) {
    m.delta = *r.med_pfs_treatment - *r.med_pfs_control;
    if (*r.med_pfs_control > 0.0) m.percent = 100.0 * *m.delta / *r.med_pfs_control;
  }
  return m;
}

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("significance level must lie in (0, 1), got " + detail::format_double(alpha));
  }
}

// Significance in favour of treatment: p < alpha (strict) beats the reported
// flag, and a present hazard ratio must be below 1.
inline std::optional<bool> favourable_significance(const std::optional<double>& p_value,
                                                   const std::optional<bool>& reported,
                                                   const std::optional<double>& hazard_ratio, double alpha) {
  std::optional<bool> sig;
  if (p_value) {
    sig = *p_value < alpha;
  } else if (reported) {
    sig = *reported;
  }
  if (sig && *sig && hazard_ratio && !(*hazard_ratio < 1.0)) sig = false;
  return sig;
}

inline std::optional<bool> pfs_significant(const ComparisonRecord& r, double alpha = 0.05) {
  check_alpha(alpha);
  return favourable_significance(r.pfs_p_value, r.pfs_significant_reported, r.hr_pfs, alpha);
}

inline DerivedMeasures derive_measures(const ComparisonRecord& r, double alpha = 0.05) {
  check_alpha(alpha);
  const auto label = favourable_significance(r.os_p_value, r.os_significant_reported, r.hr_os, alpha);
  if (!label) {
    throw LabelError("record '" + r.study_id + "': neither os_p_value nor os_significant_reported is present");
  }
  const auto change = median_change(r);
  return DerivedMeasures{r.hr_pfs, change.delta, change.percent, *label};
}

// ---------------------------------------------------------------------------
// Descriptive summaries
// ---------------------------------------------------------------------------

struct NumericSummary {
  std::string variable;
  std::size_t n = 0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;

  friend bool operator==(const NumericSummary&, const NumericSummary&) = default;
};

struct LevelCount {
  std::string level;
  std::size_t count = 0;
  double percent = 0.0;

  friend bool operator==(const LevelCount&, const LevelCount&) = default;
};

struct CategoricalSummary {
  std::string variable;
  std::vector<LevelCount> levels;

  friend bool operator==(const CategoricalSummary&, const CategoricalSummary&) = default;
};

struct SummaryStats {
  std::size_t n_records = 0;
  std::vector<NumericSummary> numeric;
  std::vector<CategoricalSummary> categorical;

  friend bool operator==(const SummaryStats&, const SummaryStats&) = default;

  const NumericSummary* find_numeric(std::string_view name) const {
    for (const auto& s : numeric) {
      if (s.variable == name) return &s;
    }
    return nullptr;
  }
  const CategoricalSummary* find_categorical(std::string_view name) const {
    for (const auto& s : categorical) {
      if (s.variable == name) return &s;
    }
    return nullptr;
  }
};

inline SummaryStats summarize(const std::vector<ComparisonRecord>& records) {
  if (records.empty()) throw EmptyInputError("cannot summarize an empty record list");
  SummaryStats out;
  out.n_records = records.size();
  const double total = static_cast<double>(records.size());

  auto numeric = [&](const char* name, auto&& get) {
    std::vector<double> values;
    for (const auto& r : records) {
      if (std::optional<double> v = get(r)) values.push_back(*v);
    }
    if (values.empty()) return;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    out.numeric.push_back({name, values.size(), detail::median_of(values), *lo, *hi});
  };
  auto as_double = [](const auto& v) -> std::optional<double> {
    if (!v) return std::nullopt;
    return static_cast<double>(*v);
  };
  numeric("sample_size", [](const ComparisonRecord& r) { return std::optional<double>(static_cast<double>(r.sample_size)); });
  numeric("deaths", [&](const ComparisonRecord& r) { return as_double(r.deaths); });
  numeric("med_pfs_control", [](const ComparisonRecord& r) { return r.med_pfs_control; });
  numeric("med_pfs_treatment", [](const ComparisonRecord& r) { return r.med_pfs_treatment; });
  numeric("delta_med", [](const ComparisonRecord& r) { return median_change(r).delta; });
  numeric("pct_delta_med", [](const ComparisonRecord& r) { return median_change(r).percent; });
  numeric("hr_pfs", [](const ComparisonRecord& r) { return r.hr_pfs; });
  numeric("hr_os", [](const ComparisonRecord& r) { return r.hr_os; });

  auto categorical = [&](const char* name, const auto& tokens, auto&& level_of) {
    CategoricalSummary cs{name, {}};
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const auto count = static_cast<std::size_t>(std::count_if(
          records.begin(), records.end(), [&](const ComparisonRecord& r) { return level_of(r) == i; }));
      cs.levels.push_back({std::string(tokens[i]), count, 100.0 * static_cast<double>(count) / total});
    }
    out.categorical.push_back(std::move(cs));
  };
  static constexpr std::array<std::string_view, 2> kBool{"true", "false"};
  auto idx = [](auto e) { return static_cast<std::size_t>(e); };
  categorical("phase", kPhaseTokens, [&](const ComparisonRecord& r) { return idx(r.phase); });
  categorical("blinding", kBlindingTokens, [&](const ComparisonRecord& r) { return idx(r.blinding); });
  categorical("control_type", kControlTokens, [&](const ComparisonRecord& r) { return idx(r.control_type); });
  categorical("therapy_line", kLineTokens, [&](const ComparisonRecord& r) { return idx(r.therapy_line); });
  categorical("randomized", kBool, [](const ComparisonRecord& r) { return r.randomized ? 0u : 1u; });
  categorical("endpoint_is_ttp", kBool, [](const ComparisonRecord& r) { return r.endpoint_is_ttp ? 0u : 1u; });
  return out;
}

}  // namespace surrogacy
