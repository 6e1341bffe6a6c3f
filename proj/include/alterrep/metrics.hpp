#pragma once

// Agreement-error metrics and intervention reports.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "alterrep/error.hpp"

namespace alterrep::metrics {

/// P(Err) = p_incorrect / (p_incorrect + p_correct).
inline double p_err(double p_incorrect, double p_correct) {
  require(std::isfinite(p_incorrect) && std::isfinite(p_correct), ErrorCode::non_finite,
          "p_err: non-finite probability");
  require(p_incorrect >= 0.0 && p_correct >= 0.0, ErrorCode::invalid_argument, "p_err: negative probability");
  require(p_incorrect + p_correct > 0.0, ErrorCode::invalid_argument, "p_err: both probabilities are zero");
  return p_incorrect / (p_incorrect + p_correct);
}

/// Strictly higher probability for the correct verb; ties are incorrect.
inline bool is_correct(double p_correct, double p_incorrect) { return p_correct > p_incorrect; }

/// One masked-verb trial as written by the scoring harness. Baseline
/// (unintervened) records carry polarity "none".
struct AgreementRecord {
  std::string item_id;
  std::string condition;
  std::string rc_type_eval = "-";
  std::string subject_number;
  std::string attractor_number = "-";
  long layer = -1;
  std::string polarity = "none";
  double alpha = 0.0;
  long m = 0;
  std::string subspace_source = "none";
  std::string rc_type_train = "-";
  double p_correct = 0.0;
  double p_incorrect = 0.0;

  bool intervened() const { return polarity != "none"; }
  double error() const { return p_err(p_incorrect, p_correct); }
  bool correct() const { return is_correct(p_correct, p_incorrect); }
};

inline void validate(const AgreementRecord& r) {
  require(!r.item_id.empty(), ErrorCode::invalid_argument, "agreement record without item id");
  require(std::isfinite(r.p_correct) && std::isfinite(r.p_incorrect), ErrorCode::non_finite,
          r.item_id + ": non-finite probability");
  require(r.p_correct >= 0.0 && r.p_incorrect >= 0.0, ErrorCode::invalid_argument,
          r.item_id + ": negative probability");
  require(r.p_correct + r.p_incorrect > 0.0, ErrorCode::invalid_argument, r.item_id + ": both probabilities zero");
  require(r.polarity == "none" || r.polarity == "positive" || r.polarity == "negative", ErrorCode::invalid_argument,
          r.item_id + ": unknown polarity '" + r.polarity + "'");
}

struct AccuracyFlip {
  double accuracy_after = 0.0;
  /// Fraction of originally incorrect items that became correct; 0 when
  /// no item was originally incorrect.
  double flip_to_correct_rate = 0.0;
  long originally_incorrect = 0;
  long n = 0;
};

/// `before[i]` and `after[i]` must describe the same item.
inline AccuracyFlip accuracy_flip(const std::vector<AgreementRecord>& before,
                                  const std::vector<AgreementRecord>& after) {
  require(before.size() == after.size(), ErrorCode::invalid_argument,
          "accuracy_flip: " + std::to_string(before.size()) + " records before vs " + std::to_string(after.size()) +
              " after");
  require(!before.empty(), ErrorCode::invalid_argument, "accuracy_flip: no records");
  AccuracyFlip out;
  out.n = static_cast<long>(after.size());
  long correct_after = 0, flipped = 0;
  for (std::size_t i = 0; i < after.size(); ++i) {
    require(before[i].item_id == after[i].item_id, ErrorCode::invalid_argument,
            "accuracy_flip: unpaired records '" + before[i].item_id + "' and '" + after[i].item_id + "'");
    validate(before[i]);
    validate(after[i]);
    const bool now = after[i].correct();
    correct_after += now ? 1 : 0;
    if (!before[i].correct()) {
      ++out.originally_incorrect;
      flipped += now ? 1 : 0;
    }
  }
  out.accuracy_after = static_cast<double>(correct_after) / static_cast<double>(out.n);
  if (out.originally_incorrect > 0) {
    out.flip_to_correct_rate = static_cast<double>(flipped) / static_cast<double>(out.originally_incorrect);
  }
  return out;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // sample SD (n - 1) / sqrt(n); 0 when n = 1
  long n = 0;
};

inline MeanSe mean_se(const std::vector<double>& values) {
  require(!values.empty(), ErrorCode::invalid_argument, "mean_se: empty group");
  MeanSe out;
  out.n = static_cast<long>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(out.n);
  if (out.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.se = std::sqrt(ss / static_cast<double>(out.n - 1)) / std::sqrt(static_cast<double>(out.n));
  }
  return out;
}

struct GroupKey {
  long layer = -1;
  std::string polarity;
  double alpha = 0.0;
  long m = 0;
  std::string subspace_source;
  std::string condition;
  std::string rc_type_train;
  std::string rc_type_eval;

  auto tie() const {
    return std::tie(layer, polarity, alpha, m, subspace_source, condition, rc_type_train, rc_type_eval);
  }
  friend bool operator<(const GroupKey& a, const GroupKey& b) { return a.tie() < b.tie(); }
  friend bool operator==(const GroupKey& a, const GroupKey& b) { return a.tie() == b.tie(); }
};

inline GroupKey key_of(const AgreementRecord& r) {
  return {r.layer, r.polarity, r.alpha, r.m, r.subspace_source, r.condition, r.rc_type_train, r.rc_type_eval};
}

struct ReportRow {
  GroupKey key;
  long n = 0;
  double mean_p_err = 0.0;
  double se_p_err = 0.0;
  /// accuracy is NaN on "mean_of_types" rows; flip_rate is NaN for baseline
  /// rows, rows without a full baseline pairing, or no originally wrong item.
  double accuracy = std::numeric_limits<double>::quiet_NaN();
  double flip_rate = std::numeric_limits<double>::quiet_NaN();

  bool single_record() const { return n == 1; }
};

/// `rows` partition the input records by full key (their n sum to the input
/// count). `derived_rows` add pooled and subset views:
///   rc_type_eval "all"          items pooled across the RC types,
///   rc_type_eval "mean_of_types" unweighted mean of per-type means,
///   rc_type_train "same"/"cross" training type equal to / different from
///                               the evaluation type,
///   condition "<c>:originally_wrong" items whose baseline was incorrect.
struct Report {
  std::vector<ReportRow> rows;
  std::vector<ReportRow> derived_rows;
};

namespace detail {

struct Accumulator {
  std::vector<double> errors;
  long correct = 0;
  long paired = 0;
  long originally_wrong = 0;
  long flipped = 0;

  void add(const AgreementRecord& r, const AgreementRecord* baseline) {
    errors.push_back(r.error());
    correct += r.correct() ? 1 : 0;
    if (baseline) {
      ++paired;
      if (!baseline->correct()) {
        ++originally_wrong;
        flipped += r.correct() ? 1 : 0;
      }
    }
  }

  ReportRow row(const GroupKey& key, bool intervened) const {
    const MeanSe stats = mean_se(errors);
    ReportRow out;
    out.key = key;
    out.n = stats.n;
    out.mean_p_err = stats.mean;
    out.se_p_err = stats.se;
    out.accuracy = static_cast<double>(correct) / static_cast<double>(stats.n);
    if (intervened && paired == stats.n && originally_wrong > 0) {
      out.flip_rate = static_cast<double>(flipped) / static_cast<double>(originally_wrong);
    }
    return out;
  }
};

inline bool is_rc_type(const std::string& t) {
  return t == "ORC" || t == "ORRC" || t == "PRC" || t == "PRRC" || t == "SRC";
}

}  // namespace detail

/// Baseline lookup: a baseline at the same layer wins over a layer -1 one.
class BaselineIndex {
 public:
  explicit BaselineIndex(const std::vector<AgreementRecord>& records) {
    for (const auto& r : records) {
      if (r.intervened()) continue;
      auto [it, inserted] = by_item_.try_emplace({r.item_id, r.layer}, &r);
      require(inserted, ErrorCode::invalid_argument,
              "duplicate baseline record for item '" + r.item_id + "' at layer " + std::to_string(r.layer));
    }
  }

  const AgreementRecord* find(const AgreementRecord& r) const {
    if (auto it = by_item_.find({r.item_id, r.layer}); it != by_item_.end()) return it->second;
    if (auto it = by_item_.find({r.item_id, -1L}); it != by_item_.end()) return it->second;
    return nullptr;
  }

 private:
  std::map<std::pair<std::string, long>, const AgreementRecord*> by_item_;
};

inline Report aggregate(const std::vector<AgreementRecord>& records) {
  require(!records.empty(), ErrorCode::invalid_argument, "aggregate: no records");
  for (const auto& r : records) validate(r);
  const BaselineIndex baselines(records);

  std::map<GroupKey, detail::Accumulator> base, derived;
  std::map<GroupKey, std::vector<GroupKey>> type_means;  // pooled key -> per-type keys
  for (const auto& r : records) {
    const AgreementRecord* baseline = r.intervened() ? baselines.find(r) : nullptr;
    const GroupKey key = key_of(r);
    base[key].add(r, baseline);

    std::vector<GroupKey> views{key};
    if (detail::is_rc_type(r.rc_type_eval)) {
      GroupKey pooled = key;
      pooled.rc_type_eval = "all";
      derived[pooled].add(r, baseline);
      type_means[pooled].push_back(key);
      views.push_back(pooled);
    }
    if (r.intervened() && detail::is_rc_type(r.rc_type_train) && detail::is_rc_type(r.rc_type_eval)) {
      const std::string relation = r.rc_type_train == r.rc_type_eval ? "same" : "cross";
      for (std::size_t v = 0, count = views.size(); v < count; ++v) {
        GroupKey k = views[v];
        k.rc_type_train = relation;
        derived[k].add(r, baseline);
        views.push_back(k);
      }
    }
    const bool wrong = r.intervened() ? (baseline && !baseline->correct()) : !r.correct();
    if (wrong) {
      for (GroupKey k : views) {
        k.condition += ":originally_wrong";
        derived[k].add(r, baseline);
      }
    }
  }

  Report report;
  for (const auto& [key, acc] : base) report.rows.push_back(acc.row(key, key.polarity != "none"));
  for (const auto& [key, acc] : derived) report.derived_rows.push_back(acc.row(key, key.polarity != "none"));

  for (const auto& [pooled, members] : type_means) {
    std::set<GroupKey> distinct(members.begin(), members.end());
    ReportRow row;
    row.key = pooled;
    row.key.rc_type_eval = "mean_of_types";
    double sum = 0.0, var = 0.0;
    for (const auto& k : distinct) {
      const ReportRow r = base.at(k).row(k, false);
      sum += r.mean_p_err;
      var += r.se_p_err * r.se_p_err;
      row.n += r.n;
    }
    const double types = static_cast<double>(distinct.size());
    row.mean_p_err = sum / types;
    row.se_p_err = std::sqrt(var) / types;
    report.derived_rows.push_back(row);
  }
  return report;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr std::string_view kRecordHeader =
    "item_id,condition,rc_type_eval,subject_number,attractor_number,layer,polarity,alpha,m,subspace_source,"
    "rc_type_train,p_correct,p_incorrect";
inline constexpr std::string_view kResultsHeader =
    "layer,polarity,alpha,m,subspace_source,condition,rc_type_train,rc_type_eval,n,mean_p_err,se_p_err,accuracy,"
    "flip_rate";

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::format, "bad " + what + " '" + s + "'");
  }
}

inline long parse_long(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::format, "bad " + what + " '" + s + "'");
  }
}

inline std::string number(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

inline void chomp(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace detail

inline void write_records(std::ostream& out, const std::vector<AgreementRecord>& records) {
  out << kRecordHeader << '\n';
  for (const auto& r : records) {
    out << r.item_id << ',' << r.condition << ',' << r.rc_type_eval << ',' << r.subject_number << ','
        << r.attractor_number << ',' << r.layer << ',' << r.polarity << ',' << detail::number(r.alpha) << ',' << r.m
        << ',' << r.subspace_source << ',' << r.rc_type_train << ',' << detail::number(r.p_correct) << ','
        << detail::number(r.p_incorrect) << '\n';
  }
}

inline std::vector<AgreementRecord> read_records(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::format, "agreement CSV is empty");
  detail::chomp(line);
  require(line == kRecordHeader, ErrorCode::format, "agreement CSV header mismatch: '" + line + "'");
  std::vector<AgreementRecord> out;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    detail::chomp(line);
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    require(f.size() == 13, ErrorCode::format,
            "agreement CSV line " + std::to_string(line_no) + ": expected 13 fields, got " + std::to_string(f.size()));
    AgreementRecord r;
    r.item_id = f[0];
    r.condition = f[1];
    r.rc_type_eval = f[2];
    r.subject_number = f[3];
    r.attractor_number = f[4];
    r.layer = detail::parse_long(f[5], "layer");
    r.polarity = f[6];
    r.alpha = f[7].empty() ? 0.0 : detail::parse_double(f[7], "alpha");
    r.m = f[8].empty() ? 0 : detail::parse_long(f[8], "m");
    r.subspace_source = f[9];
    r.rc_type_train = f[10];
    r.p_correct = detail::parse_double(f[11], "p_correct");
    r.p_incorrect = detail::parse_double(f[12], "p_incorrect");
    validate(r);
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_row(std::ostream& out, const ReportRow& r) {
  out << r.key.layer << ',' << r.key.polarity << ',' << detail::number(r.key.alpha) << ',' << r.key.m << ','
      << r.key.subspace_source << ',' << r.key.condition << ',' << r.key.rc_type_train << ',' << r.key.rc_type_eval
      << ',' << r.n << ',' << detail::number(r.mean_p_err) << ',' << detail::number(r.se_p_err) << ','
      << detail::number(r.accuracy) << ',' << detail::number(r.flip_rate) << '\n';
}

inline void write_results(std::ostream& out, const Report& report) {
  out << kResultsHeader << '\n';
  for (const auto& r : report.rows) write_row(out, r);
  for (const auto& r : report.derived_rows) write_row(out, r);
}

inline std::vector<ReportRow> read_results(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::format, "results CSV is empty");
  detail::chomp(line);
  require(line == kResultsHeader, ErrorCode::format, "results CSV header mismatch: '" + line + "'");
  std::vector<ReportRow> out;
  while (std::getline(in, line)) {
    detail::chomp(line);
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    require(f.size() == 13, ErrorCode::format, "results CSV: expected 13 fields in '" + line + "'");
    ReportRow r;
    r.key = {detail::parse_long(f[0], "layer"), f[1], detail::parse_double(f[2], "alpha"),
             detail::parse_long(f[3], "m"), f[4], f[5], f[6], f[7]};
    r.n = detail::parse_long(f[8], "n");
    r.mean_p_err = detail::parse_double(f[9], "mean_p_err");
    r.se_p_err = detail::parse_double(f[10], "se_p_err");
    if (!f[11].empty()) r.accuracy = detail::parse_double(f[11], "accuracy");
    if (!f[12].empty()) r.flip_rate = detail::parse_double(f[12], "flip_rate");
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// SVG plots

struct PlotPoint {
  double x = 0.0;
  double y = 0.0;
  double err = 0.0;  // half-height of the error bar
};

struct Series {
  std::string name;
  std::vector<PlotPoint> points;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

namespace detail {

inline std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

inline void write_svg(std::ostream& out, const Plot& plot) {
  constexpr double W = 640, H = 420, left = 70, right = 180, top = 40, bottom = 60;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : plot.series) {
    for (const auto& p : s.points) {
      x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y - p.err), y1 = std::max(y1, p.y + p.err);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 1, x1 += 1;
  if (y1 == y0) y0 -= 0.05, y1 += 0.05;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad, y1 += pad;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * (W - left - right); };
  auto sy = [&](double y) { return H - bottom - (y - y0) / (y1 - y0) * (H - top - bottom); };
  static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                            "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

  out << std::fixed << std::setprecision(2);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << detail::escape_xml(plot.title) << "</text>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\"" << H - bottom
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom
      << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x0 + (x1 - x0) * t / 4.0, yv = y0 + (y1 - y0) * t / 4.0;
    out << "<text x=\"" << sx(xv) << "\" y=\"" << H - bottom + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
        << std::setprecision(3) << std::defaultfloat << xv << std::fixed << std::setprecision(2) << "</text>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
        << std::setprecision(3) << std::defaultfloat << yv << std::fixed << std::setprecision(2) << "</text>\n";
  }
  out << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\" font-size=\"13\">"
      << detail::escape_xml(plot.x_label) << "</text>\n";
  out << "<text x=\"18\" y=\"" << (top + H - bottom) / 2 << "\" text-anchor=\"middle\" font-size=\"13\" "
      << "transform=\"rotate(-90 18 " << (top + H - bottom) / 2 << ")\">" << detail::escape_xml(plot.y_label)
      << "</text>\n";

  for (std::size_t i = 0; i < plot.series.size(); ++i) {
    const auto& s = plot.series[i];
    const char* color = palette[i % 8];
    std::vector<PlotPoint> pts = s.points;
    std::sort(pts.begin(), pts.end(), [](const PlotPoint& a, const PlotPoint& b) { return a.x < b.x; });
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : pts) out << sx(p.x) << ',' << sy(p.y) << ' ';
    out << "\"/>\n";
    for (const auto& p : pts) {
      if (p.err > 0.0) {
        out << "<line x1=\"" << sx(p.x) << "\" y1=\"" << sy(p.y - p.err) << "\" x2=\"" << sx(p.x) << "\" y2=\""
            << sy(p.y + p.err) << "\" stroke=\"" << color << "\"/>\n";
      }
      out << "<circle cx=\"" << sx(p.x) << "\" cy=\"" << sy(p.y) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    }
    const double ly = top + 16.0 * static_cast<double>(i);
    out << "<rect x=\"" << W - right + 12 << "\" y=\"" << ly << "\" width=\"10\" height=\"10\" fill=\"" << color
        << "\"/>\n";
    out << "<text x=\"" << W - right + 26 << "\" y=\"" << ly + 9 << "\" font-size=\"11\">" << detail::escape_xml(s.name)
        << "</text>\n";
  }
  out << "</svg>\n";
}

namespace detail {

inline std::string series_name(const GroupKey& k, bool with_condition) {
  std::string name = with_condition ? k.condition + " " : "";
  if (k.polarity == "none") return name + "baseline";
  std::ostringstream s;
  s << name << k.polarity << " a=" << k.alpha << " m=" << k.m;
  if (k.subspace_source != "trained") s << " (" << k.subspace_source << ")";
  return s.str();
}

/// Mean P(Err) against layer with 2-SE bars, one series per intervention
/// setting. Baselines stored at layer -1 are drawn flat across the layers.
template <typename Pred>
Plot layer_plot(const std::string& title, const std::vector<ReportRow>& rows, Pred keep, bool with_condition) {
  Plot plot{title, "layer", "mean P(Err)", {}};
  std::map<std::string, Series> by_name;
  std::set<long> layers;
  for (const auto& r : rows) {
    if (keep(r) && r.key.layer >= 0) layers.insert(r.key.layer);
  }
  for (const auto& r : rows) {
    if (!keep(r)) continue;
    auto& s = by_name[series_name(r.key, with_condition)];
    s.name = series_name(r.key, with_condition);
    if (r.key.layer >= 0) {
      s.points.push_back({static_cast<double>(r.key.layer), r.mean_p_err, 2.0 * r.se_p_err});
    } else {
      for (long l : layers) s.points.push_back({static_cast<double>(l), r.mean_p_err, 2.0 * r.se_p_err});
    }
  }
  for (auto& [name, s] : by_name) plot.series.push_back(std::move(s));
  return plot;
}

}  // namespace detail

/// One SVG per view of a report: attractor items with same-type subspaces,
/// control conditions, the originally-wrong subset, random subspaces, and
/// cross-type subspaces. Returns the written paths.
inline std::vector<std::filesystem::path> write_figures(const Report& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<ReportRow> rows = report.rows;
  rows.insert(rows.end(), report.derived_rows.begin(), report.derived_rows.end());
  auto pooled = [](const ReportRow& r) { return r.key.rc_type_eval == "all"; };
  auto baseline = [](const ReportRow& r) { return r.key.polarity == "none"; };

  struct Figure {
    std::string file;
    Plot plot;
  };
  std::vector<Figure> figures;
  figures.push_back({"same_type.svg",
                     detail::layer_plot("RC attractor items, same-type subspace", rows,
                                        [&](const ReportRow& r) {
                                          return pooled(r) && r.key.condition == "rc_attractor" &&
                                                 (baseline(r) || (r.key.rc_type_train == "same" &&
                                                                  r.key.subspace_source == "trained"));
                                        },
                                        false)});
  figures.push_back({"controls.svg",
                     detail::layer_plot("Control conditions", rows,
                                        [&](const ReportRow& r) {
                                          const auto& c = r.key.condition;
                                          const bool rc = c == "rc_no_attractor" && pooled(r) &&
                                                          (baseline(r) || r.key.rc_type_train == "same");
                                          const bool other = (c == "simple" || c == "sentential_complement") &&
                                                             r.key.subspace_source != "random";
                                          return rc || other;
                                        },
                                        true)});
  figures.push_back({"originally_wrong.svg",
                     detail::layer_plot("Originally wrong RC attractor items", rows,
                                        [&](const ReportRow& r) {
                                          return pooled(r) && r.key.condition == "rc_attractor:originally_wrong" &&
                                                 (baseline(r) || (r.key.rc_type_train == "same" &&
                                                                  r.key.subspace_source == "trained"));
                                        },
                                        false)});
  figures.push_back({"random_subspace.svg",
                     detail::layer_plot("RC attractor items, random subspace", rows,
                                        [&](const ReportRow& r) {
                                          return pooled(r) && r.key.condition == "rc_attractor" &&
                                                 (baseline(r) || r.key.subspace_source == "random");
                                        },
                                        false)});
  figures.push_back({"cross_type.svg",
                     detail::layer_plot("RC attractor items, cross-type subspace", rows,
                                        [&](const ReportRow& r) {
                                          return pooled(r) && r.key.condition == "rc_attractor" &&
                                                 (baseline(r) || r.key.rc_type_train == "cross");
                                        },
                                        false)});

  std::vector<std::filesystem::path> written;
  for (const auto& f : figures) {
    const auto path = dir / f.file;
    std::ofstream out(path);
    require(static_cast<bool>(out), ErrorCode::io, "cannot write " + path.string());
    write_svg(out, f.plot);
    written.push_back(path);
  }
  return written;
}

}  // namespace alterrep::metrics
