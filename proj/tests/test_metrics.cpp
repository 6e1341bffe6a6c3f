#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "alterrep/metrics.hpp"

using namespace alterrep;
using namespace alterrep::metrics;
using Catch::Matchers::WithinAbs;

namespace {

AgreementRecord record(const std::string& id, double p_correct, double p_incorrect) {
  AgreementRecord r;
  r.item_id = id;
  r.condition = "rc_attractor";
  r.rc_type_eval = "ORC";
  r.subject_number = "sg";
  r.attractor_number = "pl";
  r.p_correct = p_correct;
  r.p_incorrect = p_incorrect;
  return r;
}

AgreementRecord intervened(AgreementRecord r, long layer, const std::string& polarity, const std::string& train,
                           double p_correct, double p_incorrect) {
  r.layer = layer;
  r.polarity = polarity;
  r.alpha = 4.0;
  r.m = 8;
  r.subspace_source = "trained";
  r.rc_type_train = train;
  r.p_correct = p_correct;
  r.p_incorrect = p_incorrect;
  return r;
}

const ReportRow* find(const std::vector<ReportRow>& rows, const std::string& condition, const std::string& train,
                      const std::string& eval, const std::string& polarity = "positive") {
  for (const auto& r : rows) {
    if (r.key.condition == condition && r.key.rc_type_train == train && r.key.rc_type_eval == eval &&
        r.key.polarity == polarity)
      return &r;
  }
  return nullptr;
}

// Random records over a grid of layers, polarities, conditions and types,
// each intervened record paired with a layer -1 baseline.
std::vector<AgreementRecord> synthetic_run(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  const std::vector<std::string> types{"ORC", "ORRC", "PRC", "PRRC", "SRC"};
  std::vector<AgreementRecord> out;
  for (int item = 0; item < 60; ++item) {
    auto base = record("item-" + std::to_string(item), u(rng), u(rng));
    base.rc_type_eval = types[static_cast<std::size_t>(item) % types.size()];
    base.condition = item % 3 == 0 ? "rc_no_attractor" : "rc_attractor";
    if (item % 10 == 9) base.condition = "simple", base.rc_type_eval = "-";
    out.push_back(base);
    for (long layer : {3, 6, 9}) {
      for (const std::string polarity : {"positive", "negative"}) {
        for (const auto& train : {std::string("ORC"), std::string("SRC")}) {
          out.push_back(intervened(base, layer, polarity, train, u(rng), u(rng)));
        }
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("p_err arithmetic") {
  CHECK_THAT(p_err(0.2, 0.6), WithinAbs(0.25, 1e-15));
  for (double x : {1e-12, 0.3, 1.0, 7.0}) CHECK(p_err(x, x) == 0.5);
  CHECK(p_err(0.0, 0.4) == 0.0);
  CHECK(p_err(0.4, 0.0) == 1.0);
  CHECK_THROWS_AS(p_err(0.0, 0.0), Error);
  CHECK_THROWS_AS(p_err(-0.1, 0.5), Error);
  CHECK_THROWS_AS(p_err(std::nan(""), 0.5), Error);
}

TEST_CASE("p_err is invariant to common rescaling") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng) + 1e-9, s = std::exp(10.0 * (u(rng) - 0.5));
    CHECK_THAT(p_err(a * s, b * s), WithinAbs(p_err(a, b), 1e-12));
  }
}

TEST_CASE("accuracy tie rule and the p_err identity") {
  CHECK_FALSE(is_correct(0.3, 0.3));
  CHECK(is_correct(0.31, 0.3));
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> level(0, 4);
  std::vector<AgreementRecord> before, after;
  for (int i = 0; i < 500; ++i) {
    // Coarse levels make ties frequent.
    before.push_back(record("i" + std::to_string(i), 0.2 * level(rng), 0.2 + 0.2 * level(rng)));
    after.push_back(record("i" + std::to_string(i), 0.2 + 0.2 * level(rng), 0.2 + 0.2 * level(rng)));
  }
  const auto flip = accuracy_flip(before, after);
  long at_least_half = 0;
  for (const auto& r : after) at_least_half += r.error() >= 0.5 ? 1 : 0;
  CHECK(flip.accuracy_after == static_cast<double>(500 - at_least_half) / 500.0);
}

TEST_CASE("accuracy_flip examples") {
  std::vector<AgreementRecord> wrong{record("a", 0.1, 0.9), record("b", 0.2, 0.7)};
  std::vector<AgreementRecord> fixed{record("a", 0.9, 0.1), record("b", 0.7, 0.2)};
  auto all = accuracy_flip(wrong, fixed);
  CHECK(all.flip_to_correct_rate == 1.0);
  CHECK(all.accuracy_after == 1.0);
  CHECK(all.originally_incorrect == 2);

  auto none = accuracy_flip(wrong, wrong);
  CHECK(none.flip_to_correct_rate == 0.0);
  CHECK(none.accuracy_after == 0.0);

  std::vector<AgreementRecord> tied{record("a", 0.5, 0.5), record("b", 0.9, 0.1)};
  auto tie = accuracy_flip(wrong, tied);
  CHECK(tie.accuracy_after == 0.5);
  CHECK(tie.flip_to_correct_rate == 0.5);

  CHECK_THROWS_AS(accuracy_flip(wrong, {record("a", 1, 0)}), Error);
  CHECK_THROWS_AS(accuracy_flip(wrong, {record("a", 1, 0), record("c", 1, 0)}), Error);
  CHECK_THROWS_AS(accuracy_flip({}, {}), Error);
}

TEST_CASE("group mean and standard error") {
  std::vector<AgreementRecord> rs{record("a", 1, 0), record("b", 1, 0), record("c", 0, 1), record("d", 0, 1)};
  const auto report = aggregate(rs);
  REQUIRE(report.rows.size() == 1);
  const auto& row = report.rows[0];
  CHECK(row.n == 4);
  CHECK(row.mean_p_err == 0.5);
  // sqrt(((0.5^2) * 4) / 3) / sqrt(4)
  CHECK_THAT(row.se_p_err, WithinAbs(std::sqrt(1.0 / 3.0) / 2.0, 1e-15));
  CHECK_THAT(row.se_p_err, WithinAbs(0.289, 5e-4));
  CHECK(row.accuracy == 0.5);
  CHECK(std::isnan(row.flip_rate));

  const auto single = aggregate({record("a", 0.2, 0.6)});
  CHECK(single.rows[0].n == 1);
  CHECK(single.rows[0].se_p_err == 0.0);
  CHECK(single.rows[0].single_record());
  CHECK_THROWS_AS(aggregate({}), Error);
  CHECK_THROWS_AS(mean_se({}), Error);
}

TEST_CASE("aggregate conserves counts and covers every input key") {
  const auto records = synthetic_run(3);
  const auto report = aggregate(records);
  long total = 0;
  std::set<GroupKey> keys;
  for (const auto& r : report.rows) {
    total += r.n;
    keys.insert(r.key);
    CHECK(r.mean_p_err >= 0.0);
    CHECK(r.mean_p_err <= 1.0);
  }
  CHECK(total == static_cast<long>(records.size()));
  std::set<GroupKey> expected;
  for (const auto& r : records) expected.insert(key_of(r));
  CHECK(keys == expected);

  // Oracle: recompute every base group mean directly.
  for (const auto& row : report.rows) {
    double sum = 0.0;
    long n = 0;
    for (const auto& r : records) {
      if (key_of(r) == row.key) sum += r.p_incorrect / (r.p_incorrect + r.p_correct), ++n;
    }
    CHECK(n == row.n);
    CHECK_THAT(row.mean_p_err, WithinAbs(sum / static_cast<double>(n), 1e-12));
  }
}

TEST_CASE("derived views: pooled, type means, same/cross and originally wrong") {
  std::vector<AgreementRecord> rs;
  auto orc = record("o", 0.8, 0.2);
  auto src = record("s", 0.1, 0.9);  // originally wrong
  src.rc_type_eval = "SRC";
  rs.push_back(orc);
  rs.push_back(src);
  rs.push_back(intervened(orc, 5, "positive", "ORC", 0.6, 0.4));
  rs.push_back(intervened(src, 5, "positive", "ORC", 0.7, 0.3));
  const auto report = aggregate(rs);
  const auto& d = report.derived_rows;

  const auto* pooled = find(d, "rc_attractor", "ORC", "all");
  REQUIRE(pooled);
  CHECK(pooled->n == 2);
  CHECK_THAT(pooled->mean_p_err, WithinAbs(0.35, 1e-12));
  CHECK(pooled->flip_rate == 1.0);

  const auto* same = find(d, "rc_attractor", "same", "ORC");
  const auto* cross = find(d, "rc_attractor", "cross", "SRC");
  REQUIRE(same);
  REQUIRE(cross);
  CHECK_THAT(same->mean_p_err, WithinAbs(0.4, 1e-12));
  CHECK_THAT(cross->mean_p_err, WithinAbs(0.3, 1e-12));
  CHECK(find(d, "rc_attractor", "same", "all")->n == 1);

  const auto* wrong = find(d, "rc_attractor:originally_wrong", "ORC", "SRC");
  REQUIRE(wrong);
  CHECK(wrong->n == 1);
  CHECK(wrong->accuracy == 1.0);
  const auto* wrong_base = find(d, "rc_attractor:originally_wrong", "-", "SRC", "none");
  REQUIRE(wrong_base);
  CHECK_THAT(wrong_base->mean_p_err, WithinAbs(0.9, 1e-12));

  const auto* type_mean = find(d, "rc_attractor", "ORC", "mean_of_types");
  REQUIRE(type_mean);
  CHECK_THAT(type_mean->mean_p_err, WithinAbs(0.35, 1e-12));
  CHECK(std::isnan(type_mean->accuracy));
}

TEST_CASE("unweighted type mean differs from the pooled mean") {
  std::vector<AgreementRecord> rs;
  for (int i = 0; i < 3; ++i) rs.push_back(record("o" + std::to_string(i), 1.0, 0.0));
  auto s = record("s", 0.0, 1.0);
  s.rc_type_eval = "SRC";
  rs.push_back(s);
  const auto report = aggregate(rs);
  CHECK_THAT(find(report.derived_rows, "rc_attractor", "-", "all", "none")->mean_p_err, WithinAbs(0.25, 1e-12));
  CHECK_THAT(find(report.derived_rows, "rc_attractor", "-", "mean_of_types", "none")->mean_p_err,
             WithinAbs(0.5, 1e-12));
}

TEST_CASE("same-layer baselines win over layer -1") {
  auto base = record("x", 0.9, 0.1);
  auto layered = base;
  layered.layer = 4;
  layered.p_correct = 0.1, layered.p_incorrect = 0.9;
  const auto cf = intervened(base, 4, "negative", "ORC", 0.8, 0.2);
  const auto report = aggregate({base, layered, cf});
  const auto* row = find(report.rows, "rc_attractor", "ORC", "ORC", "negative");
  REQUIRE(row);
  CHECK(row->flip_rate == 1.0);
  CHECK_THROWS_AS(aggregate({base, base}), Error);
}

TEST_CASE("record and results CSV round trip") {
  const auto records = synthetic_run(5);
  std::stringstream csv;
  write_records(csv, records);
  CHECK(csv.str().rfind(std::string(kRecordHeader) + "\n", 0) == 0);
  const auto back = read_records(csv);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(key_of(back[i]) == key_of(records[i]));
    CHECK(back[i].item_id == records[i].item_id);
    CHECK(back[i].p_correct == records[i].p_correct);
    CHECK(back[i].p_incorrect == records[i].p_incorrect);
    CHECK(back[i].subject_number == records[i].subject_number);
    CHECK(back[i].attractor_number == records[i].attractor_number);
  }

  const auto report = aggregate(records);
  std::stringstream results;
  write_results(results, report);
  const auto rows = read_results(results);
  REQUIRE(rows.size() == report.rows.size() + report.derived_rows.size());
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    CHECK(rows[i].key == report.rows[i].key);
    CHECK(rows[i].mean_p_err == report.rows[i].mean_p_err);
    CHECK(rows[i].se_p_err == report.rows[i].se_p_err);
    CHECK(std::isnan(rows[i].flip_rate) == std::isnan(report.rows[i].flip_rate));
  }

  std::istringstream bad_header("item,condition\n");
  CHECK_THROWS_AS(read_records(bad_header), Error);
  std::istringstream short_row(std::string(kRecordHeader) + "\na,b,c\n");
  CHECK_THROWS_AS(read_records(short_row), Error);
  std::istringstream bad_number(std::string(kRecordHeader) + "\na,c,ORC,sg,pl,-1,none,0,0,none,-,x,0.5\n");
  CHECK_THROWS_AS(read_records(bad_number), Error);
  std::istringstream bad_polarity(std::string(kRecordHeader) + "\na,c,ORC,sg,pl,-1,up,0,0,none,-,0.5,0.5\n");
  CHECK_THROWS_AS(read_records(bad_polarity), Error);
}

TEST_CASE("SVG plots and figure files") {
  Plot plot{"t <1>", "layer", "mean P(Err)", {{"a&b", {{0, 0.2, 0.05}, {1, 0.4, 0.05}}}}};
  std::ostringstream svg;
  write_svg(svg, plot);
  const auto text = svg.str();
  CHECK(text.rfind("<svg", 0) == 0);
  CHECK(text.find("t &lt;1&gt;") != std::string::npos);
  CHECK(text.find("a&amp;b") != std::string::npos);
  CHECK(text.find("</svg>") != std::string::npos);

  const auto dir = std::filesystem::temp_directory_path() / "alterrep_test_figures";
  std::filesystem::remove_all(dir);
  const auto written = write_figures(aggregate(synthetic_run(7)), dir);
  CHECK(written.size() == 5);
  for (const auto& p : written) {
    std::ifstream in(p);
    std::string first;
    std::getline(in, first);
    CHECK(first.rfind("<svg", 0) == 0);
  }
  std::filesystem::remove_all(dir);
}
