#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "tcboost/dataset.hpp"
#include "tcboost/error.hpp"

using namespace tcboost;
using namespace tcboost::data;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& body) {
  const auto dir = fs::temp_directory_path() / "tcboost_test_dataset";
  fs::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path) << body;
  return path;
}

RawDataset numeric_column(std::vector<double> values) {
  RawDataset raw;
  RawColumn c;
  c.name = "v";
  c.numeric = std::move(values);
  raw.columns.push_back(c);
  for (std::size_t i = 0; i < raw.columns[0].numeric.size(); ++i)
    raw.labels.push_back(i % 2 ? "a" : "b");
  raw.positive_label = "b";
  return raw;
}

RawColumn categorical(const std::string& name, std::vector<std::string> v) {
  RawColumn c;
  c.name = name;
  c.kind = ColumnKind::categorical;
  c.categorical = std::move(v);
  return c;
}

double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("load_csv parses numeric and categorical columns") {
  const auto path = write_temp("three.csv", "a,c,label\n1.5,red,yes\n2,blue,no\n-3,red,yes\n");
  const auto raw = load_csv(path.string());
  CHECK(raw.rows() == 3);
  REQUIRE(raw.columns.size() == 2);
  CHECK(raw.columns[0].kind == ColumnKind::numeric);
  CHECK(raw.columns[0].numeric[2] == -3.0);
  CHECK(raw.columns[1].kind == ColumnKind::categorical);
  CHECK(raw.positive_label == "yes");
}

TEST_CASE("load_csv reports the row and column of a bad numeric cell") {
  const auto path = write_temp("bad.csv", "a,label\n1,x\nfoo,y\n");
  CsvSchema schema;
  schema.kinds["a"] = ColumnKind::numeric;
  try {
    load_csv(path.string(), schema);
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("'a'") != std::string::npos);
  }
}

TEST_CASE("load_csv rejects non-binary labels, missing files and missing label columns") {
  const auto three = write_temp("three_labels.csv", "a,label\n1,x\n2,y\n3,z\n");
  CHECK_THROWS_WITH_AS(load_csv(three.string()), doctest::Contains("label not binary"),
                       ValidationError);
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv"), ValidationError);
  const auto nolabel = write_temp("nolabel.csv", "a,b\n1,2\n");
  CHECK_THROWS_AS(load_csv(nolabel.string()), ValidationError);
}

TEST_CASE("load_csv honours an explicit positive label") {
  const auto path = write_temp("pos.csv", "a,label\n1,yes\n2,no\n");
  CsvSchema schema;
  schema.positive_label = "no";
  const auto b = to_binary(load_csv(path.string(), schema), 1);
  CHECK(b.label(0) == -1);
  CHECK(b.label(1) == 1);
}

TEST_CASE("quantile binning of 1..8 into four bins") {
  const auto b = binarize(numeric_column({1, 2, 3, 4, 5, 6, 7, 8}), 4);
  REQUIRE(b.features() == 4);
  CHECK(b.at(0, 0) == 1);
  for (int f = 1; f < 4; ++f) CHECK(b.at(0, f) == 0);
  for (int f = 0; f < 3; ++f) CHECK(b.at(7, f) == 0);
  CHECK(b.at(7, 3) == 1);
}

TEST_CASE("categorical columns drop the first category") {
  RawDataset raw;
  raw.columns.push_back(categorical("c", {"b", "a", "c", "a"}));
  raw.labels = {"p", "n", "p", "n"};
  raw.positive_label = "p";
  const auto b = binarize(raw);
  REQUIRE(b.features() == 2);
  CHECK(b.feature_names()[0] == "c=b");
  CHECK(b.feature_names()[1] == "c=c");
  CHECK(b.at(1, 0) == 0);
  CHECK(b.at(1, 1) == 0);
  CHECK(b.at(0, 0) == 1);
}

TEST_CASE("mixed dataset width is 2*4 + 2") {
  RawDataset raw = numeric_column({1, 2, 3, 4, 5, 6});
  RawColumn second;
  second.name = "w";
  second.numeric = {6, 5, 4, 3, 2, 1};
  raw.columns.push_back(second);
  raw.columns.push_back(categorical("c", {"x", "y", "z", "x", "y", "z"}));
  CHECK(binarize(raw).features() == 10);
}

TEST_CASE("constant numeric column is dropped with a warning") {
  RawDataset raw = numeric_column({1, 2, 3, 4});
  RawColumn flat;
  flat.name = "flat";
  flat.numeric = {7, 7, 7, 7};
  raw.columns.push_back(flat);
  std::vector<BinarizeWarning> warnings;
  const auto b = binarize(raw, 4, &warnings);
  CHECK(b.features() == 4);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].column == "flat");
}

TEST_CASE("binary matrix re-binarized as categorical reproduces the indicators") {
  const auto raw = gen_twonorm(50, 3);
  const auto b = binarize(raw);
  RawDataset again;
  again.labels = raw.labels;
  again.positive_label = raw.positive_label;
  for (std::size_t f = 0; f < b.features(); ++f) {
    std::vector<std::string> v;
    for (std::size_t i = 0; i < b.size(); ++i) v.push_back(b.at(i, f) ? "1" : "0");
    again.columns.push_back(categorical(b.feature_names()[f], v));
  }
  const auto b2 = binarize(again);
  CHECK(b2.features() == b.features());
  CHECK(b2.x() == b.x());
  CHECK(b2.y() == b.y());
}

TEST_CASE("bins hold between floor(M/4)-1 and ceil(M/4)+1 distinct values") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  for (std::size_t m : {4u, 7u, 10u, 33u, 101u, 1000u}) {
    std::vector<double> v(m);
    for (auto& x : v) x = normal(rng);
    const auto b = binarize(numeric_column(v), 4);
    for (std::size_t f = 0; f < b.features(); ++f) {
      std::size_t count = 0;
      for (std::size_t i = 0; i < m; ++i) count += b.at(i, f);
      CHECK(count + 1 >= m / 4);
      CHECK(count <= (m + 3) / 4 + 1);
    }
  }
}

TEST_CASE("split sizes, determinism and coverage") {
  SplitSpec spec{0.6, 0.2, 0.2, 1};
  const auto a = split_indices(100, spec);
  CHECK(a.train.size() == 60);
  CHECK(a.validation.size() == 20);
  CHECK(a.test.size() == 20);
  const auto b = split_indices(100, spec);
  CHECK(a.train == b.train);
  CHECK(a.validation == b.validation);
  CHECK(a.test == b.test);
  const auto small = split_indices(5, spec);
  CHECK(small.train.size() == 3);
  CHECK(small.validation.size() == 1);
  CHECK(small.test.size() == 1);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    spec.seed = seed;
    const auto s = split_indices(37 + seed, spec);
    std::vector<std::size_t> all;
    all.insert(all.end(), s.train.begin(), s.train.end());
    all.insert(all.end(), s.validation.begin(), s.validation.end());
    all.insert(all.end(), s.test.begin(), s.test.end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expect(37 + seed);
    std::iota(expect.begin(), expect.end(), 0);
    CHECK(all == expect);
  }
  spec.seed = 2;
  CHECK(split_indices(100, spec).train != a.train);
}

TEST_CASE("split rejects empty slices and bad fractions") {
  CHECK_THROWS_AS(split_indices(2, SplitSpec{}), ValidationError);
  CHECK_THROWS_AS(split_indices(100, SplitSpec{0.5, 0.2, 0.2, 0}), ValidationError);
  CHECK_THROWS_AS(split_indices(3, SplitSpec{0.98, 0.01, 0.01, 0}), ValidationError);
}

TEST_CASE("twonorm: Bayes rule accuracy near Phi(2) and balanced classes") {
  const auto raw = gen_twonorm(10000, 11);
  std::size_t correct = 0, positives = 0;
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    double s = 0.0;
    for (const auto& c : raw.columns) s += c.numeric[i];
    const bool pos = raw.labels[i] == raw.positive_label;
    positives += pos;
    correct += (s >= 0.0) == pos;
  }
  const double acc = static_cast<double>(correct) / 1e4;
  // Binomial standard error is about 0.0015.
  CHECK(std::abs(acc - phi(2.0)) < 0.006);
  const double frac = static_cast<double>(positives) / 1e4;
  CHECK(std::abs(frac - 0.5) < 0.015);
}

TEST_CASE("twonorm class +1 feature means converge to a") {
  const auto raw = gen_twonorm(20000, 4);
  const double a = 2.0 / std::sqrt(20.0);
  std::size_t n = 0;
  for (std::size_t i = 0; i < raw.rows(); ++i) n += raw.labels[i] == raw.positive_label;
  for (const auto& c : raw.columns) {
    double s = 0.0;
    for (std::size_t i = 0; i < raw.rows(); ++i)
      if (raw.labels[i] == raw.positive_label) s += c.numeric[i];
    CHECK(std::abs(s / static_cast<double>(n) - a) < 3.0 / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("ringnorm: likelihood-ratio classifier reaches 0.97") {
  const auto raw = gen_ringnorm(10000, 12);
  const double a = 1.0 / std::sqrt(20.0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    // log N(x; 0, 4I) - log N(x; a, I)
    double llr = 0.0;
    for (const auto& c : raw.columns) {
      const double x = c.numeric[i];
      llr += -x * x / 8.0 - std::log(2.0) + (x - a) * (x - a) / 2.0;
    }
    const bool pos = raw.labels[i] == raw.positive_label;
    correct += (llr >= 0.0) == pos;
  }
  CHECK(static_cast<double>(correct) / 1e4 >= 0.97);
}

TEST_CASE("generators are reproducible and reject n = 0") {
  const auto a = gen_twonorm(1, 9), b = gen_twonorm(1, 9);
  REQUIRE(a.columns.size() == 20);
  for (std::size_t d = 0; d < 20; ++d) CHECK(a.columns[d].numeric == b.columns[d].numeric);
  const auto r1 = gen_ringnorm(30, 2), r2 = gen_ringnorm(30, 2);
  CHECK(r1.labels == r2.labels);
  CHECK(r1.columns[5].numeric == r2.columns[5].numeric);
  CHECK_THROWS_AS(gen_ringnorm(0, 1), ValidationError);
  CHECK_THROWS_AS(gen_twonorm(0, 1), ValidationError);
}

TEST_CASE("BinaryDataset enforces its invariants") {
  CHECK_THROWS_AS(BinaryDataset(2, 1, {0, 2}, {1, -1}), ValidationError);
  CHECK_THROWS_AS(BinaryDataset(2, 1, {0, 1}, {1, 0}), ValidationError);
  CHECK_THROWS_AS(BinaryDataset(0, 1, {}, {}), ValidationError);
}

TEST_CASE("csv round trip of a binary dataset") {
  const auto b = binarize(gen_twonorm(40, 1));
  const auto path = fs::temp_directory_path() / "tcboost_test_dataset" / "rt.csv";
  write_csv(b, path.string());
  const auto back = to_binary(load_csv(path.string()));
  CHECK(back.x() == b.x());
  CHECK(back.y() == b.y());
  CHECK(back.feature_names() == b.feature_names());
}
