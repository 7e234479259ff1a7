#include "tcboost/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "csv.hpp"
#include "tcboost/error.hpp"

namespace tcboost::data {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& raw, double& out) {
  std::string s = trim(raw);
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

BinaryDataset::BinaryDataset(std::size_t m, std::size_t d, std::vector<std::uint8_t> x_col_major,
                             std::vector<int> y, std::vector<std::string> feature_names)
    : m_(m), d_(d), x_(std::move(x_col_major)), y_(std::move(y)), names_(std::move(feature_names)) {
  if (m_ == 0 || d_ == 0) throw ValidationError("binary dataset needs M >= 1 and D >= 1");
  if (x_.size() != m_ * d_ || y_.size() != m_)
    throw ValidationError("binary dataset: inconsistent dimensions");
  for (auto v : x_)
    if (v > 1) throw ValidationError("binary dataset: feature entry outside {0,1}");
  for (int v : y_)
    if (v != 1 && v != -1) throw ValidationError("binary dataset: label outside {-1,+1}");
  if (names_.empty()) {
    names_.reserve(d_);
    for (std::size_t f = 0; f < d_; ++f) names_.push_back("f" + std::to_string(f));
  }
  if (names_.size() != d_) throw ValidationError("binary dataset: feature name count != D");
}

BinaryDataset BinaryDataset::subset(const std::vector<std::size_t>& rows) const {
  const std::size_t m = rows.size();
  std::vector<std::uint8_t> x(m * d_);
  std::vector<int> y(m);
  for (std::size_t f = 0; f < d_; ++f) {
    const std::uint8_t* src = column(f);
    std::uint8_t* dst = x.data() + f * m;
    for (std::size_t k = 0; k < m; ++k) dst[k] = src[rows[k]];
  }
  for (std::size_t k = 0; k < m; ++k) y[k] = y_[rows[k]];
  return BinaryDataset(m, d_, std::move(x), std::move(y), names_);
}

RawDataset load_csv(const std::string& path, const CsvSchema& schema) {
  auto rows = csv::read_file(path);
  if (rows.empty()) throw ValidationError(path + ": missing header row");
  const auto& header = rows.front();
  auto label_it = std::find(header.begin(), header.end(), schema.label);
  if (label_it == header.end())
    throw ValidationError(path + ": label column '" + schema.label + "' not found");
  const std::size_t label_col = static_cast<std::size_t>(label_it - header.begin());
  const std::size_t n = rows.size() - 1;
  if (n == 0) throw ValidationError(path + ": no data rows");
  for (std::size_t r = 1; r < rows.size(); ++r)
    if (rows[r].size() != header.size())
      throw ValidationError(path + ": row " + std::to_string(r) + " has " +
                            std::to_string(rows[r].size()) + " fields, header has " +
                            std::to_string(header.size()));

  RawDataset raw;
  raw.label_name = schema.label;
  raw.labels.reserve(n);
  for (std::size_t r = 1; r < rows.size(); ++r) raw.labels.push_back(trim(rows[r][label_col]));

  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == label_col) continue;
    RawColumn col;
    col.name = header[c];
    auto declared = schema.kinds.find(col.name);
    std::vector<double> parsed(n);
    bool all_numeric = true;
    for (std::size_t r = 0; r < n && all_numeric; ++r)
      all_numeric = parse_double(rows[r + 1][c], parsed[r]);
    if (declared != schema.kinds.end() && declared->second == ColumnKind::numeric && !all_numeric) {
      for (std::size_t r = 0; r < n; ++r) {
        double tmp;
        if (!parse_double(rows[r + 1][c], tmp))
          throw ValidationError(path + ": unparseable numeric value '" + rows[r + 1][c] +
                                "' at row " + std::to_string(r + 1) + ", column '" + col.name +
                                "'");
      }
    }
    const bool numeric = declared != schema.kinds.end()
                             ? declared->second == ColumnKind::numeric
                             : all_numeric;
    if (numeric) {
      col.kind = ColumnKind::numeric;
      col.numeric = std::move(parsed);
    } else {
      col.kind = ColumnKind::categorical;
      col.categorical.reserve(n);
      for (std::size_t r = 0; r < n; ++r) col.categorical.push_back(trim(rows[r + 1][c]));
    }
    raw.columns.push_back(std::move(col));
  }

  std::set<std::string> classes(raw.labels.begin(), raw.labels.end());
  if (classes.size() != 2)
    throw ValidationError(path + ": label not binary (" + std::to_string(classes.size()) +
                          " distinct values in column '" + schema.label + "')");
  if (schema.positive_label) {
    if (!classes.count(*schema.positive_label))
      throw ValidationError(path + ": positive label '" + *schema.positive_label +
                            "' does not occur in the label column");
    raw.positive_label = *schema.positive_label;
  } else {
    raw.positive_label = *classes.rbegin();
  }
  return raw;
}

void write_csv(const RawDataset& raw, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path);
  csv::Row row;
  for (const auto& c : raw.columns) row.push_back(c.name);
  row.push_back(raw.label_name);
  csv::write_row(out, row);
  for (std::size_t r = 0; r < raw.rows(); ++r) {
    row.clear();
    for (const auto& c : raw.columns)
      row.push_back(c.kind == ColumnKind::numeric ? format_double(c.numeric[r]) : c.categorical[r]);
    row.push_back(raw.labels[r]);
    csv::write_row(out, row);
  }
}

void write_csv(const BinaryDataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path);
  csv::Row row(data.feature_names());
  row.push_back("label");
  csv::write_row(out, row);
  std::string line;
  for (std::size_t i = 0; i < data.size(); ++i) {
    line.clear();
    for (std::size_t f = 0; f < data.features(); ++f) {
      line.push_back(data.at(i, f) ? '1' : '0');
      line.push_back(',');
    }
    line += data.label(i) > 0 ? "1" : "-1";
    out << line << '\n';
  }
}

BinaryDataset binarize(const RawDataset& raw, int bins, std::vector<BinarizeWarning>* warnings) {
  if (bins < 1) throw ValidationError("binarize: bins must be positive");
  const std::size_t m = raw.rows();
  if (m == 0) throw ValidationError("binarize: empty dataset");
  std::vector<std::vector<std::uint8_t>> cols;
  std::vector<std::string> names;

  for (const auto& col : raw.columns) {
    if (col.kind == ColumnKind::numeric) {
      std::vector<double> sorted = col.numeric;
      std::sort(sorted.begin(), sorted.end());
      if (sorted.front() == sorted.back()) {
        if (warnings) warnings->push_back({col.name, "constant numeric column dropped"});
        continue;
      }
      // Upper edge of bin k is the ceil((k+1)M/bins)-th order statistic; a
      // value equal to an edge stays in the lower bin.
      std::vector<double> edges;
      for (int k = 1; k < bins; ++k) {
        std::size_t pos = (static_cast<std::size_t>(k) * m + bins - 1) / bins;
        edges.push_back(sorted[pos - 1]);
      }
      std::vector<std::vector<std::uint8_t>> onehot(bins, std::vector<std::uint8_t>(m, 0));
      for (std::size_t i = 0; i < m; ++i) {
        auto b = std::lower_bound(edges.begin(), edges.end(), col.numeric[i]) - edges.begin();
        onehot[b][i] = 1;
      }
      for (int k = 0; k < bins; ++k) {
        cols.push_back(std::move(onehot[k]));
        names.push_back(col.name + "_bin" + std::to_string(k));
      }
    } else {
      std::set<std::string> cats(col.categorical.begin(), col.categorical.end());
      if (cats.size() < 2 && warnings)
        warnings->push_back({col.name, "single-category column dropped"});
      bool first = true;
      for (const auto& cat : cats) {
        if (first) {
          first = false;
          continue;
        }
        std::vector<std::uint8_t> ind(m);
        for (std::size_t i = 0; i < m; ++i) ind[i] = col.categorical[i] == cat ? 1 : 0;
        cols.push_back(std::move(ind));
        names.push_back(col.name + "=" + cat);
      }
    }
  }
  if (cols.empty()) throw ValidationError("binarize: no informative feature columns");
  std::vector<std::uint8_t> x;
  x.reserve(cols.size() * m);
  for (auto& c : cols) x.insert(x.end(), c.begin(), c.end());
  std::vector<int> y(m);
  for (std::size_t i = 0; i < m; ++i) y[i] = raw.labels[i] == raw.positive_label ? 1 : -1;
  return BinaryDataset(m, cols.size(), std::move(x), std::move(y), std::move(names));
}

bool is_binary_table(const RawDataset& raw) {
  for (const auto& col : raw.columns) {
    if (col.kind == ColumnKind::numeric) {
      for (double v : col.numeric)
        if (v != 0.0 && v != 1.0) return false;
    } else {
      for (const auto& v : col.categorical)
        if (v != "0" && v != "1") return false;
    }
  }
  return !raw.columns.empty();
}

BinaryDataset to_binary(const RawDataset& raw, int bins, std::vector<BinarizeWarning>* warnings) {
  if (!is_binary_table(raw)) return binarize(raw, bins, warnings);
  const std::size_t m = raw.rows();
  std::vector<std::uint8_t> x;
  std::vector<std::string> names;
  x.reserve(raw.columns.size() * m);
  for (const auto& col : raw.columns) {
    names.push_back(col.name);
    for (std::size_t i = 0; i < m; ++i)
      x.push_back(col.kind == ColumnKind::numeric ? col.numeric[i] == 1.0
                                                  : col.categorical[i] == "1");
  }
  std::vector<int> y(m);
  for (std::size_t i = 0; i < m; ++i) y[i] = raw.labels[i] == raw.positive_label ? 1 : -1;
  return BinaryDataset(m, raw.columns.size(), std::move(x), std::move(y), std::move(names));
}

SplitIndices split_indices(std::size_t m, const SplitSpec& spec) {
  for (double f : {spec.train, spec.validation, spec.test})
    if (!(f > 0.0 && f < 1.0)) throw ValidationError("split: fractions must lie in (0,1)");
  if (std::abs(spec.train + spec.validation + spec.test - 1.0) > 1e-12)
    throw ValidationError("split: fractions must sum to 1");
  if (m < 3) throw ValidationError("split: need at least 3 examples");
  const auto n_val = static_cast<std::size_t>(std::llround(spec.validation * m));
  const auto n_test = static_cast<std::size_t>(std::llround(spec.test * m));
  if (n_val == 0 || n_test == 0 || n_val + n_test >= m)
    throw ValidationError("split: a slice would be empty");
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(spec.seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  const std::size_t n_train = m - n_val - n_test;
  SplitIndices out;
  out.train.assign(perm.begin(), perm.begin() + n_train);
  out.validation.assign(perm.begin() + n_train, perm.begin() + n_train + n_val);
  out.test.assign(perm.begin() + n_train + n_val, perm.end());
  return out;
}

Split split(const BinaryDataset& data, const SplitSpec& spec) {
  auto idx = split_indices(data.size(), spec);
  return {data.subset(idx.train), data.subset(idx.validation), data.subset(idx.test)};
}

namespace {

constexpr int kGaussDims = 20;

template <class Sampler>
RawDataset gaussian_pair(std::size_t n, std::uint64_t seed, Sampler sample) {
  if (n == 0) throw ValidationError("generator: n must be at least 1");
  RawDataset raw;
  raw.columns.resize(kGaussDims);
  for (int d = 0; d < kGaussDims; ++d) {
    raw.columns[d].name = "x" + std::to_string(d);
    raw.columns[d].numeric.resize(n);
  }
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> normal(0.0, 1.0);
  raw.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool positive = coin(rng);
    raw.labels[i] = positive ? "1" : "-1";
    for (int d = 0; d < kGaussDims; ++d) raw.columns[d].numeric[i] = sample(positive, normal(rng));
  }
  raw.positive_label = "1";
  return raw;
}

}  // namespace

RawDataset gen_twonorm(std::size_t n, std::uint64_t seed) {
  const double a = 2.0 / std::sqrt(20.0);
  return gaussian_pair(n, seed, [a](bool pos, double z) { return (pos ? a : -a) + z; });
}

RawDataset gen_ringnorm(std::size_t n, std::uint64_t seed) {
  const double a = 1.0 / std::sqrt(20.0);
  return gaussian_pair(n, seed, [a](bool pos, double z) { return pos ? 2.0 * z : a + z; });
}

}  // namespace tcboost::data
