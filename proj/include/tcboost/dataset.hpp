#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tcboost::data {

enum class ColumnKind { numeric, categorical };

struct RawColumn {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  std::vector<double> numeric;          // filled when kind == numeric
  std::vector<std::string> categorical; // filled when kind == categorical
};

/// Tabular data as read from disk, before binarization. Columns exclude the label.
struct RawDataset {
  std::vector<RawColumn> columns;
  std::string label_name = "label";
  std::vector<std::string> labels;  // raw label token per row
  std::string positive_label;       // raw token mapped to +1

  std::size_t rows() const { return labels.size(); }
};

/// M examples over D binary features, labels in {-1,+1}.
///
/// X is stored column-major (feature f occupies [f*M, (f+1)*M)), which is the
/// access pattern of split search.
class BinaryDataset {
public:
  BinaryDataset() = default;
  BinaryDataset(std::size_t m, std::size_t d, std::vector<std::uint8_t> x_col_major,
                std::vector<int> y, std::vector<std::string> feature_names = {});

  std::size_t size() const { return m_; }
  std::size_t features() const { return d_; }

  std::uint8_t at(std::size_t i, std::size_t f) const { return x_[f * m_ + i]; }
  const std::uint8_t* column(std::size_t f) const { return x_.data() + f * m_; }
  const std::vector<std::uint8_t>& x() const { return x_; }
  const std::vector<int>& y() const { return y_; }
  int label(std::size_t i) const { return y_[i]; }
  const std::vector<std::string>& feature_names() const { return names_; }

  /// Rows in the given order, e.g. one slice of a permutation.
  BinaryDataset subset(const std::vector<std::size_t>& rows) const;

private:
  std::size_t m_ = 0;
  std::size_t d_ = 0;
  std::vector<std::uint8_t> x_;
  std::vector<int> y_;
  std::vector<std::string> names_;
};

struct CsvSchema {
  std::string label = "label";
  std::optional<std::string> positive_label;
  /// Columns not listed here are inferred: numeric when every cell parses.
  std::map<std::string, ColumnKind> kinds;
};

RawDataset load_csv(const std::string& path, const CsvSchema& schema = {});
void write_csv(const RawDataset& raw, const std::string& path);
void write_csv(const BinaryDataset& data, const std::string& path);

struct BinarizeWarning {
  std::string column;
  std::string message;
};

/// Quantile-bin numeric columns and drop-first one-hot categoricals.
BinaryDataset binarize(const RawDataset& raw, int bins = 4,
                       std::vector<BinarizeWarning>* warnings = nullptr);

/// True when every feature column holds only "0"/"1" values; such a table is
/// used as-is instead of being binned.
bool is_binary_table(const RawDataset& raw);

/// Binary tables pass through, anything else is binarized.
BinaryDataset to_binary(const RawDataset& raw, int bins = 4,
                        std::vector<BinarizeWarning>* warnings = nullptr);

struct SplitSpec {
  double train = 0.6;
  double validation = 0.2;
  double test = 0.2;
  std::uint64_t seed = 0;
};

struct SplitIndices {
  std::vector<std::size_t> train, validation, test;
};

struct Split {
  BinaryDataset train, validation, test;
};

SplitIndices split_indices(std::size_t m, const SplitSpec& spec);
Split split(const BinaryDataset& data, const SplitSpec& spec);

/// Two 20-dimensional Gaussians with means +-a*1, a = 2/sqrt(20), identity covariance.
RawDataset gen_twonorm(std::size_t n, std::uint64_t seed);
/// Class +1 ~ N(0, 4I), class -1 ~ N(a*1, I) with a = 1/sqrt(20), 20 dimensions.
RawDataset gen_ringnorm(std::size_t n, std::uint64_t seed);

}  // namespace tcboost::data
