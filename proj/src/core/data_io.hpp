#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "core/types.hpp"

namespace pprobit {

/// Raw observations (z_i, y_i) with labels mapped to {0, 1}.
struct LabeledDataset {
  RowMatrix z;
  std::vector<int> y;
  std::vector<std::string> feature_names;
  std::string label_mapping = "0/1";   // or "-1/+1" when the source used signed labels
  std::vector<double> column_scale;    // non-empty after scale_features

  std::size_t rows() const noexcept { return y.size(); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(z.cols()); }
};

struct CsvOptions {
  bool has_header = false;
  /// Column holding the label; negative values count from the end (-1 = last).
  long label_column = -1;
};

LabeledDataset load_csv(const std::string& path, const CsvOptions& options = {});

/// Sparse "label idx:value ..." text with 1-based indices. The feature count
/// is the largest index seen, or `dim` if that is larger.
LabeledDataset load_libsvm(const std::string& path, std::size_t dim = 0);

/// Writes z columns then the 0/1 label, full precision.
void write_csv(const LabeledDataset& ds, const std::string& path, bool header = false);

/// x_i = -(2 y_i - 1) z_i, with a leading 1 appended to z_i first when
/// `add_intercept` is set.
RowMatrix fold_labels(const LabeledDataset& ds, bool add_intercept);

/// Divides each column by its largest absolute value (all-zero columns are
/// left alone) and records the divisors.
void scale_features(LabeledDataset& ds);

struct SyntheticSpec {
  std::size_t n = 1000;
  std::size_t d = 2;
  std::uint64_t seed = 1;
  double outlier_fraction = 0.0;
  double outlier_scale = 10.0;
  double target_separation = 2.0;
};

/// Two unit-variance Gaussian classes centred at +-separation/2 along a random
/// direction; round(outlier_fraction * n) extra label-1 points sit at
/// -outlier_scale * separation/2 along that direction.
LabeledDataset make_synthetic(const SyntheticSpec& spec);

// Line-level parsers shared by the in-memory loaders and the streaming readers.
namespace detail {

struct ParsedLabel {
  int value;      // 0 or 1 after mapping
  bool signed_form;  // -1 seen
  bool zero_form;    // 0 seen
};

ParsedLabel parse_label(const std::string& token, std::size_t line);
double parse_number(const std::string& token, std::size_t line);
/// Splits a CSV line on commas, trimming whitespace.
void split_csv(const std::string& line, std::vector<std::string>& out);

struct SparseEntry {
  std::size_t index;  // 1-based
  double value;
};
/// Parses one LIBSVM line; returns false for blank/comment lines.
bool parse_libsvm_line(const std::string& line, std::size_t line_no, std::string& label,
                       std::vector<SparseEntry>& entries);

}  // namespace detail

}  // namespace pprobit
