#pragma once

#include <cstddef>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "core/data_io.hpp"
#include "core/types.hpp"

namespace pprobit {

/// Sequential access to folded rows x_i, one pass at a time. Each
/// `begin_pass` is counted so callers can verify how often the data was read.
class RowSource {
 public:
  virtual ~RowSource() = default;

  virtual void begin_pass() = 0;
  /// Next folded row, or false at the end of the pass. The span stays valid
  /// until the following call.
  virtual bool next(std::vector<double>& row) = 0;
  /// Row width; for file sources only known once a row has been read.
  virtual std::size_t dim() const = 0;
  /// Exact row count, or an upper bound when `rows_exact()` is false.
  virtual std::size_t rows_hint() const = 0;
  virtual bool rows_exact() const = 0;

  std::size_t passes() const noexcept { return passes_; }

 protected:
  std::size_t passes_ = 0;
};

class MatrixRowSource final : public RowSource {
 public:
  explicit MatrixRowSource(const RowMatrix& x) : x_(x) {}

  void begin_pass() override;
  bool next(std::vector<double>& row) override;
  std::size_t dim() const override { return static_cast<std::size_t>(x_.cols()); }
  std::size_t rows_hint() const override { return static_cast<std::size_t>(x_.rows()); }
  bool rows_exact() const override { return true; }

 private:
  const RowMatrix& x_;
  Eigen::Index cursor_ = 0;
};

enum class FileFormat { Csv, Libsvm };

struct FileSourceOptions {
  FileFormat format = FileFormat::Csv;
  CsvOptions csv;
  std::size_t libsvm_dim = 0;  // required for streaming LIBSVM input
  bool add_intercept = false;
  bool scale_features = false;  // costs one extra pass for the column maxima
};

/// Streams and folds rows straight from a CSV or LIBSVM file, reopening the
/// file for every pass.
class FileRowSource final : public RowSource {
 public:
  FileRowSource(std::string path, FileSourceOptions options);

  void begin_pass() override;
  bool next(std::vector<double>& row) override;
  std::size_t dim() const override;
  std::size_t rows_hint() const override;
  bool rows_exact() const override { return rows_known_; }

  /// Label convention observed so far ("0/1" or "-1/+1").
  std::string label_mapping() const;
  const std::vector<double>& column_scale() const noexcept { return scale_; }

 private:
  bool read_raw(std::vector<double>& z, int& y);
  void open();
  void scan_column_maxima();

  std::string path_;
  FileSourceOptions opt_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
  std::size_t raw_cols_ = 0;      // features only
  std::size_t label_col_ = 0;
  bool header_skipped_ = false;
  std::size_t rows_this_pass_ = 0;
  std::size_t rows_total_ = 0;
  bool rows_known_ = false;
  std::uintmax_t file_bytes_ = 0;
  bool signed_labels_ = false;
  bool zero_labels_ = false;
  std::vector<double> scale_;
  std::vector<double> raw_;
  std::vector<std::string> fields_;
  std::vector<detail::SparseEntry> entries_;
  std::string line_;
  std::string label_;
};

}  // namespace pprobit
