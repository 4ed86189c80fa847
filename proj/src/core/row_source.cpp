#include "core/row_source.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "core/error.hpp"

namespace pprobit {

void MatrixRowSource::begin_pass() {
  ++passes_;
  cursor_ = 0;
}

bool MatrixRowSource::next(std::vector<double>& row) {
  if (cursor_ >= x_.rows()) return false;
  row.assign(x_.row(cursor_).data(), x_.row(cursor_).data() + x_.cols());
  ++cursor_;
  return true;
}

FileRowSource::FileRowSource(std::string path, FileSourceOptions options)
    : path_(std::move(path)), opt_(options) {
  std::error_code ec;
  file_bytes_ = std::filesystem::file_size(path_, ec);
  if (ec) fail(ErrorCode::Io, "cannot open '" + path_ + "'");
  if (opt_.format == FileFormat::Libsvm) {
    if (opt_.libsvm_dim == 0)
      fail(ErrorCode::InvalidArgument, "streaming LIBSVM input needs the feature count up front");
    raw_cols_ = opt_.libsvm_dim;
  }
}

void FileRowSource::open() {
  in_.close();
  in_.clear();
  in_.open(path_);
  if (!in_) fail(ErrorCode::Io, "cannot open '" + path_ + "'");
  ++passes_;
  line_no_ = 0;
  header_skipped_ = !(opt_.format == FileFormat::Csv && opt_.csv.has_header);
  rows_this_pass_ = 0;
}

void FileRowSource::begin_pass() {
  if (opt_.scale_features && scale_.empty()) scan_column_maxima();
  open();
}

void FileRowSource::scan_column_maxima() {
  open();
  std::vector<double> z;
  int y = 0;
  while (read_raw(z, y)) {
    if (scale_.empty()) scale_.assign(z.size(), 0.0);
    for (std::size_t j = 0; j < z.size(); ++j) scale_[j] = std::max(scale_[j], std::fabs(z[j]));
  }
  for (auto& s : scale_)
    if (s == 0.0) s = 1.0;
}

bool FileRowSource::read_raw(std::vector<double>& z, int& y) {
  while (std::getline(in_, line_)) {
    ++line_no_;
    if (opt_.format == FileFormat::Csv) {
      if (line_.find_first_not_of(" \t\r\n") == std::string::npos) continue;
      detail::split_csv(line_, fields_);
      if (!header_skipped_) {
        header_skipped_ = true;
        continue;
      }
      if (raw_cols_ == 0) {
        if (fields_.size() < 2) fail(ErrorCode::Parse, "line " + std::to_string(line_no_) + ": need a feature and a label");
        const long n = static_cast<long>(fields_.size());
        const long lc = opt_.csv.label_column < 0 ? n + opt_.csv.label_column : opt_.csv.label_column;
        if (lc < 0 || lc >= n) fail(ErrorCode::InvalidArgument, "label column is out of range");
        label_col_ = static_cast<std::size_t>(lc);
        raw_cols_ = fields_.size() - 1;
      }
      if (fields_.size() != raw_cols_ + 1)
        fail(ErrorCode::Parse, "line " + std::to_string(line_no_) + ": expected " +
                                   std::to_string(raw_cols_ + 1) + " fields, found " +
                                   std::to_string(fields_.size()));
      z.resize(raw_cols_);
      std::size_t k = 0;
      detail::ParsedLabel label{};
      for (std::size_t c = 0; c < fields_.size(); ++c) {
        if (c == label_col_)
          label = detail::parse_label(fields_[c], line_no_);
        else
          z[k++] = detail::parse_number(fields_[c], line_no_);
      }
      signed_labels_ = signed_labels_ || label.signed_form;
      zero_labels_ = zero_labels_ || label.zero_form;
      y = label.value;
    } else {
      if (!detail::parse_libsvm_line(line_, line_no_, label_, entries_)) continue;
      const auto label = detail::parse_label(label_, line_no_);
      signed_labels_ = signed_labels_ || label.signed_form;
      zero_labels_ = zero_labels_ || label.zero_form;
      y = label.value;
      z.assign(raw_cols_, 0.0);
      for (const auto& e : entries_) {
        if (e.index > raw_cols_)
          fail(ErrorCode::Parse, "line " + std::to_string(line_no_) + ": feature index " +
                                     std::to_string(e.index) + " exceeds the declared dimension");
        z[e.index - 1] = e.value;
      }
    }
    if (signed_labels_ && zero_labels_)
      fail(ErrorCode::Parse, "line " + std::to_string(line_no_) + ": labels mix 0/1 and -1/+1 conventions");
    return true;
  }
  if (in_.bad()) fail(ErrorCode::Io, "read error on '" + path_ + "'");
  return false;
}

bool FileRowSource::next(std::vector<double>& row) {
  int y = 0;
  if (!read_raw(raw_, y)) {
    if (!rows_known_) {
      rows_total_ = rows_this_pass_;
      rows_known_ = true;
    }
    return false;
  }
  ++rows_this_pass_;
  if (!scale_.empty())
    for (std::size_t j = 0; j < raw_.size(); ++j) raw_[j] /= scale_[j];
  const double sign = y == 1 ? -1.0 : 1.0;
  row.clear();
  if (opt_.add_intercept) row.push_back(sign);
  for (const double v : raw_) row.push_back(sign * v);
  return true;
}

std::size_t FileRowSource::dim() const {
  if (raw_cols_ == 0) fail(ErrorCode::InvalidArgument, "row width is unknown before the first row");
  return raw_cols_ + (opt_.add_intercept ? 1 : 0);
}

std::size_t FileRowSource::rows_hint() const {
  if (rows_known_) return rows_total_;
  // Every row needs at least two bytes per field ("0," / "0\n") for CSV and
  // two bytes ("1\n") for LIBSVM.
  const std::size_t min_row =
      opt_.format == FileFormat::Csv ? 2 * std::max<std::size_t>(raw_cols_ + 1, 2) : 2;
  return std::max<std::size_t>(1, static_cast<std::size_t>(file_bytes_) / min_row + 1);
}

std::string FileRowSource::label_mapping() const { return signed_labels_ ? "-1/+1" : "0/1"; }

}  // namespace pprobit
