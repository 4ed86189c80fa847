#include "core/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "core/error.hpp"
#include "core/random.hpp"

namespace pprobit {
namespace detail {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  fail(ErrorCode::Parse, "line " + std::to_string(line) + ": " + what);
}

}  // namespace

double parse_number(const std::string& token, std::size_t line) {
  const char* begin = token.data();
  const char* end = token.data() + token.size();
  if (begin != end && *begin == '+') ++begin;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || begin == end)
    parse_fail(line, "'" + token + "' is not a number");
  if (!std::isfinite(v)) parse_fail(line, "non-finite value '" + token + "'");
  return v;
}

ParsedLabel parse_label(const std::string& token, std::size_t line) {
  const double v = parse_number(token, line);
  if (v == 1.0) return {1, false, false};
  if (v == 0.0) return {0, false, true};
  if (v == -1.0) return {0, true, false};
  parse_fail(line, "label '" + token + "' is not one of 0, 1, -1, +1");
}

void split_csv(const std::string& line, std::vector<std::string>& out) {
  out.clear();
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
}

bool parse_libsvm_line(const std::string& raw, std::size_t line_no, std::string& label,
                       std::vector<SparseEntry>& entries) {
  entries.clear();
  std::string line = raw.substr(0, raw.find('#'));
  std::istringstream in(line);
  if (!(in >> label)) return false;
  std::string tok;
  while (in >> tok) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos) parse_fail(line_no, "expected index:value, got '" + tok + "'");
    const std::string idx = tok.substr(0, colon);
    long long index = 0;
    const auto [ptr, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), index);
    if (ec != std::errc() || ptr != idx.data() + idx.size())
      parse_fail(line_no, "bad feature index '" + idx + "'");
    if (index <= 0) parse_fail(line_no, "feature indices are 1-based, got " + idx);
    entries.push_back({static_cast<std::size_t>(index), parse_number(tok.substr(colon + 1), line_no)});
  }
  return true;
}

}  // namespace detail

namespace {

struct LabelTracker {
  bool signed_seen = false;
  bool zero_seen = false;

  int take(const detail::ParsedLabel& l, std::size_t line) {
    signed_seen = signed_seen || l.signed_form;
    zero_seen = zero_seen || l.zero_form;
    if (signed_seen && zero_seen)
      fail(ErrorCode::Parse, "line " + std::to_string(line) + ": labels mix 0/1 and -1/+1 conventions");
    return l.value;
  }
  std::string mapping() const { return signed_seen ? "-1/+1" : "0/1"; }
};

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
  return in;
}

}  // namespace

LabeledDataset load_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in = open_or_throw(path);
  LabeledDataset ds;
  LabelTracker labels;
  std::vector<double> values;
  std::vector<std::string> fields;
  std::string line;
  std::size_t line_no = 0;
  std::size_t ncols = 0;
  std::size_t label_col = 0;
  bool header_pending = options.has_header;

  auto resolve_columns = [&](std::size_t count) {
    ncols = count;
    if (ncols < 2) fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": need at least one feature and a label");
    const long lc = options.label_column < 0 ? static_cast<long>(ncols) + options.label_column
                                             : options.label_column;
    if (lc < 0 || lc >= static_cast<long>(ncols))
      fail(ErrorCode::InvalidArgument, "label column " + std::to_string(options.label_column) + " is out of range");
    label_col = static_cast<std::size_t>(lc);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    detail::split_csv(line, fields);
    if (header_pending) {
      header_pending = false;
      resolve_columns(fields.size());
      for (std::size_t c = 0; c < fields.size(); ++c)
        if (c != label_col) ds.feature_names.push_back(fields[c]);
      continue;
    }
    if (ncols == 0) resolve_columns(fields.size());
    if (fields.size() != ncols)
      fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected " + std::to_string(ncols) +
                                 " fields, found " + std::to_string(fields.size()));
    for (std::size_t c = 0; c < ncols; ++c) {
      if (c == label_col)
        ds.y.push_back(labels.take(detail::parse_label(fields[c], line_no), line_no));
      else
        values.push_back(detail::parse_number(fields[c], line_no));
    }
  }
  if (ds.y.empty()) fail(ErrorCode::Parse, "'" + path + "' contains no data rows");
  const auto n = static_cast<Eigen::Index>(ds.y.size());
  const auto d = static_cast<Eigen::Index>(ncols - 1);
  ds.z = Eigen::Map<RowMatrix>(values.data(), n, d);
  ds.label_mapping = labels.mapping();
  return ds;
}

LabeledDataset load_libsvm(const std::string& path, std::size_t dim) {
  std::ifstream in = open_or_throw(path);
  LabeledDataset ds;
  LabelTracker labels;
  std::vector<std::vector<detail::SparseEntry>> rows;
  std::vector<detail::SparseEntry> entries;
  std::string line;
  std::string label;
  std::size_t line_no = 0;
  std::size_t width = dim;
  while (std::getline(in, line)) {
    ++line_no;
    if (!detail::parse_libsvm_line(line, line_no, label, entries)) continue;
    ds.y.push_back(labels.take(detail::parse_label(label, line_no), line_no));
    for (const auto& e : entries) width = std::max(width, e.index);
    rows.push_back(entries);
  }
  if (ds.y.empty()) fail(ErrorCode::Parse, "'" + path + "' contains no data rows");
  if (width == 0) fail(ErrorCode::Parse, "'" + path + "' has no features");
  ds.z = RowMatrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (const auto& e : rows[i])
      ds.z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(e.index - 1)) = e.value;
  ds.label_mapping = labels.mapping();
  return ds;
}

void write_csv(const LabeledDataset& ds, const std::string& path, bool header) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) fail(ErrorCode::Io, "cannot write '" + path + "'");
  if (header) {
    for (std::size_t j = 0; j < ds.cols(); ++j)
      std::fprintf(f, "%s,", j < ds.feature_names.size() ? ds.feature_names[j].c_str()
                                                         : ("x" + std::to_string(j + 1)).c_str());
    std::fprintf(f, "y\n");
  }
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    for (std::size_t j = 0; j < ds.cols(); ++j)
      std::fprintf(f, "%.17g,", ds.z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    std::fprintf(f, "%d\n", ds.y[i]);
  }
  if (std::fclose(f) != 0) fail(ErrorCode::Io, "error while writing '" + path + "'");
}

RowMatrix fold_labels(const LabeledDataset& ds, bool add_intercept) {
  const auto n = static_cast<Eigen::Index>(ds.rows());
  const Eigen::Index d = ds.z.cols() + (add_intercept ? 1 : 0);
  RowMatrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sign = ds.y[static_cast<std::size_t>(i)] == 1 ? -1.0 : 1.0;
    if (add_intercept) {
      x(i, 0) = sign;
      x.row(i).tail(d - 1) = sign * ds.z.row(i);
    } else {
      x.row(i) = sign * ds.z.row(i);
    }
  }
  return x;
}

void scale_features(LabeledDataset& ds) {
  ds.column_scale.assign(ds.cols(), 1.0);
  for (Eigen::Index j = 0; j < ds.z.cols(); ++j) {
    const double m = ds.z.col(j).cwiseAbs().maxCoeff();
    if (m > 0.0) {
      ds.z.col(j) /= m;
      ds.column_scale[static_cast<std::size_t>(j)] = m;
    }
  }
}

LabeledDataset make_synthetic(const SyntheticSpec& spec) {
  if (spec.n <= spec.d || spec.d == 0) fail(ErrorCode::InvalidArgument, "synthetic data needs n > d >= 1");
  if (!(spec.outlier_fraction >= 0.0 && spec.outlier_fraction < 1.0))
    fail(ErrorCode::InvalidArgument, "outlier_fraction must lie in [0, 1)");
  if (!(spec.outlier_scale > 1.0)) fail(ErrorCode::InvalidArgument, "outlier_scale must be > 1");

  const auto d = static_cast<Eigen::Index>(spec.d);
  Vector dir(d);
  rng::Cursor dcur(spec.seed, rng::kSynthDirection);
  do {
    for (Eigen::Index j = 0; j < d; ++j) dir[j] = dcur.next_normal();
  } while (dir.norm() == 0.0);
  dir /= dir.norm();

  const auto n_out = static_cast<std::size_t>(std::llround(spec.outlier_fraction * static_cast<double>(spec.n)));
  const std::size_t n_reg = spec.n - n_out;
  const std::size_t n_one = n_reg / 2;
  const double half = 0.5 * spec.target_separation;

  LabeledDataset ds;
  ds.z.resize(static_cast<Eigen::Index>(spec.n), d);
  ds.y.resize(spec.n);
  rng::Cursor noise(spec.seed, rng::kSynthNoise);
  for (std::size_t i = 0; i < spec.n; ++i) {
    double offset;
    int label;
    if (i < n_one) {
      label = 1;
      offset = half;
    } else if (i < n_reg) {
      label = 0;
      offset = -half;
    } else {
      label = 1;
      offset = -spec.outlier_scale * half;
    }
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < d; ++j) ds.z(r, j) = noise.next_normal() + offset * dir[j];
    ds.y[i] = label;
  }
  // Fisher-Yates on the keyed stream so the class blocks are interleaved.
  rng::Cursor shuffle(spec.seed, rng::kSynthShuffle);
  for (std::size_t i = spec.n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(shuffle.next_below(i + 1));
    if (j == i) continue;
    ds.z.row(static_cast<Eigen::Index>(i)).swap(ds.z.row(static_cast<Eigen::Index>(j)));
    std::swap(ds.y[i], ds.y[j]);
  }
  return ds;
}

}  // namespace pprobit
