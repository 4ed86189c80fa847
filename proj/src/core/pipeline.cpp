#include "core/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>

#include "json.hpp"

#include "core/compensated.hpp"
#include "core/conditioning.hpp"
#include "core/error.hpp"
#include "core/online.hpp"
#include "core/parallel.hpp"
#include "core/sketching.hpp"

namespace pprobit {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Keeps the stream verbatim while it is no longer than k rows, so that a
// request with k >= n can return the data itself.
class SmallStreamBuffer {
 public:
  explicit SmallStreamBuffer(std::size_t k) : k_(k) {}

  void add(const std::vector<double>& row) {
    ++rows_;
    if (rows_ > k_) {
      if (!data_.empty()) std::vector<double>().swap(data_);
      return;
    }
    data_.insert(data_.end(), row.begin(), row.end());
  }

  bool holds_all() const noexcept { return rows_ > 0 && rows_ <= k_; }
  std::size_t bytes() const noexcept { return data_.capacity() * sizeof(double); }

  WeightedCoreset coreset(std::size_t d, const std::string& tag) const {
    WeightedCoreset c;
    const auto n = static_cast<Eigen::Index>(rows_);
    c.rows = Eigen::Map<const RowMatrix>(data_.data(), n, static_cast<Eigen::Index>(d));
    c.weights = Vector::Ones(n);
    c.source_indices.resize(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c.source_indices[i] = i;
    c.scores.assign(rows_, 1.0);
    c.total_score = static_cast<double>(rows_);
    c.method_tag = tag;
    return c;
  }

 private:
  std::size_t k_;
  std::size_t rows_ = 0;
  std::vector<double> data_;
};

class ScoreTracker {
 public:
  void add(double s) {
    min_ = std::min(min_, s);
    max_ = std::max(max_, s);
    sum_.add(s);
    ++count_;
  }
  ScoreSummary summary() const {
    ScoreSummary out;
    if (count_ == 0) return out;
    out.total = sum_.value();
    out.min = min_;
    out.max = max_;
    out.mean = out.total / static_cast<double>(count_);
    return out;
  }

 private:
  double min_ = std::numeric_limits<double>::infinity();
  double max_ = -std::numeric_limits<double>::infinity();
  CompensatedSum sum_;
  std::size_t count_ = 0;
};

std::size_t matrix_bytes(const Matrix& m) { return static_cast<std::size_t>(m.size()) * sizeof(double); }

std::size_t transform_bytes(const ConditioningTransform& t) {
  return matrix_bytes(t.r) + matrix_bytes(t.r_inv) + matrix_bytes(t.combined) +
         (t.jl ? matrix_bytes(t.jl->g) : 0);
}

void check_options(const CoresetOptions& o) {
  if (o.k == 0) fail(ErrorCode::InvalidArgument, "coreset size k must be >= 1");
  if (o.method == CoresetMethod::OnlineL2 && o.p != 2.0)
    fail(ErrorCode::InvalidArgument, "online-l2 is only defined for p = 2");
  (void)Shape(o.p);
}

void check_width(const std::vector<double>& row, std::size_t d) {
  if (row.size() != d) fail(ErrorCode::Dimension, "rows have inconsistent widths");
}

// Both finishing helpers set the final bookkeeping shared by every method.
CoresetResult finish_full(const SmallStreamBuffer& buf, std::size_t d, CoresetMethod m,
                          StreamStats stats) {
  CoresetResult r;
  r.coreset = buf.coreset(d, method_name(m));
  stats.k_clamped = true;
  r.stats = stats;
  r.scores = {r.coreset.total_score, 1.0, 1.0, 1.0};
  return r;
}

// Second (and third) pass for score-based methods: score(row) gives q_i.
template <typename Score>
CoresetResult sample_by_scores(RowSource& src, const CoresetOptions& o, std::size_t n,
                               std::size_t d, StreamStats stats, std::size_t fixed_bytes,
                               Score&& score) {
  const auto t0 = Clock::now();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> row;

  double floor = 0.0;
  if (o.rounding && n > o.k) {
    CompensatedSum s0;
    src.begin_pass();
    while (src.next(row)) s0.add(score(row) + inv_n);
    floor = s0.value() * inv_n;
  }

  ReservoirBank bank(o.k, d, o.seed);
  SmallStreamBuffer buf(o.k);
  ScoreTracker tracker;
  src.begin_pass();
  std::size_t i = 0;
  while (src.next(row)) {
    check_width(row, d);
    buf.add(row);
    if (n <= o.k) {
      ++i;
      continue;
    }
    double s = score(row) + inv_n;
    if (o.rounding) s = std::max(round_up_pow2(s), floor);
    tracker.add(s);
    bank.feed(i++, row.data(), s);
  }
  if (i != n) fail(ErrorCode::Io, "the input changed between passes");
  stats.passes = src.passes();
  stats.state_bytes = std::max(stats.state_bytes, fixed_bytes + bank.state_bytes() + buf.bytes());
  stats.t_sample_ms = ms_since(t0);
  if (buf.holds_all()) return finish_full(buf, d, o.method, stats);

  CoresetResult r;
  r.coreset = bank.finish(method_name(o.method) + (o.rounding ? "+rounding" : ""));
  r.stats = stats;
  r.scores = tracker.summary();
  r.scores.total = bank.total();
  return r;
}

CoresetResult build_pprobit(RowSource& src, const CoresetOptions& o) {
  const Shape shape(o.p);
  StreamStats stats;
  const auto t0 = Clock::now();
  std::vector<double> row;
  std::optional<SketchAccumulator> acc;
  std::size_t d = 0;
  std::size_t n = 0;
  src.begin_pass();
  while (src.next(row)) {
    if (!acc) {
      d = row.size();
      if (d == 0) fail(ErrorCode::Dimension, "rows must have at least one column");
      acc.emplace(make_sketch_operator(src.rows_hint(), d, shape, o.seed));
    }
    check_width(row, d);
    acc->add(n++, row.data());
  }
  if (n == 0) fail(ErrorCode::InvalidArgument, "the input has no rows");
  stats.rows = n;
  stats.sketch_rows = acc->op().n_prime;
  stats.state_bytes = acc->state_bytes();
  std::optional<JlCompressor> jl;
  if (o.use_jl && jl_applies(o.p, n, d)) jl = make_jl_compressor(d, n, o.seed);
  const SketchMatrix sketch = acc->finish();
  acc.reset();
  const ConditioningTransform t = build_transform(sketch, shape, jl);
  stats.t_sketch_ms = ms_since(t0);
  stats.budget_bytes = state_budget_bytes(stats.sketch_rows, d, o.k, n);
  return sample_by_scores(src, o, n, d, stats, transform_bytes(t),
                          [&t](const std::vector<double>& r) { return row_score(r, t); });
}

CoresetResult build_l2(RowSource& src, const CoresetOptions& o) {
  StreamStats stats;
  const auto t0 = Clock::now();
  std::vector<double> row;
  std::optional<StreamingQr> qr;
  std::size_t d = 0;
  std::size_t n = 0;
  src.begin_pass();
  while (src.next(row)) {
    if (!qr) {
      d = row.size();
      qr.emplace(d);
    }
    check_width(row, d);
    qr->add(row.data());
    ++n;
  }
  if (n == 0) fail(ErrorCode::InvalidArgument, "the input has no rows");
  stats.rows = n;
  stats.state_bytes = qr->state_bytes();
  const Matrix r_inv = invert_upper_checked(qr->finish());
  qr.reset();
  stats.t_sketch_ms = ms_since(t0);
  stats.budget_bytes = state_budget_bytes(0, d, o.k, n);
  const bool sqrt_scores = o.method == CoresetMethod::SqrtL2;
  return sample_by_scores(src, o, n, d, stats, matrix_bytes(r_inv),
                          [&](const std::vector<double>& r) {
                            const auto x = Eigen::Map<const Eigen::RowVectorXd>(
                                r.data(), static_cast<Eigen::Index>(r.size()));
                            const double lev = (x * r_inv).squaredNorm();
                            return sqrt_scores ? std::sqrt(lev) : lev;
                          });
}

CoresetResult build_single_pass(RowSource& src, const CoresetOptions& o) {
  StreamStats stats;
  const auto t0 = Clock::now();
  const bool online = o.method == CoresetMethod::OnlineL2;
  const std::optional<std::size_t> n_known =
      src.rows_exact() ? std::optional<std::size_t>(src.rows_hint()) : std::nullopt;
  std::vector<double> row;
  std::optional<OnlineCoresetBuilder> builder;
  std::optional<ReservoirBank> bank;
  SmallStreamBuffer buf(o.k);
  std::size_t d = 0;
  std::size_t n = 0;
  src.begin_pass();
  while (src.next(row)) {
    if (n == 0) {
      d = row.size();
      if (online)
        builder.emplace(d, o.k, o.seed, n_known);
      else
        bank.emplace(o.k, d, o.seed);
    }
    check_width(row, d);
    buf.add(row);
    if (online)
      builder->feed(row);
    else
      bank->feed(n, row.data(), 1.0);
    ++n;
  }
  if (n == 0) fail(ErrorCode::InvalidArgument, "the input has no rows");
  stats.rows = n;
  stats.passes = src.passes();
  stats.state_bytes = buf.bytes() + (online ? builder->state_bytes() : bank->state_bytes());
  stats.budget_bytes = state_budget_bytes(0, d, online ? 3 * o.k : o.k, n);
  stats.t_sample_ms = ms_since(t0);
  if (buf.holds_all()) return finish_full(buf, d, o.method, stats);

  CoresetResult r;
  r.coreset = online ? builder->finish() : bank->finish("uniform");
  r.stats = stats;
  r.scores.total = r.coreset.total_score;
  if (online) {
    r.scores.mean = r.scores.total / static_cast<double>(n);
    const auto [lo, hi] = std::minmax_element(r.coreset.scores.begin(), r.coreset.scores.end());
    r.scores.min = *lo;
    r.scores.max = *hi;
  } else {
    r.scores.min = r.scores.max = r.scores.mean = 1.0;
  }
  return r;
}

}  // namespace

std::string method_name(CoresetMethod m) {
  switch (m) {
    case CoresetMethod::Pprobit: return "pprobit";
    case CoresetMethod::Uniform: return "uniform";
    case CoresetMethod::L2: return "l2";
    case CoresetMethod::SqrtL2: return "sqrt-l2";
    case CoresetMethod::OnlineL2: return "online-l2";
  }
  return "unknown";
}

CoresetMethod parse_method(const std::string& name) {
  for (const auto m : {CoresetMethod::Pprobit, CoresetMethod::Uniform, CoresetMethod::L2,
                       CoresetMethod::SqrtL2, CoresetMethod::OnlineL2})
    if (method_name(m) == name) return m;
  fail(ErrorCode::InvalidArgument, "unknown method '" + name + "'");
}

std::size_t expected_passes(CoresetMethod m, bool rounding) {
  switch (m) {
    case CoresetMethod::Uniform:
    case CoresetMethod::OnlineL2: return 1;
    default: return rounding ? 3 : 2;
  }
}

std::size_t state_budget_bytes(std::size_t n_prime, std::size_t d, std::size_t k, std::size_t n) {
  return 256 * n_prime * d + 64 * k * (d + 1) + 64 * d * d + n / 8 + 65536;
}

CoresetResult build_coreset(RowSource& source, const CoresetOptions& options) {
  check_options(options);
  switch (options.method) {
    case CoresetMethod::Pprobit: return build_pprobit(source, options);
    case CoresetMethod::L2:
    case CoresetMethod::SqrtL2: return build_l2(source, options);
    default: return build_single_pass(source, options);
  }
}

CoresetResult build_coreset(const RowMatrix& x, const CoresetOptions& options) {
  check_options(options);
  if (x.rows() == 0 || x.cols() == 0) fail(ErrorCode::InvalidArgument, "the input has no rows");
  if (!x.allFinite()) fail(ErrorCode::InvalidArgument, "design matrix has non-finite entries");
  MatrixRowSource src(x);
  const unsigned threads = std::max(1u, options.threads);
  if (options.method != CoresetMethod::Pprobit || threads == 1) return build_coreset(src, options);

  // Parallel variant of build_pprobit: sketch shards merge exactly and every
  // score is computed independently, so the output matches the serial path.
  const Shape shape(options.p);
  const auto n = static_cast<std::size_t>(x.rows());
  const auto d = static_cast<std::size_t>(x.cols());
  StreamStats stats;
  const auto t0 = Clock::now();
  const SketchOperator op = make_sketch_operator(n, d, shape, options.seed);
  const SketchMatrix sketch = sketch_apply(op, x, threads);
  std::optional<JlCompressor> jl;
  if (options.use_jl && jl_applies(options.p, n, d)) jl = make_jl_compressor(d, n, options.seed);
  const ConditioningTransform t = build_transform(sketch, shape, jl);
  stats.rows = n;
  stats.sketch_rows = op.n_prime;
  stats.passes = 1;
  stats.t_sketch_ms = ms_since(t0);
  stats.budget_bytes = state_budget_bytes(op.n_prime, d, options.k, n);

  std::vector<double> q(n);
  constexpr std::size_t kBlock = 4096;
  parallel_for((n + kBlock - 1) / kBlock, threads, [&](std::size_t b) {
    const std::size_t end = std::min(n, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i)
      q[i] = row_score({x.row(static_cast<Eigen::Index>(i)).data(), d}, t);
  });
  std::size_t cursor = 0;
  // Replays the precomputed scores in row order.
  CoresetResult r = sample_by_scores(src, options, n, d, stats, transform_bytes(t) + q.size() * sizeof(double),
                                     [&](const std::vector<double>&) { return q[cursor++ % n]; });
  r.stats.passes = expected_passes(options.method, options.rounding);
  return r;
}

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

}  // namespace

void write_coreset(const CoresetResult& result, const CoresetOptions& options,
                   const std::string& csv_path, const std::string& json_path) {
  const WeightedCoreset& c = result.coreset;
  const auto d = static_cast<std::size_t>(c.rows.cols());
  std::string text = "weight";
  for (std::size_t j = 1; j <= d; ++j) text += ",x" + std::to_string(j);
  text += '\n';
  for (Eigen::Index i = 0; i < c.rows.rows(); ++i) {
    append_double(text, c.weights[i]);
    for (Eigen::Index j = 0; j < c.rows.cols(); ++j) {
      text += ',';
      append_double(text, c.rows(i, j));
    }
    text += '\n';
  }
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) fail(ErrorCode::Io, "cannot write '" + csv_path + "'");
  csv << text;
  if (!csv) fail(ErrorCode::Io, "write failed for '" + csv_path + "'");

  if (json_path.empty()) return;
  nlohmann::ordered_json j;
  j["method"] = method_name(options.method);
  j["tag"] = c.method_tag;
  j["k"] = c.size();
  j["k_requested"] = options.k;
  j["p"] = options.p;
  j["seed"] = options.seed;
  j["rounding"] = options.rounding;
  j["rows"] = result.stats.rows;
  j["cols"] = d;
  j["sketch_rows"] = result.stats.sketch_rows;
  j["passes"] = result.stats.passes;
  j["k_clamped"] = result.stats.k_clamped;
  j["scores"] = {{"total", result.scores.total},
                 {"min", result.scores.min},
                 {"max", result.scores.max},
                 {"mean", result.scores.mean}};
  j["source_indices"] = c.source_indices;
  std::ofstream js(json_path, std::ios::binary);
  if (!js) fail(ErrorCode::Io, "cannot write '" + json_path + "'");
  js << j.dump(2) << '\n';
  if (!js) fail(ErrorCode::Io, "write failed for '" + json_path + "'");
}

}  // namespace pprobit
