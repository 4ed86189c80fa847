#include "core/sketching.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/random.hpp"

namespace pprobit {

std::size_t SketchOperator::bucket(std::size_t i) const noexcept {
  if (identity) return i;
  const std::uint64_t h = rng::key(seed, rng::kBucket, i);
  return static_cast<std::size_t>((static_cast<unsigned __int128>(h) * n_prime) >> 64);
}

double SketchOperator::sign(std::size_t i) const noexcept {
  if (identity) return 1.0;
  return (rng::key(seed, rng::kSign, i) >> 63) ? -1.0 : 1.0;
}

double SketchOperator::lambda(std::size_t i) const noexcept {
  return -std::log1p(-rng::uniform(seed, rng::kExponential, i));
}

double SketchOperator::coefficient(std::size_t i) const noexcept {
  if (identity || p == 2.0) return sign(i);
  return sign(i) / std::pow(lambda(i), 1.0 / p);
}

SketchOperator SketchOperator::make_identity(std::size_t n, std::size_t d) {
  SketchOperator op;
  op.n = n;
  op.d = d;
  op.n_prime = n;
  op.identity = true;
  return op;
}

std::size_t sketch_size(std::size_t n, std::size_t d, double p) {
  const double dd = static_cast<double>(d);
  const double base = 4.0 * dd * dd;
  double target = base;
  if (p > 2.0) {
    const double nn = static_cast<double>(n);
    target = std::ceil(std::pow(nn, 1.0 - 2.0 / p) * std::log(nn) * dd *
                       std::ceil(std::log(dd) + 1.0)) +
             base;
  }
  return std::min(n, static_cast<std::size_t>(target));
}

SketchOperator make_sketch_operator(std::size_t n, std::size_t d, const Shape& p,
                                    std::uint64_t seed) {
  if (n < 1 || d < 1) fail(ErrorCode::InvalidArgument, "sketch needs n >= 1 and d >= 1");
  SketchOperator op;
  op.n = n;
  op.d = d;
  op.p = p.value();
  op.seed = seed;
  op.n_prime = sketch_size(n, d, p.value());
  return op;
}

SketchAccumulator::SketchAccumulator(SketchOperator op)
    : op_(op), cells_(op.n_prime * op.d), seen_(op.n, false) {}

void SketchAccumulator::add(std::size_t index, const double* row) {
  if (index >= op_.n)
    fail(ErrorCode::InvalidArgument, "row index " + std::to_string(index) + " out of range");
  if (seen_[index]) fail(ErrorCode::InvalidArgument, "row index " + std::to_string(index) + " fed twice");
  seen_[index] = true;
  ++rows_;
  const double c = op_.coefficient(index);
  ExactSum* cell = cells_.data() + op_.bucket(index) * op_.d;
  for (std::size_t j = 0; j < op_.d; ++j)
    if (row[j] != 0.0) cell[j].add(c * row[j]);
}

void SketchAccumulator::merge(const SketchAccumulator& other) {
  if (other.op_.n_prime != op_.n_prime || other.op_.d != op_.d || other.op_.seed != op_.seed)
    fail(ErrorCode::InvalidArgument, "cannot merge sketches of different operators");
  for (std::size_t i = 0; i < seen_.size(); ++i) {
    if (!other.seen_[i]) continue;
    if (seen_[i]) fail(ErrorCode::InvalidArgument, "row " + std::to_string(i) + " present in both shards");
    seen_[i] = true;
  }
  for (std::size_t k = 0; k < cells_.size(); ++k) cells_[k].merge(other.cells_[k]);
  rows_ += other.rows_;
}

SketchMatrix SketchAccumulator::finish() const {
  SketchMatrix out;
  out.data.resize(static_cast<Eigen::Index>(op_.n_prime), static_cast<Eigen::Index>(op_.d));
  for (std::size_t b = 0; b < op_.n_prime; ++b)
    for (std::size_t j = 0; j < op_.d; ++j)
      out.data(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j)) =
          cells_[b * op_.d + j].value();
  out.rows_processed = rows_;
  return out;
}

std::size_t SketchAccumulator::state_bytes() const noexcept {
  std::size_t bytes = sizeof(*this) + seen_.capacity() / 8;
  for (const auto& c : cells_) bytes += c.bytes();
  return bytes;
}

SketchMatrix sketch_apply(const SketchOperator& op, const RowMatrix& x, unsigned threads) {
  if (static_cast<std::size_t>(x.rows()) != op.n || static_cast<std::size_t>(x.cols()) != op.d)
    fail(ErrorCode::Dimension, "matrix shape does not match the sketch operator");
  const std::size_t n = op.n;
  const std::size_t shards = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, n / 1024));
  std::vector<SketchAccumulator> parts(shards, SketchAccumulator(op));
  parallel_for(shards, static_cast<unsigned>(shards), [&](std::size_t s) {
    const std::size_t begin = n * s / shards;
    const std::size_t end = n * (s + 1) / shards;
    for (std::size_t i = begin; i < end; ++i) parts[s].add(i, x.row(static_cast<Eigen::Index>(i)).data());
  });
  for (std::size_t s = 1; s < shards; ++s) parts[0].merge(parts[s]);
  return parts[0].finish();
}

DistortionStats embedding_distortion_check(const RowMatrix& x, const SketchOperator& op,
                                           std::size_t trials, std::uint64_t seed) {
  const SketchMatrix sk = sketch_apply(op, x);
  const bool sup_norm = op.p > 2.0;
  const double p = op.p;
  rng::Cursor cursor(seed, rng::kDistortion);
  std::vector<double> ratios;
  ratios.reserve(trials);
  DistortionStats st;
  for (std::size_t t = 0; t < trials; ++t) {
    Vector beta(x.cols());
    for (Eigen::Index j = 0; j < beta.size(); ++j) beta[j] = cursor.next_normal();
    beta /= beta.norm();
    const Vector xb = x * beta;
    const Vector sb = sk.data * beta;
    const double lhs = std::pow(xb.array().abs().pow(p).sum(), 1.0 / p);
    const double rhs = sup_norm ? sb.cwiseAbs().maxCoeff() : sb.norm();
    if (lhs == 0.0) continue;
    ratios.push_back(rhs / lhs);
  }
  st.trials = ratios.size();
  if (ratios.empty()) return st;
  std::sort(ratios.begin(), ratios.end());
  st.min_ratio = ratios.front();
  st.max_ratio = ratios.back();
  st.median_ratio = ratios[ratios.size() / 2];
  st.max_distortion = std::max(st.max_ratio, 1.0 / st.min_ratio);
  return st;
}

JlCompressor make_jl_compressor(std::size_t d, std::size_t n, std::uint64_t seed) {
  if (n < 2 || d < 1) fail(ErrorCode::InvalidArgument, "JL compressor needs n >= 2 and d >= 1");
  const auto m = static_cast<Eigen::Index>(std::max(1.0, std::ceil(std::log(static_cast<double>(n)))));
  const double sd = 1.0 / std::sqrt(static_cast<double>(m));
  JlCompressor jl;
  jl.seed = seed;
  jl.g.resize(static_cast<Eigen::Index>(d), m);
  for (Eigen::Index r = 0; r < jl.g.rows(); ++r)
    for (Eigen::Index c = 0; c < m; ++c)
      jl.g(r, c) = sd * rng::normal(seed, rng::kJl, static_cast<std::uint64_t>(r * m + c));
  return jl;
}

bool jl_applies(double p, std::size_t n, std::size_t d) {
  return p == 2.0 && n >= 2 && std::log(static_cast<double>(n)) < static_cast<double>(d);
}

}  // namespace pprobit
