#include "core/conditioning.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "core/compensated.hpp"
#include "core/error.hpp"

namespace pprobit {

ConditioningTransform build_transform(const SketchMatrix& sketch, const Shape& p,
                                      std::optional<JlCompressor> jl) {
  const RowMatrix& a = sketch.data;
  const Eigen::Index d = a.cols();
  if (a.rows() < d) {
    std::ostringstream msg;
    msg << "sketch has " << a.rows() << " rows but " << d
        << " columns; the data cannot have full column rank (drop collinear or constant columns)";
    fail(ErrorCode::RankDeficient, msg.str());
  }
  Eigen::ColPivHouseholderQR<Matrix> pivoted(a);
  if (pivoted.rank() < d) {
    std::ostringstream msg;
    msg << "sketch has rank " << pivoted.rank() << " < " << d
        << "; drop collinear or all-zero columns, candidates by pivot order:";
    const auto& perm = pivoted.colsPermutation().indices();
    for (Eigen::Index k = pivoted.rank(); k < d; ++k) msg << ' ' << perm[k];
    fail(ErrorCode::RankDeficient, msg.str());
  }

  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix r = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < d; ++i)
    if (r(i, i) < 0.0) r.row(i) *= -1.0;

  ConditioningTransform t;
  t.p = p.value();
  t.r_inv = r.triangularView<Eigen::Upper>().solve(Matrix::Identity(d, d));
  t.r = std::move(r);
  if (jl) {
    if (jl->g.rows() != d) fail(ErrorCode::Dimension, "JL compressor has the wrong input dimension");
    t.combined = t.r_inv * jl->g;
  } else {
    t.combined = t.r_inv;
  }
  t.jl = std::move(jl);
  return t;
}

double row_score(std::span<const double> row, const ConditioningTransform& t) {
  const auto d = static_cast<Eigen::Index>(row.size());
  if (d != t.combined.rows()) fail(ErrorCode::Dimension, "row length does not match transform");
  const Eigen::Map<const Eigen::RowVectorXd> x(row.data(), d);
  const Eigen::RowVectorXd v = x * t.combined;
  if (t.p == 2.0) return v.squaredNorm();
  return v.array().abs().pow(t.p).sum();
}

double round_up_pow2(double v) {
  int e = 0;
  const double f = std::frexp(v, &e);  // v = f * 2^e, f in [0.5, 1)
  return f == 0.5 ? v : std::ldexp(1.0, e);
}

SensitivityScores finalize_scores(std::span<const double> q, bool apply_rounding) {
  if (q.empty()) fail(ErrorCode::InvalidArgument, "no scores to finalize");
  const double inv_n = 1.0 / static_cast<double>(q.size());
  SensitivityScores out;
  out.s.resize(q.size());
  CompensatedSum total;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!(q[i] >= 0.0) || !std::isfinite(q[i]))
      fail(ErrorCode::InvalidArgument, "scores must be finite and >= 0");
    out.s[i] = q[i] + inv_n;
    total.add(out.s[i]);
  }
  out.total = total.value();
  if (apply_rounding) {
    const double floor = out.total * inv_n;
    CompensatedSum rounded;
    for (auto& s : out.s) {
      s = std::max(round_up_pow2(s), floor);
      rounded.add(s);
    }
    out.total = rounded.value();
    out.rounded = true;
  }
  return out;
}

StreamingQr::StreamingQr(std::size_t d, std::size_t block_rows)
    : d_(d),
      r_(Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))),
      pending_(static_cast<Eigen::Index>(block_rows), static_cast<Eigen::Index>(d)) {
  if (d == 0 || block_rows == 0) fail(ErrorCode::InvalidArgument, "StreamingQr needs d >= 1");
}

void StreamingQr::add(const double* row) {
  pending_.row(filled_) = Eigen::Map<const Eigen::RowVectorXd>(row, static_cast<Eigen::Index>(d_));
  if (++filled_ == pending_.rows()) flush();
}

void StreamingQr::flush() {
  if (filled_ == 0) return;
  const auto d = static_cast<Eigen::Index>(d_);
  Matrix stacked(d + filled_, d);
  stacked.topRows(d) = r_;
  stacked.bottomRows(filled_) = pending_.topRows(filled_);
  Eigen::HouseholderQR<Matrix> qr(stacked);
  r_ = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
  filled_ = 0;
}

Matrix StreamingQr::finish() {
  flush();
  Matrix r = r_;
  for (Eigen::Index i = 0; i < r.rows(); ++i)
    if (r(i, i) < 0.0) r.row(i) *= -1.0;
  return r;
}

std::size_t StreamingQr::state_bytes() const noexcept {
  return sizeof(*this) + static_cast<std::size_t>(r_.size() + pending_.size()) * sizeof(double);
}

Matrix invert_upper_checked(const Matrix& r) {
  const Eigen::Index d = r.rows();
  const double largest = r.diagonal().cwiseAbs().maxCoeff();
  const double tol = static_cast<double>(d) * std::numeric_limits<double>::epsilon() * largest;
  for (Eigen::Index i = 0; i < d; ++i)
    if (!(std::fabs(r(i, i)) > tol)) {
      std::ostringstream msg;
      msg << "matrix is rank deficient at column " << i
          << "; drop collinear or all-zero columns";
      fail(ErrorCode::RankDeficient, msg.str());
    }
  return r.triangularView<Eigen::Upper>().solve(Matrix::Identity(d, d));
}

}  // namespace pprobit
