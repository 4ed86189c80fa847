#include "core/objective.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "core/compensated.hpp"
#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/random.hpp"

namespace pprobit {
namespace {

constexpr Eigen::Index kBlockRows = 1024;
constexpr std::size_t kParallelMinBlocks = 8;

void check_inputs(const RowMatrix& x, const Vector& w, const Vector& beta) {
  if (x.rows() < 1 || x.cols() < 1) fail(ErrorCode::Dimension, "design matrix is empty");
  if (beta.size() != x.cols())
    fail(ErrorCode::Dimension, "beta has " + std::to_string(beta.size()) + " entries, X has " +
                                   std::to_string(x.cols()) + " columns");
  if (w.size() != 0 && w.size() != x.rows())
    fail(ErrorCode::Dimension, "weight vector length does not match row count");
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (!(w[i] > 0.0) || !std::isfinite(w[i]))
      fail(ErrorCode::InvalidArgument, "weights must be finite and > 0");
}

struct BlockPartial {
  CompensatedSum loss;
  std::vector<CompensatedSum> grad;
  std::vector<CompensatedSum> hess;  // packed upper triangle, row by row
};

}  // namespace

FoldedDesignMatrix::FoldedDesignMatrix(RowMatrix rows) : x_(std::move(rows)) {
  if (x_.rows() < 1 || x_.cols() < 1) fail(ErrorCode::Dimension, "design matrix is empty");
  if (!x_.allFinite()) fail(ErrorCode::InvalidArgument, "design matrix has non-finite entries");
}

Evaluation evaluate(const RowMatrix& x, const Vector& w, const Vector& beta, const Shape& p,
                    bool with_hessian) {
  check_inputs(x, w, beta);
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const auto blocks = static_cast<std::size_t>((n + kBlockRows - 1) / kBlockRows);
  const std::size_t packed = with_hessian ? static_cast<std::size_t>(d * (d + 1) / 2) : 0;

  std::vector<BlockPartial> partial(blocks);
  auto run_block = [&](std::size_t b) {
    BlockPartial& out = partial[b];
    out.grad.assign(static_cast<std::size_t>(d), {});
    out.hess.assign(packed, {});
    const Eigen::Index begin = static_cast<Eigen::Index>(b) * kBlockRows;
    const Eigen::Index end = std::min(n, begin + kBlockRows);
    for (Eigen::Index i = begin; i < end; ++i) {
      const auto row = x.row(i);
      const double wi = w.size() ? w[i] : 1.0;
      const LossTerms t = loss_terms(row.dot(beta), p);
      out.loss.add(wi * t.value);
      const double c1 = wi * t.d1;
      for (Eigen::Index j = 0; j < d; ++j) out.grad[static_cast<std::size_t>(j)].add(c1 * row[j]);
      if (with_hessian) {
        const double c2 = wi * t.d2;
        std::size_t k = 0;
        for (Eigen::Index j = 0; j < d; ++j) {
          const double cj = c2 * row[j];
          for (Eigen::Index l = j; l < d; ++l) out.hess[k++].add(cj * row[l]);
        }
      }
    }
  };
  const unsigned threads = blocks >= kParallelMinBlocks ? default_threads() : 1;
  parallel_for(blocks, threads, run_block);

  BlockPartial total;
  total.grad.assign(static_cast<std::size_t>(d), {});
  total.hess.assign(packed, {});
  for (const auto& part : partial) {
    total.loss.merge(part.loss);
    for (std::size_t j = 0; j < total.grad.size(); ++j) total.grad[j].merge(part.grad[j]);
    for (std::size_t k = 0; k < packed; ++k) total.hess[k].merge(part.hess[k]);
  }

  Evaluation ev;
  ev.loss = total.loss.value();
  ev.gradient.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) ev.gradient[j] = total.grad[static_cast<std::size_t>(j)].value();
  if (with_hessian) {
    ev.hessian.resize(d, d);
    std::size_t k = 0;
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index l = j; l < d; ++l) {
        ev.hessian(j, l) = total.hess[k].value();
        ev.hessian(l, j) = ev.hessian(j, l);
        ++k;
      }
  }
  return ev;
}

double loss(const RowMatrix& x, const Vector& w, const Vector& beta, const Shape& p) {
  return evaluate(x, w, beta, p, false).loss;
}

Vector gradient(const RowMatrix& x, const Vector& w, const Vector& beta, const Shape& p) {
  return evaluate(x, w, beta, p, false).gradient;
}

Matrix hessian(const RowMatrix& x, const Vector& w, const Vector& beta, const Shape& p) {
  return evaluate(x, w, beta, p, true).hessian;
}

double g_plus(double r, const Shape& p) {
  return r >= 0.0 ? std::pow(r, p.value()) / p.value() : 0.0;
}

MuEstimate estimate_mu_lower(const RowMatrix& x, const Shape& p, std::size_t num_directions,
                             std::uint64_t seed) {
  if (x.rows() < 1 || x.cols() < 1) fail(ErrorCode::Dimension, "design matrix is empty");
  if (x.isZero(0.0)) fail(ErrorCode::InvalidArgument, "mu is undefined for an all-zero matrix");
  const Eigen::Index d = x.cols();

  MuEstimate est;
  est.seed = seed;
  est.direction = Vector::Zero(d);
  bool have = false;

  auto try_direction = [&](const Vector& beta) {
    const Vector r = x * beta;
    CompensatedSum pos;
    CompensatedSum neg;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      const double m = std::pow(std::fabs(r[i]), p.value());
      if (r[i] > 0.0)
        pos.add(m);
      else if (r[i] < 0.0)
        neg.add(m);
    }
    ++est.directions_tried;
    double ratio;
    if (neg.value() > 0.0)
      ratio = pos.value() / neg.value();
    else if (pos.value() > 0.0)
      ratio = std::numeric_limits<double>::infinity();
    else
      return;  // beta orthogonal to every row
    if (!have || ratio > est.mu_lower) {
      est.mu_lower = ratio;
      est.direction = beta;
      have = true;
    }
  };

  for (Eigen::Index j = 0; j < d; ++j) {
    Vector e = Vector::Zero(d);
    e[j] = 1.0;
    try_direction(e);
    e[j] = -1.0;
    try_direction(e);
  }
  rng::Cursor cursor(seed, rng::kMuDirections);
  for (std::size_t t = 0; t < num_directions; ++t) {
    Vector beta(d);
    for (Eigen::Index j = 0; j < d; ++j) beta[j] = cursor.next_normal();
    const double norm = beta.norm();
    if (norm == 0.0) continue;
    try_direction(beta / norm);
  }
  est.unbounded = std::isinf(est.mu_lower);
  return est;
}

}  // namespace pprobit
