#include "core/online.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "core/random.hpp"

namespace pprobit {
namespace {

constexpr std::size_t kDriftCheckEvery = 1000;
constexpr double kDriftLimit = 1e-6;
constexpr double kEigenRankTol = 1e-10;

void recompute(OnlineLeverageState& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s.m);
  const Vector& lam = eig.eigenvalues();
  const Matrix& vec = eig.eigenvectors();
  const double top = lam.size() ? std::max(0.0, lam.maxCoeff()) : 0.0;
  const double cut = top * kEigenRankTol;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (lam[i] > cut && lam[i] > 0.0) keep.push_back(i);
  const auto d = s.m.rows();
  s.q.resize(d, static_cast<Eigen::Index>(keep.size()));
  s.m_inv.setZero();
  for (std::size_t c = 0; c < keep.size(); ++c) {
    const auto col = vec.col(keep[c]);
    s.q.col(static_cast<Eigen::Index>(c)) = col;
    s.m_inv.noalias() += (1.0 / lam[keep[c]]) * col * col.transpose();
  }
  s.rank = keep.size();
  ++s.recomputes;
}

}  // namespace

OnlineLeverageState::OnlineLeverageState(std::size_t d, double span_tol)
    : m(Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))),
      m_inv(Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))),
      q(static_cast<Eigen::Index>(d), 0),
      span_tolerance(span_tol) {}

double online_leverage_update(OnlineLeverageState& s, std::span<const double> xs) {
  const auto d = s.m.rows();
  if (static_cast<Eigen::Index>(xs.size()) != d) fail(ErrorCode::Dimension, "row length does not match state");
  const Eigen::Map<const Vector> x(xs.data(), d);
  if (!x.allFinite()) fail(ErrorCode::InvalidArgument, "row has non-finite entries");

  s.m.noalias() += x * x.transpose();
  const double xnorm = x.norm();
  const double proj = s.rank ? (s.q.transpose() * x).norm() : 0.0;
  if (proj >= (1.0 - s.span_tolerance) * xnorm) {
    const Vector mx = s.m_inv * x;
    const double denom = 1.0 + x.dot(mx);
    s.m_inv.noalias() -= (mx * mx.transpose()) / denom;
    if (++s.updates_since_check >= kDriftCheckEvery) {
      s.updates_since_check = 0;
      const Matrix projector = s.q * s.q.transpose();
      if ((s.m * s.m_inv - projector).cwiseAbs().maxCoeff() > kDriftLimit) {
        recompute(s);
        ++s.drift_repairs;
      }
    }
  } else {
    recompute(s);
  }
  return std::clamp(x.dot(s.m_inv * x), 0.0, 1.0);
}

OnlineCoresetBuilder::OnlineCoresetBuilder(std::size_t d, std::size_t k, std::uint64_t seed,
                                           std::optional<std::size_t> n)
    : d_(d),
      k_(k),
      seed_(seed),
      n_(n),
      state_(d),
      direct_(n ? k : 1, n ? d : 1, seed, rng::kReservoir),
      by_leverage_(n ? 1 : k, n ? 1 : d + 1, seed, rng::kReservoir),
      uniform_(n ? 1 : k, n ? 1 : d + 1, seed, rng::kReservoirMix),
      scratch_(d + 1) {
  if (n && *n == 0) fail(ErrorCode::InvalidArgument, "row count must be >= 1");
}

void OnlineCoresetBuilder::feed(std::span<const double> x) {
  if (n_ && rows_ >= *n_) fail(ErrorCode::InvalidArgument, "more rows than the declared row count");
  const double ell = online_leverage_update(state_, x);
  leverage_sum_ += ell;
  const std::size_t index = rows_++;
  if (n_) {
    direct_.feed(index, x.data(), ell + 1.0 / static_cast<double>(*n_));
    return;
  }
  std::copy(x.begin(), x.end(), scratch_.begin());
  scratch_[d_] = ell;
  if (ell > 0.0) by_leverage_.feed(index, scratch_.data(), ell);
  uniform_.feed(index, scratch_.data(), 1.0);
}

WeightedCoreset OnlineCoresetBuilder::finish() const {
  if (rows_ == 0) fail(ErrorCode::InvalidArgument, "no rows were streamed");
  if (n_) {
    WeightedCoreset c = direct_.finish("online-l2");
    return c;
  }
  const double n = static_cast<double>(rows_);
  const double lsum = by_leverage_.total();
  const double total = lsum + 1.0;
  WeightedCoreset c;
  c.method_tag = "online-l2";
  c.total_score = total;
  c.rows.resize(static_cast<Eigen::Index>(k_), static_cast<Eigen::Index>(d_));
  c.weights.resize(static_cast<Eigen::Index>(k_));
  c.source_indices.resize(k_);
  c.scores.resize(k_);
  for (std::size_t j = 0; j < k_; ++j) {
    const double u = rng::uniform(seed_, rng::kReservoirMix, j);
    const bool use_leverage = by_leverage_.rows_fed() > 0 && u * total < lsum;
    const ReservoirBank& bank = use_leverage ? by_leverage_ : uniform_;
    const auto jj = static_cast<Eigen::Index>(j);
    const auto row = bank.slot_rows().row(jj);
    c.rows.row(jj) = row.head(static_cast<Eigen::Index>(d_));
    c.source_indices[j] = bank.slot_index(j);
    c.scores[j] = row[static_cast<Eigen::Index>(d_)] + 1.0 / n;
    c.weights[jj] = total / (static_cast<double>(k_) * c.scores[j]);
  }
  return c;
}

std::size_t OnlineCoresetBuilder::state_bytes() const noexcept {
  const auto mat = [](const Matrix& m) { return static_cast<std::size_t>(m.size()) * sizeof(double); };
  return sizeof(*this) + mat(state_.m) + mat(state_.m_inv) + mat(state_.q) +
         direct_.state_bytes() + by_leverage_.state_bytes() + uniform_.state_bytes() +
         scratch_.capacity() * sizeof(double);
}

WeightedCoreset online_coreset(const RowMatrix& x, std::size_t k, std::uint64_t seed, bool n_known) {
  OnlineCoresetBuilder builder(static_cast<std::size_t>(x.cols()), k, seed,
                               n_known ? std::optional<std::size_t>(static_cast<std::size_t>(x.rows()))
                                       : std::nullopt);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    builder.feed(std::span<const double>(x.row(i).data(), static_cast<std::size_t>(x.cols())));
  return builder.finish();
}

}  // namespace pprobit
