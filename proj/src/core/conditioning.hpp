#pragma once

#include <optional>
#include <span>
#include <vector>

#include "core/gennorm.hpp"
#include "core/sketching.hpp"
#include "core/types.hpp"

namespace pprobit {

/// R^-1 from the QR factorization of the sketch Pi X, so that V = X R^-1 is a
/// well-conditioned basis for the column space of X. `combined` is R^-1 G
/// when a JL compressor is attached and R^-1 otherwise.
struct ConditioningTransform {
  Matrix r;        // upper triangular with positive diagonal
  Matrix r_inv;
  double p = 2.0;
  std::optional<JlCompressor> jl;
  Matrix combined;
};

/// Throws ErrorCode::RankDeficient when the sketch does not have rank d.
ConditioningTransform build_transform(const SketchMatrix& sketch, const Shape& p,
                                      std::optional<JlCompressor> jl = std::nullopt);

/// Approximate l_p leverage score q_i = ||x_i R^-1 G||_p^p.
double row_score(std::span<const double> row, const ConditioningTransform& t);

struct SensitivityScores {
  std::vector<double> s;
  double total = 0.0;
  bool rounded = false;
};

/// s_i = q_i + 1/n; with rounding, s_i' = max(2^ceil(log2 s_i), S0/n).
SensitivityScores finalize_scores(std::span<const double> q, bool apply_rounding);

/// Power-of-two ceiling used by the rounding option.
double round_up_pow2(double v);

/// R factor of a tall matrix whose rows arrive one at a time: pending rows are
/// stacked under the current R and re-factored in blocks.
class StreamingQr {
 public:
  explicit StreamingQr(std::size_t d, std::size_t block_rows = 512);

  void add(const double* row);
  /// Upper-triangular R with non-negative diagonal, R^T R = X^T X.
  Matrix finish();
  std::size_t state_bytes() const noexcept;

 private:
  void flush();

  std::size_t d_;
  Matrix r_;
  RowMatrix pending_;
  Eigen::Index filled_ = 0;
};

/// Inverse of an upper-triangular R; throws ErrorCode::RankDeficient when a
/// diagonal entry is negligible relative to the largest one.
Matrix invert_upper_checked(const Matrix& r);

}  // namespace pprobit
