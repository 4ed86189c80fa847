#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "core/sampling.hpp"
#include "core/types.hpp"

namespace pprobit {

/// Running Gram matrix M = sum x_i x_i^T with its pseudoinverse and an
/// orthonormal basis Q of its column space.
struct OnlineLeverageState {
  explicit OnlineLeverageState(std::size_t d, double span_tolerance = 1e-10);

  Matrix m;
  Matrix m_inv;
  Matrix q;                   // d x rank
  std::size_t rank = 0;
  double span_tolerance;      // x is in span when ||Q^T x|| >= (1 - tol) ||x||
  std::size_t recomputes = 0;
  std::size_t drift_repairs = 0;
  std::size_t updates_since_check = 0;
};

/// Adds x to M and returns the online leverage min(x^T M^+ x, 1), M including x.
/// In-span rows use a Sherman-Morrison update; others trigger a pseudoinverse
/// recompute.
double online_leverage_update(OnlineLeverageState& state, std::span<const double> x);

/// Single-pass coreset from online l2 leverage scores s_i = l_i + 1/n.
/// With a known n the scores are fed directly. Without it, one bank samples
/// by l_i and a second one uniformly; each slot then takes the leverage-bank
/// row with probability L / (L + 1), L = sum l_i, which reproduces sampling
/// by l_i + 1/n exactly.
class OnlineCoresetBuilder {
 public:
  OnlineCoresetBuilder(std::size_t d, std::size_t k, std::uint64_t seed,
                       std::optional<std::size_t> n = std::nullopt);

  void feed(std::span<const double> x);
  WeightedCoreset finish() const;

  const OnlineLeverageState& state() const noexcept { return state_; }
  double leverage_sum() const noexcept { return leverage_sum_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t state_bytes() const noexcept;

 private:
  std::size_t d_;
  std::size_t k_;
  std::uint64_t seed_;
  std::optional<std::size_t> n_;
  OnlineLeverageState state_;
  ReservoirBank direct_;
  ReservoirBank by_leverage_;
  ReservoirBank uniform_;
  std::vector<double> scratch_;
  double leverage_sum_ = 0.0;
  std::size_t rows_ = 0;
};

WeightedCoreset online_coreset(const RowMatrix& x, std::size_t k, std::uint64_t seed,
                               bool n_known = true);

}  // namespace pprobit
