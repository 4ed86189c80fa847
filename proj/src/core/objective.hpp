#pragma once

#include <cstdint>

#include "core/gennorm.hpp"
#include "core/types.hpp"

namespace pprobit {

/// Design matrix with labels already folded in, x_i = -(2 y_i - 1) z_i.
class FoldedDesignMatrix {
 public:
  FoldedDesignMatrix() = default;
  explicit FoldedDesignMatrix(RowMatrix rows);

  Eigen::Index rows() const noexcept { return x_.rows(); }
  Eigen::Index cols() const noexcept { return x_.cols(); }
  const RowMatrix& matrix() const noexcept { return x_; }

 private:
  RowMatrix x_;
};

/// Loss, gradient and (optionally) Hessian of f_w(X beta) = sum_i w_i g(x_i beta).
/// An empty weight vector means unit weights.
struct Evaluation {
  double loss = 0.0;
  Vector gradient;
  Matrix hessian;
};

Evaluation evaluate(const RowMatrix& x, const Vector& w, const Vector& beta, const Shape& p,
                    bool with_hessian);

double loss(const RowMatrix& x, const Vector& w, const Vector& beta, const Shape& p);
Vector gradient(const RowMatrix& x, const Vector& w, const Vector& beta, const Shape& p);
Matrix hessian(const RowMatrix& x, const Vector& w, const Vector& beta, const Shape& p);

/// Substitute function G+(r) = r^p / p for r >= 0, else 0.
double g_plus(double r, const Shape& p);

struct MuEstimate {
  double mu_lower = 0.0;    // +inf when some direction has an empty negative side
  std::size_t directions_tried = 0;
  std::uint64_t seed = 0;
  bool unbounded = false;
  Vector direction;         // the maximizing direction
};

/// Lower bound on mu_p(X): the largest positive/negative l_p mass ratio over
/// `num_directions` random unit directions plus the 2d signed coordinate axes.
MuEstimate estimate_mu_lower(const RowMatrix& x, const Shape& p, std::size_t num_directions,
                             std::uint64_t seed);

}  // namespace pprobit
