#pragma once

// Independent reference computations used by the tests. None of these call
// into the code under test beyond reading plain data structures.

#include <cstddef>
#include <vector>

#include "core/sketching.hpp"
#include "core/types.hpp"

namespace oracle {

/// Standardized p-generalized normal cdf by adaptive quadrature of the density.
double gennorm_cdf(double x, double p);

/// ln(1 - cdf(x)) for x >= 0, by quadrature of the shifted upper tail.
double gennorm_log_sf(double x, double p);

/// -ln(cdf(-r)) built from the two quadratures above.
double gennorm_g(double r, double p);

/// Correctly rounded sum of the values (MPFR).
double exact_sum(const std::vector<double>& v);

/// Pi X with Pi materialized densely (n' x n) and every output entry formed as
/// the correctly rounded sum of the rounded products Pi(b, i) * X(i, j).
pprobit::RowMatrix dense_sketch(const pprobit::SketchOperator& op, const pprobit::RowMatrix& x);

/// x_i^T (sum_{j <= i} x_j x_j^T)^+ x_i via an SVD pseudoinverse of the prefix Gram matrix.
std::vector<double> prefix_leverage(const pprobit::RowMatrix& x);

/// l_p leverage u_i = sup_b |x_i b|^p / ||X b||_p^p for d = 2, maximized over
/// `grid` equally spaced directions on the half circle.
std::vector<double> brute_force_leverage_2d(const pprobit::RowMatrix& x, double p, std::size_t grid);

/// Unit directions used by brute_force_leverage_2d.
std::vector<pprobit::Vector> half_circle(std::size_t grid);

}  // namespace oracle
