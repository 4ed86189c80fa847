#pragma once

// Standardized p-generalized normal distribution with density
//   phi_p(x) = p^(1-1/p) / (2 Gamma(1/p)) * exp(-|x|^p / p),  p >= 1,
// and the single-point probit loss g(r) = -ln Phi_p(-r) with its derivatives.
//
// All routines are pure; p = 2 short-circuits to erfc where that is exact.

namespace pprobit {

/// Shape parameter p >= 1 with its derived constants cached.
class Shape {
 public:
  explicit Shape(double p);

  double value() const noexcept { return p_; }
  double inv() const noexcept { return a_; }
  /// ln of the density normalizer p^(1-1/p) / (2 Gamma(1/p)).
  double log_norm() const noexcept { return log_norm_; }
  /// C_p = 2 Gamma(1/p) / p^(1-1/p), the integral of exp(-|t|^p/p).
  double normalizer() const noexcept;
  bool is_gaussian() const noexcept { return p_ == 2.0; }

  friend bool operator==(const Shape& a, const Shape& b) noexcept { return a.p_ == b.p_; }

 private:
  double p_;
  double a_;
  double log_norm_;
};

double regularized_gamma_p(double a, double z);
double regularized_gamma_q(double a, double z);

double pdf(double x, const Shape& p);
double log_pdf(double x, const Shape& p);
double cdf(double x, const Shape& p);
/// Survival function 1 - Phi_p(x).
double sf(double x, const Shape& p);
/// ln(1 - Phi_p(x)), accurate far into the upper tail.
double log_sf(double x, const Shape& p);
/// Mills-type ratio h(x) = (1 - Phi_p(x)) / phi_p(x) for x >= 0.
double tail_ratio(double x, const Shape& p);

double g(double r, const Shape& p);
double g_prime(double r, const Shape& p);
double g_second(double r, const Shape& p);

struct LossTerms {
  double value;
  double d1;
  double d2;
};

/// g, g' and g'' at r, sharing the special-function work.
LossTerms loss_terms(double r, const Shape& p);

}  // namespace pprobit
