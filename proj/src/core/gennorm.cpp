#include "core/gennorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "core/error.hpp"

namespace pprobit {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxTerms = 2000;

void require_finite(double x) {
  if (!std::isfinite(x)) fail(ErrorCode::Domain, "argument must be finite");
}

// Sum of the lower incomplete gamma series; P(a, z) = prefactor * sum.
double gamma_series(double a, double z) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kMaxTerms; ++n) {
    ap += 1.0;
    term *= z / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-z + a * std::log(z) - std::lgamma(a));
}

// Continued fraction for the upper incomplete gamma function,
//   Gamma(a, z) = e^-z z^a / denom,  denom = (z + 1 - a) + tail,
// with the tail evaluated separately so that denom - z keeps full precision.
struct UpperCf {
  double denom;
  double tail;
};

UpperCf upper_gamma_cf(double a, double z) {
  double f = kTiny;
  double c = f;
  double d = 0.0;
  for (int n = 1; n < kMaxTerms; ++n) {
    const double an = -n * (n - a);
    const double bn = z + 2.0 * n + 1.0 - a;
    d = bn + an * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = bn + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::fabs(delta - 1.0) < 2.0 * kEps) break;
  }
  return {z + 1.0 - a + f, f};
}

// Everything the upper tail needs at x >= 0.
struct TailEval {
  double sf;
  double log_sf;
  double h;            // (1 - Phi) / phi
  bool continued;      // continued-fraction region
  double cf_excess;    // p (1 - 1/p + tail) = p - 1 + p * tail, CF region only
};

TailEval upper_tail(double x, const Shape& shape) {
  const double p = shape.value();
  const double a = shape.inv();
  if (x == 0.0) {
    const double h = 0.5 / std::exp(shape.log_norm());
    return {0.5, -std::numbers::ln2, h, false, 0.0};
  }
  const double z = std::pow(x, p) / p;
  const double lp = shape.log_norm() - z;
  if (z <= a + 1.0) {
    double s;
    if (shape.is_gaussian())
      s = 0.5 * std::erfc(x / std::numbers::sqrt2);
    else
      s = 0.5 * (1.0 - gamma_series(a, z));
    return {s, std::log(s), s / std::exp(lp), false, 0.0};
  }
  const UpperCf cf = upper_gamma_cf(a, z);
  const double h = x / (p * cf.denom);
  const double ls = lp + std::log(h);
  return {std::exp(ls), ls, h, true, p - 1.0 + p * cf.tail};
}

}  // namespace

Shape::Shape(double p) : p_(p) {
  if (!std::isfinite(p) || p < 1.0)
    fail(ErrorCode::Domain, "shape parameter p must be finite and >= 1, got " + std::to_string(p));
  a_ = 1.0 / p;
  log_norm_ = (1.0 - a_) * std::log(p) - std::numbers::ln2 - std::lgamma(a_);
}

double Shape::normalizer() const noexcept { return std::exp(-log_norm_); }

double regularized_gamma_p(double a, double z) {
  if (!(a > 0.0) || !(z >= 0.0)) fail(ErrorCode::Domain, "regularized_gamma_p needs a > 0, z >= 0");
  if (z == 0.0) return 0.0;
  if (z <= a + 1.0) return gamma_series(a, z);
  const UpperCf cf = upper_gamma_cf(a, z);
  return 1.0 - std::exp(-z + a * std::log(z) - std::lgamma(a)) / cf.denom;
}

double regularized_gamma_q(double a, double z) {
  if (!(a > 0.0) || !(z >= 0.0)) fail(ErrorCode::Domain, "regularized_gamma_q needs a > 0, z >= 0");
  if (z == 0.0) return 1.0;
  if (z <= a + 1.0) return 1.0 - gamma_series(a, z);
  const UpperCf cf = upper_gamma_cf(a, z);
  return std::exp(-z + a * std::log(z) - std::lgamma(a)) / cf.denom;
}

double log_pdf(double x, const Shape& p) {
  require_finite(x);
  return p.log_norm() - std::pow(std::fabs(x), p.value()) / p.value();
}

double pdf(double x, const Shape& p) { return std::exp(log_pdf(x, p)); }

double sf(double x, const Shape& p) {
  require_finite(x);
  if (x >= 0.0) return upper_tail(x, p).sf;
  return 1.0 - upper_tail(-x, p).sf;
}

double cdf(double x, const Shape& p) {
  require_finite(x);
  if (x >= 0.0) return 1.0 - upper_tail(x, p).sf;
  return upper_tail(-x, p).sf;
}

double log_sf(double x, const Shape& p) {
  require_finite(x);
  if (x >= 0.0) return upper_tail(x, p).log_sf;
  return std::log1p(-upper_tail(-x, p).sf);
}

double tail_ratio(double x, const Shape& p) {
  require_finite(x);
  if (x < 0.0) fail(ErrorCode::Domain, "tail_ratio is defined for x >= 0");
  return upper_tail(x, p).h;
}

LossTerms loss_terms(double r, const Shape& p) {
  require_finite(r);
  if (r >= 0.0) {
    const TailEval t = upper_tail(r, p);
    const double d1 = 1.0 / t.h;
    double d2;
    if (t.continued)
      d2 = d1 * t.cf_excess / r;
    else if (r == 0.0)
      d2 = d1 * d1;  // sgn(0) |0|^(p-1) taken as 0
    else
      d2 = std::max(0.0, d1 * (d1 - std::pow(r, p.value() - 1.0)));  // exact 0 for p = 1
    return {-t.log_sf, d1, d2};
  }
  const TailEval t = upper_tail(-r, p);
  const double value = -std::log1p(-t.sf);
  const double d1 = std::exp(log_pdf(r, p) + value);
  const double d2 = d1 * (d1 + std::pow(-r, p.value() - 1.0));
  return {value, d1, d2};
}

double g(double r, const Shape& p) { return loss_terms(r, p).value; }
double g_prime(double r, const Shape& p) { return loss_terms(r, p).d1; }
double g_second(double r, const Shape& p) { return loss_terms(r, p).d2; }

}  // namespace pprobit
