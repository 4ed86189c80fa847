#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/SVD>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <mpfr.h>

namespace oracle {
namespace {

long double log_normalizer(long double p) {
  return (1.0L - 1.0L / p) * std::log(p) - std::log(2.0L) - std::lgamma(1.0L / p);
}

}  // namespace

double gennorm_cdf(double x, double p) {
  if (x == 0.0) return 0.5;
  const long double lp = p;
  const long double c = std::exp(log_normalizer(lp));
  boost::math::quadrature::tanh_sinh<long double> integrator;
  const auto density = [&](long double t) { return std::exp(-std::pow(t, lp) / lp); };
  const long double half = c * integrator.integrate(density, 0.0L, static_cast<long double>(std::fabs(x)));
  return static_cast<double>(x > 0 ? 0.5L + half : 0.5L - half);
}

double gennorm_log_sf(double x, double p) {
  if (x < 0.0) throw std::invalid_argument("gennorm_log_sf oracle needs x >= 0");
  const long double lp = p;
  const long double lx = x;
  const long double xp = std::pow(lx, lp);
  // 1 - cdf(x) = c e^{-x^p/p} int_0^inf exp(-((x+s)^p - x^p)/p) ds
  boost::math::quadrature::exp_sinh<long double> integrator;
  const auto shifted = [&](long double s) {
    const long double diff = lx > 0 ? xp * std::expm1(lp * std::log1p(s / lx)) : std::pow(s, lp);
    return std::exp(-diff / lp);
  };
  const long double tail = integrator.integrate(shifted);
  return static_cast<double>(log_normalizer(lp) - xp / lp + std::log(tail));
}

double gennorm_g(double r, double p) {
  if (r >= 0.0) return -gennorm_log_sf(r, p);
  // cdf(-r) close to 1: use -log1p(-sf(-r)).
  const double sf = std::exp(gennorm_log_sf(-r, p));
  return -std::log1p(-sf);
}

double exact_sum(const std::vector<double>& v) {
  std::vector<mpfr_t> terms(v.size());
  std::vector<mpfr_ptr> ptrs(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    mpfr_init2(terms[i], 53);
    mpfr_set_d(terms[i], v[i], MPFR_RNDN);
    ptrs[i] = terms[i];
  }
  mpfr_t out;
  mpfr_init2(out, 53);
  mpfr_sum(out, ptrs.data(), static_cast<unsigned long>(v.size()), MPFR_RNDN);
  const double r = mpfr_get_d(out, MPFR_RNDN);
  mpfr_clear(out);
  for (auto& t : terms) mpfr_clear(t);
  return r;
}

pprobit::RowMatrix dense_sketch(const pprobit::SketchOperator& op, const pprobit::RowMatrix& x) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto d = static_cast<std::size_t>(x.cols());
  pprobit::Matrix pi = pprobit::Matrix::Zero(static_cast<Eigen::Index>(op.n_prime), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    pi(static_cast<Eigen::Index>(op.bucket(i)), static_cast<Eigen::Index>(i)) = op.coefficient(i);
  pprobit::RowMatrix out(pi.rows(), x.cols());
  std::vector<double> products(n);
  for (Eigen::Index b = 0; b < pi.rows(); ++b)
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t i = 0; i < n; ++i)
        products[i] = pi(b, static_cast<Eigen::Index>(i)) * x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      out(b, static_cast<Eigen::Index>(j)) = exact_sum(products);
    }
  return out;
}

std::vector<double> prefix_leverage(const pprobit::RowMatrix& x) {
  const Eigen::Index d = x.cols();
  pprobit::Matrix gram = pprobit::Matrix::Zero(d, d);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const pprobit::Vector xi = x.row(i).transpose();
    gram += xi * xi.transpose();
    Eigen::JacobiSVD<pprobit::Matrix> svd(gram, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double cutoff = 1e-10 * (s.size() ? s(0) : 0.0);
    pprobit::Vector inv = pprobit::Vector::Zero(d);
    for (Eigen::Index k = 0; k < d; ++k)
      if (s(k) > cutoff) inv(k) = 1.0 / s(k);
    const pprobit::Matrix pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
    out.push_back(xi.dot(pinv * xi));
  }
  return out;
}

std::vector<pprobit::Vector> half_circle(std::size_t grid) {
  std::vector<pprobit::Vector> dirs;
  dirs.reserve(grid);
  for (std::size_t t = 0; t < grid; ++t) {
    const double a = std::numbers::pi * static_cast<double>(t) / static_cast<double>(grid);
    pprobit::Vector b(2);
    b << std::cos(a), std::sin(a);
    dirs.push_back(b);
  }
  return dirs;
}

std::vector<double> brute_force_leverage_2d(const pprobit::RowMatrix& x, double p, std::size_t grid) {
  if (x.cols() != 2) throw std::invalid_argument("brute-force leverage is for d = 2");
  std::vector<double> u(static_cast<std::size_t>(x.rows()), 0.0);
  for (const auto& b : half_circle(grid)) {
    const pprobit::Vector r = x * b;
    const double norm = r.array().abs().pow(p).sum();
    if (norm == 0.0) continue;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      u[static_cast<std::size_t>(i)] = std::max(u[static_cast<std::size_t>(i)], std::pow(std::fabs(r(i)), p) / norm);
  }
  return u;
}

}  // namespace oracle
