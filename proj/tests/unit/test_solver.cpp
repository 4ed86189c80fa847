#include <cmath>
#include <random>

#include "doctest.h"

#include "core/objective.hpp"
#include "core/solver.hpp"

using namespace pprobit;

namespace {

RowMatrix noisy_instance(std::uint64_t seed, Eigen::Index n, Eigen::Index d) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Vector truth(d);
  for (Eigen::Index j = 0; j < d; ++j) truth(j) = nd(rng);
  RowMatrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::RowVectorXd z(d);
    for (Eigen::Index j = 0; j < d; ++j) z(j) = nd(rng);
    const int y = z.dot(truth) + nd(rng) > 0 ? 1 : 0;
    x.row(i) = (y == 1 ? -1.0 : 1.0) * z;
  }
  return x;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("default configuration") {
  const SolverConfig c = resolve_config(SolverConfig{}, 500.0);
  CHECK(c.max_iter == 100);
  CHECK(c.grad_tol == doctest::Approx(5e-6));
  SolverConfig gd;
  gd.method = SolverMethod::GradientDescent;
  CHECK(resolve_config(gd, 0.5).max_iter == 5000);
  CHECK(resolve_config(gd, 0.5).grad_tol == doctest::Approx(1e-8));
}

TEST_CASE("symmetric data gives zero coefficients") {
  RowMatrix x(2, 1);
  x << 1.0, -1.0;
  for (const double p : {1.0, 1.5, 2.0, 5.0}) {
    const FitResult f = fit(x, Vector::Ones(2), Shape(p), SolverConfig{});
    CHECK(f.converged);
    CHECK(std::fabs(f.beta(0)) < 1e-12);
    CHECK(f.final_loss == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-14));
  }
}

TEST_CASE("separable data is reported, not fixed") {
  RowMatrix x(1, 1);
  x << -1.0;
  for (const double p : {1.0, 2.0}) {
    const FitResult f = fit(x, Vector(), Shape(p), SolverConfig{});
    CHECK_FALSE(f.converged);
    CHECK(f.mle_may_not_exist);
    CHECK(f.beta(0) > 0.0);
    CHECK(f.final_loss < std::log(2.0));
  }
}

TEST_CASE("newton and gradient descent agree") {
  const RowMatrix x = noisy_instance(3, 200, 5);
  const Shape two(2.0);
  const FitResult nt = fit(x, Vector(), two, SolverConfig{});
  SolverConfig gd_cfg;
  gd_cfg.method = SolverMethod::GradientDescent;
  const FitResult gd = fit(x, Vector(), two, gd_cfg);
  const double tol = resolve_config(SolverConfig{}, 200.0).grad_tol;
  CHECK(nt.converged);
  CHECK(gd.converged);
  CHECK(nt.gradient_norm <= tol);
  CHECK(gd.gradient_norm <= tol);
  CHECK(nt.final_loss <= gd.final_loss + 1e-8);
  CHECK((nt.beta - gd.beta).norm() < 1e-5);
  CHECK(nt.iterations < 20);
}

TEST_CASE("weights scale the loss but not the minimizer") {
  const RowMatrix x = noisy_instance(8, 150, 4);
  for (const double p : {1.0, 1.5, 3.0}) {
    const Shape s(p);
    const FitResult a = fit(x, Vector::Ones(150), s, SolverConfig{});
    const FitResult b = fit(x, Vector::Constant(150, 2.0), s, SolverConfig{});
    const FitResult plain = fit(x, Vector(), s, SolverConfig{});
    CHECK(a.converged);
    CHECK(b.converged);
    CHECK((a.beta - b.beta).norm() < 1e-6);
    CHECK(b.final_loss == doctest::Approx(2.0 * a.final_loss).epsilon(1e-12));
    CHECK(a.beta == plain.beta);
  }
}

TEST_CASE("deterministic and monotone") {
  const RowMatrix x = noisy_instance(12, 300, 6);
  const Shape s(1.5);
  const FitResult a = fit(x, Vector(), s, SolverConfig{});
  const FitResult b = fit(x, Vector(), s, SolverConfig{});
  CHECK(a.beta == b.beta);
  CHECK(a.final_loss == b.final_loss);
  CHECK(a.final_loss <= loss(x, Vector(), Vector::Zero(6), s));
  // Restarting from the optimum does not move it.
  const FitResult c = fit(x, Vector(), s, SolverConfig{}, a.beta);
  CHECK(c.converged);
  CHECK(c.final_loss <= a.final_loss);
  // A short iteration budget never ends above the starting loss.
  SolverConfig tight;
  tight.method = SolverMethod::GradientDescent;
  tight.max_iter = 3;
  const FitResult d = fit(x, Vector(), s, tight);
  CHECK_FALSE(d.converged);
  CHECK(d.final_loss <= loss(x, Vector(), Vector::Zero(6), s));
}

TEST_CASE("p = 1 and large p converge") {
  for (const double p : {1.0, 5.0}) {
    const RowMatrix x = noisy_instance(31, 400, 3);
    const FitResult f = fit(x, Vector(), Shape(p), SolverConfig{});
    CHECK(f.converged);
    CHECK_FALSE(f.mle_may_not_exist);
  }
}

}  // TEST_SUITE
