#include "core/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/error.hpp"
#include "core/objective.hpp"

namespace pprobit {
namespace {

constexpr double kBetaBlowup = 1e6;
constexpr int kMaxDampingRounds = 30;
constexpr int kMaxBacktracks = 60;

// Solves (H + lambda I) step = -grad with growing lambda until the step is a
// descent direction. Returns false if no damping level works.
bool newton_direction(const Matrix& h, const Vector& grad, double lambda0, Vector& step) {
  const double scale = std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
  double lambda = lambda0;
  for (int round = 0; round < kMaxDampingRounds; ++round) {
    Matrix damped = h;
    damped.diagonal().array() += lambda;
    Eigen::LLT<Matrix> llt(damped);
    bool ok = false;
    if (llt.info() == Eigen::Success) {
      step = llt.solve(-grad);
      ok = step.allFinite();
    } else {
      Eigen::LDLT<Matrix> ldlt(damped);
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        step = ldlt.solve(-grad);
        ok = step.allFinite();
      }
    }
    if (ok && grad.dot(step) < 0.0) return true;
    lambda = lambda == 0.0 ? 1e-10 * scale : lambda * 10.0;
  }
  return false;
}

// A convex objective with a finite minimizer grows without bound along every
// direction; separable data instead has a recession direction along which the
// loss keeps falling.
bool has_recession_direction(const RowMatrix& x, const Vector& w, const Shape& p,
                             const Vector& beta, double f, const Vector& dir) {
  const double norm = dir.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) return false;
  const double reach = 1e3 * (1.0 + beta.norm());
  const Vector probe = beta + (reach / norm) * dir;
  return loss(x, w, probe, p) <= f;
}

}  // namespace

SolverConfig resolve_config(const SolverConfig& config, double total_weight) {
  if (config.grad_tol < 0.0 || !std::isfinite(config.grad_tol))
    fail(ErrorCode::InvalidArgument, "grad_tol must be > 0");
  if (!(config.shrink > 0.0 && config.shrink < 1.0))
    fail(ErrorCode::InvalidArgument, "backtracking shrink factor must lie in (0, 1)");
  if (!(config.sufficient_decrease > 0.0 && config.sufficient_decrease < 1.0))
    fail(ErrorCode::InvalidArgument, "sufficient-decrease constant must lie in (0, 1)");
  if (config.damping_init < 0.0) fail(ErrorCode::InvalidArgument, "damping_init must be >= 0");
  SolverConfig out = config;
  if (out.max_iter == 0) out.max_iter = config.method == SolverMethod::Newton ? 100 : 5000;
  if (out.grad_tol == 0.0) out.grad_tol = 1e-8 * std::max(1.0, total_weight);
  return out;
}

FitResult fit(const RowMatrix& x, const Vector& w, const Shape& p, const SolverConfig& config,
              const Vector& beta0) {
  const Eigen::Index d = x.cols();
  const double total_weight = w.size() ? w.sum() : static_cast<double>(x.rows());
  const SolverConfig cfg = resolve_config(config, total_weight);
  const bool newton = cfg.method == SolverMethod::Newton;

  FitResult res;
  res.beta = beta0.size() ? beta0 : Vector::Zero(d);
  if (res.beta.size() != d) fail(ErrorCode::Dimension, "beta0 length does not match X");
  const Vector start = res.beta;

  Evaluation ev = evaluate(x, w, res.beta, p, newton);
  double bb_step = 1.0;
  Vector prev_beta;
  Vector prev_grad;

  for (;;) {
    res.final_loss = ev.loss;
    res.gradient_norm = ev.gradient.cwiseAbs().maxCoeff();
    if (res.gradient_norm <= cfg.grad_tol) {
      const bool recedes =
          has_recession_direction(x, w, p, res.beta, ev.loss, res.beta - start) ||
          has_recession_direction(x, w, p, res.beta, ev.loss, -ev.gradient);
      if (recedes) {
        res.mle_may_not_exist = true;
        res.diagnostic = "loss keeps decreasing along a recession direction; the MLE may not exist";
      } else {
        res.converged = true;
      }
      return res;
    }
    if (res.iterations >= cfg.max_iter) {
      res.diagnostic = "iteration limit reached";
      return res;
    }
    if (res.beta.norm() > kBetaBlowup) {
      res.mle_may_not_exist = true;
      res.diagnostic = "coefficient norm exceeded 1e6 while the gradient stalled; the MLE may not exist";
      return res;
    }

    Vector step;
    bool gradient_step = true;
    if (newton && newton_direction(ev.hessian, ev.gradient, cfg.damping_init, step))
      gradient_step = false;
    if (gradient_step) {
      double t0 = 1.0;
      if (!newton) {
        if (prev_beta.size()) {
          const Vector s = res.beta - prev_beta;
          const Vector y = ev.gradient - prev_grad;
          const double sy = s.dot(y);
          if (sy > 0.0) bb_step = s.squaredNorm() / sy;
        }
        t0 = bb_step;
      } else {
        ++res.gradient_fallbacks;
        t0 = 1.0 / std::max(1.0, ev.gradient.norm());
      }
      step = -t0 * ev.gradient;
    }

    // Armijo backtracking.
    const double slope = ev.gradient.dot(step);
    double t = 1.0;
    bool accepted = false;
    Vector trial;
    double f_trial = 0.0;
    for (int k = 0; k < kMaxBacktracks; ++k) {
      trial = res.beta + t * step;
      f_trial = loss(x, w, trial, p);
      if (std::isfinite(f_trial) && f_trial <= ev.loss + cfg.sufficient_decrease * t * slope) {
        accepted = true;
        break;
      }
      t *= cfg.shrink;
    }
    if (!accepted) {
      res.diagnostic = "line search found no descent; stopping with the last iterate";
      return res;
    }
    prev_beta = res.beta;
    prev_grad = ev.gradient;
    res.beta = trial;
    ++res.iterations;
    ev = evaluate(x, w, res.beta, p, newton);
  }
}

}  // namespace pprobit
