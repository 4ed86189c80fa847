#pragma once

#include <cstddef>
#include <string>

#include "core/gennorm.hpp"
#include "core/types.hpp"

namespace pprobit {

enum class SolverMethod { Newton, GradientDescent };

/// Zero-valued max_iter / grad_tol select the defaults: 100 Newton or 5000
/// gradient iterations, and grad_tol = 1e-8 * max(1, sum of weights).
struct SolverConfig {
  SolverMethod method = SolverMethod::Newton;
  std::size_t max_iter = 0;
  double grad_tol = 0.0;
  double damping_init = 0.0;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
};

struct FitResult {
  Vector beta;
  double final_loss = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  bool mle_may_not_exist = false;
  std::size_t gradient_fallbacks = 0;  // Newton iterations that took a gradient step
  std::string diagnostic;
};

/// Resolved tolerance and iteration cap for a problem with the given total weight.
SolverConfig resolve_config(const SolverConfig& config, double total_weight);

/// Minimizes sum_i w_i g(x_i beta). Every accepted step satisfies the Armijo
/// condition, so the loss never increases. An empty `w` means unit weights and
/// an empty `beta0` means the zero vector.
FitResult fit(const RowMatrix& x, const Vector& w, const Shape& p, const SolverConfig& config,
              const Vector& beta0 = Vector());

}  // namespace pprobit
