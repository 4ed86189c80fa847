#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "core/pipeline.hpp"
#include "core/solver.hpp"
#include "core/types.hpp"

namespace pprobit {

struct ExperimentConfig {
  std::string dataset = "data";
  std::vector<double> p_values{1.0, 1.5, 2.0, 3.0, 5.0};
  std::vector<CoresetMethod> methods{CoresetMethod::Pprobit, CoresetMethod::Uniform,
                                     CoresetMethod::L2, CoresetMethod::SqrtL2,
                                     CoresetMethod::OnlineL2};
  std::vector<std::size_t> k_grid;  // empty: default_k_grid(n, d)
  std::size_t trials = 21;
  std::uint64_t seed = 1;
  bool rounding = false;
  SolverConfig solver;
  unsigned threads = 0;             // 0: default_threads()
};

/// One (p, method, k, trial) outcome. `ratio` is f(X b~)/f(X b*) with b~
/// fitted on the coreset and b* on the full data, clamped to 1 when it falls
/// below by at most 1e-6.
struct ExperimentRecord {
  std::string dataset;
  double p = 2.0;
  std::string method;
  std::size_t k = 0;
  std::size_t trial = 0;
  std::uint64_t trial_seed = 0;
  double ratio = 1.0;
  double raw_ratio = 1.0;
  double coreset_objective = 0.0;  // f(X b~) on the full data
  double full_objective = 0.0;     // f(X b*)
  double t_sketch_ms = 0.0;
  double t_sample_ms = 0.0;
  double t_reduce_ms = 0.0;
  double t_solve_ms = 0.0;
  bool solver_converged = false;
  std::size_t solver_iterations = 0;
  std::string solver_method;        // "newton" or "gd"
  std::size_t solver_max_iter = 0;  // resolved for this coreset's total weight
  double solver_grad_tol = 0.0;
  std::string config_hash;
  std::string data_hash;
};

struct SummaryRow {
  double p = 2.0;
  std::string method;
  std::size_t k = 0;
  std::size_t trials = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double niqr = 0.0;  // (q3 - q1) / median
  double median_t_reduce_ms = 0.0;
  double median_t_solve_ms = 0.0;
};

struct FullFitInfo {
  double p = 2.0;
  double objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double t_solve_ms = 0.0;
  std::string diagnostic;  // non-empty when the p was skipped
};

struct ExperimentResult {
  std::vector<ExperimentRecord> records;  // ordered by (p, method, k, trial)
  std::vector<SummaryRow> summary;
  std::vector<FullFitInfo> full_fits;
};

/// Geometric grid of six sizes from 5d to n/10 (deduplicated, at least one).
std::vector<std::size_t> default_k_grid(std::size_t n, std::size_t d);

/// Randomness of trial t: every method and size in that trial shares it.
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial);

ExperimentResult run_experiment(const RowMatrix& x, const ExperimentConfig& config);

/// Median, quartiles (linear interpolation between order statistics) and
/// normalized IQR per (p, method, k).
std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& records);

/// Quantile q in [0, 1] with linear interpolation; `v` need not be sorted.
double quantile(std::vector<double> v, double q);

std::string record_to_json(const ExperimentRecord& r, bool with_timings = true);
void write_records(const std::vector<ExperimentRecord>& records, const std::string& path);
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path);

/// 64-bit fingerprint of the matrix shape and contents, as 16 hex digits.
std::string data_fingerprint(const RowMatrix& x);

}  // namespace pprobit
