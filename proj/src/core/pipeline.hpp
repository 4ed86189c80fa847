#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "core/row_source.hpp"
#include "core/sampling.hpp"
#include "core/types.hpp"

namespace pprobit {

enum class CoresetMethod { Pprobit, Uniform, L2, SqrtL2, OnlineL2 };

std::string method_name(CoresetMethod m);
/// Accepts "pprobit", "uniform", "l2", "sqrt-l2" and "online-l2".
CoresetMethod parse_method(const std::string& name);
/// Passes the method makes over its input (rounding adds one for pprobit).
std::size_t expected_passes(CoresetMethod m, bool rounding);

struct CoresetOptions {
  CoresetMethod method = CoresetMethod::Pprobit;
  double p = 2.0;
  std::size_t k = 100;
  std::uint64_t seed = 1;
  bool rounding = false;
  bool use_jl = true;   // R^-1 G compression for p = 2 when ln n < d
  unsigned threads = 1; // in-memory sketching and scoring only
};

struct StreamStats {
  std::size_t passes = 0;
  std::size_t rows = 0;
  std::size_t sketch_rows = 0;     // n'
  std::size_t state_bytes = 0;     // peak bytes held by sketch + sampler state
  std::size_t budget_bytes = 0;
  double t_sketch_ms = 0.0;        // first pass
  double t_sample_ms = 0.0;        // scoring and sampling passes
  bool k_clamped = false;          // k >= n: the coreset is the data itself
};

struct ScoreSummary {
  double total = 0.0;  // S
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

struct CoresetResult {
  WeightedCoreset coreset;
  StreamStats stats;
  ScoreSummary scores;
};

/// Memory allowance for streaming construction: a constant times
/// n'd + kd + d^2 doubles plus one bit per row.
std::size_t state_budget_bytes(std::size_t n_prime, std::size_t d, std::size_t k, std::size_t n);

/// Builds a coreset from a row stream. pprobit, l2 and sqrt-l2 read the
/// source twice (three times with rounding); uniform and online-l2 once.
CoresetResult build_coreset(RowSource& source, const CoresetOptions& options);

/// Same construction over an in-memory matrix. The sketch and the scores may
/// be computed on several threads; the result does not depend on the count.
CoresetResult build_coreset(const RowMatrix& x, const CoresetOptions& options);

/// CSV with columns weight, x1..xd (full precision) and a JSON sidecar with
/// the construction parameters and score statistics.
void write_coreset(const CoresetResult& result, const CoresetOptions& options,
                   const std::string& csv_path, const std::string& json_path);

}  // namespace pprobit
