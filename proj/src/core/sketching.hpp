#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "core/exact_sum.hpp"
#include "core/gennorm.hpp"
#include "core/types.hpp"

namespace pprobit {

/// Seeded description of the sparse embedding Pi = Psi D (p = 2) or
/// Pi = Psi D E (p != 2): row i goes to bucket B_i with sign sigma_i and, for
/// p != 2, scale lambda_i^(-1/p) with lambda_i ~ Exp(1). Every draw is a pure
/// function of (seed, i).
struct SketchOperator {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t n_prime = 0;
  double p = 2.0;
  std::uint64_t seed = 0;
  bool identity = false;  // B_i = i, sigma_i = 1, no scaling (test fixture)

  std::size_t bucket(std::size_t i) const noexcept;
  double sign(std::size_t i) const noexcept;
  double lambda(std::size_t i) const noexcept;
  /// sigma_i * lambda_i^(-1/p), or sigma_i for p = 2.
  double coefficient(std::size_t i) const noexcept;

  static SketchOperator make_identity(std::size_t n, std::size_t d);
};

/// Bucket count: min(n, 4 d^2) for p <= 2, and
/// min(n, ceil(n^(1-2/p) ln n * d * ceil(ln d + 1)) + 4 d^2) for p > 2.
std::size_t sketch_size(std::size_t n, std::size_t d, double p);

SketchOperator make_sketch_operator(std::size_t n, std::size_t d, const Shape& p,
                                    std::uint64_t seed);

struct SketchMatrix {
  RowMatrix data;  // n' x d
  std::size_t rows_processed = 0;
};

/// Streaming accumulation of Pi X. Entries are summed exactly, so the result
/// does not depend on row order or on how rows were sharded.
class SketchAccumulator {
 public:
  explicit SketchAccumulator(SketchOperator op);

  /// Adds row `index` (0-based). Rejects out-of-range and repeated indices.
  void add(std::size_t index, const double* row);
  void merge(const SketchAccumulator& other);
  SketchMatrix finish() const;

  const SketchOperator& op() const noexcept { return op_; }
  std::size_t rows_processed() const noexcept { return rows_; }
  std::size_t state_bytes() const noexcept;

 private:
  SketchOperator op_;
  std::vector<ExactSum> cells_;
  std::vector<bool> seen_;
  std::size_t rows_ = 0;
};

/// Sketches X in one pass; with threads > 1 rows are sharded and the partial
/// sketches merged in shard order.
SketchMatrix sketch_apply(const SketchOperator& op, const RowMatrix& x, unsigned threads = 1);

struct DistortionStats {
  double max_distortion = 1.0;  // max over trials of max(r, 1/r)
  double min_ratio = 1.0;
  double max_ratio = 1.0;
  double median_ratio = 1.0;
  std::size_t trials = 0;
};

/// Ratio ||Pi X beta||_q / ||X beta||_p over random unit beta, with q = 2 for
/// p <= 2 and q = infinity for p > 2.
DistortionStats embedding_distortion_check(const RowMatrix& x, const SketchOperator& op,
                                           std::size_t trials, std::uint64_t seed);

/// Gaussian compressor G in R^(d x m), m = ceil(ln n), entries N(0, 1/m).
struct JlCompressor {
  Matrix g;
  std::uint64_t seed = 0;
};

JlCompressor make_jl_compressor(std::size_t d, std::size_t n, std::uint64_t seed);

/// The compressor is used only for p = 2 and ln n < d.
bool jl_applies(double p, std::size_t n, std::size_t d);

}  // namespace pprobit
