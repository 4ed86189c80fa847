#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/conditioning.hpp"
#include "core/types.hpp"

namespace pprobit {

/// Weighted row sample (X', w). `scores` holds s_i(j) of each sampled row and
/// `total_score` the S used to normalize, so that w_j = S / (k s_i(j)).
struct WeightedCoreset {
  RowMatrix rows;
  Vector weights;
  std::vector<std::size_t> source_indices;
  std::vector<double> scores;
  double total_score = 0.0;
  std::string method_tag;

  std::size_t size() const noexcept { return static_cast<std::size_t>(rows.rows()); }
};

/// Single-slot weighted reservoir sampler (Chao): item i replaces the current
/// one with probability s_i / (sum of scores seen so far).
class ReservoirSampler {
 public:
  ReservoirSampler() = default;
  ReservoirSampler(std::uint64_t seed, std::uint64_t sampler_id)
      : seed_(seed), sampler_id_(sampler_id) {}

  /// Feeds with the keyed uniform for (seed, sampler_id, index).
  bool feed(std::size_t index, double score);
  /// Feeds with an explicit uniform u in (0, 1); returns true if replaced.
  bool feed_with_uniform(std::size_t index, double score, double u);

  std::optional<std::size_t> current() const noexcept { return current_; }
  double current_score() const noexcept { return current_score_; }
  double total_weight() const noexcept { return total_; }

  /// Combines samplers that saw disjoint streams: keeps a's item with
  /// probability W_a / (W_a + W_b).
  static ReservoirSampler merge(const ReservoirSampler& a, const ReservoirSampler& b, double u);

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t sampler_id_ = 0;
  std::optional<std::size_t> current_;
  double current_score_ = 0.0;
  double total_ = 0.0;
};

/// k independent single-slot samplers over one stream. Instead of a coin per
/// sampler per row, each sampler holds the cumulative-weight threshold at
/// which its next replacement happens (W_r / u), which has exactly the
/// per-row replacement law of ReservoirSampler at O(n + k log k log n) cost.
class ReservoirBank {
 public:
  ReservoirBank(std::size_t k, std::size_t d, std::uint64_t seed,
                std::uint64_t stream_tag = 0x31);

  void feed(std::size_t index, const double* row, double score);
  /// Sampler-wise merge with a bank that saw a disjoint part of the stream.
  void merge(const ReservoirBank& other, std::uint64_t merge_id);

  double total() const noexcept { return total_; }
  std::size_t k() const noexcept { return slots_.size(); }
  std::size_t rows_fed() const noexcept { return fed_; }
  std::size_t state_bytes() const noexcept;

  /// Slot contents; index is SIZE_MAX for a sampler that has seen nothing.
  std::size_t slot_index(std::size_t j) const { return slots_[j].index; }
  double slot_score(std::size_t j) const { return slots_[j].score; }
  const RowMatrix& slot_rows() const noexcept { return rows_; }

  /// Coreset with w_j = S / (k s_i(j)), S the total score fed.
  WeightedCoreset finish(std::string method_tag) const;

 private:
  struct Slot {
    std::size_t index = static_cast<std::size_t>(-1);
    double score = 0.0;
    double threshold = 0.0;
  };
  void reschedule(std::size_t j, std::size_t index);
  void heap_push(std::size_t j);

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::vector<Slot> slots_;
  RowMatrix rows_;
  std::vector<std::size_t> heap_;  // min-heap of sampler ids by threshold
  double total_ = 0.0;
  std::size_t fed_ = 0;
};

/// One pass over X feeding s_i to k samplers.
WeightedCoreset build_coreset_pass(const RowMatrix& x, const SensitivityScores& scores,
                                   std::size_t k, std::uint64_t seed,
                                   std::string method_tag = "pprobit");

WeightedCoreset uniform_coreset(const RowMatrix& x, std::size_t k, std::uint64_t seed);

/// Exact l2 leverage scores of the rows of X (optionally square-rooted) plus 1/n.
WeightedCoreset l2_leverage_coreset(const RowMatrix& x, std::size_t k, std::uint64_t seed,
                                    bool sqrt_scores);

/// Exact l2 leverage ||x_i R^-1||^2 of every row, R from a QR of X.
std::vector<double> l2_leverage_scores(const RowMatrix& x);

}  // namespace pprobit
