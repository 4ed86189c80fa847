#include "core/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "core/error.hpp"
#include "core/random.hpp"

namespace pprobit {
namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

void check_score(double score) {
  if (!(score > 0.0) || !std::isfinite(score))
    fail(ErrorCode::InvalidArgument, "reservoir scores must be finite and > 0");
}

std::uint64_t sampler_stream(std::uint64_t stream, std::size_t j) {
  return rng::mix64(stream ^ (static_cast<std::uint64_t>(j) << 8));
}

}  // namespace

bool ReservoirSampler::feed(std::size_t index, double score) {
  return feed_with_uniform(index, score,
                           rng::uniform(seed_, sampler_stream(rng::kReservoir, sampler_id_), index));
}

bool ReservoirSampler::feed_with_uniform(std::size_t index, double score, double u) {
  check_score(score);
  total_ += score;
  if (u * total_ < score) {
    current_ = index;
    current_score_ = score;
    return true;
  }
  return false;
}

ReservoirSampler ReservoirSampler::merge(const ReservoirSampler& a, const ReservoirSampler& b,
                                         double u) {
  ReservoirSampler out = a;
  out.total_ = a.total_ + b.total_;
  if (!(u * out.total_ < a.total_)) {
    out.current_ = b.current_;
    out.current_score_ = b.current_score_;
  }
  return out;
}

ReservoirBank::ReservoirBank(std::size_t k, std::size_t d, std::uint64_t seed,
                             std::uint64_t stream_tag)
    : seed_(seed),
      stream_(stream_tag),
      slots_(k),
      rows_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d)) {
  if (k == 0) fail(ErrorCode::InvalidArgument, "coreset size k must be >= 1");
  rows_.setZero();
  heap_.reserve(k);
  for (std::size_t j = 0; j < k; ++j) heap_push(j);
}

void ReservoirBank::heap_push(std::size_t j) {
  heap_.push_back(j);
  std::push_heap(heap_.begin(), heap_.end(), [this](std::size_t a, std::size_t b) {
    return slots_[a].threshold > slots_[b].threshold;
  });
}

void ReservoirBank::reschedule(std::size_t j, std::size_t index) {
  const double u = rng::uniform(seed_, sampler_stream(stream_, j), index);
  slots_[j].threshold = total_ / u;
  heap_push(j);
}

void ReservoirBank::feed(std::size_t index, const double* row, double score) {
  check_score(score);
  total_ += score;
  ++fed_;
  const auto cmp = [this](std::size_t a, std::size_t b) {
    return slots_[a].threshold > slots_[b].threshold;
  };
  while (!heap_.empty() && slots_[heap_.front()].threshold <= total_) {
    std::pop_heap(heap_.begin(), heap_.end(), cmp);
    const std::size_t j = heap_.back();
    heap_.pop_back();
    slots_[j].index = index;
    slots_[j].score = score;
    rows_.row(static_cast<Eigen::Index>(j)) =
        Eigen::Map<const Eigen::RowVectorXd>(row, rows_.cols());
    reschedule(j, index);
  }
}

void ReservoirBank::merge(const ReservoirBank& other, std::uint64_t merge_id) {
  if (other.k() != k() || other.rows_.cols() != rows_.cols())
    fail(ErrorCode::InvalidArgument, "cannot merge reservoir banks of different shapes");
  const double combined = total_ + other.total_;
  for (std::size_t j = 0; j < k(); ++j) {
    const double u = rng::uniform(seed_, sampler_stream(rng::kMerge, j), merge_id);
    const bool keep_this = slots_[j].index != kNone && u * combined < total_;
    if (!keep_this && other.slots_[j].index != kNone) {
      slots_[j].index = other.slots_[j].index;
      slots_[j].score = other.slots_[j].score;
      rows_.row(static_cast<Eigen::Index>(j)) = other.rows_.row(static_cast<Eigen::Index>(j));
    }
  }
  total_ = combined;
  fed_ += other.fed_;
  // Thresholds are meaningless after a merge; further feeding is not supported.
  heap_.clear();
}

std::size_t ReservoirBank::state_bytes() const noexcept {
  return sizeof(*this) + slots_.capacity() * sizeof(Slot) +
         static_cast<std::size_t>(rows_.size()) * sizeof(double) +
         heap_.capacity() * sizeof(std::size_t);
}

WeightedCoreset ReservoirBank::finish(std::string method_tag) const {
  if (fed_ == 0) fail(ErrorCode::InvalidArgument, "no rows were fed to the reservoir samplers");
  WeightedCoreset c;
  const auto k = static_cast<Eigen::Index>(slots_.size());
  c.rows = rows_;
  c.weights.resize(k);
  c.source_indices.resize(slots_.size());
  c.scores.resize(slots_.size());
  c.total_score = total_;
  c.method_tag = std::move(method_tag);
  for (Eigen::Index j = 0; j < k; ++j) {
    const Slot& s = slots_[static_cast<std::size_t>(j)];
    c.source_indices[static_cast<std::size_t>(j)] = s.index;
    c.scores[static_cast<std::size_t>(j)] = s.score;
    c.weights[j] = total_ / (static_cast<double>(k) * s.score);
  }
  return c;
}

WeightedCoreset build_coreset_pass(const RowMatrix& x, const SensitivityScores& scores,
                                   std::size_t k, std::uint64_t seed, std::string method_tag) {
  if (scores.s.size() != static_cast<std::size_t>(x.rows()))
    fail(ErrorCode::Dimension, "score vector length does not match the row count");
  ReservoirBank bank(k, static_cast<std::size_t>(x.cols()), seed);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    bank.feed(static_cast<std::size_t>(i), x.row(i).data(), scores.s[static_cast<std::size_t>(i)]);
  return bank.finish(std::move(method_tag));
}

WeightedCoreset uniform_coreset(const RowMatrix& x, std::size_t k, std::uint64_t seed) {
  ReservoirBank bank(k, static_cast<std::size_t>(x.cols()), seed);
  for (Eigen::Index i = 0; i < x.rows(); ++i) bank.feed(static_cast<std::size_t>(i), x.row(i).data(), 1.0);
  return bank.finish("uniform");
}

std::vector<double> l2_leverage_scores(const RowMatrix& x) {
  StreamingQr qr(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) qr.add(x.row(i).data());
  const Matrix r_inv = invert_upper_checked(qr.finish());
  std::vector<double> lev(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    lev[static_cast<std::size_t>(i)] = (x.row(i) * r_inv).squaredNorm();
  return lev;
}

WeightedCoreset l2_leverage_coreset(const RowMatrix& x, std::size_t k, std::uint64_t seed,
                                    bool sqrt_scores) {
  std::vector<double> q = l2_leverage_scores(x);
  if (sqrt_scores)
    for (auto& v : q) v = std::sqrt(v);
  const SensitivityScores s = finalize_scores(q, false);
  return build_coreset_pass(x, s, k, seed, sqrt_scores ? "sqrt-l2" : "l2");
}

}  // namespace pprobit
