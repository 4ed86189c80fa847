#pragma once

#include <cstdint>
#include <vector>

namespace pprobit {

/// Exact accumulator for sums of doubles. The running sum is held as a
/// fixed-point integer over 32-bit digits, so the result of `value()` is the
/// correctly rounded exact sum, independent of the order of `add` calls.
/// Results that land in the subnormal range may be rounded twice.
class ExactSum {
 public:
  void add(double v);
  void merge(const ExactSum& other);
  double value() const;
  bool empty() const noexcept { return limbs_.empty(); }
  std::size_t bytes() const noexcept {
    return sizeof(*this) + limbs_.capacity() * sizeof(std::int64_t);
  }

 private:
  void add_digit(int position, std::int64_t digit);
  void reserve_range(int lo, int hi);
  void normalize();

  std::vector<std::int64_t> limbs_;  // limbs_[k] has weight 2^(32 * (k + base_))
  int base_ = 0;
  std::uint32_t pending_ = 0;  // adds since last carry propagation
};

}  // namespace pprobit
