#include "core/exact_sum.hpp"

#include <bit>
#include <cmath>
#include <limits>

namespace pprobit {
namespace {

constexpr std::int64_t kDigitMask = 0xffffffffLL;
constexpr std::uint32_t kNormalizeEvery = 1U << 29;

int floor_div32(int e) { return e >= 0 ? e / 32 : -((-e + 31) / 32); }

// Propagates carries so every digit is in [0, 2^32); returns the final carry.
std::int64_t propagate(std::vector<std::int64_t>& d) {
  std::int64_t carry = 0;
  for (auto& limb : d) {
    const std::int64_t t = limb + carry;
    carry = t >> 32;  // arithmetic shift == floor division
    limb = t & kDigitMask;
  }
  return carry;
}

}  // namespace

void ExactSum::reserve_range(int lo, int hi) {
  if (limbs_.empty()) {
    base_ = lo;
    limbs_.assign(static_cast<std::size_t>(hi - lo + 1), 0);
    return;
  }
  if (lo < base_) {
    limbs_.insert(limbs_.begin(), static_cast<std::size_t>(base_ - lo), 0);
    base_ = lo;
  }
  const int top = base_ + static_cast<int>(limbs_.size()) - 1;
  if (hi > top) limbs_.resize(limbs_.size() + static_cast<std::size_t>(hi - top), 0);
}

void ExactSum::add_digit(int position, std::int64_t digit) {
  limbs_[static_cast<std::size_t>(position - base_)] += digit;
}

void ExactSum::add(double v) {
  if (v == 0.0) return;
  int exp = 0;
  const double frac = std::frexp(std::fabs(v), &exp);  // |v| = frac * 2^exp
  const auto mant = static_cast<std::uint64_t>(std::ldexp(frac, 53));
  const int e = exp - 53;
  const int pos = floor_div32(e);
  const int shift = e - 32 * pos;
  const unsigned __int128 t = static_cast<unsigned __int128>(mant) << shift;
  const std::int64_t sign = v < 0 ? -1 : 1;
  reserve_range(pos, pos + 2);
  add_digit(pos, sign * static_cast<std::int64_t>(t & kDigitMask));
  add_digit(pos + 1, sign * static_cast<std::int64_t>((t >> 32) & kDigitMask));
  add_digit(pos + 2, sign * static_cast<std::int64_t>(t >> 64));
  if (++pending_ >= kNormalizeEvery) normalize();
}

void ExactSum::merge(const ExactSum& other) {
  if (other.limbs_.empty()) return;
  const int lo = other.base_;
  const int hi = other.base_ + static_cast<int>(other.limbs_.size()) - 1;
  reserve_range(lo, hi);
  for (std::size_t k = 0; k < other.limbs_.size(); ++k)
    add_digit(lo + static_cast<int>(k), other.limbs_[k]);
  pending_ += other.pending_ + 1;
  if (pending_ >= kNormalizeEvery) normalize();
}

void ExactSum::normalize() {
  const std::int64_t carry = propagate(limbs_);
  if (carry != 0) limbs_.push_back(carry);
  pending_ = 0;
}

double ExactSum::value() const {
  if (limbs_.empty()) return 0.0;
  std::vector<std::int64_t> d = limbs_;
  bool negative = false;
  std::int64_t carry = propagate(d);
  if (carry < 0) {
    negative = true;
    d = limbs_;
    for (auto& limb : d) limb = -limb;
    carry = propagate(d);
  }
  if (carry != 0) d.push_back(carry);

  int top = static_cast<int>(d.size()) - 1;
  while (top >= 0 && d[static_cast<std::size_t>(top)] == 0) --top;
  if (top < 0) return 0.0;

  auto digit = [&](int k) -> std::uint64_t {
    return k >= 0 ? static_cast<std::uint64_t>(d[static_cast<std::size_t>(k)]) : 0;
  };
  const unsigned __int128 window = (static_cast<unsigned __int128>(digit(top)) << 64) |
                                   (static_cast<unsigned __int128>(digit(top - 1)) << 32) |
                                   digit(top - 2);
  bool sticky = false;
  for (int k = top - 3; k >= 0 && !sticky; --k) sticky = d[static_cast<std::size_t>(k)] != 0;

  const int bits = 64 + (32 - std::countl_zero(static_cast<std::uint32_t>(digit(top))));
  const int shift = bits - 53;
  std::uint64_t mant = static_cast<std::uint64_t>(window >> shift);
  const unsigned __int128 rem = window & ((static_cast<unsigned __int128>(1) << shift) - 1);
  const unsigned __int128 half = static_cast<unsigned __int128>(1) << (shift - 1);
  if (rem > half || (rem == half && (sticky || (mant & 1U)))) ++mant;

  const int exponent = shift + 32 * (top - 2 + base_);
  const double mag = std::ldexp(static_cast<double>(mant), exponent);
  return negative ? -mag : mag;
}

}  // namespace pprobit
