#pragma once

#include <cmath>

namespace pprobit {

/// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) noexcept {
    const double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  void merge(const CompensatedSum& o) noexcept {
    add(o.sum);
    add(o.comp);
  }
  double value() const noexcept { return sum + comp; }
};

}  // namespace pprobit
