#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "core/error.hpp"
#include "core/online.hpp"

using namespace pprobit;

namespace {

std::span<const double> row_span(const RowMatrix& x, Eigen::Index i) {
  return {x.row(i).data(), static_cast<std::size_t>(x.cols())};
}

}  // namespace

TEST_SUITE("online") {

TEST_CASE("leverage matches the prefix pseudoinverse") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> nd;
  RowMatrix x(3000, 5);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < 5; ++j) x(i, j) = nd(rng) * (j == 4 ? 1e-2 : 1.0);
  // Rank grows slowly at the start: repeated and dependent rows.
  x.row(1) = 2.0 * x.row(0);
  x.row(2) = x.row(0) - 3.0 * x.row(1);
  const std::vector<double> expected = oracle::prefix_leverage(x);
  OnlineLeverageState st(5);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double l = online_leverage_update(st, row_span(x, i));
    worst = std::max(worst, std::fabs(l - std::min(expected[static_cast<std::size_t>(i)], 1.0)));
    CHECK(l >= 0.0);
    CHECK(l <= 1.0);
  }
  CHECK(worst < 1e-8);
  CHECK(st.rank == 5);
  CHECK(st.recomputes <= 5);
}

TEST_CASE("first row and new directions have leverage one") {
  OnlineLeverageState st(3);
  const double a[3] = {1, 0, 0}, b[3] = {2, 0, 0}, c[3] = {0, 1, 0};
  CHECK(online_leverage_update(st, a) == doctest::Approx(1.0));
  CHECK(online_leverage_update(st, b) == doctest::Approx(4.0 / 5.0));
  CHECK(st.rank == 1);
  CHECK(online_leverage_update(st, c) == doctest::Approx(1.0));
  CHECK(st.rank == 2);
  const double zero[3] = {0, 0, 0};
  CHECK(online_leverage_update(st, zero) == 0.0);
  const double bad[3] = {1, std::nan(""), 0};
  CHECK_THROWS_AS(online_leverage_update(st, bad), Error);
  CHECK_THROWS_AS(online_leverage_update(st, std::span<const double>(a, 2)), Error);
}

TEST_CASE("leverage sum grows logarithmically") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  const std::size_t d = 4, n = 20000;
  OnlineLeverageState st(d);
  std::vector<double> row(d);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : row) v = nd(rng);
    sum += online_leverage_update(st, row);
  }
  CHECK(sum <= static_cast<double>(d) * (1.0 + std::log(static_cast<double>(n))) + d);
}

TEST_CASE("known and unknown row counts sample the same law") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  RowMatrix x(6, 2);
  for (Eigen::Index i = 0; i < 6; ++i) x.row(i) << nd(rng), nd(rng);
  x.row(5) *= 30.0;
  OnlineLeverageState st(2);
  std::vector<double> s(6);
  double total = 0.0;
  for (Eigen::Index i = 0; i < 6; ++i) {
    s[static_cast<std::size_t>(i)] = online_leverage_update(st, row_span(x, i)) + 1.0 / 6.0;
    total += s[static_cast<std::size_t>(i)];
  }
  const std::size_t k = 60000;
  for (const bool known : {true, false}) {
    const WeightedCoreset c = online_coreset(x, k, 17, known);
    CHECK(c.size() == k);
    CHECK(c.method_tag == "online-l2");
    CHECK(c.total_score == doctest::Approx(total).epsilon(1e-12));
    std::vector<double> freq(6, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t i = c.source_indices[j];
      freq[i] += 1.0 / static_cast<double>(k);
      CHECK(c.scores[j] == doctest::Approx(s[i]).epsilon(1e-12));
      CHECK(c.rows.row(static_cast<Eigen::Index>(j)) == x.row(static_cast<Eigen::Index>(i)));
    }
    double l1 = 0.0;
    for (std::size_t i = 0; i < 6; ++i) l1 += std::fabs(freq[i] - s[i] / total);
    CHECK(l1 < 0.02);
  }
}

TEST_CASE("builder bookkeeping") {
  OnlineCoresetBuilder b(2, 10, 1, 3);
  const double r[2] = {1, 2};
  b.feed(r);
  b.feed(r);
  b.feed(r);
  CHECK_THROWS_AS(b.feed(r), Error);
  CHECK(b.rows() == 3);
  CHECK(b.leverage_sum() > 0.0);
  CHECK(b.state_bytes() > 0);
  CHECK_THROWS_AS(OnlineCoresetBuilder(2, 10, 1, 0), Error);
  CHECK_THROWS_AS(OnlineCoresetBuilder(2, 10, 1).finish(), Error);
  const WeightedCoreset c = b.finish();
  CHECK(c.size() == 10);
}

}  // TEST_SUITE
