#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "core/conditioning.hpp"
#include "core/error.hpp"
#include "core/sampling.hpp"

using namespace pprobit;

namespace {

RowMatrix gaussian(std::uint64_t seed, Eigen::Index n, Eigen::Index d) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  RowMatrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = nd(rng) * (1.0 + j);
  return x;
}

std::vector<double> scores_of(const RowMatrix& x, const ConditioningTransform& t) {
  std::vector<double> q(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    q[static_cast<std::size_t>(i)] = row_score({x.row(i).data(), static_cast<std::size_t>(x.cols())}, t);
  return q;
}

}  // namespace

TEST_SUITE("conditioning") {

TEST_CASE("transform from the identity sketch orthonormalizes X") {
  const RowMatrix x = gaussian(2, 400, 5);
  SketchMatrix sk;
  sk.data = x;
  const ConditioningTransform t = build_transform(sk, Shape(2.0));
  for (Eigen::Index i = 0; i < 5; ++i) CHECK(t.r(i, i) > 0.0);
  CHECK(t.r.isUpperTriangular());
  const Matrix v = x * t.r_inv;
  CHECK((v.transpose() * v - Matrix::Identity(5, 5)).norm() < 1e-12);
  // With R from X itself the scores are the exact l2 leverage scores.
  const std::vector<double> q = scores_of(x, t);
  const std::vector<double> lev = l2_leverage_scores(x);
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    CHECK(q[i] == doctest::Approx(lev[i]).epsilon(1e-10));
    sum += q[i];
  }
  CHECK(sum == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("lp scores of the identity transform") {
  RowMatrix x(3, 2);
  x << 1, 0, 0, 1, 1, 1;
  SketchMatrix sk;
  sk.data = RowMatrix::Identity(2, 2);
  const ConditioningTransform t = build_transform(sk, Shape(3.0));
  const std::vector<double> q = scores_of(x, t);
  CHECK(q[0] == doctest::Approx(1.0));
  CHECK(q[2] == doctest::Approx(2.0));
}

TEST_CASE("rank deficiency is reported") {
  RowMatrix a(6, 3);
  for (Eigen::Index i = 0; i < 6; ++i) a.row(i) << 1.0 + i, 2.0 * (1.0 + i), 0.5 * i;
  SketchMatrix sk;
  sk.data = a;
  try {
    build_transform(sk, Shape(2.0));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RankDeficient);
    CHECK(std::string(e.what()).find("collinear") != std::string::npos);
  }
  sk.data = RowMatrix::Ones(2, 3);
  CHECK_THROWS_AS(build_transform(sk, Shape(2.0)), Error);
}

TEST_CASE("jl compression keeps scores within constant factors") {
  const RowMatrix x = gaussian(8, 3000, 20);
  SketchMatrix sk;
  sk.data = x;
  const ConditioningTransform plain = build_transform(sk, Shape(2.0));
  const ConditioningTransform compressed = build_transform(sk, Shape(2.0), make_jl_compressor(20, 3000, 3));
  CHECK(compressed.combined.cols() == static_cast<Eigen::Index>(std::ceil(std::log(3000.0))));
  const std::vector<double> a = scores_of(x, plain);
  const std::vector<double> b = scores_of(x, compressed);
  double sa = 0.0, sb = 0.0;
  std::size_t far = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
    if (b[i] > 4.0 * a[i] || b[i] < a[i] / 8.0) ++far;
  }
  CHECK(sb == doctest::Approx(sa).epsilon(0.35));
  CHECK(far < a.size() / 20);
  CHECK_THROWS_AS(build_transform(sk, Shape(2.0), make_jl_compressor(5, 3000, 3)), Error);
}

TEST_CASE("finalize adds the uniform term") {
  const std::vector<double> q{0.0, 1.0, 3.0, 0.5};
  const SensitivityScores s = finalize_scores(q, false);
  CHECK(s.s[0] == 0.25);
  CHECK(s.s[2] == 3.25);
  CHECK(s.total == doctest::Approx(5.5));
  CHECK_FALSE(s.rounded);
  CHECK_THROWS_AS(finalize_scores(std::vector<double>{1.0, -1.0}, false), Error);
  CHECK_THROWS_AS(finalize_scores(std::vector<double>{}, false), Error);
}

TEST_CASE("rounding to powers of two with a floor") {
  CHECK(round_up_pow2(1.0) == 1.0);
  CHECK(round_up_pow2(0.75) == 1.0);
  CHECK(round_up_pow2(3.0) == 4.0);
  CHECK(round_up_pow2(0.125) == 0.125);
  CHECK(round_up_pow2(0.13) == 0.25);
  const std::vector<double> q{0.0, 0.0, 0.0, 2.2};
  const SensitivityScores s = finalize_scores(q, true);
  // S0 = 3.2, floor S0 / n = 0.8.
  CHECK(s.s[0] == 0.8);
  CHECK(s.s[3] == 4.0);
  CHECK(s.total == doctest::Approx(3 * 0.8 + 4.0));
  CHECK(s.rounded);
  const SensitivityScores plain = finalize_scores(q, false);
  for (std::size_t i = 0; i < q.size(); ++i) {
    CHECK(s.s[i] >= plain.s[i]);
    CHECK(s.s[i] <= std::max(2.0 * plain.s[i], plain.total / 4.0));
  }
}

TEST_CASE("streaming qr matches a one-shot factorization") {
  const RowMatrix x = gaussian(4, 1300, 6);
  StreamingQr sq(6, 100);
  for (Eigen::Index i = 0; i < x.rows(); ++i) sq.add(x.row(i).data());
  const Matrix r = sq.finish();
  CHECK(r.isUpperTriangular());
  const Matrix gram = x.transpose() * x;
  CHECK((r.transpose() * r - gram).norm() < 1e-9 * gram.norm());
  for (Eigen::Index i = 0; i < 6; ++i) CHECK(r(i, i) >= 0.0);
  CHECK(sq.state_bytes() >= static_cast<std::size_t>((36 + 600) * sizeof(double)));
}

TEST_CASE("checked triangular inverse") {
  Matrix r(2, 2);
  r << 2, 1, 0, 4;
  const Matrix inv = invert_upper_checked(r);
  CHECK((r * inv - Matrix::Identity(2, 2)).norm() < 1e-15);
  r(1, 1) = 1e-20;
  CHECK_THROWS_AS(invert_upper_checked(r), Error);
}

TEST_CASE("lp scores bound the brute-force leverage in two dimensions") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> nd;
  RowMatrix x(300, 2);
  for (Eigen::Index i = 0; i < 300; ++i) x.row(i) << nd(rng), 0.3 * nd(rng) + 0.5 * x(i, 0);
  for (const double p : {1.0, 1.5, 3.0}) {
    SketchMatrix sk;
    sk.data = x;
    const ConditioningTransform t = build_transform(sk, Shape(p));
    const std::vector<double> q = scores_of(x, t);
    const std::vector<double> u = oracle::brute_force_leverage_2d(x, p, 2000);
    // R comes from X itself, so X R^-1 is orthonormal: u_i <= q_i for p <= 2
    // and u_i <= sqrt(d n) q_i for p = 3. Sensitivities sum to at most d^max(1, p/2).
    const double factor = p <= 2.0 ? 1.0 : std::sqrt(2.0 * 300.0);
    double worst = 0.0, total_u = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      worst = std::max(worst, u[i] / q[i]);
      total_u += u[i];
    }
    CHECK(worst <= factor * (1.0 + 1e-9));
    CHECK(total_u <= 2.0 * (1.0 + 1e-9) * (p <= 2.0 ? 1.0 : std::sqrt(2.0)));
  }
}

}  // TEST_SUITE
