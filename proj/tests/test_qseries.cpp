#include <catch_amalgamated.hpp>

#include "qjac/qseries.hpp"

#include <functional>
#include <random>

using namespace qjac;

namespace {

QExpansion from_ints(std::vector<long> c, int N, Rational offset = 0) {
  QExpansion s(offset, 0, N);
  for (std::size_t i = 0; i < c.size() && static_cast<int>(i) <= N; ++i) s.set(static_cast<int>(i), Graded(c[i]));
  return s;
}

// Akiyama-Tanigawa: an independent route to B_n (with B_1 = +1/2, irrelevant for even n).
Rational bernoulli_oracle(int n) {
  std::vector<Rational> a(n + 1);
  for (int m = 0; m <= n; ++m) {
    a[m] = Rational(1, m + 1);
    for (int j = m; j >= 1; --j) {
      a[j - 1] = j * (a[j - 1] - a[j]);
      a[j - 1].canonicalize();
    }
  }
  return a[0];
}

long count_partitions(int n, int maxpart) {
  if (n == 0) return 1;
  long c = 0;
  for (int p = std::min(n, maxpart); p >= 1; --p) c += count_partitions(n - p, p);
  return c;
}

QExpansion random_series(std::mt19937& rng, int N) {
  QExpansion s(0, 0, N);
  for (int m = 0; m <= N; ++m) {
    Graded g;
    g.add(static_cast<int>(rng() % 3) - 1, make_rational(static_cast<long>(rng() % 11) - 5, 1 + rng() % 4));
    s.set(m, g);
  }
  return s;
}

}  // namespace

TEST_CASE("series ring arithmetic") {
  const int N = 12;
  QExpansion one_minus_q = from_ints({1, -1}, N);
  QExpansion geo = from_ints(std::vector<long>(N + 1, 1), N);
  CHECK(agree(one_minus_q * geo, QExpansion::constant(Graded(1), N), N));
  CHECK(agree(one_minus_q.invert_unit(), geo, N));

  QExpansion a = from_ints({1, 2, 3}, 5), b = from_ints({1, 1}, 9);
  CHECK((a * b).truncation() == 5);

  QExpansion q = QExpansion::monomial(1, Graded(1), N);
  QExpansion dq = q.tau_derivative();
  CHECK(dq.coeff(1) == Graded(1, 1));
  CHECK(QExpansion::constant(Graded(7), N).tau_derivative().is_zero());

  CHECK_THROWS_AS(from_ints({1}, 4) + from_ints({1}, 4, make_rational(1, 3)), std::invalid_argument);
  CHECK_THROWS_AS(from_ints({0, 0}, 0).invert_unit(), std::domain_error);
  QExpansion mixed(0, 0, 3);
  mixed.set(0, Graded(1) + Graded(1, 1));
  CHECK_THROWS_AS(mixed.invert_unit(), std::domain_error);
}

TEST_CASE("ring laws on random inputs") {
  std::mt19937 rng(3);
  for (int t = 0; t < 10; ++t) {
    const int N = 10;
    auto a = random_series(rng, N), b = random_series(rng, N), c = random_series(rng, N);
    CHECK(agree((a * b) * c, a * (b * c), N));
    CHECK(agree(a * (b + c), a * b + a * c, N));
    CHECK(agree(a * b, b * a, N));
    CHECK(agree((a + b).tau_derivative(), a.tau_derivative() + b.tau_derivative(), N));
    // Leibniz rule for the tau derivative
    CHECK(agree((a * b).tau_derivative(), a.tau_derivative() * b + a * b.tau_derivative(), N));
  }
}

TEST_CASE("bernoulli numbers") {
  CHECK(bernoulli(2) == make_rational(1, 6));
  CHECK(bernoulli(4) == make_rational(-1, 30));
  CHECK(bernoulli(12) == make_rational(-691, 2730));
  for (int n = 2; n <= 30; n += 2) CHECK(bernoulli(n) == bernoulli_oracle(n));
  for (int n = 3; n <= 29; n += 2) CHECK(bernoulli(n) == 0);
}

TEST_CASE("eisenstein series") {
  auto g2 = eisenstein(2, 10);
  CHECK(g2.coeff(0) == Graded(make_rational(-1, 12), 2));
  CHECK(g2.coeff(1) == Graded(2, 2));
  CHECK(g2.coeff(2) == Graded(6, 2));
  CHECK(g2.coeff(3) == Graded(8, 2));
  auto g4 = eisenstein(4, 10);
  CHECK(g4.coeff(0) == Graded(make_rational(1, 720), 4));
  CHECK(g4.coeff(1) == Graded(make_rational(1, 3), 4));
  CHECK(g4.coeff(2) == Graded(make_rational(9, 3), 4));
  CHECK(g4.coeff(3) == Graded(make_rational(28, 3), 4));
  CHECK(eisenstein(6, 2).coeff(0) == Graded(make_rational(-1, 42) / 720, 6));

  // constant term equals 2 * sum n^{-2k}
  for (int k = 1; k <= 5; ++k) {
    double z = 0;
    for (long n = 200000; n >= 1; --n) z += std::pow(static_cast<double>(n), -2.0 * k);
    auto c = eisenstein(2 * k, 1).coeff(0).numeric();
    CHECK(std::abs(c - std::complex<double>(2 * z, 0)) < 1e-5);
  }

  // lattice double sum, inner sum cut at |n| <= M, outer exponentially convergent
  const std::complex<double> tau(0, 1.3);
  for (int k = 2; k <= 5; ++k) {
    std::complex<double> sum = 0;
    const long M = 20000;
    for (int m = -6; m <= 6; ++m)
      for (long n = -M; n <= M; ++n) {
        if (m == 0 && n == 0) continue;
        sum += std::pow(static_cast<double>(m) * tau + static_cast<double>(n), -2 * k);
      }
    auto v = evaluate(eisenstein(2 * k, 40), tau);
    CHECK(std::abs(v.value - sum) < 1e-8);
  }
}

TEST_CASE("eta powers") {
  auto e = eta_power(-1, 15);
  CHECK(e.offset() == make_rational(-1, 24));
  for (int n = 0; n <= 15; ++n) CHECK(e.coeff(n) == Graded(count_partitions(n, n)));
  auto prod = eta_power(24, 20) * eta_power(-24, 20);
  CHECK(prod.offset() == 0);
  CHECK(agree(prod, QExpansion::constant(Graded(1), 20), 20));
  CHECK(eta_power(-24, 5).offset() == -1);
}

TEST_CASE("tau derivatives of inverse factors") {
  const int N = 30;
  auto d11 = dtau_inverse_factor(1, 1, N);
  auto w = w_series(1, N), a = inverse_factor(1, N);
  CHECK(agree(d11, (a * w).scaled(Graded(1, 1)), N));
  auto d12 = dtau_inverse_factor(1, 2, N);
  auto expect = (a * w + (a * w * w).scaled(Graded(2))).scaled(Graded(1, 2));
  CHECK(agree(d12, expect, N));
  auto d20 = dtau_inverse_factor(2, 0, N);
  for (int m = 0; m <= N; ++m) CHECK(d20.coeff(m) == Graded(m % 2 == 0 ? 1 : 0));

  for (long k : {-3L, -2L, -1L, 1L, 2L, 3L})
    for (int n = 0; n <= 5; ++n) CHECK(agree(dtau_inverse_factor(k, n, N), dtau_inverse_factor_closed(k, n, N), N));
}

TEST_CASE("derivative identity and Stirling inversion of inverse factors") {
  const int N = 30;
  for (long k : {1L, 2L, 3L}) {
    std::vector<QExpansion> d;
    for (int r = 0; r <= 5; ++r) d.push_back(dtau_inverse_factor(k, r, N));
    const auto w = w_series(k, N);
    for (int n = 1; n <= 5; ++n) {
      QExpansion acc(0, 0, N);
      for (int r = 0; r < n; ++r)
        acc = acc + d[r].scaled(Graded(Rational(binomial(n, r)) * power(Rational(k), n - r), n - r));
      CHECK(agree(d[n], w * acc, N));
    }
    const auto a = inverse_factor(k, N);
    QExpansion wl = QExpansion::constant(Graded(1), N);
    for (int l = 0; l <= 5; ++l) {
      QExpansion rhs(0, 0, N);
      for (int m = 0; m <= l; ++m) {
        Rational c = Rational(stirling_first(l, m)) / Rational(factorial(l)) * power(Rational(k), -m);
        rhs = rhs + d[m].scaled(Graded(c, -m));
      }
      CHECK(agree(a * wl, rhs, N));
      wl = wl * w;
    }
  }
}
