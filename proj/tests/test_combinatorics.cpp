#include <catch_amalgamated.hpp>

#include "qjac/combinatorics.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>

using namespace qjac;

namespace {

// x(x-1)...(x-n+1) expanded by repeated polynomial multiplication.
std::vector<Integer> falling_factorial_coeffs(int n) {
  std::vector<Integer> p{Integer(1)};
  for (int j = 0; j < n; ++j) {
    std::vector<Integer> next(p.size() + 1);
    for (std::size_t i = 0; i < p.size(); ++i) {
      next[i + 1] += p[i];
      next[i] -= j * p[i];
    }
    p = next;
  }
  return p;
}

// Set partitions of {0..n-1} as block labels, built by placing elements one at a time.
template <class F>
void for_each_set_partition(int n, F&& f) {
  std::vector<int> block(n, 0);
  std::function<void(int, int)> place = [&](int i, int used) {
    if (i == n) {
      f(block, used);
      return;
    }
    for (int b = 0; b <= used; ++b) {
      block[i] = b;
      place(i + 1, b == used ? used + 1 : used);
    }
  };
  place(0, 0);
}

// Every way of cutting u into consecutive segments, keeping those whose segments all increase.
WPolynomial brute_c_polynomial(const IndexTuple& u) {
  WPolynomial c;
  const int n = static_cast<int>(u.size());
  if (n == 0) return {{0, Integer(1)}};
  for (unsigned cuts = 0; cuts < (1u << (n - 1)); ++cuts) {
    bool ok = true;
    int segments = 1;
    for (int j = 0; j + 1 < n; ++j) {
      if (cuts & (1u << j))
        ++segments;
      else if (u[j + 1] < u[j])
        ok = false;
    }
    if (ok) c[segments] += 1;
  }
  return c;
}

WPolynomial multiply(const WPolynomial& a, const WPolynomial& b) {
  WPolynomial r;
  for (auto& [ea, ca] : a)
    for (auto& [eb, cb] : b) r[ea + eb] += ca * cb;
  return r;
}

WPolynomial run_product(const IndexTuple& u) {
  WPolynomial r{{0, Integer(1)}};
  for (auto& run : increasing_runs(u)) {
    WPolynomial cn;
    const long len = static_cast<long>(run.size());
    for (long j = 0; j < len; ++j) cn[static_cast<int>(j + 1)] = binomial(len - 1, j);
    r = multiply(r, cn);
  }
  return r;
}

}  // namespace

TEST_CASE("stirling numbers of the first kind") {
  CHECK(stirling_first(0, 0) == 1);
  CHECK(stirling_first(3, 2) == -3);
  CHECK(stirling_first(4, -1) == 0);
  CHECK(stirling_first(4, 5) == 0);
  for (int n = 1; n <= 12; ++n) {
    auto p = falling_factorial_coeffs(n);
    for (int k = 0; k <= n; ++k) CHECK(stirling_first(n, k) == p[k]);
  }
}

TEST_CASE("stirling numbers of the second kind") {
  CHECK(stirling_second(0, 0) == 1);
  CHECK(stirling_second(3, 2) == 3);
  CHECK(stirling_second(2, 5) == 0);
  for (int n = 1; n <= 9; ++n) {
    std::vector<Integer> count(n + 1);
    for_each_set_partition(n, [&](const std::vector<int>&, int nb) { count[nb] += 1; });
    for (int k = 0; k <= n; ++k) CHECK(stirling_second(n, k) == count[k]);
  }
}

TEST_CASE("eulerian numbers count descents") {
  CHECK(eulerian(1, 0) == 1);
  CHECK(eulerian(3, 1) == 4);
  CHECK(eulerian(3, 3) == 0);
  for (int n = 1; n <= 7; ++n) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 1);
    std::vector<Integer> count(n);
    do {
      count[descent_count(perm)] += 1;
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (int k = 0; k < n; ++k) CHECK(eulerian(n, k) == count[k]);
  }
}

TEST_CASE("stirling inversion and eulerian identities") {
  for (long n = 0; n <= 12; ++n)
    for (long k = 0; k <= n; ++k) {
      Integer acc = 0;
      for (long j = k; j <= n; ++j) acc += stirling_second(n, j) * stirling_first(j, k);
      CHECK(acc == (n == k ? 1 : 0));
    }
  for (long n = 1; n <= 12; ++n)
    for (long k = 0; k <= n; ++k) {
      Rational acc = 0;
      for (long j = 0; j < k; ++j) acc += Rational(eulerian(n, j) * binomial(n - j - 1, k - j - 1));
      acc /= Rational(factorial(k));
      CHECK(acc == Rational(stirling_second(n, k)));
    }
  for (long n = 1; n <= 12; ++n)
    for (long k = 1; k <= n; ++k)
      CHECK(stirling_second(n, k) == k * stirling_second(n - 1, k) + stirling_second(n - 1, k - 1));
  for (long n = 0; n <= 12; ++n)
    for (long k = 0; k <= n; ++k) {
      Integer acc = 0;
      for (long j = 0; j <= n; ++j) acc += binomial(n, j) * stirling_second(j, k);
      CHECK(acc == stirling_second(n + 1, k + 1));
    }
}

TEST_CASE("descents and increasing runs") {
  CHECK(descent_count({2, 3, 1, 4}) == 1);
  CHECK(descent_count({}) == 0);
  CHECK(descent_count({3, 2, 1}) == 2);
  CHECK(increasing_runs({2, 3, 1, 4}) == RunPartition{{2, 3}, {1, 4}});
  CHECK(increasing_runs({1, 2, 3}) == RunPartition{{1, 2, 3}});
  CHECK(increasing_runs({3, 2, 1}) == RunPartition{{3}, {2}, {1}});
  CHECK_THROWS_AS(increasing_runs({1, 1}), std::invalid_argument);
}

TEST_CASE("run partitions are maximal and reassemble the tuple") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + static_cast<int>(rng() % 9);
    IndexTuple u(n);
    std::iota(u.begin(), u.end(), 1);
    std::shuffle(u.begin(), u.end(), rng);
    auto runs = increasing_runs(u);
    IndexTuple joined;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      CHECK(std::is_sorted(runs[r].begin(), runs[r].end()));
      if (r + 1 < runs.size()) CHECK(runs[r].back() > runs[r + 1].front());
      joined.insert(joined.end(), runs[r].begin(), runs[r].end());
    }
    CHECK(joined == u);
    CHECK(static_cast<int>(runs.size()) == descent_count(u) + 1);
  }
}

TEST_CASE("C_u polynomial") {
  CHECK(c_polynomial({2, 3, 1, 4}) == WPolynomial{{2, 1}, {3, 2}, {4, 1}});
  CHECK(c_polynomial({}) == WPolynomial{{0, 1}});
  for (int n = 1; n <= 6; ++n) {
    IndexTuple inc(n);
    std::iota(inc.begin(), inc.end(), 1);
    WPolynomial expect;
    for (int j = 0; j < n; ++j) expect[j + 1] = binomial(n - 1, j);
    CHECK(c_polynomial(inc) == expect);
  }
}

TEST_CASE("C_u matches partition enumeration and run products") {
  // every permutation up to length 6, sampled permutations and subtuples at 7 and 8
  for (int n = 1; n <= 6; ++n) {
    IndexTuple u(n);
    std::iota(u.begin(), u.end(), 1);
    do {
      auto c = c_polynomial(u);
      REQUIRE(c == brute_c_polynomial(u));
      REQUIRE(c == run_product(u));
    } while (std::next_permutation(u.begin(), u.end()));
  }
  std::mt19937 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 7 + trial % 2;
    IndexTuple u;
    for (int v = 1; static_cast<int>(u.size()) < n; ++v)
      if (rng() % 4 != 0) u.push_back(v);
    std::shuffle(u.begin(), u.end(), rng);
    auto c = c_polynomial(u);
    CHECK(c == brute_c_polynomial(u));
    CHECK(c == run_product(u));
  }
}

TEST_CASE("recursion coefficients collapse to a Kronecker delta") {
  CHECK(recursion_coefficient(1, 0, 1) == 1);
  // u=2, des=0: i=0 gives s(1,2)/1! = 0, i=1 gives s(2,2)/2! = 1/2
  CHECK(recursion_coefficient(2, 0, 2) == make_rational(1, 2));
  CHECK(identity_comm_lhs(2, 2) == 1);
  CHECK(identity_comm_lhs(2, 1) == 0);
  CHECK(identity_comm_lhs(5, 3) == 0);
  for (long u = 1; u <= 8; ++u)
    for (long t = 0; t <= u; ++t) CHECK(identity_comm_lhs(u, t) == (u == t ? 1 : 0));
}
