#pragma once

#include "rational.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace qjac {

using IndexTuple = std::vector<int>;
using RunPartition = std::vector<IndexTuple>;
// exponent of w = q^k/(1-q^k) -> coefficient
using WPolynomial = std::map<int, Integer>;

namespace detail {

// Row-by-row triangle filled by a two-term recurrence, grown lazily under a lock.
class Triangle {
 public:
  using Rule = Integer (*)(const std::vector<std::vector<Integer>>&, long, long);

  explicit Triangle(Rule rule, Integer corner) : rule_(rule) {
    rows_.push_back({std::move(corner)});
  }

  Integer get(long n, long k) {
    if (n < 0 || k < 0 || k > n) return 0;
    std::lock_guard<std::mutex> lock(mu_);
    while (static_cast<long>(rows_.size()) <= n) {
      long m = static_cast<long>(rows_.size());
      std::vector<Integer> row(m + 1);
      for (long j = 0; j <= m; ++j) row[j] = rule_(rows_, m, j);
      rows_.push_back(std::move(row));
    }
    return rows_[n][k];
  }

  static Integer entry(const std::vector<std::vector<Integer>>& rows, long n, long k) {
    if (n < 0 || k < 0 || k > n) return 0;
    return rows[n][k];
  }

 private:
  Rule rule_;
  std::mutex mu_;
  std::vector<std::vector<Integer>> rows_;
};

inline Triangle& stirling1_table() {
  // s(n,k) = s(n-1,k-1) - (n-1) s(n-1,k)
  static Triangle t(
      [](const std::vector<std::vector<Integer>>& r, long n, long k) -> Integer {
        return Triangle::entry(r, n - 1, k - 1) - (n - 1) * Triangle::entry(r, n - 1, k);
      },
      Integer(1));
  return t;
}

inline Triangle& stirling2_table() {
  static Triangle t(
      [](const std::vector<std::vector<Integer>>& r, long n, long k) -> Integer {
        return k * Triangle::entry(r, n - 1, k) + Triangle::entry(r, n - 1, k - 1);
      },
      Integer(1));
  return t;
}

inline Triangle& eulerian_table() {
  // A(n,k) = (k+1) A(n-1,k) + (n-k) A(n-1,k-1); row 0 is the empty permutation.
  static Triangle t(
      [](const std::vector<std::vector<Integer>>& r, long n, long k) -> Integer {
        if (k == n) return 0;
        return (k + 1) * Triangle::entry(r, n - 1, k) + (n - k) * Triangle::entry(r, n - 1, k - 1);
      },
      Integer(1));
  return t;
}

}  // namespace detail

inline Integer stirling_first(long n, long k) {
  if (n < 0) throw std::domain_error("stirling_first: n < 0");
  return detail::stirling1_table().get(n, k);
}

inline Integer stirling_second(long n, long k) {
  if (n < 0 || k < 0) throw std::domain_error("stirling_second: negative argument");
  return detail::stirling2_table().get(n, k);
}

inline Integer eulerian(long n, long k) {
  if (n < 1) throw std::domain_error("eulerian: n < 1");
  if (k < 0 || k >= n) return 0;
  return detail::eulerian_table().get(n, k);
}

// Coefficients of A_n(t) = sum_k A(n,k) t^k; A_0 = 1.
inline std::vector<Integer> eulerian_polynomial(long n) {
  if (n == 0) return {Integer(1)};
  std::vector<Integer> c(n);
  for (long k = 0; k < n; ++k) c[k] = eulerian(n, k);
  return c;
}

inline int descent_count(const IndexTuple& u) {
  int d = 0;
  for (std::size_t j = 0; j + 1 < u.size(); ++j)
    if (u[j + 1] < u[j]) ++d;
  return d;
}

inline void require_distinct(const IndexTuple& u) {
  IndexTuple s = u;
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end())
    throw std::invalid_argument("index tuple entries must be distinct");
}

inline RunPartition increasing_runs(const IndexTuple& u) {
  require_distinct(u);
  RunPartition runs;
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (j == 0 || u[j] < u[j - 1]) runs.emplace_back();
    runs.back().push_back(u[j]);
  }
  return runs;
}

inline WPolynomial c_polynomial(const IndexTuple& u) {
  require_distinct(u);
  WPolynomial c;
  if (u.empty()) {
    c[0] = 1;
    return c;
  }
  const long n = static_cast<long>(u.size());
  const long des = descent_count(u);
  for (long i = 0; i <= n - des - 1; ++i) c[static_cast<int>(i + des + 1)] = binomial(n - des - 1, i);
  return c;
}

// Coefficient of (2 pi i)^{u-t} g^t_{m+1} contributed by one block of length u with des descents.
inline Rational recursion_coefficient(long u, long des, long t) {
  Rational acc = 0;
  for (long i = 0; i <= u - des - 1; ++i) {
    const long top = i + des + 1;
    acc += ratio(binomial(u - des - 1, i) * stirling_first(top, t), factorial(top));
  }
  return acc;
}

inline Rational identity_comm_lhs(long u, long t) {
  if (u < 1 || t < 0 || t > u) throw std::domain_error("identity_comm_lhs: need u >= 1, 0 <= t <= u");
  Rational acc = 0;
  for (long d = 0; d <= u - 1; ++d) acc += Rational(eulerian(u, d)) * recursion_coefficient(u, d, t);
  acc.canonicalize();
  return acc;
}

}  // namespace qjac
