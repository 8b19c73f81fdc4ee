#pragma once

#include "combinatorics.hpp"
#include "graded.hpp"

#include <algorithm>
#include <complex>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace qjac {

inline constexpr int kDefaultOrder = 40;

// Truncated Laurent series sum_{m=lower}^{truncation} c_m q^{offset+m}; terms past truncation are unknown.
class QExpansion {
 public:
  QExpansion() = default;
  QExpansion(Rational offset, int lower, int truncation)
      : offset_(std::move(offset)), lower_(lower), trunc_(truncation) {
    offset_.canonicalize();
    if (truncation < lower - 1) throw std::invalid_argument("truncation below the lowest exponent");
    coeffs_.resize(static_cast<std::size_t>(truncation - lower + 1));
  }

  static QExpansion constant(const Graded& c, int truncation = kDefaultOrder) {
    QExpansion e(0, 0, truncation);
    e.coeffs_[0] = c;
    return e;
  }
  static QExpansion monomial(int m, const Graded& c, int truncation = kDefaultOrder) {
    QExpansion e(0, std::min(m, truncation + 1), truncation);
    if (m <= truncation) e.coeffs_[0] = c;
    return e;
  }

  const Rational& offset() const { return offset_; }
  int lower() const { return lower_; }
  int truncation() const { return trunc_; }

  Graded coeff(int m) const {
    if (m < lower_) return {};
    if (m > trunc_) throw std::out_of_range("coefficient beyond the truncation order");
    return coeffs_[static_cast<std::size_t>(m - lower_)];
  }
  void set(int m, const Graded& c) {
    if (m < lower_ || m > trunc_) throw std::out_of_range("QExpansion::set outside stored range");
    coeffs_[static_cast<std::size_t>(m - lower_)] = c;
  }
  void add_to(int m, const Graded& c) {
    if (m < lower_ || m > trunc_) throw std::out_of_range("QExpansion::add_to outside stored range");
    coeffs_[static_cast<std::size_t>(m - lower_)] += c;
  }

  // Same series described against a shifted integer frame: offset' = offset - d.
  QExpansion reframed(int d) const {
    QExpansion r(offset_ - d, lower_ + d, trunc_ + d);
    r.coeffs_ = coeffs_;
    return r;
  }

  QExpansion truncated(int n) const {
    n = std::min(n, trunc_);
    QExpansion r(offset_, std::min(lower_, n + 1), n);
    for (int m = lower_; m <= n; ++m) r.set(m, coeff(m));
    return r;
  }

  // Raise `lower` past vanishing leading coefficients.
  QExpansion trimmed() const {
    int m = lower_;
    while (m <= trunc_ && coeff(m).is_zero()) ++m;
    QExpansion r(offset_, m, trunc_);
    for (int j = m; j <= trunc_; ++j) r.set(j, coeff(j));
    return r;
  }

  bool is_zero() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](const Graded& g) { return g.is_zero(); });
  }

  friend QExpansion operator+(const QExpansion& a, const QExpansion& b) { return combine(a, b, false); }
  friend QExpansion operator-(const QExpansion& a, const QExpansion& b) { return combine(a, b, true); }
  QExpansion operator-() const { return scaled(Graded(-1)); }

  QExpansion scaled(const Graded& s) const {
    QExpansion r = *this;
    for (auto& c : r.coeffs_) c = c * s;
    return r;
  }

  friend QExpansion operator*(const QExpansion& a, const QExpansion& b) {
    const int lo = a.lower_ + b.lower_;
    const int hi = std::min(a.trunc_ + b.lower_, b.trunc_ + a.lower_);
    QExpansion r(a.offset_ + b.offset_, lo, hi);
    for (int i = a.lower_; i <= a.trunc_; ++i) {
      const Graded& ca = a.coeffs_[static_cast<std::size_t>(i - a.lower_)];
      if (ca.is_zero()) continue;
      for (int j = b.lower_; i + j <= hi && j <= b.trunc_; ++j) {
        const Graded& cb = b.coeffs_[static_cast<std::size_t>(j - b.lower_)];
        if (!cb.is_zero()) r.coeffs_[static_cast<std::size_t>(i + j - lo)] += ca * cb;
      }
    }
    return r;
  }

  QExpansion invert_unit() const {
    QExpansion a = trimmed();
    if (a.lower_ > a.trunc_) throw std::domain_error("invert_unit: series is zero to its truncation order");
    const Graded lead = a.coeff(a.lower_);
    if (lead.terms().size() != 1) throw std::domain_error("invert_unit: leading coefficient is not a unit");
    const auto [e, v] = *lead.terms().begin();
    const Graded inv(Rational(1) / v, -e);
    const int L = a.lower_;
    const int span = a.trunc_ - L;  // reliable relative order
    QExpansion r(-a.offset_, -L, -L + span);
    // r_{-L+n} = -inv * sum_{j=1}^{n} a_{L+j} r_{-L+n-j}
    r.set(-L, inv);
    for (int n = 1; n <= span; ++n) {
      Graded acc;
      for (int j = 1; j <= n; ++j) acc += a.coeff(L + j) * r.coeff(-L + n - j);
      r.set(-L + n, -(acc * inv));
    }
    return r;
  }

  QExpansion power(long n) const {
    if (n < 0) return invert_unit().power(-n);
    QExpansion r = constant(Graded(1), trunc_ - lower_);
    for (long k = 0; k < n; ++k) r = r * *this;
    return r;
  }

  // 2*pi*i * q d/dq
  QExpansion tau_derivative() const {
    QExpansion r = *this;
    for (int m = lower_; m <= trunc_; ++m) {
      Rational w = offset_ + m;
      r.coeffs_[static_cast<std::size_t>(m - lower_)] = coeff(m).scaled(w, 1);
    }
    return r;
  }

  // q d/dq, no factor of 2*pi*i
  QExpansion q_derivative() const {
    QExpansion r = *this;
    for (int m = lower_; m <= trunc_; ++m) {
      Rational w = offset_ + m;
      r.coeffs_[static_cast<std::size_t>(m - lower_)] = coeff(m).scaled(w);
    }
    return r;
  }

  // Coefficientwise equality on the common known range, after aligning offsets.
  friend bool agree(const QExpansion& a, const QExpansion& b, int upto) {
    Rational d = b.offset_ - a.offset_;
    if (d.get_den() != 1) return false;
    const int shift = static_cast<int>(d.get_num().get_si());
    const QExpansion bb = b.reframed(shift);
    const int hi = std::min({a.trunc_, bb.trunc_, upto});
    const int lo = std::min(a.lower_, bb.lower_);
    for (int m = lo; m <= hi; ++m)
      if (!(a.coeff(m) == bb.coeff(m))) return false;
    return true;
  }

 private:
  static QExpansion combine(const QExpansion& a, const QExpansion& b, bool subtract) {
    Rational d = b.offset_ - a.offset_;
    if (d.get_den() != 1) throw std::invalid_argument("series offsets differ by a non-integer");
    const QExpansion bb = b.reframed(static_cast<int>(d.get_num().get_si()));
    const int lo = std::min(a.lower_, bb.lower_);
    const int hi = std::min(a.trunc_, bb.trunc_);
    QExpansion r(a.offset_, std::min(lo, hi + 1), hi);
    for (int m = r.lower_; m <= hi; ++m) {
      Graded c = a.coeff(m);
      if (subtract) c -= bb.coeff(m);
      else c += bb.coeff(m);
      r.set(m, c);
    }
    return r;
  }

  Rational offset_ = 0;
  int lower_ = 0;
  int trunc_ = -1;
  std::vector<Graded> coeffs_;
};

struct NumericValue {
  std::complex<double> value;
  double tail = 0.0;
};

// Geometric tail bound from the last few known coefficients.
inline NumericValue evaluate(const QExpansion& s, std::complex<double> tau) {
  const std::complex<double> I(0, 1);
  const double qa = std::exp(-2.0 * std::numbers::pi * tau.imag());
  if (qa >= 1.0) throw std::domain_error("evaluate: |q| >= 1");
  std::complex<double> sum = 0;
  double last = 0;
  for (int m = s.lower(); m <= s.truncation(); ++m) {
    std::complex<double> c = s.coeff(m).numeric();
    if (c == 0.0) continue;
    sum += c * std::exp(2.0 * std::numbers::pi * I * tau * (m + s.offset().get_d()));
    if (m > s.truncation() - 3) last = std::max(last, std::abs(c));
  }
  NumericValue v;
  v.value = sum;
  const double scale = std::exp(-2.0 * std::numbers::pi * tau.imag() * s.offset().get_d());
  v.tail = last * std::pow(qa, s.truncation() + 1) * scale / (1.0 - qa);
  return v;
}

// Bernoulli numbers from sum_{j<=m} C(m+1,j) B_j = 0.
inline Rational bernoulli(long n) {
  if (n < 0) throw std::domain_error("bernoulli: negative index");
  static std::mutex mu;
  static std::vector<Rational> table{Rational(1)};
  std::lock_guard<std::mutex> lock(mu);
  while (static_cast<long>(table.size()) <= n) {
    const long m = static_cast<long>(table.size());
    Rational acc = 0;
    for (long j = 0; j < m; ++j) acc += Rational(binomial(m + 1, j)) * table[j];
    Rational b = -acc / Rational(m + 1);
    b.canonicalize();
    table.push_back(b);
  }
  return table[n];
}

inline Integer divisor_sigma(long power, long n) {
  Integer s = 0;
  for (long d = 1; d <= n; ++d)
    if (n % d == 0) {
      Integer t;
      mpz_ui_pow_ui(t.get_mpz_t(), static_cast<unsigned long>(d), static_cast<unsigned long>(power));
      s += t;
    }
  return s;
}

// G_{2k}, every coefficient carried at (2 pi i)^{2k}.
inline QExpansion eisenstein(long two_k, int N = kDefaultOrder) {
  if (two_k < 2 || two_k % 2 != 0) throw std::domain_error("eisenstein: weight must be even and >= 2");
  QExpansion g(0, 0, N);
  const int e = static_cast<int>(two_k);
  Rational c0 = -bernoulli(two_k) / Rational(factorial(two_k));
  c0.canonicalize();
  g.set(0, Graded(c0, e));
  const Rational pref = ratio(Integer(2), factorial(two_k - 1));
  for (int n = 1; n <= N; ++n) g.set(n, Graded(pref * Rational(divisor_sigma(two_k - 1, n)), e));
  return g;
}

// Product (1-q^n)^l for n >= 1, then q^{l/24}.
inline QExpansion eta_power(long l, int N = kDefaultOrder) {
  std::vector<Rational> p(static_cast<std::size_t>(N + 1));
  p[0] = 1;
  const long e = l < 0 ? -l : l;
  for (int n = 1; n <= N; ++n)
    for (long j = 0; j < e; ++j)
      for (int m = N; m >= n; --m) p[m] -= p[m - n];
  QExpansion prod(0, 0, N);
  for (int m = 0; m <= N; ++m) prod.set(m, Graded(p[m]));
  if (l < 0) prod = prod.invert_unit();
  QExpansion r(make_rational(l, 24), 0, N);
  for (int m = 0; m <= N; ++m) r.set(m, prod.coeff(m));
  return r;
}

// (1-q^k)^{-1} expanded in nonnegative powers of q.
inline QExpansion inverse_factor(long k, int N = kDefaultOrder) {
  if (k == 0) throw std::domain_error("inverse_factor: k = 0");
  QExpansion s(0, 0, N);
  const long a = k > 0 ? k : -k;
  for (long r = (k > 0 ? 0 : 1); r * a <= N; ++r) s.set(static_cast<int>(r * a), Graded(k > 0 ? 1 : -1));
  return s;
}

// w = q^k/(1-q^k), same expansion convention.
inline QExpansion w_series(long k, int N = kDefaultOrder) {
  if (k == 0) throw std::domain_error("w_series: k = 0");
  QExpansion s(0, 0, N);
  const long a = k > 0 ? k : -k;
  for (long r = (k > 0 ? 1 : 0); r * a <= N; ++r) s.set(static_cast<int>(r * a), Graded(k > 0 ? 1 : -1));
  return s;
}

inline QExpansion dtau_inverse_factor(long k, int n, int N = kDefaultOrder) {
  QExpansion s = inverse_factor(k, N);
  for (int j = 0; j < n; ++j) s = s.tau_derivative();
  return s;
}

// (2 pi i k)^n sum_i i! S(n,i) (1-q^k)^{-1} w^i
inline QExpansion dtau_inverse_factor_closed(long k, int n, int N = kDefaultOrder) {
  const QExpansion a = inverse_factor(k, N);
  const QExpansion w = w_series(k, N);
  QExpansion acc(0, 0, N);
  QExpansion wp = QExpansion::constant(Graded(1), N);
  for (int i = 0; i <= n; ++i) {
    Rational c(factorial(i) * stirling_second(n, i));
    if (c != 0) acc = acc + (a * wp).scaled(Graded(c));
    wp = wp * w;
  }
  return acc.scaled(Graded(power(Rational(k), n), n));
}

}  // namespace qjac
