#pragma once

#include "combinatorics.hpp"
#include "qseries.hpp"
#include "symbolic.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <vector>

namespace qjac {

using cplx = std::complex<double>;

// Laurent polynomial in zeta.
using ZetaPoly = std::map<int, Graded>;

inline void zeta_add(ZetaPoly& p, int e, const Graded& c) {
  if (c.is_zero()) return;
  auto& slot = p[e];
  slot += c;
  if (slot.is_zero()) p.erase(e);
}

inline ZetaPoly zeta_mul(const ZetaPoly& a, const ZetaPoly& b) {
  ZetaPoly r;
  for (const auto& [ea, ca] : a)
    for (const auto& [eb, cb] : b) zeta_add(r, ea + eb, ca * cb);
  return r;
}

inline ZetaPoly one_minus_zeta_power(int p) {
  ZetaPoly r{{0, Graded(1)}};
  const ZetaPoly f{{0, Graded(1)}, {1, Graded(-1)}};
  for (int k = 0; k < p; ++k) r = zeta_mul(r, f);
  return r;
}

inline cplx zeta_numeric(const ZetaPoly& p, cplx zeta) {
  cplx s = 0;
  for (const auto& [e, c] : p) s += c.numeric() * std::pow(zeta, e);
  return s;
}

// num / (1 - zeta)^pole, kept with (1 - zeta) not dividing num.
class ZetaRational {
 public:
  ZetaRational() = default;
  ZetaRational(ZetaPoly num, int pole = 0) : num_(std::move(num)), pole_(pole) { normalize(); }

  const ZetaPoly& numerator() const { return num_; }
  int pole() const { return pole_; }
  bool is_zero() const { return num_.empty(); }
  bool is_laurent() const { return pole_ == 0; }

  friend ZetaRational operator+(const ZetaRational& a, const ZetaRational& b) {
    const int p = std::max(a.pole_, b.pole_);
    ZetaPoly n = zeta_mul(a.num_, one_minus_zeta_power(p - a.pole_));
    for (const auto& [e, c] : zeta_mul(b.num_, one_minus_zeta_power(p - b.pole_))) zeta_add(n, e, c);
    return ZetaRational(std::move(n), p);
  }
  ZetaRational operator-() const {
    ZetaPoly n;
    for (const auto& [e, c] : num_) n[e] = -c;
    return ZetaRational(std::move(n), pole_);
  }
  friend ZetaRational operator-(const ZetaRational& a, const ZetaRational& b) { return a + (-b); }
  ZetaRational scaled(const Graded& s) const {
    ZetaPoly n;
    for (const auto& [e, c] : num_) zeta_add(n, e, c * s);
    return ZetaRational(std::move(n), pole_);
  }
  friend bool operator==(const ZetaRational& a, const ZetaRational& b) {
    return a.pole_ == b.pole_ && a.num_ == b.num_;
  }

  // zeta d/dzeta
  ZetaRational zeta_derivative() const {
    // zeta (num' (1 - zeta) + pole num) / (1 - zeta)^(pole + 1)
    ZetaPoly n;
    for (const auto& [e, c] : num_) {
      zeta_add(n, e, c.scaled(Rational(e)));
      zeta_add(n, e + 1, c.scaled(Rational(pole_ - e)));
    }
    return ZetaRational(std::move(n), pole_ + 1);
  }

  cplx numeric(cplx zeta) const {
    cplx v = zeta_numeric(num_, zeta);
    if (pole_ > 0) v /= std::pow(1.0 - zeta, pole_);
    return v;
  }

  std::string str() const {
    std::ostringstream os;
    if (num_.empty()) return "0";
    bool first = true;
    for (const auto& [e, c] : num_) {
      if (!first) os << " + ";
      first = false;
      os << "(" << c.str() << ")*zeta^" << e;
    }
    if (pole_ > 0) return "[" + os.str() + "]/(1-zeta)^" + std::to_string(pole_);
    return os.str();
  }

 private:
  void normalize() {
    while (pole_ > 0 && !num_.empty()) {
      Graded total;
      for (const auto& [e, c] : num_) total += c;
      if (!total.is_zero()) break;
      // synthetic division by (1 - zeta)
      ZetaPoly r;
      Graded carry;
      const int top = num_.rbegin()->first;
      for (int e = num_.begin()->first; e < top; ++e) {
        auto it = num_.find(e);
        if (it != num_.end()) carry += it->second;
        zeta_add(r, e, carry);
      }
      num_ = std::move(r);
      --pole_;
    }
    if (num_.empty()) pole_ = 0;
  }

  ZetaPoly num_;
  int pole_ = 0;
};

// sum_m layers[m] q^m, valid on |q| < |zeta| < |q|^{-1} once layer 0 is read as a rational function.
class BivariateExpansion {
 public:
  BivariateExpansion() = default;
  explicit BivariateExpansion(int truncation) : layers_(static_cast<std::size_t>(truncation + 1)) {
    if (truncation < 0) throw std::invalid_argument("BivariateExpansion: negative truncation");
  }

  int truncation() const { return static_cast<int>(layers_.size()) - 1; }
  const ZetaRational& layer(int m) const { return layers_.at(static_cast<std::size_t>(m)); }
  void set_layer(int m, ZetaRational r) {
    if (m >= 1 && !r.is_laurent()) throw std::invalid_argument("only the q^0 layer may have a pole at zeta = 1");
    layers_.at(static_cast<std::size_t>(m)) = std::move(r);
  }

  friend BivariateExpansion operator+(const BivariateExpansion& a, const BivariateExpansion& b) {
    BivariateExpansion r(std::min(a.truncation(), b.truncation()));
    for (int m = 0; m <= r.truncation(); ++m) r.layers_[m] = a.layers_[m] + b.layers_[m];
    return r;
  }
  friend BivariateExpansion operator-(const BivariateExpansion& a, const BivariateExpansion& b) {
    return a + b.scaled(Graded(-1));
  }
  BivariateExpansion scaled(const Graded& s) const {
    BivariateExpansion r(truncation());
    for (int m = 0; m <= truncation(); ++m) r.layers_[m] = layers_[m].scaled(s);
    return r;
  }
  BivariateExpansion tau_derivative() const {
    BivariateExpansion r(truncation());
    for (int m = 1; m <= truncation(); ++m) r.layers_[m] = layers_[m].scaled(Graded(Rational(m), 1));
    return r;
  }
  BivariateExpansion zeta_derivative() const {
    BivariateExpansion r(truncation());
    for (int m = 0; m <= truncation(); ++m) r.layers_[m] = layers_[m].zeta_derivative();
    return r;
  }

  friend bool agree(const BivariateExpansion& a, const BivariateExpansion& b, int upto) {
    if (upto > a.truncation() || upto > b.truncation()) throw std::out_of_range("agree: beyond truncation");
    for (int m = 0; m <= upto; ++m)
      if (!(a.layers_[m] == b.layers_[m])) return false;
    return true;
  }

  NumericValue numeric(cplx z, cplx tau) const {
    const cplx I(0, 1);
    const double two_pi = 2.0 * std::numbers::pi;
    const double qa = std::exp(-two_pi * tau.imag());
    if (std::abs(z.imag()) >= tau.imag()) throw std::domain_error("evaluation outside |q| < |zeta| < |q|^-1");
    const cplx zeta = std::exp(two_pi * I * z);
    if (std::abs(1.0 - zeta) < 1e-9 && layers_[0].pole() > 0)
      throw std::domain_error("evaluation at a pole of the q^0 layer");
    const cplx q = std::exp(two_pi * I * tau);
    NumericValue v;
    cplx qm = 1;
    double last = 0;
    for (int m = 0; m <= truncation(); ++m) {
      cplx t = layers_[m].numeric(zeta) * qm;
      v.value += t;
      if (m > truncation() - 3) last = std::max(last, std::abs(t));
      qm *= q;
    }
    const double ratio = qa * std::exp(two_pi * std::abs(z.imag()));
    v.tail = last * ratio / (1.0 - ratio);
    return v;
  }

 private:
  std::vector<ZetaRational> layers_;
};

// P_k as sum over n != 0 of n^{k-1} zeta^n / (1 - q^n), times (2 pi i)^k / (k-1)!.
inline BivariateExpansion p_expansion(int k, int N = kDefaultOrder) {
  if (k < 1) throw std::domain_error("p_expansion: k >= 1 required");
  BivariateExpansion b(N);
  const Rational norm = ratio(Integer(1), factorial(k - 1));
  // q^0 layer: sum_{n>0} n^{k-1} zeta^n = zeta A_{k-1}(zeta) / (1 - zeta)^k
  ZetaPoly top;
  const auto eul = eulerian_polynomial(k - 1);
  for (std::size_t d = 0; d < eul.size(); ++d) zeta_add(top, static_cast<int>(d) + 1, Graded(norm * Rational(eul[d]), k));
  b.set_layer(0, ZetaRational(top, k));
  for (int m = 1; m <= N; ++m) {
    ZetaPoly layer;
    for (int d = 1; d <= m; ++d) {
      if (m % d != 0) continue;
      const Rational pos = norm * power(Rational(d), k - 1);
      zeta_add(layer, d, Graded(pos, k));
      // n = -d: 1/(1 - q^{-d}) = -sum_{i>=1} q^{d i}
      const Rational neg = norm * power(Rational(-d), k - 1);
      zeta_add(layer, -d, Graded(-neg, k));
    }
    b.set_layer(m, ZetaRational(layer));
  }
  return b;
}

inline BivariateExpansion p_tilde_1(int N = kDefaultOrder) {
  BivariateExpansion b = p_expansion(1, N);
  b.set_layer(0, b.layer(0) + ZetaRational(ZetaPoly{{0, Graded::pi_i()}}));
  return b;
}

// g^i_j: (2 pi i)^j/(j-1)! sum_{n != 0} n^{j-i-1} zeta^n d_tau^i (1 - q^n)^{-1}.
inline BivariateExpansion g_expansion(int i, int j, int N = kDefaultOrder) {
  if (j < 1 || i < 0) throw std::domain_error("g_expansion: need j >= 1, i >= 0");
  if (i == 0) return p_expansion(j, N);
  BivariateExpansion b(N);
  std::vector<ZetaPoly> layers(static_cast<std::size_t>(N + 1));
  const Rational norm = ratio(Integer(1), factorial(j - 1));
  for (long n = -N; n <= N; ++n) {
    if (n == 0) continue;
    const QExpansion d = dtau_inverse_factor(n, i, N);
    const Rational c = norm * power(Rational(n), j - i - 1);
    for (int m = 1; m <= N; ++m) {
      const Graded& dm = d.coeff(m);
      if (dm.is_zero()) continue;
      zeta_add(layers[m], static_cast<int>(n), dm.scaled(c, j));
    }
  }
  for (int m = 1; m <= N; ++m) b.set_layer(m, ZetaRational(layers[m]));
  return b;
}

// Series in z whose coefficients are q-expansions: exponent -> coefficient.
using ZSeries = std::map<int, QExpansion>;

inline ZSeries z_derivative(const ZSeries& s) {
  ZSeries r;
  for (const auto& [e, c] : s)
    if (e != 0) r.emplace(e - 1, c.scaled(Graded(e)));
  return r;
}

inline bool agree(const ZSeries& a, const ZSeries& b, int upto) {
  auto coeff = [](const ZSeries& s, int e) -> std::optional<QExpansion> {
    auto it = s.find(e);
    if (it == s.end()) return std::nullopt;
    return it->second;
  };
  std::map<int, bool> seen;
  for (const auto& [e, c] : a) seen[e] = true;
  for (const auto& [e, c] : b) seen[e] = true;
  for (const auto& [e, flag] : seen) {
    auto ca = coeff(a, e), cb = coeff(b, e);
    if (ca && cb) {
      if (!agree(*ca, *cb, upto)) return false;
    } else {
      const QExpansion& only = ca ? *ca : *cb;
      if (!agree(only, QExpansion(only.offset(), 0, upto), upto)) return false;
    }
  }
  return true;
}

inline cplx z_series_numeric(const ZSeries& s, cplx z, cplx tau) {
  cplx v = 0;
  for (const auto& [e, c] : s) v += evaluate(c, tau).value * std::pow(z, e);
  return v;
}

// Laurent expansion of wp_k about z = 0 up to z^M.
inline ZSeries wp_laurent(int k, int M, int N = kDefaultOrder) {
  if (k < 1) throw std::domain_error("wp_laurent: k >= 1 required");
  ZSeries s;
  s.emplace(-k, QExpansion::constant(Graded(1), N));
  const int sign = k % 2 == 0 ? 1 : -1;
  for (int n = 1; 2 * n + 2 - k <= M; ++n) {
    const Integer b = binomial(2 * n + 1, k - 1);
    if (b == 0) continue;
    s.emplace(2 * n + 2 - k, eisenstein(2 * n + 2, N).scaled(Graded(Rational(b * sign))));
  }
  return s;
}

// (2 pi i)^m sum_n d_tau^m G_{2n+2} z^{2n+1+m} / ((2n+2)...(2n+1+m)); this omits the
// z-polynomial of integration constants, so it matches g^m_1 only up to terms of degree < m.
inline ZSeries g1m_z_expansion(int m, int M, int N = kDefaultOrder) {
  if (m < 1) throw std::domain_error("g1m_z_expansion: m >= 1 required");
  ZSeries s;
  for (int n = 0; 2 * n + 1 + m <= M; ++n) {
    QExpansion d = eisenstein(2 * n + 2, N);
    for (int r = 0; r < m; ++r) d = d.tau_derivative();
    Integer denom = 1;
    for (int f = 2 * n + 2; f <= 2 * n + 1 + m; ++f) denom *= f;
    s.emplace(2 * n + 1 + m, d.scaled(Graded(ratio(Integer(1), denom), m)));
  }
  return s;
}

// ---------------------------------------------------------------- function ids

struct FunctionId {
  Fn kind = Fn::P;
  int i = 0;
  int j = 1;

  std::string str() const {
    switch (kind) {
      case Fn::G:
        return "G_" + std::to_string(j);
      case Fn::P:
        return "P_" + std::to_string(j);
      case Fn::Pt1:
        return "Pt_1";
      case Fn::g:
        return "g_" + std::to_string(i) + "_" + std::to_string(j);
      default:
        return "?";
    }
  }
  int weight() const { return kind == Fn::g ? i + j : j; }
  Symbol symbol(int hi = 1, int lo = 0) const {
    switch (kind) {
      case Fn::G:
        return Symbol::eisenstein(j);
      case Fn::P:
        return Symbol::p(j, hi, lo);
      case Fn::Pt1:
        return Symbol::p_tilde(hi, lo);
      case Fn::g:
        return Symbol::g(i, j, hi, lo);
      default:
        throw std::invalid_argument("FunctionId::symbol: not a function");
    }
  }
};

// Accepts G_2k, P_k, Pt_1, g_i_j (g^i_j). Anything else throws std::invalid_argument.
inline FunctionId parse_function(const std::string& s) {
  std::smatch mt;
  if (std::regex_match(s, mt, std::regex(R"(G_(\d+))"))) {
    int w = std::stoi(mt[1]);
    if (w < 2 || w % 2) throw std::invalid_argument("Eisenstein weight must be even and >= 2: " + s);
    return {Fn::G, 0, w};
  }
  if (std::regex_match(s, mt, std::regex(R"(P_(\d+))"))) {
    int k = std::stoi(mt[1]);
    if (k < 1) throw std::invalid_argument("P_k needs k >= 1: " + s);
    return {Fn::P, 0, k};
  }
  if (s == "Pt_1") return {Fn::Pt1, 0, 1};
  if (std::regex_match(s, mt, std::regex(R"(g_(\d+)_(\d+))"))) {
    int i = std::stoi(mt[1]), j = std::stoi(mt[2]);
    if (j < 1) throw std::invalid_argument("g_i_j needs j >= 1: " + s);
    return {Fn::g, i, j};
  }
  throw std::invalid_argument("unknown function: " + s);
}

inline BivariateExpansion expansion_of(const FunctionId& f, int N) {
  switch (f.kind) {
    case Fn::P:
      return p_expansion(f.j, N);
    case Fn::Pt1:
      return p_tilde_1(N);
    case Fn::g:
      return g_expansion(f.i, f.j, N);
    default:
      throw std::invalid_argument("expansion_of: not a two-variable function");
  }
}

namespace detail {

inline const BivariateExpansion& cached_expansion(const FunctionId& f, int N) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int, int>, BivariateExpansion> cache;
  const auto key = std::make_tuple(static_cast<int>(f.kind), f.i, f.j, N);
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, expansion_of(f, N)).first;
  return it->second;
}

inline const QExpansion& cached_eisenstein(int w, int N) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, QExpansion> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find({w, N});
  if (it == cache.end()) it = cache.emplace(std::make_pair(w, N), eisenstein(w, N)).first;
  return it->second;
}

}  // namespace detail

// sum_{n>=1} n^k x^n = x A_k(x) / (1 - x)^{k+1}
inline cplx power_geometric(int k, cplx x) {
  const auto eul = eulerian_polynomial(k);
  cplx num = 0, xp = x;
  for (const auto& c : eul) {
    num += c.get_d() * xp;
    xp *= x;
  }
  return num / std::pow(1.0 - x, k + 1);
}

// Independent evaluation valid for any z off the lattice: summing over n first gives
//   g^i_j = (2 pi i)^j/(j-1)! sum_r (2 pi i r)^i [E_{j-1}(zeta q^r) + (-1)^{j-i} E_{j-1}(q^r/zeta)]
// with r >= 1 (and the extra r = 0 term E_{j-1}(zeta) when i = 0).
inline cplx evaluate_resummed(const FunctionId& f, cplx z, cplx tau, double eps = 1e-18) {
  if (f.kind == Fn::G) throw std::invalid_argument("evaluate_resummed: Eisenstein series are not elliptic");
  const int i = f.kind == Fn::g ? f.i : 0;
  const int j = f.j;
  const cplx I(0, 1);
  const double two_pi = 2.0 * std::numbers::pi;
  const cplx zeta = std::exp(two_pi * I * z), q = std::exp(two_pi * I * tau);
  const double sign = (j - i) % 2 == 0 ? 1.0 : -1.0;
  cplx sum = i == 0 ? power_geometric(j - 1, zeta) : cplx(0);
  cplx qr = 1;
  const double spread = std::max(std::abs(zeta), 1.0 / std::abs(zeta));
  for (int r = 1; r < 100000; ++r) {
    qr *= q;
    const cplx term = std::pow(two_pi_i_power(1) * static_cast<double>(r), i) *
                      (power_geometric(j - 1, zeta * qr) + sign * power_geometric(j - 1, qr / zeta));
    sum += term;
    if (std::abs(qr) * spread < 0.5 && std::abs(term) < eps * std::max(1.0, std::abs(sum))) break;
  }
  cplx v = two_pi_i_power(j) / factorial(j - 1).get_d() * sum;
  if (f.kind == Fn::Pt1) v += 0.5 * two_pi_i_power(1);
  return v;
}

struct ShiftedValue {
  cplx value;
  double tail = 0.0;
  long shift = 0;  // z was replaced by z - shift*tau before summing
};

// Numeric value at (z, tau). P_k and Pt_1 are first moved to |Im z| <= Im tau / 2 with
// their elliptic law; g^i_j with i >= 1 is summed in place.
inline ShiftedValue evaluate_function(const FunctionId& f, cplx z, cplx tau, int N = 60) {
  if (tau.imag() <= 0) throw std::domain_error("evaluate_function: Im tau must be positive");
  ShiftedValue out;
  if (f.kind == Fn::G) {
    auto v = evaluate(detail::cached_eisenstein(f.j, N), tau);
    out.value = v.value;
    out.tail = v.tail;
    return out;
  }
  if (f.kind == Fn::P || f.kind == Fn::Pt1) {
    const long lam = std::lround(z.imag() / tau.imag());
    z -= static_cast<double>(lam) * tau;
    z -= std::round(z.real());
    out.shift = lam;
  }
  if (f.kind == Fn::g && 2.0 * std::abs(z.imag()) > tau.imag()) {
    out.value = evaluate_resummed(f, z, tau);
    return out;
  }
  auto v = detail::cached_expansion(f, N).numeric(z, tau);
  out.value = v.value;
  out.tail = v.tail;
  if (out.shift != 0 && f.j == 1 && f.kind != Fn::g) out.value += static_cast<double>(out.shift) * two_pi_i_power(1);
  return out;
}

// ---------------------------------------------------------------- modular anomalies

namespace detail {

// d/dz acting on functions of z_1 - z_0 written with labels (1 <- 0); position z1 stands for the difference.
inline Poly d_dz(const Poly& p) {
  return p.derive([](const Symbol& s) -> Poly {
    switch (s.kind) {
      case Fn::P:
        return Poly(Symbol::p(s.j + 1, s.hi, s.lo)).scaled(Graded(s.j));
      case Fn::Pt1:
        return Poly(Symbol::p(2, s.hi, s.lo));
      case Fn::g:
        return Poly(Symbol::g(s.i, s.j + 1, s.hi, s.lo)).scaled(Graded(s.j));
      case Fn::z:
        return Poly(1);
      default:
        return Poly();
    }
  });
}

inline Poly d_dtau(const Poly& p) {
  return p.derive([](const Symbol& s) -> Poly {
    const Graded inv_tpi(Rational(1), -1);
    switch (s.kind) {
      case Fn::P:
        return Poly(Symbol::g(1, s.j + 1, s.hi, s.lo)).scaled(inv_tpi.scaled(Rational(s.j)));
      case Fn::Pt1:
        return Poly(Symbol::g(1, 2, s.hi, s.lo)).scaled(inv_tpi);
      case Fn::g:
        return Poly(Symbol::g(s.i + 1, s.j + 1, s.hi, s.lo)).scaled(inv_tpi.scaled(Rational(s.j)));
      case Fn::B:
        return (Poly(Symbol::anomaly()) * Poly(Symbol::anomaly())).scaled(Graded(Rational(-1), -1));
      case Fn::z:
        return Poly();
      default:
        throw std::domain_error("d_dtau: Eisenstein derivatives are not part of the coefficient ring");
    }
  });
}

// Delta of a function of the single difference variable, labels (1 <- 0), position z1.
inline Poly delta_base(const Symbol& s) {
  const Poly B(Symbol::anomaly());
  const Poly z(Symbol::position(1));
  switch (s.kind) {
    case Fn::G:
      return s.j == 2 ? -B : Poly();
    case Fn::Pt1:
      return -(B * z);
    case Fn::P:
      if (s.j == 1) throw std::domain_error("P_1 has no homogeneous weight; use Pt_1 = P_1 + pi i");
      return s.j == 2 ? -B : Poly();
    case Fn::g: {
      if (s.i == 0) return delta_base(s.j == 1 ? Symbol::p_tilde(1, 0) : Symbol::p(s.j, 1, 0));
      if (s.j <= s.i)
        throw std::domain_error("no modular anomaly available for g^" + std::to_string(s.i) + "_" +
                                std::to_string(s.j) + " with j <= i");
      // g^i_j = (2 pi i/(j-1)) d_tau g^{i-1}_{j-1}; for f of weight k with F = f + Delta f,
      // Delta(d_tau f) = d_tau(Delta f) + (B/2 pi i)(k F + z dF/dz).
      const Symbol prev = s.i == 1 ? (s.j == 2 ? Symbol::p_tilde(1, 0) : Symbol::p(s.j - 1, 1, 0))
                                   : Symbol::g(s.i - 1, s.j - 1, 1, 0);
      const Poly df = delta_base(prev);
      const Poly F = Poly(prev) + df;
      const int k = prev.weight();
      const Poly inner = d_dtau(df) + (B * (F.scaled(Graded(k)) + z * d_dz(F))).scaled(Graded(Rational(1), -1));
      return inner.scaled(Graded(ratio(Integer(1), Integer(s.j - 1)), 1));
    }
    default:
      return Poly();
  }
}

}  // namespace detail

// Modular anomaly Delta f = (c tau + d)^{-k} f(gamma z, gamma tau) - f(z, tau) as a polynomial in
// B = 2 pi i c/(c tau + d), the positions z_hi, z_lo and functions at (hi <- lo).
inline Poly delta_anomaly(const Symbol& s) {
  if (s.kind == Fn::B || s.kind == Fn::z) return Poly();
  Poly base = detail::delta_base(s);
  if (s.kind == Fn::G) return base;
  const int hi = s.hi, lo = s.lo;
  return base.substitute([hi, lo](const Symbol& t) -> Poly {
    if (t.kind == Fn::z) return position_difference(hi, lo);
    if (t.is_elliptic()) {
      Symbol r = t;
      r.hi = hi;
      r.lo = lo;
      return Poly(r);
    }
    return Poly(t);
  });
}

inline Poly delta_anomaly(const FunctionId& f) { return delta_anomaly(f.symbol()); }

// Delta of a polynomial: substitute f -> f + Delta f and subtract.
inline Poly apply_delta(const Poly& p) {
  Poly shifted = p.substitute([](const Symbol& s) -> Poly { return Poly(s) + delta_anomaly(s); });
  return shifted - p;
}

struct TransformDescriptor {
  FunctionId id;
  int weight = 0;
  std::pair<int, int> depth{0, 0};  // (elliptic, modular)
  int index = 0;
  std::optional<Graded> shift_per_lambda;  // f(z + lambda tau) - f(z) = lambda * shift when linear
  Poly delta;
};

inline TransformDescriptor describe(const FunctionId& f) {
  TransformDescriptor d;
  d.id = f;
  d.weight = f.weight();
  d.delta = delta_anomaly(f);
  for (const auto& [m, c] : d.delta.terms()) {
    int b = 0, z = 0;
    for (const auto& [s, e] : m) {
      if (s.kind == Fn::B) b += e;
      if (s.kind == Fn::z) z += e;
    }
    d.depth.first = std::max(d.depth.first, z);
    d.depth.second = std::max(d.depth.second, b - z);
  }
  if (f.kind == Fn::Pt1 || (f.kind == Fn::P && f.j == 1)) d.shift_per_lambda = Graded(1, 1);
  if (f.kind == Fn::P && f.j > 1) d.shift_per_lambda = Graded();
  return d;
}

struct ModularReport {
  cplx lhs;
  cplx rhs;
  double residual = 0;
  double tail = 0;
};

// Compare f(gamma z, gamma tau) with (c tau + d)^k (f + Delta f)(z, tau).
inline ModularReport verify_modular(const FunctionId& f, const std::array<long, 4>& gamma, cplx z, cplx tau,
                                    int N = 60) {
  const auto [a, b, c, d] = gamma;
  if (a * d - b * c != 1) throw std::invalid_argument("verify_modular: matrix not in SL(2,Z)");
  const cplx j = static_cast<double>(c) * tau + static_cast<double>(d);
  const cplx gtau = (static_cast<double>(a) * tau + static_cast<double>(b)) / j;
  const cplx gz = z / j;
  ModularReport r;
  auto lhs = evaluate_function(f, gz, gtau, N);
  r.lhs = lhs.value;
  r.tail = lhs.tail;
  const cplx B = two_pi_i_power(1) * static_cast<double>(c) / j;
  const Symbol self = f.symbol();
  double tails = 0;
  auto value = [&](const Symbol& s) -> cplx {
    if (s.kind == Fn::B) return B;
    if (s.kind == Fn::z) return s.hi == 1 ? z : cplx(0);
    FunctionId g{s.kind, s.i, s.j};
    auto v = evaluate_function(g, z, tau, N);
    tails += v.tail;
    return v.value;
  };
  const Poly full = Poly(self) + delta_anomaly(f);
  r.rhs = std::pow(j, f.weight()) * full.numeric(value);
  r.tail += tails * std::pow(std::abs(j), f.weight());
  r.residual = std::abs(r.lhs - r.rhs);
  return r;
}

}  // namespace qjac
