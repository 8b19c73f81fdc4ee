#pragma once

#include "graded.hpp"

#include <complex>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>

namespace qjac {

// Declaration order fixes the monomial order: G < P < Pt1 < g < B < z.
enum class Fn { G = 0, P = 1, Pt1 = 2, g = 3, B = 4, z = 5 };

// One coefficient-ring generator. Elliptic functions carry the label pair (hi <- lo),
// i.e. they are evaluated at z_hi - z_lo. A position variable z stores its label in hi.
struct Symbol {
  Fn kind = Fn::B;
  int i = 0;  // upper index of g
  int j = 0;  // weight index: G_j, P_j, g^i_j
  int hi = 0;
  int lo = 0;

  static Symbol eisenstein(int two_k) { return {Fn::G, 0, two_k, 0, 0}; }
  static Symbol p(int k, int hi, int lo) { return {Fn::P, 0, k, hi, lo}; }
  static Symbol p_tilde(int hi, int lo) { return {Fn::Pt1, 0, 1, hi, lo}; }
  static Symbol g(int i, int j, int hi, int lo) { return {Fn::g, i, j, hi, lo}; }
  static Symbol anomaly() { return {Fn::B, 0, 0, 0, 0}; }
  static Symbol position(int label) { return {Fn::z, 0, 0, label, 0}; }

  bool is_elliptic() const { return kind == Fn::P || kind == Fn::Pt1 || kind == Fn::g; }

  int weight() const {
    switch (kind) {
      case Fn::G:
      case Fn::P:
      case Fn::Pt1:
        return j;
      case Fn::g:
        return i + j;
      case Fn::B:
        return 1;
      case Fn::z:
        return -1;
    }
    return 0;
  }

  auto key() const { return std::tie(kind, i, j, hi, lo); }
  friend bool operator<(const Symbol& a, const Symbol& b) { return a.key() < b.key(); }
  friend bool operator==(const Symbol& a, const Symbol& b) { return a.key() == b.key(); }

  std::string str() const {
    std::ostringstream os;
    switch (kind) {
      case Fn::G:
        os << "G_" << j;
        break;
      case Fn::P:
        os << "P_" << j << "(" << hi << "<-" << lo << ")";
        break;
      case Fn::Pt1:
        os << "Pt_1(" << hi << "<-" << lo << ")";
        break;
      case Fn::g:
        os << "g^" << i << "_" << j << "(" << hi << "<-" << lo << ")";
        break;
      case Fn::B:
        os << "B";
        break;
      case Fn::z:
        os << "z" << hi;
        break;
    }
    return os.str();
  }
};

using Monomial = std::map<Symbol, int>;

// Polynomials over Q[(2 pi i)^{+-1}] in the symbols above, kept in normal form
// (no zero coefficients, no zero exponents).
class Poly {
 public:
  using Terms = std::map<Monomial, Graded>;

  Poly() = default;
  Poly(const Graded& c) { add(Monomial{}, c); }
  Poly(long c) : Poly(Graded(c)) {}
  Poly(const Symbol& s) { add(Monomial{{s, 1}}, Graded(1)); }

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add(const Monomial& m, const Graded& c) {
    if (c.is_zero()) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  Poly& operator+=(const Poly& o) {
    for (const auto& [m, c] : o.terms_) add(m, c);
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    for (const auto& [m, c] : o.terms_) add(m, -c);
    return *this;
  }
  Poly operator-() const {
    Poly r;
    for (const auto& [m, c] : terms_) r.terms_.emplace(m, -c);
    return r;
  }
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(const Poly& a, const Poly& b) {
    Poly r;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) {
        Monomial m = ma;
        for (const auto& [s, e] : mb) m[s] += e;
        r.add(m, ca * cb);
      }
    return r;
  }
  Poly& operator*=(const Poly& o) { return *this = *this * o; }
  Poly scaled(const Graded& c) const { return *this * Poly(c); }

  Poly pow(int e) const {
    if (e < 0) throw std::domain_error("Poly::pow: negative exponent");
    Poly r(1);
    for (int k = 0; k < e; ++k) r *= *this;
    return r;
  }

  friend bool operator==(const Poly& a, const Poly& b) { return a.terms_ == b.terms_; }
  friend bool operator<(const Poly& a, const Poly& b) { return a.terms_ < b.terms_; }

  bool contains(const std::function<bool(const Symbol&)>& pred) const {
    for (const auto& [m, c] : terms_)
      for (const auto& [s, e] : m)
        if (pred(s)) return true;
    return false;
  }

  // Replace every symbol by the polynomial f(symbol); f returns the symbol itself to keep it.
  Poly substitute(const std::function<Poly(const Symbol&)>& f) const {
    Poly r;
    for (const auto& [m, c] : terms_) {
      Poly t(c);
      for (const auto& [s, e] : m) t *= f(s).pow(e);
      r += t;
    }
    return r;
  }

  // Derivation determined by its value on each symbol.
  Poly derive(const std::function<Poly(const Symbol&)>& d) const {
    Poly r;
    for (const auto& [m, c] : terms_)
      for (const auto& [s, e] : m) {
        Monomial rest = m;
        if (--rest[s] == 0) rest.erase(s);
        Poly t;
        t.add(rest, c.scaled(Rational(e)));
        r += t * d(s);
      }
    return r;
  }

  std::complex<double> numeric(const std::function<std::complex<double>(const Symbol&)>& value) const {
    std::complex<double> sum = 0;
    for (const auto& [m, c] : terms_) {
      std::complex<double> t = c.numeric();
      for (const auto& [s, e] : m) t *= std::pow(value(s), e);
      sum += t;
    }
    return sum;
  }

  // Coefficient of the monomial exactly.
  Graded coeff(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Graded() : it->second;
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
      if (!first) os << " + ";
      first = false;
      os << "(" << c.str() << ")";
      for (const auto& [s, e] : m) {
        os << "*" << s.str();
        if (e != 1) os << "^" << e;
      }
    }
    return os.str();
  }

 private:
  Terms terms_;
};

inline Poly position_difference(int hi, int lo) {
  return Poly(Symbol::position(hi)) - Poly(Symbol::position(lo));
}

// g^i_j evaluated at (hi <- lo), written in canonical form. g^0_j is P_j and
// g^0_1 = P_1 is rewritten as Pt_1 - pi i. Arguments are put in the order hi > lo
// using the parity g^i_j(-z) = (-1)^{j-i} g^i_j(z), valid for Pt_1 as well.
inline Poly coefficient_function(int i, int j, int hi, int lo) {
  if (j < 1 || i < 0) throw std::domain_error("coefficient_function: need j >= 1, i >= 0");
  if (hi == lo) throw std::invalid_argument("coefficient_function: coincident labels");
  if (i == 0 && j == 1) {
    Poly pt = hi > lo ? Poly(Symbol::p_tilde(hi, lo)) : -Poly(Symbol::p_tilde(lo, hi));
    return pt - Poly(Graded::pi_i());
  }
  const int sign = (hi > lo || (j - i) % 2 == 0) ? 1 : -1;
  const int a = std::max(hi, lo), b = std::min(hi, lo);
  Symbol s = i == 0 ? Symbol::p(j, a, b) : Symbol::g(i, j, a, b);
  return Poly(s).scaled(Graded(sign));
}

}  // namespace qjac
