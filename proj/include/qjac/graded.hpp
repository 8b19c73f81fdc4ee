#pragma once

#include "rational.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <sstream>

namespace qjac {

// A rational multiple of a fixed power of 2*pi*i. Zero always sits at exponent 0.
struct ScaledRational {
  Rational value;
  int tpi = 0;

  ScaledRational() = default;
  ScaledRational(Rational v, int e = 0) : value(std::move(v)), tpi(e) { normalize(); }

  void normalize() {
    if (value == 0) tpi = 0;
  }
  bool is_zero() const { return value == 0; }

  friend ScaledRational operator*(const ScaledRational& a, const ScaledRational& b) {
    return ScaledRational(a.value * b.value, a.tpi + b.tpi);
  }
  friend bool operator==(const ScaledRational& a, const ScaledRational& b) {
    return a.value == b.value && a.tpi == b.tpi;
  }
};

inline std::complex<double> two_pi_i_power(int e) {
  const std::complex<double> tpi(0.0, 2.0 * std::numbers::pi);
  return std::pow(tpi, e);
}

// Finite sum over powers of 2*pi*i with rational coefficients.
class Graded {
 public:
  using Map = std::map<int, Rational>;

  Graded() = default;
  Graded(const Rational& r, int e = 0) { add(e, r); }
  Graded(long v) { add(0, Rational(v)); }
  Graded(const ScaledRational& s) { add(s.tpi, s.value); }

  static Graded tpi_power(int e) { return Graded(Rational(1), e); }
  // pi*i as one half of (2*pi*i)^1
  static Graded pi_i() { return Graded(make_rational(1, 2), 1); }

  const Map& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add(int e, const Rational& r) {
    if (r == 0) return;
    auto [it, inserted] = terms_.emplace(e, r);
    if (!inserted) {
      it->second += r;
      if (it->second == 0) terms_.erase(it);
    }
  }

  Rational at(int e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  // Only meaningful when a single exponent is present.
  bool homogeneous() const { return terms_.size() <= 1; }

  Graded& operator+=(const Graded& o) {
    for (const auto& [e, r] : o.terms_) add(e, r);
    return *this;
  }
  Graded& operator-=(const Graded& o) {
    for (const auto& [e, r] : o.terms_) add(e, -r);
    return *this;
  }
  Graded operator-() const {
    Graded g;
    for (const auto& [e, r] : terms_) g.terms_.emplace(e, -r);
    return g;
  }
  friend Graded operator+(Graded a, const Graded& b) { return a += b; }
  friend Graded operator-(Graded a, const Graded& b) { return a -= b; }
  friend Graded operator*(const Graded& a, const Graded& b) {
    Graded g;
    for (const auto& [ea, ra] : a.terms_)
      for (const auto& [eb, rb] : b.terms_) g.add(ea + eb, ra * rb);
    return g;
  }
  Graded& operator*=(const Graded& o) { return *this = *this * o; }
  Graded scaled(const Rational& r, int shift = 0) const {
    Graded g;
    if (r == 0) return g;
    for (const auto& [e, v] : terms_) g.terms_.emplace(e + shift, v * r);
    return g;
  }
  friend bool operator==(const Graded& a, const Graded& b) { return a.terms_ == b.terms_; }
  friend bool operator<(const Graded& a, const Graded& b) { return a.terms_ < b.terms_; }

  std::complex<double> numeric() const {
    std::complex<double> s = 0;
    for (const auto& [e, r] : terms_) s += r.get_d() * two_pi_i_power(e);
    return s;
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, r] : terms_) {
      if (!first) os << " + ";
      first = false;
      os << r.get_str();
      if (e != 0) os << "*(2pi i)^" << e;
    }
    return os.str();
  }

 private:
  Map terms_;
};

}  // namespace qjac
