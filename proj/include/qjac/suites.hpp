#pragma once

#include "combinatorics.hpp"
#include "elliptic.hpp"
#include "hha.hpp"
#include "lattice.hpp"
#include "qseries.hpp"

#include <array>
#include <cstdio>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace qjac {

struct CaseResult {
  std::string id;
  bool pass = false;
  std::string detail;  // what differed, for exact checks
  std::optional<double> residual;
  std::vector<std::pair<std::string, std::string>> params;
};

struct VerificationReport {
  std::string suite;
  int order = 0;
  std::optional<double> tolerance;
  std::vector<CaseResult> cases;

  bool passed() const {
    for (const auto& c : cases)
      if (!c.pass) return false;
    return !cases.empty();
  }
  double worst_residual() const {
    double w = 0;
    for (const auto& c : cases)
      if (c.residual) w = std::max(w, *c.residual);
    return w;
  }
};

struct SuiteOptions {
  std::optional<int> order;
  std::optional<double> tol;
  unsigned seed = 17;
  int samples = 20;
};

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", x);
  return buf;
}

// |a - b| measured against the size of the values, never finer than absolute.
inline double scaled_residual(std::complex<double> a, std::complex<double> b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

namespace detail {

inline CaseResult exact_case(std::string id, bool ok, std::string what = {}) {
  CaseResult c;
  c.id = std::move(id);
  c.pass = ok;
  if (!ok) c.detail = what.empty() ? "mismatch" : std::move(what);
  return c;
}

inline CaseResult numeric_case(std::string id, double residual, double tol) {
  CaseResult c;
  c.id = std::move(id);
  c.residual = residual;
  c.pass = residual < tol;
  return c;
}

inline Poly tpi_poly(long p, long q, int e) { return Poly(Graded(make_rational(p, q), e)); }

inline CorrSymbol zero_mode_symbol(int gen, int s) { return {std::vector<int>(s, gen), {}}; }

}  // namespace detail

// The weight-2 algebra spanned by 1 and x = h[-1]^2 1 for a unit vector h.
inline HHASpec weight2_algebra() {
  HHASpec spec;
  const int x = spec.add_generator("x", 2);
  spec.set(x, x, 0, HHAState::basis(x, 1).scaled(Graded(2, -2)));
  spec.set(x, x, 1, HHAState::basis(x).scaled(Graded(4, -2)));
  spec.set(x, x, 3, HHAState::basis(0).scaled(Graded(2, -4)));
  return spec;
}

// The weight-1 algebra spanned by 1 and a = h(-1)1 with <a,a> = norm.
inline HHASpec weight1_algebra(const Rational& norm = 1) {
  HHASpec spec;
  const int a = spec.add_generator("a", 1);
  spec.set(a, a, 1, HHAState::basis(0).scaled(Graded(norm, -2)));
  return spec;
}

// ---------------------------------------------------------------- combinatorics

inline VerificationReport suite_combinatorics(const SuiteOptions& opt = {}) {
  VerificationReport r{"combinatorics", opt.order.value_or(12), std::nullopt, {}};
  const long n_max = r.order;
  for (long u = 1; u <= 8; ++u) {
    bool ok = true;
    std::string what;
    for (long t = 0; t <= u; ++t)
      if (identity_comm_lhs(u, t) != (u == t ? 1 : 0)) {
        ok = false;
        what = "t=" + std::to_string(t) + " gives " + identity_comm_lhs(u, t).get_str();
      }
    r.cases.push_back(detail::exact_case("identity_comm:u=" + std::to_string(u), ok, what));
  }
  bool ss = true;
  for (long n = 0; n <= n_max; ++n)
    for (long k = 0; k <= n; ++k) {
      Integer acc = 0;
      for (long j = k; j <= n; ++j) acc += stirling_second(n, j) * stirling_first(j, k);
      ss = ss && acc == (n == k ? 1 : 0);
    }
  r.cases.push_back(detail::exact_case("stirling_inverse:n<=" + std::to_string(n_max), ss));
  bool sa = true;
  for (long n = 1; n <= n_max; ++n)
    for (long k = 0; k <= n; ++k) {
      Rational acc = 0;
      for (long j = 0; j < k; ++j) acc += Rational(eulerian(n, j) * binomial(n - j - 1, k - j - 1));
      acc /= Rational(factorial(k));
      sa = sa && acc == Rational(stirling_second(n, k));
    }
  r.cases.push_back(detail::exact_case("stirling_from_eulerian:n<=" + std::to_string(n_max), sa));
  const auto c = c_polynomial({2, 3, 1, 4});
  r.cases.push_back(detail::exact_case("run_polynomial:(2,3,1,4)", c == WPolynomial{{2, 1}, {3, 2}, {4, 1}}));
  return r;
}

// ---------------------------------------------------------------- q-series

inline VerificationReport suite_qseries_identities(const SuiteOptions& opt = {}) {
  VerificationReport r{"qseries-identities", opt.order.value_or(30), std::nullopt, {}};
  const int N = r.order;
  for (long k : {1L, 2L, 3L}) {
    const std::string ks = "k=" + std::to_string(k);
    std::vector<QExpansion> d, closed;
    for (int n = 0; n <= 5; ++n) {
      d.push_back(dtau_inverse_factor(k, n, N));
      closed.push_back(dtau_inverse_factor_closed(k, n, N));
    }
    const auto w = w_series(k, N);
    bool deriv = true;
    for (int n = 1; n <= 5; ++n) {
      QExpansion acc(0, 0, N);
      for (int rr = 0; rr < n; ++rr)
        acc = acc + d[rr].scaled(Graded(Rational(binomial(n, rr)) * power(Rational(k), n - rr), n - rr));
      deriv = deriv && agree(d[n], w * acc, N);
    }
    r.cases.push_back(detail::exact_case("derivative_recursion:" + ks, deriv));
    bool a_ok = true;
    for (int n = 0; n <= 5; ++n) a_ok = a_ok && agree(d[n], closed[n], N);
    r.cases.push_back(detail::exact_case("derivatives_closed_form:" + ks, a_ok));
    // the inverse expansion, fed with the closed forms, must give back (1-q^k)^{-1} w^l
    const auto a = inverse_factor(k, N);
    QExpansion wl = QExpansion::constant(Graded(1), N);
    bool b_ok = true;
    for (int l = 0; l <= 5; ++l) {
      QExpansion rhs(0, 0, N);
      for (int m = 0; m <= l; ++m) {
        Rational c = Rational(stirling_first(l, m)) / Rational(factorial(l)) * power(Rational(k), -m);
        rhs = rhs + closed[m].scaled(Graded(c, -m));
      }
      b_ok = b_ok && agree(a * wl, rhs, N);
      wl = wl * w;
    }
    r.cases.push_back(detail::exact_case("closed_form_inversion:" + ks, b_ok));
  }
  return r;
}

// ---------------------------------------------------------------- elliptic

inline VerificationReport suite_elliptic_formal(const SuiteOptions& opt = {}) {
  VerificationReport r{"elliptic-formal", opt.order.value_or(30), std::nullopt, {}};
  const int N = r.order;
  for (int j = 1; j <= 5; ++j)
    r.cases.push_back(detail::exact_case("g_0_" + std::to_string(j) + "=P_" + std::to_string(j),
                                         agree(g_expansion(0, j, N), p_expansion(j, N), N)));
  for (int i = 1; i <= 2; ++i)
    for (int m = 1; m <= 3; ++m) {
      auto d = p_expansion(m, N);
      for (int t = 0; t < i; ++t) d = d.tau_derivative();
      const Rational c = ratio(factorial(m - 1), factorial(m + i - 1));
      r.cases.push_back(detail::exact_case("g_" + std::to_string(i) + "_" + std::to_string(m + i) + "=dtau^" +
                                               std::to_string(i) + "P_" + std::to_string(m),
                                           agree(g_expansion(i, m + i, N), d.scaled(Graded(c, i)), N)));
    }
  for (int i = 0; i <= 2; ++i)
    for (int j = 1; j <= 4; ++j)
      r.cases.push_back(detail::exact_case(
          "dtau_g_" + std::to_string(i) + "_" + std::to_string(j),
          agree(g_expansion(i, j, N).tau_derivative(), g_expansion(i + 1, j + 1, N).scaled(Graded(Rational(j), -1)),
                N)));
  for (int k = 1; k <= 3; ++k)
    r.cases.push_back(detail::exact_case(
        "zeta_derivative_P_" + std::to_string(k),
        agree(p_expansion(k, N).zeta_derivative(), p_expansion(k + 1, N).scaled(Graded(Rational(k), -1)), N)));
  return r;
}

inline VerificationReport suite_elliptic_numeric(const SuiteOptions& opt = {}) {
  VerificationReport r{"elliptic-numeric", opt.order.value_or(60), opt.tol.value_or(1e-6), {}};
  const int N = r.order;
  const double tol = *r.tolerance;
  std::mt19937 rng(opt.seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const std::vector<std::pair<std::string, std::array<long, 4>>> gammas{
      {"S", {0, -1, 1, 0}}, {"T", {1, 1, 0, 1}}, {"ST", {0, -1, 1, 1}}, {"TS", {1, -1, 1, 0}}};
  const std::vector<FunctionId> fns{{Fn::Pt1, 0, 1}, {Fn::P, 0, 2}, {Fn::P, 0, 3},
                                    {Fn::P, 0, 4},   {Fn::G, 0, 2}, {Fn::G, 0, 4}};
  for (int t = 0; t < opt.samples; ++t) {
    const cplx tau(u(rng), 1.0 + 0.6 * (u(rng) + 0.5));
    const cplx z(u(rng), 0.8 * u(rng) * tau.imag());
    const auto point = [&](CaseResult& c) {
      c.params = {{"z", format_double(z.real()) + "+" + format_double(z.imag()) + "i"},
                  {"tau", format_double(tau.real()) + "+" + format_double(tau.imag()) + "i"}};
    };
    for (const auto& [gname, g] : gammas)
      for (const auto& f : fns) {
        const auto rep = verify_modular(f, g, z, tau, N);
        auto c = detail::numeric_case(f.str() + ":" + gname + ":" + std::to_string(t),
                                      scaled_residual(rep.lhs, rep.rhs), tol);
        point(c);
        r.cases.push_back(std::move(c));
      }
    // shifts by tau, with the shifted side summed without using the law
    for (int k = 1; k <= 2; ++k) {
      const FunctionId f{Fn::P, 0, k};
      const cplx base = evaluate_function(f, z, tau, N).value;
      const cplx expect = base + (k == 1 ? two_pi_i_power(1) : cplx(0));
      auto c = detail::numeric_case(f.str() + ":shift_tau:" + std::to_string(t),
                                    scaled_residual(evaluate_resummed(f, z + tau, tau), expect), tol);
      point(c);
      r.cases.push_back(std::move(c));
      auto c1 = detail::numeric_case(f.str() + ":shift_1:" + std::to_string(t),
                                     scaled_residual(evaluate_resummed(f, z + 1.0, tau), base), tol);
      point(c1);
      r.cases.push_back(std::move(c1));
    }
  }
  return r;
}

// ---------------------------------------------------------------- correlators

// Fixtures for the zero-mode to full-correlator relations of the weight-2 algebra.
inline VerificationReport suite_hha_weight2(const SuiteOptions& opt = {}) {
  VerificationReport r{"hha-weight2", opt.order.value_or(3), std::nullopt, {}};
  HHAEngine e(weight2_algebra());
  const auto& spec = e.spec();
  const int x = spec.index_of("x");
  const auto at = [&](int label) { return Insertion{{0, x}, label}; };
  using detail::tpi_poly;
  const auto P = [](int k, int hi, int lo) { return Poly(Symbol::p(k, hi, lo)); };
  const auto g = [](int i, int j, int hi, int lo) { return Poly(Symbol::g(i, j, hi, lo)); };

  CorrExpression two(CorrSymbol{{}, {at(1), at(2)}});
  two.add(CorrSymbol{{}, {at(2)}}, -P(2, 2, 1) * tpi_poly(4, 1, -2));
  two.add(CorrSymbol{}, -P(4, 2, 1) * tpi_poly(2, 1, -4));
  const auto got2 = e.invert_to_full(detail::zero_mode_symbol(x, 2));
  r.cases.push_back(detail::exact_case("two_point_full", got2 == two, got2.str(spec)));

  CorrExpression three(CorrSymbol{{x}, {at(2), at(3)}});
  three.add(CorrSymbol{{x}, {at(3)}}, -P(2, 3, 2) * tpi_poly(4, 1, -2));
  three.add(CorrSymbol{{x}, {}}, -P(4, 3, 2) * tpi_poly(2, 1, -4));
  three.add(CorrSymbol{{}, {at(3)}}, -g(1, 3, 3, 2) * tpi_poly(16, 1, -4));
  three.add(CorrSymbol{}, -g(1, 5, 3, 2) * tpi_poly(16, 1, -6));
  const auto got3 = e.invert_once(CorrSymbol{{x, x}, {at(3)}}, 2);
  r.cases.push_back(detail::exact_case("three_point_first_step", got3 == three, got3.str(spec)));

  for (int s = 0; s <= 4; ++s) {
    const auto target = detail::zero_mode_symbol(x, s);
    r.cases.push_back(detail::exact_case("round_trip:s=" + std::to_string(s),
                                         e.reduce_to_zero_modes(e.invert_to_full(target)) == CorrExpression(target)));
  }

  const std::vector<AnomalyResult> fixtures{
      {},
      {{1, {{detail::zero_mode_symbol(x, 1), Graded(4)}}}},
      {{1, {{detail::zero_mode_symbol(x, 2), Graded(12)}}}, {2, {{detail::zero_mode_symbol(x, 1), Graded(24)}}}}};
  for (int s = 1; s <= std::min<int>(r.order, 3); ++s) {
    const auto got = e.anomaly_of_zero_modes(std::vector<int>(s, x));
    r.cases.push_back(detail::exact_case("anomaly:s=" + std::to_string(s), got == fixtures[s - 1]));
  }
  return r;
}

inline AnomalyResult weight1_anomaly_expected(int gen, int s, const Rational& norm) {
  AnomalyResult expect;
  for (int k = 1; 2 * k <= s; ++k) {
    const Rational c = Rational(factorial(s)) /
                       Rational(power(Rational(2), k) * Rational(factorial(k)) * Rational(factorial(s - 2 * k))) *
                       power(norm, k);
    expect[k][detail::zero_mode_symbol(gen, s - 2 * k)] = Graded(c);
  }
  return expect;
}

inline VerificationReport suite_hha_weight1(const SuiteOptions& opt = {}) {
  VerificationReport r{"hha-weight1", opt.order.value_or(6), std::nullopt, {}};
  const int total = r.order;
  HHAEngine e(weight1_algebra());
  const int a = e.spec().index_of("a");
  for (int n = 0; n <= total; ++n)
    for (int s = 0; n + s <= total; ++s) {
      std::vector<Insertion> ins;
      for (int k = 1; k <= n; ++k) ins.push_back({{0, a}, k});
      const CorrSymbol target{std::vector<int>(s, a), ins};
      std::vector<int> labels;
      for (int k = 1; k <= s; ++k) labels.push_back(n + k);
      const auto formula = weight1_configuration_formula(n, s, a, 1);
      const auto full = e.invert_to_full(target, labels);
      const bool ok = full == formula && e.reduce_to_zero_modes(formula) == e.reduce_to_zero_modes(CorrExpression(target));
      r.cases.push_back(detail::exact_case("pairing_sum:n=" + std::to_string(n) + ",s=" + std::to_string(s), ok));
    }
  for (long norm : {1L, 3L}) {
    HHAEngine en(weight1_algebra(Rational(norm)));
    for (int s = 0; s <= total; ++s)
      r.cases.push_back(detail::exact_case("anomaly:norm=" + std::to_string(norm) + ",s=" + std::to_string(s),
                                           en.anomaly_of_zero_modes(std::vector<int>(s, a)) ==
                                               weight1_anomaly_expected(a, s, Rational(norm))));
  }
  return r;
}

// ---------------------------------------------------------------- lattice

inline VerificationReport suite_lattice_oracle(const SuiteOptions& opt = {}) {
  VerificationReport r{"lattice-oracle", opt.order.value_or(4), std::nullopt, {}};
  const int N = r.order;
  const auto e8 = e8_lattice();
  for (int n = 0; n <= 3; ++n)
    r.cases.push_back(detail::exact_case("e8:n=" + std::to_string(n),
                                         agree(quasimod_rhs(e8, 0, n, N), fock_trace_oracle(e8, 0, n, N), N)));
  const auto e83 = e8_cubed_lattice();
  const int M = std::min(N, 3);
  for (int n = 0; n <= 1; ++n)
    r.cases.push_back(detail::exact_case("e8x3:n=" + std::to_string(n),
                                         agree(quasimod_rhs(e83, 0, n, M), fock_trace_oracle(e83, 0, n, M), M)));
  const auto ch = quasimod_rhs(e83, 0, 0, 3);
  const bool j_ok = ch.offset() == -1 && ch.coeff(0) == Graded(1) && ch.coeff(1) == Graded(744) &&
                    ch.coeff(2) == Graded(196884) && ch.coeff(3) == Graded(21493760);
  r.cases.push_back(detail::exact_case("e8x3:character", j_ok));
  return r;
}

// Transformation of zero-mode traces on E8^3 under S, against the symbolic anomalies.
inline VerificationReport suite_lattice_modular(const SuiteOptions& opt = {}) {
  VerificationReport r{"lattice-modular", opt.order.value_or(8), opt.tol.value_or(1e-5), {}};
  const int N = r.order;
  const double tol = *r.tolerance;
  const auto lat = e8_cubed_lattice();
  const cplx I(0, 1);
  const cplx tau(0.0, 1.3), tau_s = -1.0 / tau;
  const cplx u = 1.0 / (2.0 * std::numbers::pi * I * tau);
  const auto record = [&](std::string id, cplx lhs, cplx rhs) {
    auto c = detail::numeric_case(std::move(id), scaled_residual(lhs, rhs), tol);
    c.params = {{"abs_residual", format_double(std::abs(lhs - rhs))}, {"magnitude", format_double(std::abs(lhs))}};
    r.cases.push_back(std::move(c));
  };
  HHAEngine w1(weight1_algebra());
  const int a = w1.spec().index_of("a");
  for (int s = 0; s <= 6; ++s) {
    const cplx lhs = std::pow(tau, -s) * weight1_trace_numeric(lat, 0, s, tau_s, N);
    cplx rhs = weight1_trace_numeric(lat, 0, s, tau, N);
    for (const auto& [k, terms] : w1.anomaly_of_zero_modes(std::vector<int>(s, a)))
      for (const auto& [zs, c] : terms)
        rhs += c.numeric() * std::pow(u, k) *
               weight1_trace_numeric(lat, 0, static_cast<int>(zs.zero_modes.size()), tau, N);
    record("weight1:s=" + std::to_string(s), lhs, rhs);
  }
  HHAEngine w2(weight2_algebra());
  const int x = w2.spec().index_of("x");
  for (int s = 1; s <= 3; ++s) {
    const cplx lhs = std::pow(tau, -2 * s) * zero_mode_trace_numeric(lat, 0, s, tau_s, N);
    cplx rhs = zero_mode_trace_numeric(lat, 0, s, tau, N);
    for (const auto& [k, terms] : w2.anomaly_of_zero_modes(std::vector<int>(s, x)))
      for (const auto& [zs, c] : terms)
        rhs += c.numeric() * std::pow(u, k) *
               zero_mode_trace_numeric(lat, 0, static_cast<int>(zs.zero_modes.size()), tau, N);
    record("weight2:s=" + std::to_string(s), lhs, rhs);
  }
  const cplx z(0.1, 0.2);
  record("character_jacobi", chi_weight1(lat, 0, z / tau, tau_s, N),
         std::exp(std::numbers::pi * I * z * z / tau) * chi_weight1(lat, 0, z, tau, N));
  return r;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"combinatorics", "qseries-identities", "elliptic-formal",
                                              "elliptic-numeric", "hha-weight1", "hha-weight2",
                                              "lattice-oracle", "lattice-modular"};
  return names;
}

inline VerificationReport run_suite(const std::string& name, const SuiteOptions& opt = {}) {
  if (name == "combinatorics") return suite_combinatorics(opt);
  if (name == "qseries-identities") return suite_qseries_identities(opt);
  if (name == "elliptic-formal") return suite_elliptic_formal(opt);
  if (name == "elliptic-numeric") return suite_elliptic_numeric(opt);
  if (name == "hha-weight1") return suite_hha_weight1(opt);
  if (name == "hha-weight2") return suite_hha_weight2(opt);
  if (name == "lattice-oracle") return suite_lattice_oracle(opt);
  if (name == "lattice-modular") return suite_lattice_modular(opt);
  throw std::invalid_argument("unknown suite: " + name);
}

}  // namespace qjac
