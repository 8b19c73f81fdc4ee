#pragma once

#include "qseries.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace qjac {

// Positive-definite even lattice given by the Gram matrix of a basis.
struct Lattice {
  std::string name;
  std::vector<std::vector<long>> gram;

  int rank() const { return static_cast<int>(gram.size()); }

  void validate() const {
    const int n = rank();
    if (n == 0) throw std::invalid_argument("lattice: empty Gram matrix");
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(gram[i].size()) != n) throw std::invalid_argument("lattice: Gram matrix not square");
      if (gram[i][i] % 2 != 0) throw std::invalid_argument("lattice: odd diagonal entry, lattice not even");
      for (int j = 0; j < n; ++j)
        if (gram[i][j] != gram[j][i]) throw std::invalid_argument("lattice: Gram matrix not symmetric");
    }
  }
};

inline Lattice e8_lattice() {
  // Cartan matrix: chain 0-2-3-4-5-6-7 with node 1 attached to node 3
  Lattice L{"e8", std::vector<std::vector<long>>(8, std::vector<long>(8, 0))};
  const int edges[7][2] = {{0, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {1, 3}};
  for (int i = 0; i < 8; ++i) L.gram[i][i] = 2;
  for (auto& e : edges) L.gram[e[0]][e[1]] = L.gram[e[1]][e[0]] = -1;
  return L;
}

inline Lattice orthogonal_sum(const std::vector<Lattice>& parts, std::string name) {
  int n = 0;
  for (const auto& p : parts) n += p.rank();
  Lattice L{std::move(name), std::vector<std::vector<long>>(n, std::vector<long>(n, 0))};
  int off = 0;
  for (const auto& p : parts) {
    for (int i = 0; i < p.rank(); ++i)
      for (int j = 0; j < p.rank(); ++j) L.gram[off + i][off + j] = p.gram[i][j];
    off += p.rank();
  }
  return L;
}

inline Lattice e8_cubed_lattice() { return orthogonal_sum({e8_lattice(), e8_lattice(), e8_lattice()}, "e8x3"); }

// G = L D L^T with unit lower-triangular L, exactly.
struct LDLFactor {
  std::vector<std::vector<Rational>> L;
  std::vector<Rational> D;
};

inline LDLFactor ldl(const Lattice& lat) {
  lat.validate();
  const int n = lat.rank();
  LDLFactor f{std::vector<std::vector<Rational>>(n, std::vector<Rational>(n)), std::vector<Rational>(n)};
  for (int j = 0; j < n; ++j) {
    Rational d = lat.gram[j][j];
    for (int k = 0; k < j; ++k) d -= f.L[j][k] * f.L[j][k] * f.D[k];
    if (d <= 0) throw std::invalid_argument("lattice: Gram matrix not positive definite");
    f.D[j] = d;
    f.L[j][j] = 1;
    for (int i = j + 1; i < n; ++i) {
      Rational s = lat.gram[i][j];
      for (int k = 0; k < j; ++k) s -= f.L[i][k] * f.L[j][k] * f.D[k];
      s /= d;
      s.canonicalize();
      f.L[i][j] = s;
    }
  }
  return f;
}

inline Rational determinant(const Lattice& lat) {
  Rational d = 1;
  for (const auto& x : ldl(lat).D) d *= x;
  return d;
}

struct LatticeVector {
  std::vector<long> coords;
  long level = 0;  // <alpha, alpha>/2
};

// All vectors with <alpha, alpha>/2 <= max_level, by depth-first search over the LDL^T
// coordinates from the last one down (Fincke-Pohst). Norms are rechecked exactly.
inline std::vector<LatticeVector> enumerate_vectors(const Lattice& lat, long max_level) {
  const LDLFactor f = ldl(lat);
  const int n = lat.rank();
  std::vector<std::vector<double>> L(n, std::vector<double>(n));
  std::vector<double> D(n);
  for (int i = 0; i < n; ++i) {
    D[i] = f.D[i].get_d();
    for (int j = 0; j < n; ++j) L[i][j] = f.L[i][j].get_d();
  }
  const double bound = 2.0 * static_cast<double>(max_level) + 1e-9;
  std::vector<long> x(n, 0);
  std::vector<LatticeVector> out;
  std::function<void(int, double)> dive = [&](int k, double used) {
    if (k < 0) {
      long norm = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) norm += x[i] * lat.gram[i][j] * x[j];
      if (norm <= 2 * max_level) out.push_back({x, norm / 2});
      return;
    }
    double c = 0;
    for (int i = k + 1; i < n; ++i) c -= L[i][k] * static_cast<double>(x[i]);
    const double r = std::sqrt(std::max(0.0, (bound - used) / D[k]));
    const long lo = static_cast<long>(std::ceil(c - r - 1e-9)), hi = static_cast<long>(std::floor(c + r + 1e-9));
    for (long v = lo; v <= hi; ++v) {
      const double t = static_cast<double>(v) - c;
      const double nu = used + D[k] * t * t;
      if (nu > bound) continue;
      x[k] = v;
      dive(k - 1, nu);
    }
    x[k] = 0;
  };
  dive(n - 1, 0.0);
  return out;
}

// <e_axis, alpha>^2 for the orthonormal frame vector e_axis determined by the LDL^T factor.
inline Rational axis_projection_squared(const LDLFactor& f, int axis, const std::vector<long>& coords) {
  Rational s = 0;
  for (std::size_t i = axis; i < coords.size(); ++i) s += f.L[i][axis] * coords[i];
  Rational r = f.D[axis] * s * s;
  r.canonicalize();
  return r;
}

inline double axis_projection(const LDLFactor& f, int axis, const std::vector<long>& coords) {
  double s = 0;
  for (std::size_t i = axis; i < coords.size(); ++i) s += f.L[i][axis].get_d() * static_cast<double>(coords[i]);
  return std::sqrt(f.D[axis].get_d()) * s;
}

namespace detail {

// Index ranges of the diagonal blocks of the Gram matrix.
inline std::vector<std::pair<int, int>> gram_blocks(const Lattice& lat) {
  std::vector<std::pair<int, int>> blocks;
  const int n = lat.rank();
  int start = 0;
  for (int end = 0; end < n; ++end) {
    bool closed = true;
    for (int i = start; i <= end && closed; ++i)
      for (int j = end + 1; j < n; ++j)
        if (lat.gram[i][j] != 0) {
          closed = false;
          break;
        }
    if (closed) {
      blocks.emplace_back(start, end + 1);
      start = end + 1;
    }
  }
  return blocks;
}

inline Lattice sub_lattice(const Lattice& lat, int a, int b) {
  Lattice s{lat.name, std::vector<std::vector<long>>(b - a, std::vector<long>(b - a))};
  for (int i = a; i < b; ++i)
    for (int j = a; j < b; ++j) s.gram[i - a][j - a] = lat.gram[i][j];
  return s;
}

// Per-level histogram of <e_axis, beta>^2 over one indecomposable block.
using ProjectionHistogram = std::vector<std::map<Rational, long>>;

inline ProjectionHistogram block_histogram(const Lattice& block, int axis, long max_level) {
  static std::mutex mu;
  static std::map<std::tuple<std::vector<std::vector<long>>, int, long>, ProjectionHistogram> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(block.gram, axis, max_level);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  const LDLFactor f = ldl(block);
  ProjectionHistogram h(max_level + 1);
  for (const auto& v : enumerate_vectors(block, max_level))
    ++h[v.level][axis < 0 ? Rational(0) : axis_projection_squared(f, axis, v.coords)];
  cache.emplace(key, h);
  return h;
}

}  // namespace detail

// Exact multiset of (level, <h, alpha>^2) over the whole lattice, h = frame axis `axis`.
// Block-diagonal Gram matrices are handled block by block.
inline detail::ProjectionHistogram projection_histogram(const Lattice& lat, int axis, long max_level) {
  if (axis < 0 || axis >= lat.rank()) throw std::invalid_argument("lattice: frame axis out of range");
  detail::ProjectionHistogram total(max_level + 1);
  total[0][Rational(0)] = 1;
  for (const auto& [a, b] : detail::gram_blocks(lat)) {
    const bool here = axis >= a && axis < b;
    const auto h = detail::block_histogram(detail::sub_lattice(lat, a, b), here ? axis - a : -1, max_level);
    detail::ProjectionHistogram next(max_level + 1);
    for (long l1 = 0; l1 <= max_level; ++l1)
      for (const auto& [p1, c1] : total[l1])
        for (long l2 = 0; l1 + l2 <= max_level; ++l2)
          for (const auto& [p2, c2] : h[l2]) next[l1 + l2][p1 + p2] += c1 * c2;
    total = std::move(next);
  }
  return total;
}

// sum_alpha <h, alpha>^p q^{<alpha, alpha>/2} to q^N; odd p vanish by alpha -> -alpha.
inline QExpansion theta_moment(const Lattice& lat, int axis, int p, int N) {
  if (p < 0) throw std::domain_error("theta_moment: negative power");
  QExpansion t(0, 0, N);
  if (p % 2) return t;
  const auto hist = projection_histogram(lat, axis, N);
  for (int m = 0; m <= N; ++m) {
    Rational s = 0;
    for (const auto& [proj, c] : hist[m]) s += power(proj, p / 2) * c;
    t.set(m, Graded(s));
  }
  return t;
}

// Tr v_0^n q^{L_0 - l/24} for v = h[-1]^2 1 on the lattice VOA:
// sum_j C(n, j) theta_{2j} eta^{-(l-1)} (2 q d/dq)^{n-j} eta^{-1}.
inline QExpansion quasimod_rhs(const Lattice& lat, int axis, int n, int N) {
  const int l = lat.rank();
  const QExpansion rest = eta_power(-(l - 1), N);
  std::vector<QExpansion> dpow{eta_power(-1, N)};
  for (int k = 1; k <= n; ++k) dpow.push_back(dpow.back().q_derivative().scaled(Graded(2)));
  QExpansion sum;
  for (int j = 0; j <= n; ++j) {
    QExpansion term = (theta_moment(lat, axis, 2 * j, N) * rest * dpow[n - j]).scaled(Graded(Rational(binomial(n, j))));
    sum = j == 0 ? term : sum + term;
  }
  return sum.truncated(N);
}

// Brute force over the Fock basis: each state is a lattice vector alpha and a multiset of
// oscillators (colour, mode); v_0 acts by <h, alpha>^2 + 2 * (modes of colour 0) - 1/12.
inline QExpansion fock_trace_oracle(const Lattice& lat, int axis, int n, int N) {
  const int l = lat.rank();
  // (level, level carried by colour 0) -> number of oscillator states
  std::map<std::pair<int, int>, long> fock;
  std::function<void(int, int, int, int)> grow = [&](int colour, int mode, int level, int level0) {
    ++fock[{level, level0}];
    for (int c = colour; c < l; ++c)
      for (int m = (c == colour ? mode : 1); level + m <= N; ++m) grow(c, m, level + m, level0 + (c == 0 ? m : 0));
  };
  grow(0, 1, 0, 0);
  const auto hist = projection_histogram(lat, axis, N);
  QExpansion out(make_rational(-l, 24), 0, N);
  for (int la = 0; la <= N; ++la)
    for (const auto& [proj, cv] : hist[la])
      for (const auto& [key, cf] : fock) {
        const auto [lf, l0] = key;
        if (la + lf > N) continue;
        const Rational e = proj + 2 * l0 - make_rational(1, 12);
        out.add_to(la + lf, Graded(power(e, n) * cv * cf));
      }
  return out;
}

inline NumericValue eval_trace_numeric(const QExpansion& series, std::complex<double> tau) { return evaluate(series, tau); }

inline std::complex<double> eta_numeric(std::complex<double> tau, int terms = 200) {
  const std::complex<double> I(0, 1);
  const std::complex<double> q = std::exp(2.0 * std::numbers::pi * I * tau);
  std::complex<double> p = std::exp(2.0 * std::numbers::pi * I * tau / 24.0), qn = 1;
  for (int k = 1; k <= terms; ++k) {
    qn *= q;
    p *= 1.0 - qn;
    if (std::abs(qn) < 1e-18) break;
  }
  return p;
}

// Tr v_0^n q^{L_0 - l/24} evaluated numerically with the lattice sum cut at shell N and
// the oscillator factors summed to convergence.
inline std::complex<double> zero_mode_trace_numeric(const Lattice& lat, int axis, int n, std::complex<double> tau,
                                                    int N) {
  constexpr int oscillator_order = 80;
  const int l = lat.rank();
  QExpansion d = eta_power(-1, oscillator_order);
  std::vector<std::complex<double>> dvals{evaluate(d, tau).value};
  for (int k = 1; k <= n; ++k) {
    d = d.q_derivative().scaled(Graded(2));
    dvals.push_back(evaluate(d, tau).value);
  }
  const std::complex<double> rest = std::pow(eta_numeric(tau), -(l - 1));
  std::complex<double> sum = 0;
  for (int j = 0; j <= n; ++j)
    sum += binomial(n, j).get_d() * evaluate(theta_moment(lat, axis, 2 * j, N), tau).value * dvals[n - j];
  return sum * rest;
}

// Tr a_0^s q^{L_0 - l/24} for a = h(-1)1, lattice sum cut at shell N.
inline std::complex<double> weight1_trace_numeric(const Lattice& lat, int axis, int s, std::complex<double> tau, int N) {
  return evaluate(theta_moment(lat, axis, s, N), tau).value / std::pow(eta_numeric(tau), lat.rank());
}

// Tr e^{2 pi i z a_0} q^{L_0 - l/24} for a = h(-1)1, summed over vectors up to level N.
inline std::complex<double> chi_weight1(const Lattice& lat, int axis, std::complex<double> z, std::complex<double> tau,
                                        int N) {
  const std::complex<double> I(0, 1);
  const double two_pi = 2.0 * std::numbers::pi;
  // per-level sums of e^{2 pi i z <h, alpha>}, convolved across the blocks
  std::vector<std::complex<double>> total(N + 1, 0.0);
  total[0] = 1;
  for (const auto& [a, b] : detail::gram_blocks(lat)) {
    const Lattice block = detail::sub_lattice(lat, a, b);
    const bool here = axis >= a && axis < b;
    const LDLFactor f = ldl(block);
    std::vector<std::complex<double>> level(N + 1, 0.0);
    for (const auto& v : enumerate_vectors(block, N))
      level[v.level] += std::exp(two_pi * I * z * (here ? axis_projection(f, axis - a, v.coords) : 0.0));
    std::vector<std::complex<double>> next(N + 1, 0.0);
    for (int i = 0; i <= N; ++i)
      for (int j = 0; i + j <= N; ++j) next[i + j] += total[i] * level[j];
    total = std::move(next);
  }
  const std::complex<double> q = std::exp(two_pi * I * tau);
  std::complex<double> value = 0, qn = 1;
  for (int m = 0; m <= N; ++m) {
    value += total[m] * qn;
    qn *= q;
  }
  return value / std::pow(eta_numeric(tau), lat.rank());
}

}  // namespace qjac
