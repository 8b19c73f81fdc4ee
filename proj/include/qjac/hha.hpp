#pragma once

#include "combinatorics.hpp"
#include "elliptic.hpp"
#include "symbolic.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace qjac {

// Coefficient of z^i in (1/s!) log(1+z)^s (1+z)^{h-1}; converts between the two mode bases.
inline Rational bracket_conversion(const Rational& h, int i, int s) {
  if (i < 0 || s < 0) return 0;
  std::vector<Rational> log1p(i + 1), series(i + 1), binom(i + 1);
  for (int n = 1; n <= i; ++n) log1p[n] = make_rational(n % 2 ? 1 : -1, n);
  series[0] = 1;
  for (int k = 0; k < s; ++k) {
    std::vector<Rational> next(i + 1);
    for (int a = 0; a <= i; ++a)
      for (int b = 1; a + b <= i; ++b) next[a + b] += series[a] * log1p[b];
    series = next;
  }
  binom[0] = 1;
  for (int n = 1; n <= i; ++n) binom[n] = binom[n - 1] * (h - n) / Rational(n);
  Rational acc = 0;
  for (int a = 0; a <= i; ++a) acc += series[a] * binom[i - a];
  acc /= Rational(factorial(s));
  acc.canonicalize();
  return acc;
}

// L[-1]^dpow applied to generator gen. Generator 0 is always the vacuum.
struct Basis {
  int dpow = 0;
  int gen = 0;
  auto key() const { return std::tie(gen, dpow); }
  friend bool operator<(const Basis& a, const Basis& b) { return a.key() < b.key(); }
  friend bool operator==(const Basis& a, const Basis& b) { return a.key() == b.key(); }
};

class HHAState {
 public:
  using Terms = std::map<Basis, Graded>;

  HHAState() = default;
  static HHAState basis(int gen, int dpow = 0) {
    HHAState s;
    s.add({dpow, gen}, Graded(1));
    return s;
  }

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  // L[-1] kills the vacuum.
  void add(const Basis& b, const Graded& c) {
    if (c.is_zero() || (b.gen == 0 && b.dpow > 0)) return;
    auto [it, inserted] = terms_.emplace(b, c);
    if (!inserted) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }
  HHAState& operator+=(const HHAState& o) {
    for (const auto& [b, c] : o.terms_) add(b, c);
    return *this;
  }
  HHAState scaled(const Graded& c) const {
    HHAState r;
    for (const auto& [b, v] : terms_) r.add(b, v * c);
    return r;
  }
  HHAState shifted(int extra_dpow) const {
    HHAState r;
    for (const auto& [b, v] : terms_) r.add({b.dpow + extra_dpow, b.gen}, v);
    return r;
  }
  friend bool operator==(const HHAState& a, const HHAState& b) { return a.terms_ == b.terms_; }

 private:
  Terms terms_;
};

struct Generator {
  std::string name;
  Rational weight;
};

struct HHASpec {
  std::vector<Generator> generators;  // index 0 is the vacuum
  std::map<std::tuple<int, int, int>, HHAState> structure;  // (i, j, m) -> a^i[m] a^j, absent means 0

  HHASpec() { generators.push_back({"1", Rational(0)}); }

  int add_generator(const std::string& name, const Rational& weight) {
    if (name == "1") {
      if (weight != 0) throw std::invalid_argument("HHASpec: the vacuum has weight 0");
      return 0;
    }
    for (const auto& g : generators)
      if (g.name == name) throw std::invalid_argument("HHASpec: duplicate generator " + name);
    generators.push_back({name, weight});
    return static_cast<int>(generators.size()) - 1;
  }

  int index_of(const std::string& name) const {
    for (std::size_t k = 0; k < generators.size(); ++k)
      if (generators[k].name == name) return static_cast<int>(k);
    throw std::invalid_argument("HHASpec: unknown generator " + name);
  }

  void set(int i, int j, int m, const HHAState& out) {
    if (i <= 0 || j <= 0) throw std::invalid_argument("HHASpec: vacuum products are fixed");
    if (m < 0) throw std::invalid_argument("HHASpec: negative mode");
    structure[{i, j, m}] = out;
  }

  Rational weight(const Basis& b) const { return generators.at(b.gen).weight + b.dpow; }

  int max_mode() const {
    int m = -1;
    for (const auto& [k, v] : structure)
      if (!v.is_zero()) m = std::max(m, std::get<2>(k));
    return m;
  }

  // Generators with their products x[m]y for m >= 0 on table entries.
  HHAState product(int i, int j, int m) const {
    if (i == 0 || j == 0) return {};
    auto it = structure.find({i, j, m});
    return it == structure.end() ? HHAState() : it->second;
  }

  void validate() const {
    const int n = static_cast<int>(generators.size());
    for (const auto& [key, out] : structure) {
      const auto [i, j, m] = key;
      if (i <= 0 || j <= 0 || i >= n || j >= n) throw std::invalid_argument("HHASpec: entry references unknown generator");
      const Rational expect = generators[i].weight + generators[j].weight - m - 1;
      for (const auto& [b, c] : out.terms()) {
        if (b.gen < 0 || b.gen >= n)
          throw std::invalid_argument("HHASpec: closure violation, output outside the generator span");
        if (weight(b) != expect)
          throw std::invalid_argument("HHASpec: inhomogeneous entry " + generators[i].name + "[" + std::to_string(m) +
                                      "]" + generators[j].name);
      }
    }
  }

  std::string basis_str(const Basis& b) const {
    std::string s = generators.at(b.gen).name;
    return b.dpow ? "L^" + std::to_string(b.dpow) + s : s;
  }
};

struct Insertion {
  Basis state;
  int label = 0;
  auto key() const { return std::tie(label, state); }
  friend bool operator<(const Insertion& a, const Insertion& b) { return a.key() < b.key(); }
  friend bool operator==(const Insertion& a, const Insertion& b) { return a.key() == b.key(); }
};

// Trace of zero modes of zero_modes (a multiset) and vertex operators at the labelled positions.
struct CorrSymbol {
  std::vector<int> zero_modes;
  std::vector<Insertion> insertions;

  auto key() const { return std::tie(zero_modes, insertions); }
  friend bool operator<(const CorrSymbol& a, const CorrSymbol& b) { return a.key() < b.key(); }
  friend bool operator==(const CorrSymbol& a, const CorrSymbol& b) { return a.key() == b.key(); }

  bool is_zero_mode_only() const { return insertions.empty(); }
  bool is_full() const { return zero_modes.empty(); }

  const Insertion* at_label(int label) const {
    for (const auto& ins : insertions)
      if (ins.label == label) return &ins;
    return nullptr;
  }

  std::string str(const HHASpec& spec) const {
    std::ostringstream os;
    os << "F(";
    std::map<int, int> counts;
    for (int g : zero_modes) ++counts[g];
    bool first = true;
    for (const auto& [g, e] : counts) {
      if (!first) os << " ";
      first = false;
      os << spec.generators.at(g).name << "0^" << e;
    }
    if (!counts.empty() && !insertions.empty()) os << ";";
    first = true;
    for (const auto& ins : insertions) {
      if (!first) os << ",";
      first = false;
      os << "(" << spec.basis_str(ins.state) << "," << ins.label << ")";
    }
    os << ")";
    return os.str();
  }
};

inline Rational symbol_weight(const HHASpec& spec, const CorrSymbol& s) {
  Rational w = 0;
  for (int g : s.zero_modes) w += spec.generators.at(g).weight;
  for (const auto& ins : s.insertions) w += spec.weight(ins.state);
  return w;
}

// Brings a symbol to normal form. Returns false when the correlator vanishes identically.
inline bool normalize_symbol(CorrSymbol& s) {
  std::erase(s.zero_modes, 0);  // o(1) = Id
  std::sort(s.zero_modes.begin(), s.zero_modes.end());
  std::erase_if(s.insertions, [](const Insertion& i) { return i.state.gen == 0 && i.state.dpow == 0; });
  std::sort(s.insertions.begin(), s.insertions.end());
  for (std::size_t k = 0; k + 1 < s.insertions.size(); ++k)
    if (s.insertions[k].label == s.insertions[k + 1].label)
      throw std::invalid_argument("CorrSymbol: repeated position label");
  for (const auto& i : s.insertions)
    if (i.state.gen == 0) return false;
  // a lone descendant only sees its zero mode, which vanishes
  if (s.insertions.size() == 1 && s.insertions[0].state.dpow > 0) return false;
  return true;
}

class CorrExpression {
 public:
  using Terms = std::map<CorrSymbol, Poly>;

  CorrExpression() = default;
  explicit CorrExpression(CorrSymbol s, const Poly& c = Poly(1)) { add(std::move(s), c); }

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add(CorrSymbol s, const Poly& c) {
    if (c.is_zero() || !normalize_symbol(s)) return;
    auto [it, inserted] = terms_.emplace(std::move(s), c);
    if (!inserted) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  // Adds c * F(zero_modes; slots), expanding every slot state multilinearly.
  void add_states(const Poly& c, const std::vector<int>& zero_modes,
                  const std::vector<std::pair<HHAState, int>>& slots) {
    std::vector<std::pair<Poly, std::vector<Insertion>>> partial{{c, {}}};
    for (const auto& [state, label] : slots) {
      std::vector<std::pair<Poly, std::vector<Insertion>>> next;
      for (const auto& [pc, ins] : partial)
        for (const auto& [b, v] : state.terms()) {
          auto more = ins;
          more.push_back({b, label});
          next.emplace_back(pc.scaled(v), std::move(more));
        }
      partial = std::move(next);
    }
    for (auto& [pc, ins] : partial) add(CorrSymbol{zero_modes, std::move(ins)}, pc);
  }

  CorrExpression& operator+=(const CorrExpression& o) {
    for (const auto& [s, c] : o.terms_) add(s, c);
    return *this;
  }
  CorrExpression& operator-=(const CorrExpression& o) {
    for (const auto& [s, c] : o.terms_) add(s, -c);
    return *this;
  }
  friend CorrExpression operator+(CorrExpression a, const CorrExpression& b) { return a += b; }
  friend CorrExpression operator-(CorrExpression a, const CorrExpression& b) { return a -= b; }
  CorrExpression times(const Poly& c) const {
    CorrExpression r;
    for (const auto& [s, v] : terms_) r.add(s, v * c);
    return r;
  }
  friend bool operator==(const CorrExpression& a, const CorrExpression& b) { return a.terms_ == b.terms_; }

  Poly coeff(const CorrSymbol& s) const {
    auto it = terms_.find(s);
    return it == terms_.end() ? Poly() : it->second;
  }

  std::size_t max_insertions() const {
    std::size_t n = 0;
    for (const auto& [s, c] : terms_) n = std::max(n, s.insertions.size());
    return n;
  }

  std::string str(const HHASpec& spec) const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [s, c] : terms_) {
      if (!first) os << "\n+ ";
      first = false;
      os << "[" << c.str() << "] " << s.str(spec);
    }
    return os.str();
  }

 private:
  Terms terms_;
};

// Anomaly of a zero-mode correlator, graded by powers k of c/(2 pi i (c tau + d)).
using AnomalyResult = std::map<int, std::map<CorrSymbol, Graded>>;

class HHAEngine {
 public:
  explicit HHAEngine(HHASpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    max_mode_ = spec_.max_mode();
  }

  const HHASpec& spec() const { return spec_; }

  // b[m] a on the span of L[-1]^k a^l.
  HHAState square_action(const HHAState& b, int m, const HHAState& a) const {
    if (m < 0) throw std::domain_error("square_action: negative mode");
    HHAState out;
    for (const auto& [bb, cb] : b.terms())
      for (const auto& [ab, ca] : a.terms()) {
        const int l = bb.dpow;
        if (l > m) continue;
        // (L^l b)[m] = (-1)^l m(m-1)...(m-l+1) b[m-l]
        Integer ff = 1;
        for (int t = 0; t < l; ++t) ff *= m - t;
        if (l % 2) ff = -ff;
        const int mm = m - l;
        const int n = ab.dpow;
        for (int k = 0; k <= std::min(mm, n); ++k) {
          const Integer c = binomial(mm, k) * factorial(k) * binomial(n, k) * ff;
          HHAState prod = spec_.product(bb.gen, ab.gen, mm - k);
          out += prod.shifted(n - k).scaled(cb * ca * Graded(Rational(c)));
        }
      }
    return out;
  }

  // d^S(a) = (-1)^{|S|} b^{S_1}[0] ... b^{S_r}[0] a, rightmost factor acting first.
  HHAState d_state(const std::vector<int>& zero_modes, const HHAState& a) const {
    HHAState r = a;
    for (auto it = zero_modes.rbegin(); it != zero_modes.rend() && !r.is_zero(); ++it)
      r = square_action(HHAState::basis(*it), 0, r);
    return zero_modes.size() % 2 ? r.scaled(Graded(-1)) : r;
  }

  // One step of the commuting recursion removing the insertion at `label`.
  // The returned expression equals F(sym): head plus tail.
  CorrExpression eliminate(const CorrSymbol& sym, int label) {
    const Insertion* first = sym.at_label(label);
    if (!first) throw std::invalid_argument("eliminate: no insertion at that label");
    const Basis a1 = first->state;
    std::vector<Insertion> rest;
    for (const auto& i : sym.insertions)
      if (i.label != label) rest.push_back(i);
    const auto& R = sym.zero_modes;
    const int r = static_cast<int>(R.size());
    if (r > 20) throw std::domain_error("eliminate: too many zero modes");

    CorrExpression out;
    if (a1.dpow == 0) {
      CorrSymbol head{R, rest};
      head.zero_modes.push_back(a1.gen);
      out.add(head, Poly(1));
    }

    CorrExpression residual;
    const HHAState a1state = HHAState::basis(a1.gen, a1.dpow);
    for (unsigned mask = 0; mask < (1u << r); ++mask) {
      std::vector<int> S, kept;
      for (int k = 0; k < r; ++k) (mask & (1u << k) ? S : kept).push_back(R[k]);
      const HHAState d = d_state(S, a1state);
      if (d.is_zero()) continue;
      int dmax = 0;
      for (const auto& [b, c] : d.terms()) dmax = std::max(dmax, b.dpow);
      for (std::size_t j = 0; j < rest.size(); ++j) {
        const int bound = max_mode_ + dmax + rest[j].state.dpow;
        for (int m = 0; m <= bound; ++m) {
          HHAState st = square_action(d, m, HHAState::basis(rest[j].state.gen, rest[j].state.dpow));
          if (st.is_zero()) continue;
          std::vector<std::pair<HHAState, int>> slots;
          for (std::size_t k = 0; k < rest.size(); ++k)
            slots.emplace_back(k == j ? st : HHAState::basis(rest[k].state.gen, rest[k].state.dpow), rest[k].label);
          Poly c = coefficient_function(static_cast<int>(S.size()), m + 1, rest[j].label, label);
          if (S.empty() && m == 0) {
            c += Poly(Graded::pi_i());  // P_1 -> Pt_1; the pi i part must cancel across j
            residual.add_states(Poly(1), kept, slots);
          }
          out.add_states(c, kept, slots);
        }
      }
    }
    if (!residual.is_zero() && !reduce_to_zero_modes(residual).is_zero())
      throw std::logic_error("eliminate: pi i residual does not cancel for " + sym.str(spec_));
    check_weights(sym, out);
    return out;
  }

  // Removes the lowest-labelled insertion of every term that still has one.
  CorrExpression reduce_once(const CorrExpression& e) {
    CorrExpression out;
    for (const auto& [s, c] : e.terms()) {
      if (s.insertions.empty()) {
        out.add(s, c);
        continue;
      }
      out += eliminate(s, s.insertions.front().label).times(c);
    }
    return out;
  }

  CorrExpression reduce_to_zero_modes(const CorrExpression& e) {
    CorrExpression out;
    for (const auto& [s, c] : e.terms()) out += reduce_symbol(s).times(c);
    return out;
  }

  // Turns one zero mode of sym into an insertion at new_label:
  // F(R; ins) = F(R - b; (b, new_label), ins) - tail.
  CorrExpression invert_once(const CorrSymbol& sym, int new_label) {
    if (sym.zero_modes.empty()) return CorrExpression(sym);
    if (sym.at_label(new_label)) throw std::invalid_argument("invert_once: label already in use");
    CorrSymbol lifted = sym;
    const int b = lifted.zero_modes.back();
    lifted.zero_modes.pop_back();
    lifted.insertions.push_back({{0, b}, new_label});
    CorrExpression out(lifted);
    out += CorrExpression(sym);
    out -= eliminate(lifted, new_label);
    return out;
  }

  // Expresses sym through full correlators. The k-th conversion uses labels[k]. By default
  // new labels sit below the existing ones (s, s-1, ..., 1 for a pure zero-mode target), so
  // that reduce_to_zero_modes undoes the inversion term by term; other label orders give
  // expressions that agree only up to identities among the elliptic coefficients.
  CorrExpression invert_to_full(const CorrSymbol& target, std::vector<int> labels = {}) {
    const int s = static_cast<int>(target.zero_modes.size());
    if (labels.empty()) {
      int top = s + 1;
      for (const auto& i : target.insertions) top = std::min(top, i.label);
      for (int k = 1; k <= s; ++k) labels.push_back(top - k);
    }
    if (static_cast<int>(labels.size()) != s) throw std::invalid_argument("invert_to_full: need one label per zero mode");
    std::set<int> used(labels.begin(), labels.end());
    for (const auto& i : target.insertions) used.insert(i.label);
    if (used.size() != labels.size() + target.insertions.size())
      throw std::invalid_argument("invert_to_full: labels collide");

    CorrExpression expr(target);
    while (true) {
      CorrExpression next;
      bool changed = false;
      for (const auto& [sym, c] : expr.terms()) {
        const int r = static_cast<int>(sym.zero_modes.size());
        if (r == 0) {
          next.add(sym, c);
          continue;
        }
        changed = true;
        next += invert_once(sym, labels[s - r]).times(c);
      }
      expr = std::move(next);
      if (!changed) return expr;
    }
  }

  // One step of the general (ordered) recursion, removing the lowest-labelled insertion.
  // ordered_zero_modes keeps the order of the zero modes in the trace.
  CorrExpression reduce_once_ordered(const std::vector<int>& ordered_zero_modes, const std::vector<Insertion>& insertions) {
    CorrSymbol probe{ordered_zero_modes, insertions};
    std::sort(probe.insertions.begin(), probe.insertions.end());
    if (probe.insertions.empty()) throw std::invalid_argument("reduce_once_ordered: no insertion");
    const Insertion first = probe.insertions.front();
    const int p = first.label;
    std::vector<Insertion> rest(probe.insertions.begin() + 1, probe.insertions.end());
    const auto& R = ordered_zero_modes;
    const int r = static_cast<int>(R.size());
    if (r > 8) throw std::domain_error("reduce_once_ordered: too many zero modes");

    CorrExpression out;
    if (first.state.dpow == 0) {
      CorrSymbol head{R, rest};
      head.zero_modes.push_back(first.state.gen);
      out.add(head, Poly(1));
    }
    const HHAState a1 = HHAState::basis(first.state.gen, first.state.dpow);
    CorrExpression residual;
    for (unsigned mask = 0; mask < (1u << r); ++mask) {
      std::vector<int> kept, complement;  // positions
      for (int k = 0; k < r; ++k) (mask & (1u << k) ? complement : kept).push_back(k);
      std::vector<int> kept_gens;
      for (int k : kept) kept_gens.push_back(R[k]);
      const int u = static_cast<int>(complement.size());
      std::vector<int> perm = complement;
      do {
        std::vector<int> gens;
        for (int k : perm) gens.push_back(R[k]);
        const int des = descent_count(perm);
        const HHAState d = d_state(gens, a1);
        if (d.is_zero()) continue;
        int dmax = 0;
        for (const auto& [b, c] : d.terms()) dmax = std::max(dmax, b.dpow);
        for (std::size_t j = 0; j < rest.size(); ++j) {
          const int bound = max_mode_ + dmax + rest[j].state.dpow;
          for (int m = 0; m <= bound; ++m) {
            HHAState st = square_action(d, m, HHAState::basis(rest[j].state.gen, rest[j].state.dpow));
            if (st.is_zero()) continue;
            std::vector<std::pair<HHAState, int>> slots;
            for (std::size_t k = 0; k < rest.size(); ++k)
              slots.emplace_back(k == j ? st : HHAState::basis(rest[k].state.gen, rest[k].state.dpow), rest[k].label);
            Poly c;
            if (u == 0) {
              c = coefficient_function(0, m + 1, rest[j].label, p);
              if (m == 0) {
                c += Poly(Graded::pi_i());
                residual.add_states(Poly(1), kept_gens, slots);
              }
            } else {
              for (int t = 1; t <= u; ++t) {
                const Rational w = recursion_coefficient(u, des, t);
                if (w != 0) c += coefficient_function(t, m + 1, rest[j].label, p).scaled(Graded(w, u - t));
              }
            }
            out.add_states(c, kept_gens, slots);
          }
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
    if (!residual.is_zero() && !reduce_to_zero_modes(residual).is_zero())
      throw std::logic_error("reduce_once_ordered: pi i residual does not cancel");
    return out;
  }

  // (c tau + d)^{-w} F(zero_modes; gamma tau) - F(zero_modes; tau), graded by powers of
  // c/(2 pi i (c tau + d)) = B/(2 pi i)^2.
  AnomalyResult anomaly_of_zero_modes(const std::vector<int>& zero_modes) {
    CorrSymbol target{zero_modes, {}};
    if (!normalize_symbol(target)) return {};
    const CorrExpression full = invert_to_full(target);
    CorrExpression shifted;
    for (const auto& [sym, c] : full.terms()) {
      const Poly dc = apply_delta(c);
      if (!dc.is_zero()) shifted += reduce_to_zero_modes(CorrExpression(sym)).times(dc);
    }
    AnomalyResult result;
    for (const auto& [sym, c] : shifted.terms()) {
      if (!sym.insertions.empty()) throw std::logic_error("anomaly: insertions survived the reduction");
      for (const auto& [mono, v] : c.terms()) {
        int k = 0;
        for (const auto& [s, e] : mono) {
          if (s.kind != Fn::B)
            throw std::runtime_error("anomaly: residual dependence on " + s.str() + " in the coefficient of " +
                                     sym.str(spec_));
          k = e;
        }
        if (k == 0) throw std::runtime_error("anomaly: B-free remainder in " + sym.str(spec_));
        Graded w = v.scaled(Rational(1), 2 * k);
        auto& slot = result[k][sym];
        slot += w;
        if (slot.is_zero()) result[k].erase(sym);
      }
    }
    std::erase_if(result, [](const auto& kv) { return kv.second.empty(); });
    return result;
  }

 private:
  CorrExpression reduce_symbol(const CorrSymbol& s) {
    if (s.insertions.empty()) return CorrExpression(s);
    if (auto it = cache_.find(s); it != cache_.end()) return it->second;
    const CorrExpression step = eliminate(s, s.insertions.front().label);
    CorrExpression out;
    for (const auto& [child, c] : step.terms()) {
      if (child.insertions.size() >= s.insertions.size())
        throw std::logic_error("reduce_to_zero_modes: insertion count did not decrease");
      out += reduce_symbol(child).times(c);
    }
    cache_.emplace(s, out);
    return out;
  }

  void check_weights(const CorrSymbol& head, const CorrExpression& e) const {
    const Rational w = symbol_weight(spec_, head);
    for (const auto& [sym, c] : e.terms()) {
      const Rational ws = symbol_weight(spec_, sym);
      for (const auto& [mono, v] : c.terms()) {
        int wm = 0;
        for (const auto& [s, k] : mono) wm += s.weight() * k;
        if (ws + wm != w) throw std::logic_error("recursion term breaks homogeneity: " + sym.str(spec_));
      }
    }
  }

  HHASpec spec_;
  int max_mode_ = -1;
  std::map<CorrSymbol, CorrExpression> cache_;
};

// Sum over configurations of pairs {p, q} (each containing a zero index n+1..n+s) of
// F_0(unpaired) * prod(-<a,a>) P_2(p <- q) / (2 pi i)^2.
inline CorrExpression weight1_configuration_formula(int n, int s, int gen, const Rational& norm) {
  CorrExpression out;
  const int total = n + s;
  std::vector<int> partner(total + 1, 0);
  std::function<void(int, Poly)> place = [&](int idx, Poly coeff) {
    while (idx <= total && partner[idx] != 0) ++idx;
    if (idx > total) {
      CorrSymbol sym;
      for (int k = 1; k <= total; ++k)
        if (partner[k] == -1) sym.insertions.push_back({{0, gen}, k});
      out.add(sym, coeff);
      return;
    }
    partner[idx] = -1;
    place(idx + 1, coeff);
    partner[idx] = 0;
    for (int other = idx + 1; other <= total; ++other) {
      if (partner[other] != 0 || (idx <= n && other <= n)) continue;
      partner[idx] = other;
      partner[other] = idx;
      place(idx + 1, coeff * coefficient_function(0, 2, other, idx).scaled(Graded(-norm, -2)));
      partner[idx] = partner[other] = 0;
    }
  };
  place(1, Poly(1));
  return out;
}

}  // namespace qjac
