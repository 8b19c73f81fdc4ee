#pragma once

#include "hha.hpp"
#include "lattice.hpp"

#include <json.hpp>

#include <fstream>
#include <regex>
#include <stdexcept>
#include <string>

namespace qjac {

namespace detail {

inline Rational json_rational(const nlohmann::json& v) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<long>());
  throw std::invalid_argument("expected a rational as \"p/q\" or an integer");
}

inline int json_generator(const HHASpec& spec, const nlohmann::json& v) {
  if (v.is_string()) return spec.index_of(v.get<std::string>());
  if (v.is_number_integer()) {
    const int k = v.get<int>();
    if (k < 0 || k >= static_cast<int>(spec.generators.size())) throw std::invalid_argument("generator index out of range");
    return k;
  }
  throw std::invalid_argument("expected a generator name or index");
}

}  // namespace detail

// {generators:[{name, weight}], structure:[{i, j, m, out:[{coeff:"p/q", tpi:e, gen, dpow}]}]}
// The vacuum "1" is implicit at index 0 and may also be listed explicitly.
inline HHASpec hha_spec_from_json(const nlohmann::json& j) {
  HHASpec spec;
  for (const auto& g : j.at("generators")) spec.add_generator(g.at("name").get<std::string>(), detail::json_rational(g.at("weight")));
  for (const auto& e : j.value("structure", nlohmann::json::array())) {
    HHAState out;
    for (const auto& t : e.at("out")) {
      const Graded c(detail::json_rational(t.at("coeff")), t.value("tpi", 0));
      out.add({t.value("dpow", 0), detail::json_generator(spec, t.at("gen"))}, c);
    }
    spec.set(detail::json_generator(spec, e.at("i")), detail::json_generator(spec, e.at("j")), e.at("m").get<int>(), out);
  }
  spec.validate();
  return spec;
}

inline HHASpec load_hha_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  return hha_spec_from_json(nlohmann::json::parse(in));
}

// Correlator text: whitespace- or comma-separated tokens. "x0" or "x0^3" is a zero mode of x,
// "x@2" inserts x at label 2 and "L2x@3" inserts L[-1]^2 x at label 3.
// Returns false in the second slot when the correlator vanishes identically.
inline std::pair<CorrSymbol, bool> parse_correlator(const HHASpec& spec, const std::string& text) {
  const auto known = [&](const std::string& n) {
    for (const auto& g : spec.generators)
      if (g.name == n) return true;
    return false;
  };
  CorrSymbol sym;
  const std::regex sep(R"([\s,;]+)");
  const std::regex insertion(R"((.+)@(\d+))"), zero_mode(R"((.+)0(?:\^(\d+))?)"), lowered(R"(L(\d*)(.+))");
  for (std::sregex_token_iterator it(text.begin(), text.end(), sep, -1), end; it != end; ++it) {
    const std::string tok = *it;
    if (tok.empty()) continue;
    std::smatch m;
    if (std::regex_match(tok, m, insertion)) {
      std::string name = m[1];
      int dpow = 0;
      std::smatch l;
      if (!known(name) && std::regex_match(name, l, lowered) && known(l[2])) {
        dpow = l[1].length() ? std::stoi(l[1]) : 1;
        name = l[2];
      }
      if (!known(name)) throw std::invalid_argument("correlator: unknown generator in " + tok);
      sym.insertions.push_back({{dpow, spec.index_of(name)}, std::stoi(m[2])});
    } else if (std::regex_match(tok, m, zero_mode) && known(m[1])) {
      const int e = m[2].length() ? std::stoi(m[2]) : 1;
      for (int k = 0; k < e; ++k) sym.zero_modes.push_back(spec.index_of(m[1]));
    } else {
      throw std::invalid_argument("correlator: cannot read token " + tok);
    }
  }
  const bool nonzero = normalize_symbol(sym);
  return {sym, nonzero};
}

// {rank, gram:[[...]]}
inline Lattice lattice_from_json(const nlohmann::json& j, std::string name = "lattice") {
  Lattice lat{std::move(name), j.at("gram").get<std::vector<std::vector<long>>>()};
  if (j.contains("rank") && j.at("rank").get<int>() != lat.rank())
    throw std::invalid_argument("lattice: rank does not match the Gram matrix");
  lat.validate();
  ldl(lat);  // positive definiteness
  return lat;
}

// "e8", "e8x3", or a path to a lattice JSON file.
inline Lattice resolve_lattice(const std::string& what) {
  if (what == "e8") return e8_lattice();
  if (what == "e8x3") return e8_cubed_lattice();
  std::ifstream in(what);
  if (!in) throw std::invalid_argument("cannot open " + what);
  return lattice_from_json(nlohmann::json::parse(in), what);
}

}  // namespace qjac
