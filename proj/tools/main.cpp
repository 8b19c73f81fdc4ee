#include "qjac/elliptic.hpp"
#include "qjac/hha.hpp"
#include "qjac/lattice.hpp"
#include "qjac/qseries.hpp"
#include "qjac/spec_io.hpp"
#include "qjac/suites.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <regex>

using namespace qjac;
using ojson = nlohmann::ordered_json;

namespace {

// exit-code contract
constexpr int kPass = 0, kFail = 1, kUsage = 2;

ojson to_json(const Graded& g) {
  ojson o = ojson::object();
  for (const auto& [e, r] : g.terms()) o[std::to_string(e)] = r.get_str();
  return o;
}

ojson to_json(const QExpansion& s) {
  ojson c = ojson::array();
  for (int m = s.lower(); m <= s.truncation(); ++m) c.push_back(to_json(s.coeff(m)));
  return {{"offset", s.offset().get_str()}, {"lower", s.lower()}, {"truncation", s.truncation()}, {"coefficients", c}};
}

ojson to_json(const BivariateExpansion& b) {
  ojson layers = ojson::array();
  for (int m = 0; m <= b.truncation(); ++m) {
    ojson num = ojson::array();
    for (const auto& [e, c] : b.layer(m).numerator()) num.push_back({e, to_json(c)});
    layers.push_back({{"q_power", m}, {"pole", b.layer(m).pole()}, {"numerator", num}});
  }
  return {{"truncation", b.truncation()}, {"layers", layers}};
}

ojson to_json(cplx z) { return ojson::array({z.real(), z.imag()}); }

ojson to_json(const CorrExpression& e, const HHASpec& spec) {
  ojson terms = ojson::array();
  for (const auto& [s, c] : e.terms()) terms.push_back({c.str(), s.str(spec)});
  return terms;
}

ojson to_json(const VerificationReport& r) {
  ojson cases = ojson::array();
  for (const auto& c : r.cases) {
    ojson o{{"id", c.id}, {"status", c.pass ? "pass" : "fail"}};
    if (c.residual) o["residual"] = *c.residual;
    if (!c.detail.empty() && !c.pass) o["exact_diff"] = c.detail;
    if (!c.params.empty()) {
      ojson p = ojson::object();
      for (const auto& [k, v] : c.params) p[k] = v;
      o["parameters"] = p;
    }
    cases.push_back(o);
  }
  ojson out{{"suite", r.suite}, {"truncation_order", r.order}};
  out["tolerance"] = r.tolerance ? ojson(*r.tolerance) : ojson(nullptr);
  out["toolchain"] = {{"compiler", __VERSION__}, {"cxx_standard", static_cast<long>(__cplusplus)}};
  out["cases"] = cases;
  out["passed"] = r.passed();
  return out;
}

double parse_real(const std::string& t, const std::string& whole) {
  if (t.empty() || t == "+") return 1.0;
  if (t == "-") return -1.0;
  std::size_t used = 0;
  const double v = std::stod(t, &used);
  if (used != t.size()) throw std::invalid_argument("cannot read complex number: " + whole);
  return v;
}

// "0.2+0.3i", "1.1i", "-0.5-2i", "0.7"
cplx parse_complex(const std::string& text) {
  std::string t;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) t += ch;
  if (t.empty()) throw std::invalid_argument("empty complex number");
  if (t.back() != 'i') return {parse_real(t, text), 0.0};
  t.pop_back();
  // split at the last sign that is not leading and not part of an exponent
  std::size_t cut = std::string::npos;
  for (std::size_t k = 1; k < t.size(); ++k)
    if ((t[k] == '+' || t[k] == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') cut = k;
  if (cut == std::string::npos) return {0.0, parse_real(t, text)};
  return {parse_real(t.substr(0, cut), text), parse_real(t.substr(cut), text)};
}

std::array<long, 4> parse_gamma(const std::string& text) {
  std::array<long, 4> g{};
  std::stringstream ss(text);
  std::string item;
  int k = 0;
  while (std::getline(ss, item, ',')) {
    if (k == 4) throw std::invalid_argument("gamma needs exactly four entries");
    std::size_t used = 0;
    g[k++] = std::stol(item, &used);
    if (used != item.size()) throw std::invalid_argument("gamma entry is not an integer: " + item);
  }
  if (k != 4) throw std::invalid_argument("gamma needs exactly four entries");
  if (g[0] * g[3] - g[1] * g[2] != 1) throw std::invalid_argument("gamma is not in SL(2,Z)");
  return g;
}

void emit(const ojson& j, bool compact = false) { std::cout << (compact ? j.dump() : j.dump(2)) << "\n"; }

int cmd_expand(const std::string& fn, int order, int z_order) {
  std::smatch m;
  ojson out{{"function", fn}, {"order", order}};
  if (std::regex_match(fn, m, std::regex(R"(wp_(\d+))"))) {
    const int k = std::stoi(m[1]);
    ojson terms = ojson::array();
    for (const auto& [e, s] : wp_laurent(k, z_order, order)) terms.push_back({{"z_power", e}, {"series", to_json(s)}});
    out["z_order"] = z_order;
    out["laurent"] = terms;
  } else {
    const FunctionId f = parse_function(fn);
    if (f.kind == Fn::G)
      out["series"] = to_json(eisenstein(f.j, order));
    else
      out["expansion"] = to_json(expansion_of(f, order));
  }
  emit(out);
  return kPass;
}

int cmd_verify(const std::string& suite, const SuiteOptions& opt) {
  const auto report = run_suite(suite, opt);
  emit(to_json(report));
  return report.passed() ? kPass : kFail;
}

int cmd_reduce(const std::string& spec_path, const std::string& corr, const std::string& direction) {
  HHAEngine e(load_hha_spec(spec_path));
  const auto [sym, nonzero] = parse_correlator(e.spec(), corr);
  std::string dir = direction;
  if (dir.empty()) dir = sym.insertions.empty() ? "full" : "zero-modes";
  CorrExpression result;
  if (nonzero) {
    if (dir == "full")
      result = e.invert_to_full(sym);
    else if (dir == "zero-modes")
      result = e.reduce_to_zero_modes(CorrExpression(sym));
    else
      throw std::invalid_argument("--to must be full or zero-modes");
  }
  emit({{"correlator", nonzero ? sym.str(e.spec()) : "0"}, {"to", dir}, {"terms", to_json(result, e.spec())}});
  return kPass;
}

int cmd_anomaly(const std::string& spec_path, const std::string& corr) {
  HHAEngine e(load_hha_spec(spec_path));
  const auto [sym, nonzero] = parse_correlator(e.spec(), corr);
  if (!sym.insertions.empty()) throw std::invalid_argument("anomaly takes a zero-mode correlator");
  ojson out = ojson::object();
  if (nonzero)
    for (const auto& [k, terms] : e.anomaly_of_zero_modes(sym.zero_modes)) {
      ojson list = ojson::array();
      for (const auto& [z, c] : terms) list.push_back({c.str(), z.str(e.spec())});
      out["k" + std::to_string(k)] = list;
    }
  emit(out, true);
  return kPass;
}

int cmd_lattice_trace(const std::string& which, int axis, int n, int order, bool oracle) {
  const Lattice lat = resolve_lattice(which);
  const auto closed = quasimod_rhs(lat, axis, n, order);
  ojson out{{"lattice", lat.name}, {"rank", lat.rank()}, {"axis", axis}, {"n", n}, {"order", order},
            {"closed_form", to_json(closed)}};
  bool ok = true;
  if (oracle) {
    const auto fock = fock_trace_oracle(lat, axis, n, order);
    ok = agree(closed, fock, order);
    out["oracle"] = to_json(fock);
    out["equal"] = ok;
  }
  emit(out);
  return ok ? kPass : kFail;
}

int cmd_transform_check(const std::string& fn, const std::string& gamma, const std::string& z_text,
                        const std::string& tau_text, int order, double tol) {
  const FunctionId f = parse_function(fn);
  const auto g = parse_gamma(gamma);
  const cplx z = parse_complex(z_text), tau = parse_complex(tau_text);
  const auto r = verify_modular(f, g, z, tau, order);
  const double scaled = scaled_residual(r.lhs, r.rhs);
  const bool ok = scaled < tol;
  emit({{"function", f.str()},
        {"gamma", g},
        {"z", to_json(z)},
        {"tau", to_json(tau)},
        {"order", order},
        {"lhs", to_json(r.lhs)},
        {"rhs", to_json(r.rhs)},
        {"residual", r.residual},
        {"scaled_residual", scaled},
        {"tail_estimate", r.tail},
        {"tolerance", tol},
        {"pass", ok}});
  return ok ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact q-expansions, torus correlators and lattice traces"};
  app.require_subcommand(1);

  std::string fn, spec, corr, direction, which = "e8", gamma, z_text = "0", tau_text;
  int order = -1, z_order = 8, n = 0, axis = 0, samples = 20;
  unsigned seed = 17;
  double tol = -1;
  bool oracle = false;
  std::string suite;

  auto* expand = app.add_subcommand("expand", "dump a q-expansion");
  expand->add_option("--function", fn, "G_2k, P_k, Pt_1, g_i_j or wp_k")->required();
  expand->add_option("--order", order, "q truncation order");
  expand->add_option("--z-order", z_order, "z truncation for wp_k");

  auto* verify = app.add_subcommand("verify-suite", "run an identity suite");
  verify->add_option("suite", suite)->required()->check(CLI::IsMember(suite_names()));
  verify->add_option("--order", order, "truncation order");
  verify->add_option("--tol", tol, "tolerance for numeric cases");
  verify->add_option("--seed", seed, "sampling seed");
  verify->add_option("--samples", samples, "number of sample points");

  auto* reduce = app.add_subcommand("reduce", "rewrite a correlator");
  reduce->add_option("--spec", spec, "algebra JSON")->required();
  reduce->add_option("--correlator", corr, "e.g. \"x0^2\" or \"x0 x@2 L2x@3\"")->required();
  reduce->add_option("--to", direction, "full or zero-modes");

  auto* anomaly = app.add_subcommand("anomaly", "modular anomaly of a zero-mode correlator");
  anomaly->add_option("--spec", spec, "algebra JSON")->required();
  anomaly->add_option("--correlator", corr, "e.g. \"x0^3\"")->required();

  auto* trace = app.add_subcommand("lattice-trace", "zero-mode trace on a lattice theory");
  trace->add_option("--lattice", which, "e8, e8x3 or a lattice JSON file");
  trace->add_option("--axis", axis, "frame axis for h");
  trace->add_option("--n", n, "number of zero modes");
  trace->add_option("--order", order, "truncation level");
  trace->add_flag("--oracle", oracle, "also build the Fock-space trace and compare");

  auto* transform = app.add_subcommand("transform-check", "numeric modular law at one point");
  transform->add_option("--function", fn)->required();
  transform->add_option("--gamma", gamma, "a,b,c,d")->required();
  transform->add_option("--z", z_text, "e.g. 0.2+0.3i");
  transform->add_option("--tau", tau_text, "e.g. 1.1i")->required();
  transform->add_option("--order", order, "q truncation order");
  transform->add_option("--tol", tol, "scaled residual tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (*expand) return cmd_expand(fn, order < 0 ? 10 : order, z_order);
    if (*verify) {
      SuiteOptions opt;
      if (order >= 0) opt.order = order;
      if (tol > 0) opt.tol = tol;
      opt.seed = seed;
      opt.samples = samples;
      return cmd_verify(suite, opt);
    }
    if (*reduce) return cmd_reduce(spec, corr, direction);
    if (*anomaly) return cmd_anomaly(spec, corr);
    if (*trace) return cmd_lattice_trace(which, axis, n, order < 0 ? 4 : order, oracle);
    if (*transform) return cmd_transform_check(fn, gamma, z_text, tau_text, order < 0 ? 60 : order, tol > 0 ? tol : 1e-6);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return kFail;
  }
  return kUsage;
}
