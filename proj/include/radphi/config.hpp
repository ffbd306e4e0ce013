#pragma once

// JSON run configuration. Unknown keys are rejected at every level.
//
// {
//   "dimension": 3,
//   "params": {"gamma": 3},                          // constants usable in expressions
//   "equations": [                                   // exactly two
//     {"model": {"family": "E5", "p": 2},            // or {"family": "custom", "phi": "..."}
//      "sigma": "0", "p": "(1+r)^(-gamma)",
//      "f": {"power": {"beta": 0, "alpha": 1}},      // or {"expr": "...", "h": "...", "fbar": "..."}
//      "a": 1, "M": 1},
//     ...],
//   "grid": {...}, "iteration": {...}, "probe": {...}, "functionals": {...},
//   "checks": {...}, "growth": {...}, "modes": {"theta": "o4", "punder": "notation"},
//   "output": {"dir": "out", "verbose": false},
//   "sweep": {"key": "params.gamma", "values": [1, 1.5, 3]}
// }

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "radphi/error.hpp"
#include "radphi/models.hpp"
#include "radphi/problem.hpp"

namespace radphi {

struct OutputOptions {
  std::string dir = "out";
  bool verbose = false;
};

struct SweepOptions {
  std::string key;
  std::vector<double> values;
};

struct RunConfig {
  nlohmann::json document;  // as read, used to derive sweep variants
  ProblemSpec spec;
  OutputOptions output;
  std::optional<SweepOptions> sweep;
};

namespace config_detail {

using nlohmann::json;

inline void allow_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) throw InputError(std::string(where) + ": expected an object");
  for (const auto& [k, _] : obj.items()) {
    bool known = false;
    for (auto key : keys) known = known || k == key;
    if (!known) throw InputError(std::string(where) + ": unknown key '" + k + "'");
  }
}

inline double number(const json& v, std::string_view where) {
  if (!v.is_number()) throw InputError(std::string(where) + ": expected a number");
  return v.get<double>();
}

inline int integer(const json& v, std::string_view where) {
  if (!v.is_number_integer()) throw InputError(std::string(where) + ": expected an integer");
  return v.get<int>();
}

inline std::string text(const json& v, std::string_view where) {
  if (v.is_number()) {
    // Allow "p": 1 as shorthand for "p": "1".
    return expr::detail::format_number(v.get<double>());
  }
  if (!v.is_string()) throw InputError(std::string(where) + ": expected a string");
  return v.get<std::string>();
}

template <class T, class F>
void read(const json& obj, const char* key, T& target, F&& conv, std::string_view where) {
  if (auto it = obj.find(key); it != obj.end()) target = conv(*it, std::string(where) + "." + key);
}

inline expr::Expr parse_in(std::string_view src, std::vector<std::string> vars, const std::map<std::string, double>& params,
                           const std::string& where) {
  try {
    return expr::parse(src, std::move(vars), &params);
  } catch (const ParseError& e) {
    throw InputError(where + ": " + e.what());
  }
}

inline PhiModel read_model(const json& m, const GrowthWindow& window, const std::map<std::string, double>& params,
                           const std::string& where) {
  allow_keys(m, where, {"family", "p", "q", "phi"});
  if (!m.contains("family")) throw InputError(where + ": missing 'family'");
  const auto fam = family_from_string(text(m.at("family"), where + ".family"));
  if (!fam) throw InputError(where + ".family: expected E1..E5 or custom");
  if (*fam == Family::Custom) {
    if (!m.contains("phi")) throw InputError(where + ": custom model needs 'phi'");
    return PhiModel::custom(parse_in(text(m.at("phi"), where + ".phi"), {"t"}, params, where + ".phi"), window);
  }
  if (!m.contains("p")) throw InputError(where + ": missing 'p'");
  const double p = number(m.at("p"), where + ".p");
  const double q = m.contains("q") ? number(m.at("q"), where + ".q") : 0.0;
  return PhiModel::family(*fam, p, q, window);
}

inline Nonlinearity read_f(const json& f, const std::map<std::string, double>& params, const std::string& where) {
  allow_keys(f, where, {"power", "expr", "h", "fbar"});
  if (f.contains("power")) {
    if (f.contains("expr") || f.contains("h") || f.contains("fbar")) {
      throw InputError(where + ": 'power' excludes 'expr', 'h' and 'fbar'");
    }
    const json& pw = f.at("power");
    allow_keys(pw, where + ".power", {"beta", "alpha"});
    const double beta = pw.contains("beta") ? number(pw.at("beta"), where + ".power.beta") : 0.0;
    const double alpha = pw.contains("alpha") ? number(pw.at("alpha"), where + ".power.alpha") : 0.0;
    return Nonlinearity::power(beta, alpha);
  }
  if (!f.contains("expr")) throw InputError(where + ": needs 'power' or 'expr'");
  std::optional<expr::Expr> h, fbar;
  if (f.contains("h")) h = parse_in(text(f.at("h"), where + ".h"), {"t1", "t2"}, params, where + ".h");
  if (f.contains("fbar")) fbar = parse_in(text(f.at("fbar"), where + ".fbar"), {"s"}, params, where + ".fbar");
  return Nonlinearity::custom(parse_in(text(f.at("expr"), where + ".expr"), {"u", "v"}, params, where + ".expr"),
                              std::move(h), std::move(fbar));
}

}  // namespace config_detail

/// Build a run configuration from a parsed JSON document.
inline RunConfig config_from_json(const nlohmann::json& doc) {
  using namespace config_detail;
  allow_keys(doc, "config",
             {"dimension", "params", "equations", "grid", "iteration", "probe", "functionals", "checks", "growth",
              "modes", "output", "sweep"});
  RunConfig cfg;
  cfg.document = doc;
  ProblemSpec& s = cfg.spec;

  std::map<std::string, double> params;
  if (auto it = doc.find("params"); it != doc.end()) {
    if (!it->is_object()) throw InputError("config.params: expected an object");
    for (const auto& [k, v] : it->items()) params[k] = number(v, "config.params." + k);
  }
  read(doc, "dimension", s.N, integer, "config");

  GrowthWindow window;
  if (auto it = doc.find("growth"); it != doc.end()) {
    allow_keys(*it, "config.growth", {"t_lo", "t_hi", "samples", "margin"});
    read(*it, "t_lo", window.t_lo, number, "config.growth");
    read(*it, "t_hi", window.t_hi, number, "config.growth");
    read(*it, "samples", window.samples, integer, "config.growth");
    read(*it, "margin", window.margin, number, "config.growth");
  }

  if (!doc.contains("equations")) throw InputError("config: missing 'equations'");
  const json& eqs = doc.at("equations");
  if (!eqs.is_array() || eqs.size() != 2) throw InputError("config.equations: expected an array of two equations");
  for (std::size_t i = 0; i < 2; ++i) {
    const std::string where = "config.equations[" + std::to_string(i) + "]";
    const json& e = eqs.at(i);
    allow_keys(e, where, {"model", "sigma", "p", "f", "a", "M"});
    Equation& eq = s.eq[i];
    if (e.contains("model")) eq.model = read_model(e.at("model"), window, params, where + ".model");
    if (e.contains("sigma")) eq.sigma = parse_in(text(e.at("sigma"), where + ".sigma"), {"r"}, params, where + ".sigma");
    if (e.contains("p")) eq.p = parse_in(text(e.at("p"), where + ".p"), {"r"}, params, where + ".p");
    if (!e.contains("f")) throw InputError(where + ": missing 'f'");
    eq.f = read_f(e.at("f"), params, where + ".f");
    read(e, "a", eq.a, number, where);
    if (e.contains("M")) eq.M = number(e.at("M"), where + ".M");
  }

  if (auto it = doc.find("grid"); it != doc.end()) {
    allow_keys(*it, "config.grid", {"R", "n", "grading"});
    read(*it, "R", s.grid.R, number, "config.grid");
    read(*it, "n", s.grid.n, integer, "config.grid");
    read(*it, "grading", s.grid.grading, number, "config.grid");
  }
  if (auto it = doc.find("iteration"); it != doc.end()) {
    allow_keys(*it, "config.iteration", {"tol", "max_iter", "overflow_guard", "mono_eps"});
    read(*it, "tol", s.iteration.tol, number, "config.iteration");
    read(*it, "max_iter", s.iteration.max_iter, integer, "config.iteration");
    read(*it, "overflow_guard", s.iteration.overflow_guard, number, "config.iteration");
    read(*it, "mono_eps", s.iteration.mono_eps, number, "config.iteration");
  }
  if (auto it = doc.find("probe"); it != doc.end()) {
    allow_keys(*it, "config.probe", {"R0", "K", "eps_c", "delta_d", "eps_d", "n", "grading"});
    if (it->contains("R0")) s.probe.R0 = number(it->at("R0"), "config.probe.R0");
    read(*it, "K", s.probe.K, integer, "config.probe");
    read(*it, "eps_c", s.probe.eps_c, number, "config.probe");
    read(*it, "delta_d", s.probe.delta_d, number, "config.probe");
    read(*it, "eps_d", s.probe.eps_d, number, "config.probe");
    read(*it, "n", s.probe.n, integer, "config.probe");
    read(*it, "grading", s.probe.grading, number, "config.probe");
  }
  if (auto it = doc.find("functionals"); it != doc.end()) {
    allow_keys(*it, "config.functionals", {"z_cap", "z_points"});
    read(*it, "z_cap", s.functionals.z_cap, number, "config.functionals");
    read(*it, "z_points", s.functionals.z_points, integer, "config.functionals");
  }
  if (auto it = doc.find("checks"); it != doc.end()) {
    allow_keys(*it, "config.checks", {"points", "lo", "hi", "S", "T", "rel_tol"});
    read(*it, "points", s.checks.points, integer, "config.checks");
    read(*it, "lo", s.checks.lo, number, "config.checks");
    read(*it, "hi", s.checks.hi, number, "config.checks");
    read(*it, "S", s.checks.S, number, "config.checks");
    read(*it, "T", s.checks.T, number, "config.checks");
    read(*it, "rel_tol", s.checks.rel_tol, number, "config.checks");
  }
  if (auto it = doc.find("modes"); it != doc.end()) {
    allow_keys(*it, "config.modes", {"theta", "punder"});
    if (it->contains("theta")) {
      const auto m = text(it->at("theta"), "config.modes.theta");
      if (m == "o4") s.modes.theta = ThetaMode::O4;
      else if (m == "o3") s.modes.theta = ThetaMode::O3Literal;
      else throw InputError("config.modes.theta: expected 'o4' or 'o3'");
    }
    if (it->contains("punder")) {
      const auto m = text(it->at("punder"), "config.modes.punder");
      if (m == "notation") s.modes.punder = PunderVariant::Notation;
      else if (m == "proof") s.modes.punder = PunderVariant::Proof;
      else throw InputError("config.modes.punder: expected 'notation' or 'proof'");
    }
  }
  if (auto it = doc.find("output"); it != doc.end()) {
    allow_keys(*it, "config.output", {"dir", "verbose"});
    read(*it, "dir", cfg.output.dir, text, "config.output");
    if (it->contains("verbose")) {
      if (!it->at("verbose").is_boolean()) throw InputError("config.output.verbose: expected a boolean");
      cfg.output.verbose = it->at("verbose").get<bool>();
    }
  }
  if (auto it = doc.find("sweep"); it != doc.end()) {
    allow_keys(*it, "config.sweep", {"key", "values"});
    SweepOptions sw;
    if (!it->contains("key")) throw InputError("config.sweep: missing 'key'");
    sw.key = text(it->at("key"), "config.sweep.key");
    if (it->contains("values")) {
      const json& vals = it->at("values");
      if (!vals.is_array()) throw InputError("config.sweep.values: expected an array");
      for (const auto& v : vals) sw.values.push_back(number(v, "config.sweep.values"));
    }
    cfg.sweep = std::move(sw);
  }
  return cfg;
}

inline nlohmann::json parse_json_text(const std::string& content, const std::string& origin) {
  try {
    return nlohmann::json::parse(content);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(origin + ": " + e.what());
  }
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(parse_json_text(ss.str(), path));
}

/// Copy of `doc` with the dotted key (e.g. "params.gamma", "grid.n",
/// "equations.0.a") set to `value`. Integral values are stored as integers.
inline nlohmann::json with_value(const nlohmann::json& doc, const std::string& dotted, double value) {
  if (dotted.empty()) throw InputError("sweep key is empty");
  std::string pointer;
  std::size_t start = 0;
  while (start <= dotted.size()) {
    const std::size_t dot = dotted.find('.', start);
    const std::string part = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw InputError("sweep key '" + dotted + "' has an empty component");
    pointer += "/" + part;
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  nlohmann::json out = doc;
  const nlohmann::json::json_pointer ptr(pointer);
  const auto parent = ptr.parent_pointer();
  if (!out.contains(parent)) throw InputError("sweep key '" + dotted + "' does not name an existing section");
  if (std::nearbyint(value) == value && std::abs(value) < 1e15) {
    out[ptr] = static_cast<long long>(value);
  } else {
    out[ptr] = value;
  }
  return out;
}

}  // namespace radphi
