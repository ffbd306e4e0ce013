#pragma once

// CSV tables and JSON reports. Numbers use 12 significant digits, '.' as the
// decimal separator and '\n' line endings, independent of the global locale.

#include <charconv>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "radphi/classify.hpp"
#include "radphi/functionals.hpp"
#include "radphi/problem.hpp"
#include "radphi/solver.hpp"

namespace radphi {

inline std::string format_csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

inline void append_row(std::string& out, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) out += ',';
    out += format_csv_number(v);
    first = false;
  }
  out += '\n';
}

/// `r,u,v,du,dv`, one row per active node.
inline std::string solution_csv(const SolutionPair& sol) {
  std::string out = "r,u,v,du,dv\n";
  for (std::size_t k = 0; k < sol.active(); ++k) {
    append_row(out, {sol.grid[k], sol.u[k], sol.v[k], sol.du[k], sol.dv[k]});
  }
  return out;
}

/// `r,P1,P2,Pbar1,Pbar2,Punder1,Punder2`; Pbar columns are nan without (C2).
inline std::string functionals_csv(const FunctionalTable& t) {
  std::string out = "r,P1,P2,Pbar1,Pbar2,Punder1,Punder2\n";
  for (std::size_t k = 0; k < t.grid.size(); ++k) {
    append_row(out, {t.grid[k], t.P[0][k], t.P[1][k], t.Pbar[0].values[k], t.Pbar[1].values[k], t.Punder[0][k],
                     t.Punder[1][k]});
  }
  return out;
}

/// JSON cannot hold inf or nan; those become strings.
inline nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_csv_number(v);
}

inline nlohmann::json to_json(const ValidationReport& rep) {
  nlohmann::json out;
  out["solvable"] = rep.solvable();
  out["passed"] = rep.all_passed();
  auto& list = out["conditions"] = nlohmann::json::array();
  for (const auto& c : rep.conditions) {
    nlohmann::json j{{"name", c.name}, {"passed", c.passed}};
    if (c.equation >= 0) j["equation"] = c.equation + 1;
    if (!c.detail.empty()) j["detail"] = c.detail;
    if (!c.witness.empty()) j["witness"] = c.witness;
    list.push_back(std::move(j));
  }
  return out;
}

inline nlohmann::json to_json(const LimitVerdict& v) {
  nlohmann::json j{{"verdict", std::string(to_string(v.tag))}};
  if (v.converges()) {
    j["value"] = json_number(v.value);
    j["err"] = json_number(v.err);
  }
  if (!v.note.empty()) j["note"] = v.note;
  auto& ev = j["evidence"] = nlohmann::json::array();
  for (const auto& [r, val] : v.evidence) ev.push_back({json_number(r), json_number(val)});
  return j;
}

inline nlohmann::json to_json(const SolveDiagnostics& d) {
  nlohmann::json j{{"status", std::string(to_string(d.status))},
                   {"iterations", d.iterations},
                   {"final_difference", json_number(d.final_difference)},
                   {"tolerance", json_number(d.tolerance)},
                   {"monotone_failures", d.monotone_failures},
                   {"monotone_violation", json_number(d.monotone_violation)}};
  if (d.blow_up_radius) j["blow_up_radius"] = json_number(*d.blow_up_radius);
  return j;
}

inline nlohmann::json to_json(const BoundReport& rep) {
  auto list = nlohmann::json::array();
  for (const auto& b : rep.records) {
    nlohmann::json j{{"bound", std::string(to_string(b.id))}, {"applicable", b.applicable}, {"passed", b.passed}};
    if (b.applicable) {
      j["max_violation"] = json_number(b.max_violation);
      j["max_relative"] = json_number(b.max_relative);
      j["checked_nodes"] = b.checked;
      j["skipped_nodes"] = b.skipped;
      if (b.worst_node) j["worst_node"] = *b.worst_node;
    }
    if (!b.note.empty()) j["note"] = b.note;
    list.push_back(std::move(j));
  }
  return list;
}

inline nlohmann::json to_json(const ClassificationReport& rep) {
  nlohmann::json j{{"rule", std::string(to_string(rep.rule))},
                   {"u", std::string(to_string(rep.u))},
                   {"v", std::string(to_string(rep.v))}};
  auto& hv = j["hypotheses"];
  for (std::size_t i = 0; i < 2; ++i) {
    const std::string n = std::to_string(i + 1);
    hv["H" + n] = to_json(rep.verdicts.H[i]);
    hv["Punder" + n] = to_json(rep.verdicts.Punder[i]);
    hv["Pbar" + n] = to_json(rep.verdicts.Pbar[i]);
  }
  j["blocking"] = rep.blocking;
  j["warnings"] = rep.warnings;
  j["notes"] = rep.notes;
  return j;
}

/// Two-space indented JSON with a trailing newline.
inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace radphi
