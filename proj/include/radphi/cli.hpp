#pragma once

// Command implementations behind the `radphi` executable. Each returns the
// process exit code:
//   0 success / converged / rule matched
//   1 I/O, configuration or expression error
//   2 problem fails (P1), (C1) or structural checks
//   3 iteration cap reached
//   4 blow-up inside [0, R]
//   5 no classification rule matched

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "radphi/classify.hpp"
#include "radphi/config.hpp"
#include "radphi/functionals.hpp"
#include "radphi/output.hpp"
#include "radphi/problem.hpp"
#include "radphi/solver.hpp"

namespace radphi::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kConditionFailure = 2,
  kIterationCap = 3,
  kBlowUp = 4,
  kNoRuleMatched = 5,
};

struct Options {
  std::string config;
  std::optional<std::string> out_dir;
  int jobs = 1;
  std::optional<ThetaMode> theta;
  std::optional<PunderVariant> punder;
  bool verbose = false;
  // sweep only
  std::optional<std::string> sweep_key;
  std::optional<std::vector<double>> sweep_values;
  bool residual = false;
};

namespace detail {

inline void apply_overrides(RunConfig& cfg, const Options& opt) {
  if (opt.theta) cfg.spec.modes.theta = *opt.theta;
  if (opt.punder) cfg.spec.modes.punder = *opt.punder;
  if (opt.verbose) cfg.output.verbose = true;
}

inline RunConfig load(const Options& opt) {
  RunConfig cfg = load_config(opt.config);
  apply_overrides(cfg, opt);
  return cfg;
}

inline std::filesystem::path out_dir(const Options& opt, const RunConfig& cfg) {
  return opt.out_dir ? std::filesystem::path(*opt.out_dir) : std::filesystem::path(cfg.output.dir);
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw InputError("failed writing '" + path.string() + "'");
}

inline void print_validation(const ValidationReport& rep, std::ostream& out) {
  for (const auto& c : rep.conditions) {
    out << c.name;
    if (c.equation >= 0) out << " (equation " << c.equation + 1 << ")";
    out << ": " << (c.passed ? "pass" : "FAIL");
    if (!c.detail.empty()) out << ": " << c.detail;
    if (!c.witness.empty()) out << " at " << c.witness;
    out << '\n';
  }
}

inline std::array<bool, 2> c2_flags(const ValidationReport& rep) { return {rep.c2(0), rep.c2(1)}; }

/// Runs a command body, mapping library and JSON errors to exit code 1.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
  }
  return kInputError;
}

/// sup over shared nodes of |w_n - w_{2n}| for both components, comparing
/// the solve grid with its refinement. Nodes r_k of n intervals coincide with
/// nodes r_{2k} of 2n intervals for any grading.
inline double refinement_residual(const ProblemSpec& spec) {
  ProblemSpec fine = spec;
  fine.grid.n = spec.grid.n * 2;
  const SolveResult a = solve(spec);
  const SolveResult b = solve(fine);
  if (a.diagnostics.status == SolveStatus::BlowUp || b.diagnostics.status == SolveStatus::BlowUp) {
    return std::numeric_limits<double>::infinity();
  }
  double r = 0.0;
  for (std::size_t k = 0; k < a.solution.active() && 2 * k < b.solution.active(); ++k) {
    r = std::max({r, std::abs(a.solution.u[k] - b.solution.u[2 * k]), std::abs(a.solution.v[k] - b.solution.v[2 * k])});
  }
  return r;
}

}  // namespace detail

inline int cmd_validate(const Options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const RunConfig cfg = detail::load(opt);
    const ValidationReport rep = validate(cfg.spec);
    detail::print_validation(rep, out);
    if (!rep.solvable()) return int{kConditionFailure};
    if (!rep.all_passed()) out << "note: (C2) failed; H and Pbar bounds are disabled\n";
    return int{kOk};
  });
}

inline int cmd_solve(const Options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const RunConfig cfg = detail::load(opt);
    const ProblemSpec& spec = cfg.spec;
    const ValidationReport vrep = validate(spec);
    if (!vrep.solvable()) {
      detail::print_validation(vrep, err);
      return int{kConditionFailure};
    }
    const Discretization disc(spec);
    const SolveResult res = solve(spec, disc);
    const auto& d = res.diagnostics;
    const auto [ru, rv] = residual(spec, disc, res.solution);
    const FunctionalTable tables = compute_functionals(spec, disc, detail::c2_flags(vrep));
    const BoundReport bounds = verify_bounds(spec, res.solution, tables);

    nlohmann::json report;
    report["validation"] = to_json(vrep);
    report["solve"] = to_json(d);
    report["residual"] = {{"u", json_number(ru)}, {"v", json_number(rv)}};
    report["bounds"] = to_json(bounds);
    report["nodes"] = res.solution.active();
    const auto dir = detail::out_dir(opt, cfg);
    detail::write_file(dir / "solution.csv", solution_csv(res.solution));
    detail::write_file(dir / "solve_report.json", dump(report));

    out << "status: " << to_string(d.status) << '\n'
        << "iterations: " << d.iterations << '\n'
        << "final difference: " << format_csv_number(d.final_difference) << '\n'
        << "residual: u " << format_csv_number(ru) << ", v " << format_csv_number(rv) << '\n';
    if (d.blow_up_radius) out << "blow-up radius: " << format_csv_number(*d.blow_up_radius) << '\n';
    for (const auto& b : bounds.records) {
      out << "bound " << to_string(b.id) << ": "
          << (!b.applicable ? "n/a" : b.passed ? "pass" : "FAIL") << '\n';
    }
    if (cfg.output.verbose) {
      for (std::size_t n = 0; n < res.solution.history.size(); ++n) {
        out << "  sweep " << n + 1 << ": " << format_csv_number(res.solution.history[n]) << '\n';
      }
    }
    out << "wrote " << (dir / "solution.csv").string() << '\n';
    switch (d.status) {
      case SolveStatus::Converged: return int{kOk};
      case SolveStatus::IterationCap: return int{kIterationCap};
      case SolveStatus::BlowUp: return int{kBlowUp};
    }
    return int{kOk};
  });
}

inline int cmd_classify(const Options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const RunConfig cfg = detail::load(opt);
    const ProblemSpec& spec = cfg.spec;
    const ValidationReport vrep = validate(spec);
    if (!vrep.solvable()) {
      detail::print_validation(vrep, err);
      return int{kConditionFailure};
    }
    const auto c2 = detail::c2_flags(vrep);
    const ProbeResult probe = probe_all(spec, c2);
    const ClassificationReport rep = classify(HypothesisVerdicts::from(probe));
    const Discretization disc(spec);
    const FunctionalTable tables = compute_functionals(spec, disc, c2);

    nlohmann::json report;
    report["validation"] = to_json(vrep);
    report["classification"] = to_json(rep);
    report["probe_radii"] = probe.radii;
    report["P1"] = to_json(probe.P[0]);
    report["P2"] = to_json(probe.P[1]);
    report["Z"] = to_json(probe.Z);
    if ((rep.u == Behavior::Bounded || rep.v == Behavior::Bounded) && probe.tables) {
      const Envelope env = finite_envelope(rep, *probe.tables);
      if (env.u_sup) report["envelope"]["u_sup"] = json_number(*env.u_sup);
      if (env.v_sup) report["envelope"]["v_sup"] = json_number(*env.v_sup);
    }
    const auto dir = detail::out_dir(opt, cfg);
    detail::write_file(dir / "functionals.csv", functionals_csv(tables));
    detail::write_file(dir / "classify_report.json", dump(report));

    out << "rule: " << to_string(rep.rule) << '\n' << "u: " << to_string(rep.u) << '\n' << "v: " << to_string(rep.v) << '\n';
    if (rep.rule == Rule::Thm1Large) out << "both Large\n";
    if (rep.u == Behavior::Bounded && rep.v == Behavior::Bounded) out << "both Bounded\n";
    for (const auto& b : rep.blocking) out << "blocked: " << b << '\n';
    for (const auto& w : rep.warnings) out << "warning: " << w << '\n';
    for (const auto& n : rep.notes) out << "note: " << n << '\n';
    if (cfg.output.verbose) {
      const char* names[] = {"H1", "H2", "Punder1", "Punder2", "Pbar1", "Pbar2"};
      const LimitVerdict* vs[] = {&rep.verdicts.H[0], &rep.verdicts.H[1], &rep.verdicts.Punder[0],
                                  &rep.verdicts.Punder[1], &rep.verdicts.Pbar[0], &rep.verdicts.Pbar[1]};
      for (int j = 0; j < 6; ++j) {
        out << "  " << names[j] << ": " << to_string(vs[j]->tag);
        if (vs[j]->converges()) out << " " << format_csv_number(vs[j]->value);
        out << '\n';
      }
    }
    return rep.rule == Rule::NoRuleMatched ? int{kNoRuleMatched} : int{kOk};
  });
}

struct SweepRow {
  double value = 0.0;
  std::string rule, u, v;
  double residual = 0.0;
};

/// Classify every swept value; rows come back in input order.
inline std::vector<SweepRow> run_sweep(const RunConfig& base, const Options& opt, const std::string& key,
                                       const std::vector<double>& values, bool with_residual, std::ostream& err) {
  std::vector<SweepRow> rows(values.size());
  std::vector<std::string> errors(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < values.size(); j = next++) {
      SweepRow& row = rows[j];
      row.value = values[j];
      try {
        RunConfig cfg = config_from_json(with_value(base.document, key, values[j]));
        detail::apply_overrides(cfg, opt);
        const ValidationReport vrep = validate(cfg.spec);
        if (!vrep.solvable()) {
          row.rule = "invalid";
          row.u = row.v = "Unknown";
          row.residual = std::numeric_limits<double>::quiet_NaN();
          continue;
        }
        const ProbeResult probe = probe_all(cfg.spec, detail::c2_flags(vrep));
        const ClassificationReport rep = classify(HypothesisVerdicts::from(probe));
        row.rule = to_string(rep.rule);
        row.u = to_string(rep.u);
        row.v = to_string(rep.v);
        if (with_residual) row.residual = detail::refinement_residual(cfg.spec);
      } catch (const std::exception& e) {
        row.rule = "error";
        row.u = row.v = "Unknown";
        row.residual = std::numeric_limits<double>::quiet_NaN();
        errors[j] = e.what();
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(opt.jobs, 1)), 1, values.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (!errors[j].empty()) err << "value " << format_csv_number(values[j]) << ": " << errors[j] << '\n';
  }
  return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows, bool with_residual) {
  std::string out = with_residual ? "value,rule,u_type,v_type,residual\n" : "value,rule,u_type,v_type\n";
  for (const auto& r : rows) {
    out += format_csv_number(r.value) + ',' + r.rule + ',' + r.u + ',' + r.v;
    if (with_residual) out += ',' + format_csv_number(r.residual);
    out += '\n';
  }
  return out;
}

inline int cmd_sweep(const Options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const RunConfig cfg = detail::load(opt);
    std::string key;
    std::vector<double> values;
    if (cfg.sweep) {
      key = cfg.sweep->key;
      values = cfg.sweep->values;
    }
    if (opt.sweep_key) key = *opt.sweep_key;
    if (opt.sweep_values) values = *opt.sweep_values;
    if (key.empty()) throw InputError("sweep needs a key (config 'sweep.key' or --key)");
    if (values.empty()) throw InputError("sweep value list is empty");
    const auto rows = run_sweep(cfg, opt, key, values, opt.residual, err);
    const std::string csv = sweep_csv(rows, opt.residual);
    detail::write_file(detail::out_dir(opt, cfg) / "sweep.csv", csv);
    out << csv;
    return int{kOk};
  });
}

}  // namespace radphi::cli
