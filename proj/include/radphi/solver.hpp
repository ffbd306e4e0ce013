#pragma once

// Monotone successive approximation for the radial integral equations
//   u(r) = a_1 + int_0^r psi_1^{-1}( J_1[p_1 f_1(u, v)](t) ) dt
//   v(r) = a_2 + int_0^r psi_2^{-1}( J_2[p_2 f_2(u, v)](t) ) dt
// starting from (u_0, v_0) = (a_1, a_2).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "radphi/error.hpp"
#include "radphi/functionals.hpp"
#include "radphi/problem.hpp"
#include "radphi/quadrature.hpp"

namespace radphi {

/// Iterate on the first `active()` nodes of a grid. Nodes past the active
/// prefix were cut off after an overflow.
struct SolutionPair {
  RadialGrid grid;
  std::vector<double> u, v, du, dv;
  int iterations = 0;
  std::vector<double> history;  // sup_k |u_n - u_{n-1}| + |v_n - v_{n-1}|

  std::size_t active() const { return u.size(); }
};

enum class SolveStatus { Converged, IterationCap, BlowUp };

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::IterationCap: return "iteration_cap";
    case SolveStatus::BlowUp: return "blow_up";
  }
  return "?";
}

struct SolveDiagnostics {
  SolveStatus status = SolveStatus::Converged;
  int iterations = 0;
  double final_difference = 0.0;
  double tolerance = 0.0;
  std::optional<double> blow_up_radius;  // first node cut from the final active prefix
  double monotone_violation = 0.0;       // largest u_{n-1} - u_n beyond eps_mono, 0 if none
  int monotone_failures = 0;
};

inline SolutionPair initial_pair(const ProblemSpec& spec, const RadialGrid& grid) {
  SolutionPair s;
  s.grid = grid;
  s.u.assign(grid.size(), spec.a(0));
  s.v.assign(grid.size(), spec.a(1));
  s.du.assign(grid.size(), 0.0);
  s.dv.assign(grid.size(), 0.0);
  return s;
}

namespace detail {

inline bool within_guard(double x, double guard) { return std::isfinite(x) && std::abs(x) <= guard; }

}  // namespace detail

/// One sweep of the scheme on prev's active prefix. The result is cut at the
/// first node where f, u or v leaves [-guard, guard] or is not finite.
inline SolutionPair iterate_once(const ProblemSpec& spec, const Discretization& disc, const SolutionPair& prev) {
  const double guard = spec.iteration.overflow_guard;
  std::size_t n = prev.active();
  std::array<std::vector<double>, 2> g{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < 2; ++i) {
      const double p = disc.eq(static_cast<int>(i)).p[k];
      const double val = p == 0.0 ? 0.0 : p * spec.eq[i].f(prev.u[k], prev.v[k]);
      if (!detail::within_guard(val, guard)) {
        n = k;
        break;
      }
      g[i][k] = val;
    }
  }
  SolutionPair next;
  next.grid = prev.grid;
  next.iterations = prev.iterations + 1;
  next.history = prev.history;
  next.u.resize(n);
  next.v.resize(n);
  next.du.resize(n);
  next.dv.resize(n);
  for (auto& gi : g) gi.resize(n);
  radial_transform(spec.eq[0].model, disc.eq(0).weight, g[0], next.du, next.u, spec.a(0));
  radial_transform(spec.eq[1].model, disc.eq(1).weight, g[1], next.dv, next.v, spec.a(1));
  std::size_t keep = n;
  for (std::size_t k = 0; k < n; ++k) {
    if (!detail::within_guard(next.u[k], guard) || !detail::within_guard(next.v[k], guard)) {
      keep = k;
      break;
    }
  }
  for (auto* vec : {&next.u, &next.v, &next.du, &next.dv}) vec->resize(keep);
  return next;
}

inline SolutionPair iterate_once(const ProblemSpec& spec, const SolutionPair& prev) {
  return iterate_once(spec, Discretization(spec, prev.grid), prev);
}

struct SolveResult {
  SolutionPair solution;
  SolveDiagnostics diagnostics;
};

/// Iterate until the Cauchy test
///   sup_k |u_n - u_{n-1}| + |v_n - v_{n-1}| < tol (1 + max(sup u_n, sup v_n))
/// passes or the iteration cap is reached. A shrinking active prefix marks a
/// blow-up; iteration then continues on the remaining prefix.
inline SolveResult solve(const ProblemSpec& spec, const Discretization& disc) {
  const auto& it = spec.iteration;
  if (it.max_iter < 1) throw InputError("iteration cap must be >= 1");
  SolveResult res;
  SolutionPair prev = initial_pair(spec, disc.grid());
  auto& diag = res.diagnostics;
  diag.status = SolveStatus::IterationCap;
  bool converged = false;
  bool blew_up = false;
  for (int n = 1; n <= it.max_iter; ++n) {
    SolutionPair cur = iterate_once(spec, disc, prev);
    const std::size_t m = cur.active();
    blew_up = blew_up || m < prev.active();
    double diff = 0.0;
    double sup = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      diff = std::max(diff, std::abs(cur.u[k] - prev.u[k]) + std::abs(cur.v[k] - prev.v[k]));
      sup = std::max({sup, cur.u[k], cur.v[k]});
      for (const auto& [now, before] : {std::pair{cur.u[k], prev.u[k]}, std::pair{cur.v[k], prev.v[k]}}) {
        const double drop = before - now;
        if (drop > it.mono_eps * (1.0 + std::abs(now))) {
          ++diag.monotone_failures;
          diag.monotone_violation = std::max(diag.monotone_violation, drop);
        }
      }
    }
    cur.history.push_back(diff);
    diag.iterations = n;
    diag.final_difference = diff;
    diag.tolerance = it.tol * (1.0 + sup);
    prev = std::move(cur);
    if (m == 0) break;
    if (diff < diag.tolerance) {
      converged = true;
      break;
    }
  }
  if (blew_up) {
    diag.status = SolveStatus::BlowUp;
    diag.blow_up_radius = disc.grid()[prev.active()];
  } else if (converged) {
    diag.status = SolveStatus::Converged;
  }
  res.solution = std::move(prev);
  return res;
}

inline SolveResult solve(const ProblemSpec& spec) { return solve(spec, Discretization(spec)); }

/// Self-consistency residual sup_k |T(u, v) - (u, v)| per component, over the
/// nodes where both the pair and its image are defined.
inline std::pair<double, double> residual(const ProblemSpec& spec, const Discretization& disc,
                                          const SolutionPair& sol) {
  const SolutionPair img = iterate_once(spec, disc, sol);
  double ru = 0.0;
  double rv = 0.0;
  for (std::size_t k = 0; k < img.active(); ++k) {
    ru = std::max(ru, std::abs(img.u[k] - sol.u[k]));
    rv = std::max(rv, std::abs(img.v[k] - sol.v[k]));
  }
  if (img.active() < sol.active()) {
    ru = std::numeric_limits<double>::infinity();
    rv = ru;
  }
  return {ru, rv};
}

inline std::pair<double, double> residual(const ProblemSpec& spec, const SolutionPair& sol) {
  return residual(spec, Discretization(spec, sol.grid), sol);
}

// ---------------------------------------------------------------------------
// A-priori bounds

enum class BoundId { SumUpper, UUpper, VUpper, ULower, VLower };

inline std::string_view to_string(BoundId b) {
  switch (b) {
    case BoundId::SumUpper: return "u+v<=Zinv(P1+P2)";
    case BoundId::UUpper: return "u<=H1inv(Pbar1)";
    case BoundId::VUpper: return "v<=H2inv(Pbar2)";
    case BoundId::ULower: return "u>=a1+Punder1";
    case BoundId::VLower: return "v>=a2+Punder2";
  }
  return "?";
}

struct BoundRecord {
  BoundId id{};
  bool applicable = true;
  double max_violation = 0.0;  // max(0, lhs - rhs) in the inequality's orientation
  double max_relative = 0.0;   // the same divided by max(|rhs|, tiny)
  std::optional<std::size_t> worst_node;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // nodes whose right side is only a lower bound (saturated inverse)
  bool passed = true;
  std::string note;
};

struct BoundReport {
  std::vector<BoundRecord> records;
  bool all_passed() const {
    return std::all_of(records.begin(), records.end(), [](const BoundRecord& r) { return r.passed; });
  }
  const BoundRecord& get(BoundId id) const {
    for (const auto& r : records) {
      if (r.id == id) return r;
    }
    throw InputError("bound not present in report");
  }
};

/// Node-wise check of the five bounds at relative tolerance `rel_tol`.
/// Tables must live on the solution's grid.
inline BoundReport verify_bounds(const ProblemSpec& spec, const SolutionPair& sol, const FunctionalTable& t,
                                 double rel_tol = 1e-6) {
  if (t.grid.size() < sol.active()) throw InputError("functional tables do not cover the solution grid");
  BoundReport rep;
  const std::size_t n = sol.active();
  auto record = [&](BoundId id, auto&& lhs_rhs) {
    BoundRecord rec;
    rec.id = id;
    for (std::size_t k = 0; k < n; ++k) {
      auto [lhs, rhs, usable] = lhs_rhs(k);
      if (!usable) {
        ++rec.skipped;
        continue;
      }
      ++rec.checked;
      const double viol = std::max(0.0, lhs - rhs);
      const double rel = viol / std::max(std::abs(rhs), 1e-300);
      if (viol > rec.max_violation) {
        rec.max_violation = viol;
        rec.max_relative = rel;
        rec.worst_node = k;
      }
    }
    rec.passed = rec.max_relative <= rel_tol;
    if (rec.skipped > 0) rec.note = "right side saturated at " + std::to_string(rec.skipped) + " nodes";
    rep.records.push_back(std::move(rec));
  };
  struct Item {
    double lhs, rhs;
    bool usable;
  };
  record(BoundId::SumUpper, [&](std::size_t k) {
    const auto inv = t.Z.inverse(t.P[0][k] + t.P[1][k]);
    return Item{sol.u[k] + sol.v[k], inv.value, !inv.saturated};
  });
  for (std::size_t i = 0; i < 2; ++i) {
    const BoundId id = i == 0 ? BoundId::UUpper : BoundId::VUpper;
    const auto& w = i == 0 ? sol.u : sol.v;
    if (!t.bar_available[i]) {
      BoundRecord rec;
      rec.id = id;
      rec.applicable = false;
      rec.note = "no (C2) comparison pair";
      rep.records.push_back(rec);
      continue;
    }
    const auto& bar = t.Pbar[i];
    record(id, [&](std::size_t k) {
      const bool bar_exact = !bar.saturated_from || k < *bar.saturated_from;
      const auto inv = t.H[i]->inverse(bar.values[k]);
      return Item{w[k], inv.value, bar_exact && !inv.saturated};
    });
  }
  record(BoundId::ULower, [&](std::size_t k) { return Item{spec.a(0) + t.Punder[0][k], sol.u[k], true}; });
  record(BoundId::VLower, [&](std::size_t k) { return Item{spec.a(1) + t.Punder[1][k], sol.v[k], true}; });
  return rep;
}

}  // namespace radphi
