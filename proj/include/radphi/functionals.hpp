#pragma once

// Criteria functionals of the radial system and their limits at infinity.
//
//   P_i(r)      = int_0^r psi_i^{-1}( J_i[p_i](t) ) dt
//   Pbar_i(r)   = int_0^r psi_i^{-1}( J_i[p_i fbar_i(1 + Z^{-1}(P_1 + P_2))](t) ) dt
//   Punder_1(r) = int_0^r psi_1^{-1}( J_1[p_1 f_1(a_1, a_2 + thl_2(f_2(a_1,a_2)) P_2)](t) ) dt
//   Z(r)        = int_{a_1+a_2}^r dt / (thu_1(f_1(t,t)) + thu_2(f_2(t,t)))
//   H_i(r)      = int_{a_i}^r dt / thu_i(h_i(t, M_i t))
//
// where J_i[g](t) = (1/xi_i(t)) int_0^t xi_i(s) g(s) ds and
// xi_i(t) = t^{N-1} exp(int_0^t sigma_i).

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "radphi/error.hpp"
#include "radphi/models.hpp"
#include "radphi/problem.hpp"
#include "radphi/quadrature.hpp"

namespace radphi {

/// Per-equation samples of the coefficients on one grid.
struct EquationSamples {
  RadialWeight weight;
  std::vector<double> p;
};

class Discretization {
 public:
  Discretization(const ProblemSpec& spec, RadialGrid grid) : grid_(std::move(grid)) {
    for (int i = 0; i < 2; ++i) {
      const Equation& e = spec.equation(i);
      std::vector<double> sigma(grid_.size());
      std::vector<double> p(grid_.size());
      for (std::size_t k = 0; k < grid_.size(); ++k) {
        sigma[k] = e.sigma(grid_[k]);
        p[k] = e.p(grid_[k]);
      }
      eq_[static_cast<std::size_t>(i)] = {RadialWeight(grid_, spec.N, sigma), std::move(p)};
    }
  }

  /// Grid from the spec's [0, R] controls.
  explicit Discretization(const ProblemSpec& spec)
      : Discretization(spec, RadialGrid(spec.grid.R, spec.grid.n, spec.grid.grading)) {}

  const RadialGrid& grid() const { return grid_; }
  const EquationSamples& eq(int i) const { return eq_[static_cast<std::size_t>(i)]; }

 private:
  RadialGrid grid_;
  std::array<EquationSamples, 2> eq_;
};

/// out_k = offset + int_0^{r_k} psi^{-1}(J[g]) over the first g.size() nodes;
/// deriv receives the integrand psi^{-1}(J[g]) at each node.
inline void radial_transform(const PhiModel& model, const RadialWeight& weight, std::span<const double> g,
                             std::span<double> deriv, std::span<double> out, double offset = 0.0) {
  const std::size_t n = g.size();
  weight.prefix_mean(g, deriv.first(n));
  for (std::size_t k = 0; k < n; ++k) deriv[k] = model.psi_inverse(std::max(deriv[k], 0.0));
  const RadialGrid& grid = weight.grid();
  if (n == 0) return;
  out[0] = offset;
  for (std::size_t k = 1; k < n; ++k) out[k] = out[k - 1] + 0.5 * (grid[k] - grid[k - 1]) * (deriv[k - 1] + deriv[k]);
}

inline std::vector<double> radial_transform(const PhiModel& model, const RadialWeight& weight,
                                            std::span<const double> g) {
  std::vector<double> deriv(g.size());
  std::vector<double> out(g.size());
  radial_transform(model, weight, g, deriv, out);
  return out;
}

/// xi_i(t), with the sigma integral tabulated on the spec grid (extended to t if needed).
inline double xi(const ProblemSpec& spec, int i, double t) {
  if (t < 0.0) throw InputError("xi: negative argument");
  const RadialGrid grid(std::max(spec.grid.R, t), spec.grid.n, spec.grid.grading);
  std::vector<double> sigma(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) sigma[k] = spec.equation(i).sigma(grid[k]);
  return RadialWeight(grid, spec.N, sigma)(t);
}

inline std::vector<double> compute_P(const ProblemSpec& spec, int i, const Discretization& disc) {
  const auto& s = disc.eq(i);
  return radial_transform(spec.equation(i).model, s.weight, s.p);
}

inline ArgumentTable compute_Z(const ProblemSpec& spec, double cap, int points) {
  const Equation& e1 = spec.equation(0);
  const Equation& e2 = spec.equation(1);
  const ThetaMode mode = spec.modes.theta;
  auto g = [&e1, &e2, mode](double t) {
    return 1.0 / (e1.model.theta_upper(e1.f(t, t), mode) + e2.model.theta_upper(e2.f(t, t), mode));
  };
  return ArgumentTable(g, e1.a + e2.a, cap, points);
}

inline ArgumentTable compute_Z(const ProblemSpec& spec) {
  return compute_Z(spec, spec.functionals.z_cap, spec.functionals.z_points);
}

/// Requires the (h, fbar) pair of equation i.
inline ArgumentTable compute_H(const ProblemSpec& spec, int i, double cap, int points) {
  const Equation& e = spec.equation(i);
  if (!e.f.has_decomposition()) throw InputError("H needs an (h, fbar) pair for equation " + std::to_string(i + 1));
  const double M = e.M_value();
  const ThetaMode mode = spec.modes.theta;
  auto g = [&e, i, M, mode](double t) { return 1.0 / e.model.theta_upper(e.f.h(t, M * t, i), mode); };
  return ArgumentTable(g, e.a, cap, points);
}

inline ArgumentTable compute_H(const ProblemSpec& spec, int i) {
  return compute_H(spec, i, spec.functionals.z_cap, spec.functionals.z_points);
}

/// Per-node values plus the first node (if any) whose Z^{-1} saturated; from
/// that node on the values are lower bounds.
struct BarSeries {
  std::vector<double> values;
  std::optional<std::size_t> saturated_from;
};

inline BarSeries compute_Pbar(const ProblemSpec& spec, int i, const Discretization& disc,
                              std::span<const double> P1, std::span<const double> P2, const ArgumentTable& Z) {
  const Equation& e = spec.equation(i);
  const auto& s = disc.eq(i);
  BarSeries out;
  std::vector<double> g(s.p.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto inv = Z.inverse(P1[k] + P2[k]);
    if (inv.saturated && !out.saturated_from) out.saturated_from = k;
    g[k] = s.p[k] == 0.0 ? 0.0 : s.p[k] * e.f.fbar(1.0 + inv.value, i);
  }
  out.values = radial_transform(e.model, s.weight, g);
  return out;
}

/// Lower functional of equation i; P_other is P of the other equation.
/// The proof variant of the second equation takes thl_1 of f_2(a_1, a_2).
inline std::vector<double> compute_Punder(const ProblemSpec& spec, int i, const Discretization& disc,
                                          std::span<const double> P_other) {
  const Equation& e = spec.equation(i);
  const Equation& o = spec.equation(1 - i);
  const auto& s = disc.eq(i);
  const double a1 = spec.a(0);
  const double a2 = spec.a(1);
  const ThetaMode mode = spec.modes.theta;
  double factor = 0.0;
  if (i == 0) {
    factor = o.model.theta_lower(o.f(a1, a2), mode);
  } else {
    const double arg = spec.modes.punder == PunderVariant::Notation ? o.f(a1, a2) : e.f(a1, a2);
    factor = o.model.theta_lower(arg, mode);
  }
  std::vector<double> g(s.p.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (s.p[k] == 0.0) continue;
    const double shifted = factor * P_other[k];
    g[k] = s.p[k] * (i == 0 ? e.f(a1, a2 + shifted) : e.f(a1 + shifted, a2));
  }
  return radial_transform(e.model, s.weight, g);
}

/// All functionals on one grid. Pbar and H exist only where (C2) holds.
struct FunctionalTable {
  RadialGrid grid;
  std::array<std::vector<double>, 2> P;
  std::array<std::vector<double>, 2> Punder;
  std::array<BarSeries, 2> Pbar;
  std::array<bool, 2> bar_available{false, false};
  ArgumentTable Z;
  std::array<std::optional<ArgumentTable>, 2> H;
};

inline FunctionalTable compute_functionals(const ProblemSpec& spec, const Discretization& disc,
                                           std::array<bool, 2> c2, double arg_cap) {
  FunctionalTable t;
  t.grid = disc.grid();
  for (int i = 0; i < 2; ++i) t.P[static_cast<std::size_t>(i)] = compute_P(spec, i, disc);
  t.Punder[0] = compute_Punder(spec, 0, disc, t.P[1]);
  t.Punder[1] = compute_Punder(spec, 1, disc, t.P[0]);
  t.Z = compute_Z(spec, arg_cap, spec.functionals.z_points);
  for (int i = 0; i < 2; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    t.bar_available[ii] = c2[ii];
    if (!c2[ii]) {
      t.Pbar[ii].values.assign(t.grid.size(), std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    t.Pbar[ii] = compute_Pbar(spec, i, disc, t.P[0], t.P[1], t.Z);
    t.H[ii] = compute_H(spec, i, arg_cap, spec.functionals.z_points);
  }
  return t;
}

inline FunctionalTable compute_functionals(const ProblemSpec& spec, const Discretization& disc,
                                           std::array<bool, 2> c2) {
  return compute_functionals(spec, disc, c2, spec.functionals.z_cap);
}

// ---------------------------------------------------------------------------
// Limits at infinity

enum class LimitTag { Diverges, Converges, Inconclusive };

inline std::string_view to_string(LimitTag t) {
  switch (t) {
    case LimitTag::Diverges: return "Diverges";
    case LimitTag::Converges: return "Converges";
    case LimitTag::Inconclusive: return "Inconclusive";
  }
  return "?";
}

struct LimitVerdict {
  LimitTag tag = LimitTag::Inconclusive;
  double value = 0.0;  // Converges: last probed value
  double err = 0.0;    // Converges: estimated remaining tail
  std::vector<std::pair<double, double>> evidence;  // (R_k, value)
  std::string note;

  bool diverges() const { return tag == LimitTag::Diverges; }
  bool converges() const { return tag == LimitTag::Converges; }
};

struct ProbeThresholds {
  double eps_c = 1e-3;
  double delta_d = 1.5;
  double eps_d = 0.05;
};

/// Three-way verdict from a probe sequence.
///
/// Converges: the last three relative increments are each < eps_c and
/// nonincreasing. Diverges: V_K / V_{K-2} >= delta_d, or the last three
/// increments are nondecreasing (relative slack 1e-6) with the last one above
/// eps_d V_K, or a value overflowed. With `lower_bound_only` the values may
/// undershoot the functional, so Converges is never returned.
inline LimitVerdict judge_limit(std::vector<std::pair<double, double>> evidence, const ProbeThresholds& th,
                                bool lower_bound_only = false) {
  LimitVerdict v;
  v.evidence = std::move(evidence);
  const auto& ev = v.evidence;
  for (const auto& [r, val] : ev) {
    if (std::isnan(val)) {
      v.note = "not a number at R = " + expr::detail::format_number(r);
      return v;
    }
    if (std::isinf(val)) {
      v.tag = LimitTag::Diverges;
      v.note = "overflow at R = " + expr::detail::format_number(r);
      return v;
    }
  }
  if (ev.size() < 4) {
    v.note = "probe schedule too short (" + std::to_string(ev.size()) + " values, need 4)";
    return v;
  }
  const std::size_t K = ev.size() - 1;
  const double VK = ev[K].second;
  auto inc = [&](std::size_t j) { return ev[j].second - ev[j - 1].second; };
  const double d1 = inc(K - 2);
  const double d2 = inc(K - 1);
  const double d3 = inc(K);
  if (ev[K - 2].second > 0.0 && VK / ev[K - 2].second >= th.delta_d) {
    v.tag = LimitTag::Diverges;
    v.note = "growth factor over the last two doublings";
    return v;
  }
  const double slack = 1e-6;
  if (d3 > 0.0 && d2 >= d1 * (1.0 - slack) && d3 >= d2 * (1.0 - slack) && d3 > th.eps_d * VK) {
    v.tag = LimitTag::Diverges;
    v.note = "nondecreasing increments";
    return v;
  }
  if (lower_bound_only) {
    v.note = "values are lower bounds (saturated inverse)";
    return v;
  }
  if (VK == 0.0 && d1 == 0.0 && d2 == 0.0 && d3 == 0.0) {
    v.tag = LimitTag::Converges;
    return v;
  }
  auto rel = [&](std::size_t j) { return std::abs(inc(j)) / std::max(std::abs(ev[j].second), 1e-300); };
  const double r1 = rel(K - 2);
  const double r2 = rel(K - 1);
  const double r3 = rel(K);
  if (r1 < th.eps_c && r2 < th.eps_c && r3 < th.eps_c && r2 <= r1 && r3 <= r2) {
    v.tag = LimitTag::Converges;
    v.value = VK;
    const double q = d2 > 0.0 ? d3 / d2 : 0.0;
    v.err = q < 1.0 ? d3 * q / (1.0 - q) : d3;
    v.err = std::max(v.err, std::abs(d3));
    return v;
  }
  v.note = "no plateau or growth pattern";
  return v;
}

enum class Functional { P1, P2, Pbar1, Pbar2, Punder1, Punder2, H1, H2, Z };

inline std::string_view to_string(Functional f) {
  switch (f) {
    case Functional::P1: return "P1";
    case Functional::P2: return "P2";
    case Functional::Pbar1: return "Pbar1";
    case Functional::Pbar2: return "Pbar2";
    case Functional::Punder1: return "Punder1";
    case Functional::Punder2: return "Punder2";
    case Functional::H1: return "H1";
    case Functional::H2: return "H2";
    case Functional::Z: return "Z";
  }
  return "?";
}

/// Verdicts for every functional limit, plus the tables they were read from.
struct ProbeResult {
  std::vector<double> radii;  // R_k
  std::array<LimitVerdict, 2> P, Pbar, Punder, H;
  LimitVerdict Z;
  std::optional<FunctionalTable> tables;  // on the probe grid; empty if computation failed

  const LimitVerdict& get(Functional f) const {
    switch (f) {
      case Functional::P1: return P[0];
      case Functional::P2: return P[1];
      case Functional::Pbar1: return Pbar[0];
      case Functional::Pbar2: return Pbar[1];
      case Functional::Punder1: return Punder[0];
      case Functional::Punder2: return Punder[1];
      case Functional::H1: return H[0];
      case Functional::H2: return H[1];
      case Functional::Z: return Z;
    }
    return Z;
  }
};

/// Values at R_k = R0 2^k, k = 0..K, read from one graded grid on [0, R_K].
/// H_i is sampled at a_i 2^{k+1} and Z at (a_1 + a_2) 2^{k+1}.
inline ProbeResult probe_all(const ProblemSpec& spec, std::array<bool, 2> c2) {
  const auto& po = spec.probe;
  if (po.K < 0) throw InputError("probe K must be >= 0");
  ProbeResult res;
  const ProbeThresholds th{po.eps_c, po.delta_d, po.eps_d};
  const double R0 = spec.probe_R0();
  if (!(R0 > 0.0)) throw InputError("probe R0 must be positive");
  for (int k = 0; k <= po.K; ++k) res.radii.push_back(std::ldexp(R0, k));
  const double top = std::ldexp(1.0, po.K + 1);
  const double arg_cap = std::max(spec.functionals.z_cap, 2.0 * top * std::max({spec.a(0), spec.a(1), spec.a(0) + spec.a(1)}));

  auto fail_all = [&](const std::string& why) {
    for (auto* v : {&res.P[0], &res.P[1], &res.Pbar[0], &res.Pbar[1], &res.Punder[0], &res.Punder[1], &res.H[0],
                    &res.H[1], &res.Z}) {
      *v = {};
      v->note = why;
    }
  };
  try {
    const Discretization disc(spec, RadialGrid(res.radii.back(), po.n, po.grading));
    res.tables = compute_functionals(spec, disc, c2, arg_cap);
  } catch (const Error& e) {
    fail_all(std::string("computation failed: ") + e.what());
    return res;
  }
  const FunctionalTable& t = *res.tables;
  auto sample = [&](std::span<const double> values) {
    std::vector<std::pair<double, double>> ev;
    for (double R : res.radii) ev.emplace_back(R, t.grid.interpolate(values, R));
    return ev;
  };
  auto sample_args = [&](const ArgumentTable& table, double start) {
    std::vector<std::pair<double, double>> ev;
    for (int k = 0; k <= po.K; ++k) {
      const double x = std::ldexp(start, k + 1);
      ev.emplace_back(x, table(x));
    }
    return ev;
  };
  for (std::size_t i = 0; i < 2; ++i) {
    res.P[i] = judge_limit(sample(t.P[i]), th);
    res.Punder[i] = judge_limit(sample(t.Punder[i]), th);
    if (t.bar_available[i]) {
      const auto& bar = t.Pbar[i];
      const bool lower = bar.saturated_from && t.grid[*bar.saturated_from] <= res.radii.back();
      res.Pbar[i] = judge_limit(sample(bar.values), th, lower);
      res.H[i] = judge_limit(sample_args(*t.H[i], spec.a(static_cast<int>(i))), th);
    } else {
      res.Pbar[i].note = "no (C2) comparison pair";
      res.H[i].note = "no (C2) comparison pair";
    }
  }
  res.Z = judge_limit(sample_args(t.Z, spec.a(0) + spec.a(1)), th);
  return res;
}

/// Verdict for a single functional limit.
inline LimitVerdict probe_limit(const ProblemSpec& spec, Functional f, std::array<bool, 2> c2 = {true, true}) {
  for (int i = 0; i < 2; ++i) c2[static_cast<std::size_t>(i)] = c2[static_cast<std::size_t>(i)] && spec.equation(i).f.has_decomposition();
  return probe_all(spec, c2).get(f);
}

}  // namespace radphi
