#pragma once

// Seeded random problems and the invariant checks run over them. Shared by
// the Catch2 property suite and the acceptance binary.

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "radphi/expr.hpp"
#include "radphi/solver.hpp"

namespace radphi::gen {

/// Case and failure counts of one property; `first` describes the first failure.
struct Tally {
  int cases = 0;
  int failures = 0;
  std::string first;

  template <class Describe>
  void record(bool ok, Describe&& describe) {
    ++cases;
    if (ok) return;
    if (failures++ == 0) first = describe();
  }
  bool ok(int min_cases = 500) const { return failures == 0 && cases >= min_cases; }
};

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

inline std::string num(double v) { return expr::detail::format_number(v); }

/// A member of E1..E5 with parameters inside the family's range.
inline PhiModel random_model(std::mt19937_64& rng, Family fam) {
  switch (fam) {
    case Family::E1: return PhiModel::family(Family::E1, uniform(rng, 0.6, 3.0));
    case Family::E2: return PhiModel::family(Family::E2, uniform(rng, 1.2, 3.0), uniform(rng, 0.3, 2.0));
    case Family::E3: return PhiModel::family(Family::E3, uniform(rng, 0.0, 1.0), uniform(rng, 0.3, 2.0));
    case Family::E4: {
      const double p = uniform(rng, 1.2, 3.0);
      return PhiModel::family(Family::E4, p, p + uniform(rng, 0.1, 2.0));
    }
    default: return PhiModel::e5(uniform(rng, 1.2, 4.0));
  }
}

inline PhiModel random_model(std::mt19937_64& rng) {
  constexpr Family all[] = {Family::E1, Family::E2, Family::E3, Family::E4, Family::E5};
  return random_model(rng, all[std::uniform_int_distribution<int>(0, 4)(rng)]);
}

/// Sampled growth constants are only valid on the sampling window.
inline bool analytic_constants(const PhiModel& m) {
  const Family f = m.family_tag();
  return f == Family::E1 || f == Family::E4 || f == Family::E5;
}

/// Power-product problem with decaying weights on a 120-node grid.
inline ProblemSpec random_problem(std::mt19937_64& rng, bool e5_only) {
  ProblemSpec spec;
  spec.N = std::uniform_int_distribution<int>(3, 5)(rng);
  spec.grid = {uniform(rng, 0.5, 2.5), 120, uniform(rng, 0.0, 1.0) < 0.5 ? 1.0 : 1.5};
  for (auto& e : spec.eq) {
    e.model = e5_only ? PhiModel::e5(uniform(rng, 1.5, 3.0)) : random_model(rng);
    const double beta = uniform(rng, 0.0, 1.0);
    double alpha = uniform(rng, 0.0, 1.0);
    if (beta + alpha < 0.05) alpha = 0.5;
    e.f = Nonlinearity::power(beta, alpha);
    e.a = log_uniform(rng, 0.2, 5.0);
    const double c = log_uniform(rng, 0.01, 1.0);
    const double gamma = uniform(rng, 0.0, 4.0);
    e.p = coefficient(num(c) + "*(1+r)^(-" + num(gamma) + ")");
    e.sigma = coefficient(num(uniform(rng, 0.0, 1.0) < 0.5 ? 0.0 : uniform(rng, 0.0, 2.0)));
  }
  return spec;
}

inline std::string describe(const ProblemSpec& spec) {
  std::ostringstream s;
  s << "N=" << spec.N << " R=" << spec.grid.R << " grading=" << spec.grid.grading;
  for (const auto& e : spec.eq) {
    s << " | " << e.model.describe() << " f=" << e.f.describe() << " a=" << e.a << " p=" << e.p.to_string()
      << " sigma=" << e.sigma.to_string();
  }
  return s.str();
}

// ---------------------------------------------------------------------------
// Properties

/// psi_inverse(psi(t)) == t to 1e-9 relative on 200 log-spaced t in [1e-6, 1e6].
inline Tally psi_round_trip(unsigned seed, int models) {
  std::mt19937_64 rng(seed);
  Tally t;
  for (int m = 0; m < models; ++m) {
    const auto model = random_model(rng);
    for (int j = 0; j < 200; ++j) {
      const double x = 1e-6 * std::pow(1e12, j / 199.0);
      const double back = model.psi_inverse(model.psi(x));
      t.record(std::abs(back - x) <= 1e-9 * x, [&] { return model.describe() + " t=" + num(x) + " -> " + num(back); });
    }
  }
  return t;
}

/// thl(s1) psi^{-1}(s2) <= psi^{-1}(s1 s2) <= thu(s1) psi^{-1}(s2) for pairs in (1e-3, 1e3)^2.
inline Tally comparison_inequality(unsigned seed, Family fam, int pairs, ThetaMode mode = ThetaMode::O4) {
  std::mt19937_64 rng(seed);
  Tally t;
  PhiModel model = random_model(rng, fam);
  for (int j = 0; j < pairs; ++j) {
    if (j % 100 == 0) model = random_model(rng, fam);
    const double s1 = log_uniform(rng, 1e-3, 1e3);
    const double s2 = log_uniform(rng, 1e-3, 1e3);
    const double x = model.psi_inverse(s2);
    const double y = model.psi_inverse(s1 * s2);
    if (!analytic_constants(model) && (std::min(x, y) < 1e-6 || std::max(x, y) > 1e6)) continue;
    const double lo = model.theta_lower(s1, mode) * x;
    const double hi = model.theta_upper(s1, mode) * x;
    t.record(lo <= y * (1.0 + 1e-9) && y <= hi * (1.0 + 1e-9), [&] {
      return model.describe() + " s1=" + num(s1) + " s2=" + num(s2) + ": " + num(lo) + " <= " + num(y) + " <= " +
             num(hi);
    });
  }
  return t;
}

/// Every iterate dominates its predecessor, and every solve is radially nondecreasing.
inline Tally monotone_iterates(unsigned seed, int problems) {
  std::mt19937_64 rng(seed);
  Tally t;
  for (int k = 0; k < problems; ++k) {
    auto spec = random_problem(rng, k % 2 == 0);
    spec.iteration.max_iter = 60;
    const Discretization disc(spec);
    SolutionPair prev = initial_pair(spec, disc.grid());
    bool ok = true;
    for (int n = 0; n < 6 && ok; ++n) {
      const SolutionPair next = iterate_once(spec, disc, prev);
      const std::size_t m = std::min(next.active(), prev.active());
      for (std::size_t j = 0; j < m; ++j) {
        ok = ok && next.u[j] >= prev.u[j] - 1e-12 * (1.0 + prev.u[j]);
        ok = ok && next.v[j] >= prev.v[j] - 1e-12 * (1.0 + prev.v[j]);
      }
      prev = next;
    }
    const auto res = solve(spec, disc);
    ok = ok && res.diagnostics.monotone_failures == 0;
    const auto& sol = res.solution;
    for (std::size_t j = 1; j < sol.active(); ++j) ok = ok && sol.u[j] >= sol.u[j - 1] && sol.v[j] >= sol.v[j - 1];
    t.record(ok, [&] { return describe(spec); });
  }
  return t;
}

/// The five a-priori bounds hold at every checked node to 1e-6 relative.
inline Tally bounds_hold(unsigned seed, int problems) {
  std::mt19937_64 rng(seed);
  Tally t;
  for (int k = 0; k < problems; ++k) {
    auto spec = random_problem(rng, k % 2 == 0);
    spec.functionals.z_points = 1024;
    const Discretization disc(spec);
    const auto res = solve(spec, disc);
    const auto tables = compute_functionals(spec, disc, {true, true});
    const auto rep = verify_bounds(spec, res.solution, tables, 1e-6);
    std::string bad;
    for (const auto& r : rep.records) {
      if (!r.applicable || !r.passed) bad += std::string(to_string(r.id)) + " (" + num(r.max_relative) + ") ";
    }
    t.record(bad.empty(), [&] { return bad + "for " + describe(spec); });
  }
  return t;
}

/// All five functionals against a direct O(n^2) nested-quadrature oracle at n = 200.
/// E5 models give the oracle the closed form psi^{-1}(s) = s^{1/(p-1)}.
inline Tally functionals_match_oracle(unsigned seed, int problems) {
  std::mt19937_64 rng(seed);
  Tally t;
  for (int k = 0; k < problems; ++k) {
    ProblemSpec spec;
    spec.N = std::uniform_int_distribution<int>(3, 5)(rng);
    spec.grid = {uniform(rng, 0.5, 2.0), 200, 1.0};
    double pexp[2], beta[2], alpha[2], sig[2], c[2];
    for (int i = 0; i < 2; ++i) {
      auto& e = spec.eq[static_cast<std::size_t>(i)];
      pexp[i] = uniform(rng, 1.5, 3.0);
      // alpha + beta <= p - 1 keeps Z unbounded, so Z^{-1} stays below its cap.
      const double budget = pexp[i] - 1.0;
      beta[i] = uniform(rng, 0.0, budget);
      alpha[i] = uniform(rng, 0.0, budget - beta[i]);
      if (beta[i] + alpha[i] < 0.05) alpha[i] = 0.05;
      sig[i] = uniform(rng, 0.0, 1.0);
      c[i] = uniform(rng, 0.1, 1.0);
      e.model = PhiModel::e5(pexp[i]);
      e.f = Nonlinearity::power(beta[i], alpha[i]);
      e.a = uniform(rng, 0.5, 2.0);
      e.sigma = coefficient(num(sig[i]));
      e.p = coefficient(num(c[i]));
    }
    const Discretization disc(spec);
    const auto tab = compute_functionals(spec, disc, {true, true});
    const std::vector<double> r = disc.grid().nodes();
    const double a1 = spec.a(0);
    const double a2 = spec.a(1);
    auto f = [&](int i, double u, double v) { return std::pow(u, beta[i]) * std::pow(v, alpha[i]); };
    auto theta = [&](int i, double x) { return std::pow(x, 1.0 / (pexp[i] - 1.0)); };

    std::vector<double> P[2];
    oracle::NestedOracle nest[2];
    for (int i = 0; i < 2; ++i) {
      const double s = sig[i];
      const double q = 1.0 / (pexp[i] - 1.0);
      nest[i] = {spec.N, [s](double x) { return s * x; }, [q](double x) { return std::pow(x, q); }};
      P[i] = nest[i](r, std::vector<double>(r.size(), c[i]));
    }
    const oracle::MonotoneTable Z([&](double x) { return 1.0 / (theta(0, f(0, x, x)) + theta(1, f(1, x, x))); },
                                  a1 + a2, 1e8, 3000);
    std::string bad;
    auto expect = [&](bool ok, const std::string& what) {
      if (!ok) bad += what + " ";
    };
    for (int i = 0; i < 2; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      const std::string tag = std::to_string(i + 1);
      std::vector<double> gbar(r.size()), gunder(r.size());
      for (std::size_t j = 0; j < r.size(); ++j) {
        gbar[j] = c[i] * std::pow(1.0 + Z.inverse(P[0][j] + P[1][j]), i == 0 ? alpha[0] : beta[1]);
        gunder[j] = i == 0 ? c[0] * f(0, a1, a2 + theta(1, f(1, a1, a2)) * P[1][j])
                           : c[1] * f(1, a1 + theta(0, f(0, a1, a2)) * P[0][j], a2);
      }
      const double eP = oracle::sup_relative(tab.P[ii], P[i]);
      const double eBar = oracle::sup_relative(tab.Pbar[ii].values, nest[i](r, gbar));
      const double eUnder = oracle::sup_relative(tab.Punder[ii], nest[i](r, gunder));
      expect(eP <= 1e-3, "P" + tag + " " + num(eP));
      expect(eBar <= 1e-3, "Pbar" + tag + " " + num(eBar));
      expect(eUnder <= 1e-3, "Punder" + tag + " " + num(eUnder));
      const double a = spec.a(i);
      const double M = spec.equation(i).M_value();
      // The other unknown is scaled by M: h_1(t, M t) = f_1(t, M t), h_2(t, M t) = f_2(M t, t).
      const oracle::MonotoneTable H(
          [&](double x) { return 1.0 / theta(i, i == 0 ? f(0, x, M * x) : f(1, M * x, x)); }, a, 1e8, 3000);
      for (double x : {2.0 * a, 10.0 * a, 1000.0 * a}) {
        const double got = (*tab.H[ii])(x);
        expect(std::abs(got - H.at(x)) <= 1e-3 * H.at(x), "H" + tag + "(" + num(x) + ") " + num(got));
      }
      for (std::size_t j = 1; j < r.size(); ++j) {
        expect(tab.P[ii][j] >= tab.P[ii][j - 1] && tab.Pbar[ii].values[j] >= tab.Pbar[ii].values[j - 1] &&
                   tab.Punder[ii][j] >= tab.Punder[ii][j - 1],
               "monotone" + tag);
      }
    }
    for (double x : {1.5 * (a1 + a2), 10.0 * (a1 + a2), 1e4 * (a1 + a2)}) {
      const double got = tab.Z(x);
      expect(std::abs(got - Z.at(x)) <= 1e-3 * Z.at(x), "Z(" + num(x) + ") " + num(got));
      const double back = tab.Z.inverse(got).value;
      expect(std::abs(back - x) <= 1e-6 * x, "Zinv(Z(" + num(x) + ")) " + num(back));
    }
    t.record(bad.empty(), [&] { return bad + "for " + describe(spec); });
  }
  return t;
}

/// Fully parenthesised random expression over u and v.
inline std::string random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, 9);
  const int choice = depth <= 0 ? pick(rng) % 3 : pick(rng);
  auto sub = [&] { return random_expr(rng, depth - 1); };
  auto bin = [&](const char* op) {
    std::string lhs = sub();
    return "(" + lhs + op + sub() + ")";
  };
  switch (choice) {
    case 0: return "u";
    case 1: return "v";
    case 2: return num(std::round(uniform(rng, 0.1, 5.0) * 100.0) / 100.0);
    case 3: return bin(" + ");
    case 4: return bin(" - ");
    case 5: return bin(" * ");
    case 6: return bin(" / ");
    case 7: {
      std::string lhs = sub();
      return "(" + lhs + " ^ " + random_expr(rng, 0) + ")";
    }
    case 8: return "(-" + sub() + ")";
    default: {
      static const char* fns[] = {"exp", "sqrt", "ln", "sinh", "asinh"};
      const std::string fn = fns[pick(rng) % 5];
      return fn + "(" + sub() + ")";
    }
  }
}

/// Minimal printing of a fully parenthesised expression evaluates bit-identically.
inline Tally precedence_corpus(unsigned seed, int expressions) {
  std::mt19937_64 rng(seed);
  Tally t;
  for (int k = 0; k < expressions; ++k) {
    const std::string src = random_expr(rng, 4);
    const auto e = expr::parse(src, {"u", "v"});
    const std::string printed = e.to_string();
    const auto back = expr::parse(printed, {"u", "v"});
    bool ok = printed.size() <= src.size();
    for (int j = 0; j < 50; ++j) {
      const double u = uniform(rng, 0.1, 3.0);
      const double v = uniform(rng, 0.1, 3.0);
      double a = 0.0;
      double b = 0.0;
      bool a_fail = false;
      bool b_fail = false;
      try {
        a = e(u, v);
      } catch (const EvalError&) {
        a_fail = true;
      }
      try {
        b = back(u, v);
      } catch (const EvalError&) {
        b_fail = true;
      }
      ok = ok && a_fail == b_fail && (a == b || (std::isnan(a) && std::isnan(b)));
    }
    t.record(ok, [&] { return src + " printed as " + printed; });
  }
  return t;
}

/// Malformed inputs with the offset each must be rejected at (-1: any offset).
inline const std::vector<std::pair<std::string, long>>& malformed_corpus() {
  static const std::vector<std::pair<std::string, long>> corpus = {
      {"u +", 3},     {"", 0},         {"u * * v", 4}, {"w", 0},      {"exp(u, v)", -1}, {"min(u)", -1},
      {"(u + v", 6},  {"u v", 2},      {"foo(u)", 0},  {"2u", -1},    {")", 0},          {"u ^", 3},
      {"1..2", -1},   {"exp()", -1},   {"u $ v", 2},   {"((u)", 4},   {"u)", 1},         {"max(u,)", -1},
  };
  return corpus;
}

inline Tally malformed_rejected() {
  Tally t;
  for (const auto& [text, expected] : malformed_corpus()) {
    long got = -2;
    try {
      expr::parse(text, {"u", "v"});
    } catch (const ParseError& e) {
      got = static_cast<long>(e.position());
    }
    const bool ok = got >= 0 && (expected < 0 || got == expected);
    t.record(ok, [&] { return "\"" + text + "\" rejected at " + std::to_string(got); });
  }
  return t;
}

}  // namespace radphi::gen
