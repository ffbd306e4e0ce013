#pragma once

// Problem instances for the radial system
//   (r^{N-1} e^{int sigma_i} psi_i(w_i'))' = r^{N-1} e^{int sigma_i} p_i(r) f_i(u, v),
// with w_1 = u, w_2 = v, u(0) = a_1, v(0) = a_2.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "radphi/error.hpp"
#include "radphi/expr.hpp"
#include "radphi/models.hpp"
#include "radphi/quadrature.hpp"

namespace radphi {

/// Coefficient expression over r.
inline expr::Expr coefficient(std::string_view text, const std::map<std::string, double>* constants = nullptr) {
  return expr::parse(text, {"r"}, constants);
}

/// f(u, v) together with its comparison pair (h, fbar):
///   f(t, t s) <= h(t, t) fbar(s)  for t >= M a, s >= 1.
class Nonlinearity {
 public:
  enum class Kind { PowerProduct, Custom };

  Nonlinearity() = default;

  /// f(u, v) = u^beta v^alpha with beta, alpha >= 0, not both zero.
  static Nonlinearity power(double beta, double alpha) {
    if (!(beta >= 0.0 && alpha >= 0.0) || !std::isfinite(beta) || !std::isfinite(alpha)) {
      throw InputError("power nonlinearity needs finite exponents >= 0");
    }
    if (beta == 0.0 && alpha == 0.0) throw InputError("power nonlinearity needs alpha^2 + beta^2 != 0");
    Nonlinearity n;
    n.kind_ = Kind::PowerProduct;
    n.beta_ = beta;
    n.alpha_ = alpha;
    return n;
  }

  /// f over (u, v); h over (t1, t2) and fbar over (s) are optional.
  static Nonlinearity custom(expr::Expr f, std::optional<expr::Expr> h = std::nullopt,
                             std::optional<expr::Expr> fbar = std::nullopt) {
    if (f.variables() != std::vector<std::string>{"u", "v"}) throw InputError("f must be declared over (u, v)");
    if (h.has_value() != fbar.has_value()) throw InputError("h and fbar must be given together");
    Nonlinearity n;
    n.kind_ = Kind::Custom;
    n.f_ = std::move(f);
    if (h) {
      if (h->variables() != std::vector<std::string>{"t1", "t2"}) throw InputError("h must be declared over (t1, t2)");
      if (fbar->variables() != std::vector<std::string>{"s"}) throw InputError("fbar must be declared over (s)");
      n.h_ = std::move(*h);
      n.fbar_ = std::move(*fbar);
    }
    return n;
  }

  static Nonlinearity custom(std::string_view f, std::optional<std::string_view> h = std::nullopt,
                             std::optional<std::string_view> fbar = std::nullopt,
                             const std::map<std::string, double>* constants = nullptr) {
    std::optional<expr::Expr> he, fe;
    if (h) he = expr::parse(*h, {"t1", "t2"}, constants);
    if (fbar) fe = expr::parse(*fbar, {"s"}, constants);
    return custom(expr::parse(f, {"u", "v"}, constants), std::move(he), std::move(fe));
  }

  Kind kind() const { return kind_; }
  double beta() const { return beta_; }
  double alpha() const { return alpha_; }
  const expr::Expr& f_expr() const { return f_; }

  double operator()(double u, double v) const {
    if (kind_ == Kind::PowerProduct) return std::pow(u, beta_) * std::pow(v, alpha_);
    return f_(u, v);
  }

  bool has_decomposition() const { return kind_ == Kind::PowerProduct || !h_.empty(); }

  // The comparison pair is oriented by equation: t1 is the equation's own
  // unknown (u for i = 0, v for i = 1) and s scales the other one, so
  // f_1(t, t s) <= h_1(t, t) fbar_1(s) and f_2(t s, t) <= h_2(t, t) fbar_2(s).

  /// h(t1, t2) of equation i; for a power product own^e_own * other^e_other.
  double h(double t1, double t2, int i = 0) const {
    if (kind_ == Kind::PowerProduct) {
      return i == 0 ? std::pow(t1, beta_) * std::pow(t2, alpha_) : std::pow(t1, alpha_) * std::pow(t2, beta_);
    }
    if (h_.empty()) throw InputError("nonlinearity has no (h, fbar) decomposition");
    return h_(t1, t2);
  }

  /// fbar(s) of equation i; for a power product s raised to the other unknown's exponent.
  double fbar(double s, int i = 0) const {
    if (kind_ == Kind::PowerProduct) return std::pow(s, i == 0 ? alpha_ : beta_);
    if (fbar_.empty()) throw InputError("nonlinearity has no (h, fbar) decomposition");
    return fbar_(s);
  }

  /// f with equation i's own unknown first.
  double oriented(double own, double other, int i) const { return i == 0 ? (*this)(own, other) : (*this)(other, own); }

  std::string describe() const {
    if (kind_ == Kind::PowerProduct) {
      return "u^" + expr::detail::format_number(beta_) + " * v^" + expr::detail::format_number(alpha_);
    }
    std::string s = f_.to_string();
    if (!h_.empty()) s += " [h = " + h_.to_string() + ", fbar = " + fbar_.to_string() + "]";
    return s;
  }

 private:
  Kind kind_ = Kind::PowerProduct;
  double beta_ = 0.0;
  double alpha_ = 1.0;
  expr::Expr f_, h_, fbar_;
};

/// Comparison pair of a power product: h(t, t) = t^{alpha+beta} and fbar(s) = s^alpha
/// for equation 1 (s^beta for equation 2), so the pair holds with equality.
struct PowerDecomposition {
  double h_exponent = 0.0;
  double fbar_exponent = 0.0;
  double h_diag(double t) const { return std::pow(t, h_exponent); }
  double fbar(double s) const { return std::pow(s, fbar_exponent); }
};

inline PowerDecomposition auto_decompose(const Nonlinearity& f, int i = 0) {
  if (f.kind() != Nonlinearity::Kind::PowerProduct) throw InputError("auto_decompose needs a power product");
  return {f.alpha() + f.beta(), i == 0 ? f.alpha() : f.beta()};
}

/// One equation of the system.
struct Equation {
  PhiModel model = PhiModel::e5(2.0);
  expr::Expr sigma = coefficient("0");
  expr::Expr p = coefficient("1");
  Nonlinearity f = Nonlinearity::power(0.0, 1.0);
  double a = 1.0;
  std::optional<double> M;  // unset: max(1, 1/a)

  double M_value() const { return M.value_or(std::max(1.0, 1.0 / a)); }
};

enum class PunderVariant { Notation, Proof };

inline std::string_view to_string(PunderVariant v) { return v == PunderVariant::Notation ? "notation" : "proof"; }

struct GridOptions {
  double R = 10.0;
  int n = 4000;
  double grading = 1.0;
};

struct IterationOptions {
  double tol = 1e-10;
  int max_iter = 200;
  double overflow_guard = 1e300;
  double mono_eps = 1e-12;
};

/// Limit probe: values at R_k = R0 2^k, k = 0..K, on one graded grid.
struct ProbeOptions {
  std::optional<double> R0;  // unset: grid radius
  int K = 16;
  double eps_c = 1e-3;
  double delta_d = 1.5;
  double eps_d = 0.05;
  int n = 20000;
  double grading = 3.0;
};

struct FunctionalOptions {
  double z_cap = 1e8;
  int z_points = 4096;
};

/// Sampling used by `validate`.
struct CheckOptions {
  int points = 32;
  double lo = 1e-3;  // C1 box [lo, hi]^2
  double hi = 1e3;
  double S = 1e3;    // C2: s in [1, S]
  double T = 1e3;    // C2: t in [M a, T]
  double rel_tol = 1e-9;
};

struct ModeOptions {
  ThetaMode theta = ThetaMode::O4;
  PunderVariant punder = PunderVariant::Notation;
};

struct ProblemSpec {
  int N = 3;
  std::array<Equation, 2> eq{};
  GridOptions grid{};
  IterationOptions iteration{};
  ProbeOptions probe{};
  FunctionalOptions functionals{};
  CheckOptions checks{};
  ModeOptions modes{};

  double a(int i) const { return eq[static_cast<std::size_t>(i)].a; }
  const Equation& equation(int i) const { return eq[static_cast<std::size_t>(i)]; }
  double probe_R0() const { return probe.R0.value_or(grid.R); }
};

struct ConditionResult {
  std::string name;     // "structure", "P1", "C1", "C2"
  int equation = -1;    // 0 or 1; -1 for whole-problem checks
  bool passed = true;
  std::string detail;   // failure description
  std::string witness;  // sample point of the first failure
};

struct ValidationReport {
  std::vector<ConditionResult> conditions;

  /// Structure, P1 and C1 hold: the solver may run.
  bool solvable() const {
    return std::all_of(conditions.begin(), conditions.end(),
                       [](const ConditionResult& c) { return c.passed || c.name == "C2"; });
  }
  bool all_passed() const {
    return std::all_of(conditions.begin(), conditions.end(), [](const ConditionResult& c) { return c.passed; });
  }
  /// C2 holds for equation i (enables the H and Pbar functionals).
  bool c2(int i) const {
    for (const auto& c : conditions) {
      if (c.name == "C2" && c.equation == i) return c.passed;
    }
    return false;
  }
  const ConditionResult* first_failure() const {
    for (const auto& c : conditions) {
      if (!c.passed) return &c;
    }
    return nullptr;
  }
};

namespace detail {

inline std::vector<double> log_points(double lo, double hi, int count) {
  std::vector<double> pts(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    pts[static_cast<std::size_t>(j)] =
        count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(j) / (count - 1));
  }
  if (count > 1) pts.back() = hi;
  return pts;
}

inline std::string point(std::initializer_list<std::pair<const char*, double>> coords) {
  std::string s;
  for (const auto& [name, value] : coords) {
    if (!s.empty()) s += ", ";
    s += name;
    s += '=';
    s += expr::detail::format_number(value);
  }
  return s;
}

inline ConditionResult check_structure(const ProblemSpec& spec) {
  ConditionResult c{"structure", -1, true, {}, {}};
  auto fail = [&](std::string what) {
    if (c.passed) {
      c.passed = false;
      c.detail = std::move(what);
    }
  };
  if (spec.N < 3) fail("dimension N must be >= 3, got " + std::to_string(spec.N));
  for (int i = 0; i < 2; ++i) {
    const Equation& e = spec.equation(i);
    const std::string tag = "equation " + std::to_string(i + 1);
    if (!(e.a > 0.0) || !std::isfinite(e.a)) fail(tag + ": a must be positive");
    else if (!(e.M_value() >= std::max(1.0, 1.0 / e.a))) fail(tag + ": M must be >= max(1, 1/a)");
  }
  return c;
}

inline ConditionResult check_p1(const ProblemSpec& spec, int i, const RadialGrid& grid) {
  const Equation& e = spec.equation(i);
  ConditionResult c{"P1", i, true, {}, {}};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double r = grid[k];
    const double sig = e.sigma(r);
    const double p = e.p(r);
    if (!(sig >= 0.0) || !std::isfinite(sig)) {
      c = {"P1", i, false, "sigma is negative or not finite (" + expr::detail::format_number(sig) + ")",
           point({{"r", r}})};
      return c;
    }
    if (!(p >= 0.0) || !std::isfinite(p)) {
      c = {"P1", i, false, "p is negative or not finite (" + expr::detail::format_number(p) + ")",
           point({{"r", r}})};
      return c;
    }
  }
  return c;
}

inline ConditionResult check_c1(const ProblemSpec& spec, int i) {
  const Nonlinearity& f = spec.equation(i).f;
  const auto& o = spec.checks;
  const auto pts = log_points(o.lo, o.hi, o.points);
  const std::size_t n = pts.size();
  std::vector<double> vals(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) vals[a * n + b] = f(pts[a], pts[b]);
  }
  // Monotonicity is reported ahead of positivity: it is the more specific failure.
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const double val = vals[a * n + b];
      const double slack = 1e-12 * std::abs(val);
      if (b > 0 && val < vals[a * n + b - 1] - slack) {
        return {"C1", i, false, "f decreases in v", point({{"u", pts[a]}, {"v", pts[b]}})};
      }
      if (a > 0 && val < vals[(a - 1) * n + b] - slack) {
        return {"C1", i, false, "f decreases in u", point({{"u", pts[a]}, {"v", pts[b]}})};
      }
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const double val = vals[a * n + b];
      if (!(val > 0.0) || !std::isfinite(val)) {
        return {"C1", i, false, "f is not positive and finite (" + expr::detail::format_number(val) + ")",
                point({{"u", pts[a]}, {"v", pts[b]}})};
      }
    }
  }
  return {"C1", i, true, {}, {}};
}

inline ConditionResult check_c2(const ProblemSpec& spec, int i) {
  const Equation& e = spec.equation(i);
  const auto& o = spec.checks;
  if (!e.f.has_decomposition()) return {"C2", i, false, "no (h, fbar) pair supplied", {}};
  const double t0 = e.M_value() * e.a;
  const double t1 = std::max(o.T, 10.0 * t0);
  const auto ts = log_points(t0, t1, o.points);
  const auto ss = log_points(1.0, o.S, o.points);
  for (double t : ts) {
    const double ht = e.f.h(t, t, i);
    for (double s : ss) {
      const double lhs = e.f.oriented(t, t * s, i);
      const double rhs = ht * e.f.fbar(s, i);
      if (!std::isfinite(lhs) || !std::isfinite(rhs) || !(rhs > 0.0) || lhs > rhs * (1.0 + o.rel_tol)) {
        return {"C2", i, false,
                std::string(i == 0 ? "f(t, t s) = " : "f(t s, t) = ") + expr::detail::format_number(lhs) +
                    " exceeds h(t, t) fbar(s) = " +
                    expr::detail::format_number(rhs),
                point({{"t", t}, {"s", s}})};
      }
    }
  }
  return {"C2", i, true, {}, {}};
}

}  // namespace detail

/// Sampled check of the structural constraints, (P1) on the solve grid,
/// (C1) on a log box and (C2) on t in [M a, T], s in [1, S].
/// Expression domain errors propagate as EvalError.
inline ValidationReport validate(const ProblemSpec& spec) {
  ValidationReport rep;
  rep.conditions.push_back(detail::check_structure(spec));
  const RadialGrid grid(spec.grid.R, spec.grid.n, spec.grid.grading);
  for (int i = 0; i < 2; ++i) rep.conditions.push_back(detail::check_p1(spec, i, grid));
  for (int i = 0; i < 2; ++i) rep.conditions.push_back(detail::check_c1(spec, i));
  for (int i = 0; i < 2; ++i) {
    if (rep.conditions.front().passed) rep.conditions.push_back(detail::check_c2(spec, i));
    else rep.conditions.push_back({"C2", i, false, "skipped: structure check failed", {}});
  }
  return rep;
}

}  // namespace radphi
