#pragma once

// Growth models phi for the phi-Laplacian div(phi(|grad w|) grad w).
//
// For every model:
//   Phi(t) = int_0^t s phi(s) ds,   psi(t) = t phi(t) = Phi'(t),
// psi is strictly increasing from psi(0) = 0, and psi^{-1} is the map that
// turns the radial flux back into a derivative.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "radphi/error.hpp"
#include "radphi/expr.hpp"
#include "radphi/quadrature.hpp"

namespace radphi {

enum class Family { E1, E2, E3, E4, E5, Custom };

/// Source of the exponents in the comparison functions theta.
/// `O4` uses (a0, a1) from the bound on t Phi''/Phi'; `O3Literal` uses
/// (l, m) from the bound on t Phi'/Phi.
enum class ThetaMode { O4, O3Literal };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::E1: return "E1";
    case Family::E2: return "E2";
    case Family::E3: return "E3";
    case Family::E4: return "E4";
    case Family::E5: return "E5";
    case Family::Custom: return "custom";
  }
  return "?";
}

inline std::optional<Family> family_from_string(std::string_view s) {
  if (s == "E1") return Family::E1;
  if (s == "E2") return Family::E2;
  if (s == "E3") return Family::E3;
  if (s == "E4") return Family::E4;
  if (s == "E5") return Family::E5;
  if (s == "custom" || s == "Custom") return Family::Custom;
  return std::nullopt;
}

inline std::string_view to_string(ThetaMode m) { return m == ThetaMode::O4 ? "o4" : "o3"; }

/// Bounds l <= t Phi'/Phi <= m and a0 <= t Phi''/Phi' <= a1.
struct GrowthConstants {
  double l = 0.0;
  double m = 0.0;
  double a0 = 0.0;
  double a1 = 0.0;
};

/// Sampling window used when the constants have no closed form.
struct GrowthWindow {
  double t_lo = 1e-6;
  double t_hi = 1e6;
  int samples = 256;
  double margin = 0.01;
};

class PhiModel;
GrowthConstants growth_constants(const PhiModel& model, double t_lo, double t_hi, int samples,
                                 double margin = 0.01);

class PhiModel {
 public:
  PhiModel() = default;

  /// Named family. Parameter ranges: E1 p > 1/2; E2 p > 1, q > 0;
  /// E3 0 <= p <= 1, q > 0; E4 1 < p < q; E5 p > 1.
  static PhiModel family(Family fam, double p, double q = 0.0, const GrowthWindow& window = {}) {
    PhiModel m;
    m.family_ = fam;
    m.p_ = p;
    m.q_ = q;
    m.check_parameters();
    m.finish(window);
    return m;
  }

  static PhiModel e5(double p) { return family(Family::E5, p); }

  /// User model: `phi` is an expression over the single variable t.
  static PhiModel custom(expr::Expr phi, const GrowthWindow& window = {}) {
    if (phi.variables().size() != 1) throw ModelError("custom phi must depend on exactly one variable");
    PhiModel m;
    m.family_ = Family::Custom;
    m.custom_phi_ = std::move(phi);
    m.finish(window);
    return m;
  }

  Family family_tag() const { return family_; }
  double p() const { return p_; }
  double q() const { return q_; }
  const GrowthConstants& growth() const { return growth_; }
  const expr::Expr& custom_phi() const { return custom_phi_; }

  double phi(double t) const {
    if (!(t > 0.0)) throw ModelError("phi requires t > 0");
    switch (family_) {
      case Family::E1: return 2.0 * p_ * std::pow(1.0 + t * t, p_ - 1.0);
      case Family::E2: {
        const double L = std::log1p(t);
        return std::pow(L, q_ - 1.0) / (t + 1.0) *
               ((p_ * std::pow(t, p_ - 1.0) + p_ * std::pow(t, p_ - 2.0)) * L + q_ * std::pow(t, p_ - 1.0));
      }
      case Family::E3: return std::pow(t, -p_) * std::pow(std::asinh(t), q_);
      case Family::E4: return std::pow(t, p_ - 2.0) + std::pow(t, q_ - 2.0);
      case Family::E5: return std::pow(t, p_ - 2.0);
      case Family::Custom: return custom_phi_(t);
    }
    return 0.0;
  }

  /// psi(t) = t phi(t), extended by psi(0) = 0.
  double psi(double t) const {
    if (t < 0.0) throw ModelError("psi requires t >= 0");
    if (t == 0.0) return 0.0;
    if (std::isinf(t)) return t;
    switch (family_) {
      case Family::E1: return 2.0 * p_ * t * std::pow(1.0 + t * t, p_ - 1.0);
      case Family::E2: {
        // Phi'(t) for Phi = t^p ln^q(1+t); algebraically equal to t phi(t).
        const double L = std::log1p(t);
        return p_ * std::pow(t, p_ - 1.0) * std::pow(L, q_) + q_ * std::pow(t, p_) * std::pow(L, q_ - 1.0) / (1.0 + t);
      }
      case Family::E3: return std::pow(t, 1.0 - p_) * std::pow(std::asinh(t), q_);
      case Family::E4: return std::pow(t, p_ - 1.0) + std::pow(t, q_ - 1.0);
      case Family::E5: return std::pow(t, p_ - 1.0);
      case Family::Custom: return t * custom_phi_(t);
    }
    return 0.0;
  }

  double Phi(double t) const {
    if (t < 0.0) throw ModelError("Phi requires t >= 0");
    if (t == 0.0) return 0.0;
    switch (family_) {
      case Family::E1: return std::expm1(p_ * std::log1p(t * t));
      case Family::E2: return std::pow(t, p_) * std::pow(std::log1p(t), q_);
      case Family::E4: return std::pow(t, p_) / p_ + std::pow(t, q_) / q_;
      case Family::E5: return std::pow(t, p_) / p_;
      case Family::E3:
      case Family::Custom: return Phi_between(0.0, t);
    }
    return 0.0;
  }

  /// int_a^b psi, by adaptive Simpson (absolute tolerance 1e-12, relative 1e-12).
  double Phi_between(double a, double b) const {
    return adaptive_simpson([this](double s) { return psi(s); }, a, b, 1e-12, 1e-12);
  }

  /// t >= 0 with psi(t) = s. Closed form for E5; otherwise bracket expansion
  /// by doubling/halving followed by safeguarded false position. Returns +inf
  /// when psi stays below s over the whole double range.
  double psi_inverse(double s) const {
    if (s < 0.0 || std::isnan(s)) throw ModelError("psi_inverse requires s >= 0");
    if (s == 0.0) return 0.0;
    if (std::isinf(s)) return s;
    if (family_ == Family::E5) return std::pow(s, 1.0 / (p_ - 1.0));
    double lo = 1.0;
    double hi = 1.0;
    double f_hi = psi(hi) - s;
    double f_lo = f_hi;
    int guard = 0;
    if (f_hi < 0.0) {
      while (f_hi < 0.0) {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        // The root lies past the largest double: report overflow, which callers treat as blow-up.
        if (std::isinf(hi)) return hi;
        f_hi = psi(hi) - s;
        if (++guard > 2100) throw ConvergenceError("psi_inverse: cannot bracket s = " + std::to_string(s));
      }
    } else {
      while (f_lo > 0.0) {
        hi = lo;
        f_hi = f_lo;
        lo *= 0.5;
        f_lo = psi(lo) - s;
        if (++guard > 2100 || lo == 0.0) throw ConvergenceError("psi_inverse: cannot bracket s = " + std::to_string(s));
      }
    }
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    // Illinois false position with a bisection fallback.
    int side = 0;
    for (int it = 0; it < 400; ++it) {
      if (hi - lo <= 1e-15 * hi) break;
      double x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
      if (!(x > lo && x < hi) || it % 8 == 7) x = 0.5 * (lo + hi);
      const double fx = psi(x) - s;
      if (fx == 0.0) return x;
      if (fx < 0.0) {
        lo = x;
        f_lo = fx;
        if (side == -1) f_hi *= 0.5;
        side = -1;
      } else {
        hi = x;
        f_hi = fx;
        if (side == 1) f_lo *= 0.5;
        side = 1;
      }
    }
    if (hi - lo > 1e-12 * hi) throw ConvergenceError("psi_inverse: no convergence for s = " + std::to_string(s));
    return 0.5 * (lo + hi);
  }

  /// (e_lo, e_hi) for the requested theta mode.
  std::pair<double, double> theta_exponents(ThetaMode mode = ThetaMode::O4) const {
    return mode == ThetaMode::O4 ? std::pair{growth_.a0, growth_.a1} : std::pair{growth_.l, growth_.m};
  }

  double theta_lower(double t, ThetaMode mode = ThetaMode::O4) const {
    if (!(t > 0.0)) throw ModelError("theta requires t > 0");
    const auto [lo, hi] = theta_exponents(mode);
    return std::min(std::pow(t, 1.0 / hi), std::pow(t, 1.0 / lo));
  }

  double theta_upper(double t, ThetaMode mode = ThetaMode::O4) const {
    if (!(t > 0.0)) throw ModelError("theta requires t > 0");
    const auto [lo, hi] = theta_exponents(mode);
    return std::max(std::pow(t, 1.0 / hi), std::pow(t, 1.0 / lo));
  }

  std::string describe() const {
    std::string s(to_string(family_));
    if (family_ == Family::Custom) return s + "(phi = " + custom_phi_.to_string() + ")";
    s += "(p=" + expr::detail::format_number(p_);
    if (family_ == Family::E2 || family_ == Family::E3 || family_ == Family::E4) {
      s += ", q=" + expr::detail::format_number(q_);
    }
    return s + ")";
  }

 private:
  void check_parameters() const {
    auto bad = [&](const char* rule) {
      throw ModelError(std::string(to_string(family_)) + " parameters out of range: requires " + rule);
    };
    if (!std::isfinite(p_) || !std::isfinite(q_)) bad("finite parameters");
    switch (family_) {
      case Family::E1: if (!(p_ > 0.5)) bad("p > 1/2"); break;
      case Family::E2: if (!(p_ > 1.0 && q_ > 0.0)) bad("p > 1, q > 0"); break;
      case Family::E3: if (!(p_ >= 0.0 && p_ <= 1.0 && q_ > 0.0)) bad("0 <= p <= 1, q > 0"); break;
      case Family::E4: if (!(p_ > 1.0 && p_ < q_)) bad("1 < p < q"); break;
      case Family::E5: if (!(p_ > 1.0)) bad("p > 1"); break;
      case Family::Custom: break;
    }
  }

  void finish(const GrowthWindow& w) {
    // O2: t phi(t) strictly increasing, on the sampling window.
    double prev = 0.0;
    for (int j = 0; j < w.samples; ++j) {
      const double t = w.t_lo * std::pow(w.t_hi / w.t_lo, static_cast<double>(j) / (w.samples - 1));
      const double v = psi(t);
      if (!std::isfinite(v) || !(v > prev)) {
        throw ModelError(describe() + ": t phi(t) is not strictly increasing near t = " + std::to_string(t));
      }
      prev = v;
    }
    const GrowthConstants sampled = growth_constants(*this, w.t_lo, w.t_hi, w.samples, 0.0);
    // Exact extremes over (0, inf) where the family admits them.
    switch (family_) {
      case Family::E1:
        growth_ = {std::min(2.0, 2.0 * p_), std::max(2.0, 2.0 * p_), std::min(1.0, 2.0 * p_ - 1.0),
                   std::max(1.0, 2.0 * p_ - 1.0)};
        break;
      case Family::E4: growth_ = {p_, q_, p_ - 1.0, q_ - 1.0}; break;
      case Family::E5: growth_ = {p_, p_, p_ - 1.0, p_ - 1.0}; break;
      default: {
        growth_ = sampled;
        const double mg = w.margin;
        growth_.l = std::max(sampled.l * (1.0 - mg), 0.5 * (1.0 + sampled.l));
        growth_.m = sampled.m * (1.0 + mg);
        growth_.a0 = sampled.a0 * (1.0 - mg);
        growth_.a1 = sampled.a1 * (1.0 + mg);
      }
    }
    if (!(growth_.l > 1.0 && growth_.l <= growth_.m)) {
      throw ModelError(describe() + ": growth bound requires 1 < l <= m (got l=" + std::to_string(growth_.l) +
                       ", m=" + std::to_string(growth_.m) + ")");
    }
    if (!(growth_.a0 > 0.0 && growth_.a0 <= growth_.a1)) {
      throw ModelError(describe() + ": growth bound requires 0 < a0 <= a1 (got a0=" +
                       std::to_string(growth_.a0) + ", a1=" + std::to_string(growth_.a1) + ")");
    }
    constexpr double slack = 1e-6;
    if (sampled.l < growth_.l * (1.0 - slack) || sampled.m > growth_.m * (1.0 + slack) ||
        sampled.a0 < growth_.a0 * (1.0 - slack) || sampled.a1 > growth_.a1 * (1.0 + slack)) {
      throw ModelError(describe() + ": sampled growth ratios fall outside the model's constants");
    }
  }

  Family family_ = Family::E5;
  double p_ = 2.0;
  double q_ = 0.0;
  expr::Expr custom_phi_;
  GrowthConstants growth_{2.0, 2.0, 1.0, 1.0};
};

/// Extremes of t Phi'(t)/Phi(t) and t Phi''(t)/Phi'(t) over a log-spaced
/// sample of [t_lo, t_hi], widened by `margin` (relative) on each side.
/// Phi'' is a central difference of psi with step t * 1e-6.
inline GrowthConstants growth_constants(const PhiModel& model, double t_lo, double t_hi, int samples,
                                        double margin) {
  if (!(t_lo > 0.0 && t_lo < t_hi)) throw InputError("growth_constants requires 0 < t_lo < t_hi");
  if (samples < 64) throw InputError("growth_constants requires at least 64 samples");
  GrowthConstants g{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  const bool quadrature_phi = model.family_tag() == Family::E3 || model.family_tag() == Family::Custom;
  double prev_t = 0.0;
  double Phi_acc = 0.0;
  for (int j = 0; j < samples; ++j) {
    const double t = t_lo * std::pow(t_hi / t_lo, static_cast<double>(j) / (samples - 1));
    double Phi = 0.0;
    if (quadrature_phi) {
      Phi_acc += model.Phi_between(prev_t, t);
      prev_t = t;
      Phi = Phi_acc;
    } else {
      Phi = model.Phi(t);
    }
    const double d1 = model.psi(t);
    if (!(Phi > 0.0) || !(d1 > 0.0) || !std::isfinite(Phi) || !std::isfinite(d1)) {
      throw ModelError(model.describe() + ": growth ratio undefined at t = " + std::to_string(t));
    }
    const double h = t * 1e-6;
    const double d2 = (model.psi(t + h) - model.psi(t - h)) / (2.0 * h);
    const double r1 = t * d1 / Phi;
    const double r2 = t * d2 / d1;
    g.l = std::min(g.l, r1);
    g.m = std::max(g.m, r1);
    g.a0 = std::min(g.a0, r2);
    g.a1 = std::max(g.a1, r2);
  }
  g.l *= 1.0 - margin;
  g.m *= 1.0 + margin;
  g.a0 *= 1.0 - margin;
  g.a1 *= 1.0 + margin;
  return g;
}

}  // namespace radphi
