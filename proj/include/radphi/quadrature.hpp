#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "radphi/error.hpp"

namespace radphi {

/// Nodes 0 = r_0 < r_1 < ... < r_n = R with r_k = R (k/n)^g.
class RadialGrid {
 public:
  RadialGrid() = default;

  RadialGrid(double R, int n, double grading) : R_(R), grading_(grading) {
    if (!(R > 0.0) || !std::isfinite(R)) throw InputError("grid radius must be positive");
    if (n < 2) throw InputError("grid needs at least 2 intervals, got " + std::to_string(n));
    if (!(grading >= 1.0)) throw InputError("grid grading exponent must be >= 1");
    nodes_.resize(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
      nodes_[static_cast<std::size_t>(k)] =
          grading == 1.0 ? R * k / n : R * std::pow(static_cast<double>(k) / n, grading);
    }
    nodes_.back() = R;
  }

  std::size_t size() const { return nodes_.size(); }
  int intervals() const { return static_cast<int>(nodes_.size()) - 1; }
  double operator[](std::size_t k) const { return nodes_[k]; }
  const std::vector<double>& nodes() const { return nodes_; }
  double radius() const { return R_; }
  double grading() const { return grading_; }

  /// Index of the last node <= r (clamped to the grid).
  std::size_t locate(double r) const {
    if (r <= nodes_.front()) return 0;
    if (r >= nodes_.back()) return nodes_.size() - 1;
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r);
    return static_cast<std::size_t>(it - nodes_.begin()) - 1;
  }

  /// Piecewise-linear interpolation of per-node samples at r.
  double interpolate(std::span<const double> values, double r) const {
    const std::size_t k = locate(r);
    if (k + 1 >= values.size() || k + 1 >= nodes_.size()) return values[std::min(k, values.size() - 1)];
    const double w = (r - nodes_[k]) / (nodes_[k + 1] - nodes_[k]);
    return values[k] + w * (values[k + 1] - values[k]);
  }

 private:
  std::vector<double> nodes_;
  double R_ = 0.0;
  double grading_ = 1.0;
};

inline RadialGrid build_grid(double R, int n, double grading) { return RadialGrid(R, n, grading); }

/// Composite-trapezoid prefix sums: F_0 = 0, F_k = F_{k-1} + h_k (f_{k-1} + f_k)/2.
/// A shorter sample vector yields a table over the matching grid prefix.
inline std::vector<double> cumulative_integral(std::span<const double> samples, const RadialGrid& grid) {
  if (samples.size() > grid.size() || samples.empty()) {
    throw InputError("cumulative_integral: " + std::to_string(samples.size()) + " samples for " +
                     std::to_string(grid.size()) + " nodes");
  }
  std::vector<double> out(samples.size(), 0.0);
  for (std::size_t k = 1; k < samples.size(); ++k) {
    out[k] = out[k - 1] + 0.5 * (grid[k] - grid[k - 1]) * (samples[k - 1] + samples[k]);
  }
  return out;
}

/// Strict variant: exactly one sample per node.
inline std::vector<double> cumulative_integral_full(std::span<const double> samples, const RadialGrid& grid) {
  if (samples.size() != grid.size()) {
    throw InputError("cumulative_integral: length mismatch (" + std::to_string(samples.size()) + " vs " +
                     std::to_string(grid.size()) + ")");
  }
  return cumulative_integral(samples, grid);
}

namespace detail {

template <class F>
double simpson_step(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b]. The error target is
/// max(abs_tol, rel_tol * |coarse estimate|).
template <class F>
double adaptive_simpson(const F& f, double a, double b, double abs_tol = 1e-12, double rel_tol = 1e-12,
                        int max_depth = 48) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double tol = std::max(abs_tol, rel_tol * std::abs(whole));
  return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// Radial weight xi(t) = t^{N-1} exp(int_0^t sigma) tabulated on a grid, and
/// the prefix mean J(t) = (1/xi(t)) int_0^t xi(s) g(s) ds.
///
/// The exponent integral uses the trapezoid rule at the nodes and linear
/// interpolation in between. The prefix mean is a product trapezoid rule:
/// on each panel the smooth factor exp(int sigma) g is interpolated
/// linearly and integrated exactly against s^{N-1}. It is evaluated as a
/// scaled recursion, so xi itself is never formed and cannot overflow.
/// J(0) = 0 (removable singularity: J ~ t p(0) g(0) / N).
class RadialWeight {
 public:
  RadialWeight() = default;

  RadialWeight(const RadialGrid& grid, int dimension, std::span<const double> sigma) : grid_(grid), N_(dimension) {
    if (dimension < 1) throw InputError("dimension must be positive");
    if (sigma.size() != grid.size()) throw InputError("RadialWeight: sigma sample count mismatch");
    log_exp_ = cumulative_integral(sigma, grid);
    const std::size_t n = grid.size();
    decay_.assign(n, 0.0);
    left_.assign(n, 0.0);
    right_.assign(n, 0.0);
    shift_.assign(n, 0.0);
    const double norm = static_cast<double>(N_) * (N_ + 1);
    for (std::size_t k = 1; k < n; ++k) {
      const double r = grid[k];
      const double a = grid[k - 1] / r;
      const double delta = 1.0 - a;
      // S_m(a) = 1 + a + ... + a^{m-1}
      std::vector<double> S(static_cast<std::size_t>(N_) + 1, 0.0);
      double pw = 1.0;
      for (int m = 1; m <= N_; ++m) {
        S[static_cast<std::size_t>(m)] = S[static_cast<std::size_t>(m) - 1] + pw;
        pw *= a;
      }
      // Weights of g_{k-1} and g_k; both sums have non-negative terms only.
      double wl = 0.0;
      double aj = 1.0;
      for (int j = 0; j < N_; ++j) {
        wl += aj * S[static_cast<std::size_t>(N_ - j)];
        aj *= a;
      }
      double wr = 0.0;
      for (int j = 1; j <= N_; ++j) wr += S[static_cast<std::size_t>(j)];
      left_[k] = r * delta * wl / norm;
      right_[k] = r * delta * wr / norm;
      shift_[k] = std::exp(-(log_exp_[k] - log_exp_[k - 1]));
      decay_[k] = std::pow(a, N_ - 1) * shift_[k];
    }
  }

  const RadialGrid& grid() const { return grid_; }
  int dimension() const { return N_; }

  /// xi at node k.
  double at_node(std::size_t k) const {
    return std::pow(grid_[k], N_ - 1) * std::exp(log_exp_[k]);
  }

  /// xi(t), with int_0^t sigma interpolated linearly between nodes.
  double operator()(double t) const {
    if (t < 0.0) throw InputError("xi: negative argument");
    if (t == 0.0) return N_ > 1 ? 0.0 : 1.0;
    return std::pow(t, N_ - 1) * std::exp(grid_.interpolate(log_exp_, t));
  }

  /// Prefix mean of g over the first g.size() nodes.
  void prefix_mean(std::span<const double> g, std::span<double> out) const {
    if (g.empty()) return;
    out[0] = 0.0;
    for (std::size_t k = 1; k < g.size(); ++k) {
      out[k] = decay_[k] * out[k - 1] + left_[k] * shift_[k] * g[k - 1] + right_[k] * g[k];
    }
  }

  std::vector<double> prefix_mean(std::span<const double> g) const {
    std::vector<double> out(g.size());
    prefix_mean(g, out);
    return out;
  }

 private:
  RadialGrid grid_;
  int N_ = 3;
  std::vector<double> log_exp_;
  std::vector<double> decay_, left_, right_, shift_;
};

/// Monotone table of F(t) = int_{t_0}^t g(s) ds on a log-spaced argument
/// grid t_0 < ... < t_cap. Each panel is integrated in x = ln t by 5-point
/// Gauss-Legendre, also for partial panels, so F is continuous and strictly
/// increasing wherever g > 0.
class ArgumentTable {
 public:
  struct Inverse {
    double value = 0.0;
    bool saturated = false;  // y exceeded F(t_cap); value is t_cap (a lower bound)
  };

  ArgumentTable() = default;

  template <class G>
  ArgumentTable(G integrand, double t0, double cap, int points) : integrand_(std::move(integrand)) {
    if (!(t0 > 0.0)) throw InputError("argument table must start at a positive value");
    if (points < 2) throw InputError("argument table needs at least 2 points");
    if (!(cap > t0)) cap = 10.0 * t0;
    const double x0 = std::log(t0);
    const double x1 = std::log(cap);
    x_.resize(static_cast<std::size_t>(points));
    t_.resize(x_.size());
    F_.assign(x_.size(), 0.0);
    for (std::size_t k = 0; k < x_.size(); ++k) {
      x_[k] = x0 + (x1 - x0) * static_cast<double>(k) / (points - 1);
      t_[k] = std::exp(x_[k]);
    }
    t_.front() = t0;
    t_.back() = cap;
    for (std::size_t k = 1; k < x_.size(); ++k) F_[k] = F_[k - 1] + panel(x_[k - 1], x_[k]);
  }

  double start() const { return t_.front(); }
  double cap() const { return t_.back(); }
  double max_value() const { return F_.back(); }
  const std::vector<double>& arguments() const { return t_; }
  const std::vector<double>& values() const { return F_; }

  double operator()(double t) const {
    if (t <= t_.front()) return 0.0;
    if (t >= t_.back()) return F_.back();
    const std::size_t k = static_cast<std::size_t>(std::upper_bound(t_.begin(), t_.end(), t) - t_.begin()) - 1;
    if (t == t_[k]) return F_[k];
    return F_[k] + panel(x_[k], std::log(t));
  }

  /// Inverse by bracketing in the table and bisection inside the panel.
  Inverse inverse(double y) const {
    if (y < 0.0) throw InputError("inverse requested for a negative value");
    if (y == 0.0) return {t_.front(), false};
    if (y > F_.back()) return {t_.back(), true};
    const std::size_t k = static_cast<std::size_t>(std::lower_bound(F_.begin(), F_.end(), y) - F_.begin());
    if (F_[k] == y) return {t_[k], false};
    double lo = t_[k - 1];
    double hi = t_[k];
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if ((*this)(mid) < y) lo = mid;
      else hi = mid;
    }
    return {0.5 * (lo + hi), false};
  }

 private:
  /// int_a^b e^x g(e^x) dx.
  double panel(double a, double b) const {
    static constexpr double node[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                       0.9061798459386640};
    static constexpr double weight[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                         0.4786286704993665, 0.2369268850561891};
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (int j = 0; j < 5; ++j) {
      const double t = std::exp(mid + half * node[j]);
      sum += weight[j] * t * integrand_(t);
    }
    return half * sum;
  }

  std::function<double(double)> integrand_;
  std::vector<double> x_, t_, F_;
};

}  // namespace radphi
