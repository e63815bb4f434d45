#pragma once

// Small numerical kernels shared by the modules: straight-line fits,
// double-exponential and Gauss-Legendre quadrature, Wynn's epsilon algorithm.

#include <cmath>
#include <algorithm>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "emergence/error.hpp"

namespace emergence::numerics {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  std::size_t samples = 0;
};

/// Ordinary least squares y = intercept + slope * x.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit fit;
  fit.samples = x.size();
  if (x.size() < 2 || x.size() != y.size()) return fit;
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / n);
  return fit;
}

/// Tanh-sinh quadrature on a finite interval [a, b].
///
/// Tolerates integrable endpoint singularities of the form |x - a|^mu with
/// mu > -1. The integrand is called as f(x, dist_a, dist_b) with the
/// distances to both endpoints computed without cancellation, so singular
/// factors can be evaluated accurately next to the endpoints.
template <class T, class F>
T tanh_sinh(F&& f, double a, double b, double rel_tol = 1e-12, int max_level = 12) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  constexpr double t_max = 4.0;
  const double half = 0.5 * (b - a);

  auto add_node = [&](double t, T& acc) {
    const double s = half_pi * std::sinh(t);
    const double da = 2.0 * half / (1.0 + std::exp(-2.0 * s));
    const double db = 2.0 * half / (1.0 + std::exp(2.0 * s));
    if (!(da > 0.0) || !(db > 0.0)) return;
    const double cs = std::cosh(s);
    const double w = half_pi * std::cosh(t) / (cs * cs);
    const double x = (t < 0.0) ? a + da : b - db;
    acc += w * f(x, da, db);
  };

  double h = 1.0;
  T sum{};
  add_node(0.0, sum);
  for (double t = h; t <= t_max; t += h) {
    add_node(t, sum);
    add_node(-t, sum);
  }
  T estimate = sum * (h * half);
  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    for (double t = h; t <= t_max; t += 2.0 * h) {
      add_node(t, sum);
      add_node(-t, sum);
    }
    const T next = sum * (h * half);
    const double diff = std::abs(next - estimate);
    estimate = next;
    if (level >= 3 && diff <= rel_tol * std::abs(next)) return estimate;
    if (level >= 3 && std::abs(next) == 0.0) return estimate;
  }
  throw ConvergenceError("tanh-sinh quadrature did not converge on [" + std::to_string(a) + ", " +
                         std::to_string(b) + "]");
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int n) : nodes(static_cast<std::size_t>(n)), weights(static_cast<std::size_t>(n)) {
    for (int i = 0; i < n; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[static_cast<std::size_t>(i)] = x;
      weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }

  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(mid + half * nodes[i]);
    return s * half;
  }
};

/// Wynn's epsilon acceleration of a sequence of partial sums.
///
/// Uses at most the last `window` terms and returns the highest even-column
/// entry of the epsilon table.
inline double wynn_epsilon(const std::vector<double>& partial_sums, std::size_t window = 25) {
  if (partial_sums.empty()) return 0.0;
  const std::size_t n = std::min(window, partial_sums.size());
  std::vector<double> prev(n + 1, 0.0);  // column k-1
  std::vector<double> cur(partial_sums.end() - static_cast<std::ptrdiff_t>(n), partial_sums.end());
  double best = cur.back();
  for (std::size_t k = 0; cur.size() > 1; ++k) {
    std::vector<double> next(cur.size() - 1);
    for (std::size_t i = 0; i + 1 < cur.size(); ++i) {
      const double diff = cur[i + 1] - cur[i];
      if (diff == 0.0 || !std::isfinite(diff)) return best;
      next[i] = prev[i + 1] + 1.0 / diff;
    }
    prev = std::move(cur);
    cur = std::move(next);
    if (k % 2 == 1 && std::isfinite(cur.back())) best = cur.back();
  }
  return best;
}

}  // namespace emergence::numerics
