#pragma once

// Continuum (3-D) asymptotics of kernels of powers of a rotation- and
// translation-invariant R with symbol omega^2(k) = P(k.k):
//
//   R^lambda(r) = 1/((2 pi)^2 i r) integral_R k omega^{2 lambda}(k) e^{ikr} dk.
//
// The contour is pushed into the upper half plane, where it wraps vertical
// cuts rising from the zeros k_j of omega^2. Each cut contributes a small
// circle around its lowest zero plus the discontinuity across the cut
// (dk = i drho on the cut). The slowest exponential e^{-v r} comes from the
// zero with the smallest imaginary part v, which sets the Compton length 1/v.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "emergence/error.hpp"
#include "emergence/numerics.hpp"
#include "emergence/spectral.hpp"

namespace emergence {

/// omega^2 as a polynomial in s = k.k: sum_n coefficients[n] s^n.
struct SymbolPolynomial {
  std::vector<double> coefficients;
  int dimension = 3;  ///< the continuum formulas below are three-dimensional

  static SymbolPolynomial klein_gordon(double mass) { return {{mass * mass, 1.0}}; }

  /// (s + a_1)(s + a_2)... for the given masses a_i = m_i^2.
  static SymbolPolynomial product_of_masses(const std::vector<double>& masses) {
    std::vector<double> c{1.0};
    for (double m : masses) {
      std::vector<double> next(c.size() + 1, 0.0);
      for (std::size_t i = 0; i < c.size(); ++i) {
        next[i] += m * m * c[i];
        next[i + 1] += c[i];
      }
      c = std::move(next);
    }
    return {c};
  }

  int degree() const { return static_cast<int>(coefficients.size()) - 1; }
  double leading() const { return coefficients.back(); }

  cplx evaluate_s(cplx s) const {
    cplx acc = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * s + *it;
    return acc;
  }
  cplx evaluate(cplx k) const { return evaluate_s(k * k); }

  double scale() const {
    double m = 0.0;
    for (double c : coefficients) m = std::max(m, std::abs(c));
    return m;
  }

  /// omega^2(c^2 s): zeros move from s to s / c^2, so lengths scale by c.
  SymbolPolynomial rescaled(double c) const {
    SymbolPolynomial out = *this;
    for (std::size_t n = 0; n < out.coefficients.size(); ++n) out.coefficients[n] *= std::pow(c, 2.0 * static_cast<double>(n));
    return out;
  }

  void validate() const {
    if (dimension != 3) throw InvalidArgument("continuum symbol formulas are three-dimensional");
    if (coefficients.size() < 2) throw InvalidArgument("symbol must have degree at least 1 in k.k");
    for (double c : coefficients)
      if (!std::isfinite(c)) throw InvalidArgument("symbol has non-finite coefficients");
    if (!(leading() > 0.0)) throw AxiomViolation("symbol leading coefficient must be positive");
  }
};

struct BranchPoint {
  cplx k;                ///< zero of omega^2 in the upper half plane
  int multiplicity = 1;  ///< multiplicity as a root in s
};

struct BranchStructure {
  std::vector<BranchPoint> zeros;
  std::size_t dominant = 0;  ///< index of the zero with the smallest imaginary part
  double max_residual = 0.0;  ///< max |omega^2(k_j)| / coefficient scale
};

/// Zeros of omega^2 in the upper half k plane, from the roots of P(s).
inline BranchStructure find_branch_points(const SymbolPolynomial& symbol) {
  symbol.validate();
  const int n = symbol.degree();
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) companion(0, i) = -symbol.coefficients[static_cast<std::size_t>(n - 1 - i)] / symbol.leading();
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  const Eigen::VectorXcd roots = Eigen::EigenSolver<Eigen::MatrixXd>(companion).eigenvalues();

  // Newton polish in s, then cluster repeated roots.
  std::vector<BranchPoint> pts;
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    cplx s = roots[i];
    for (int it = 0; it < 50; ++it) {
      cplx p = 0.0, dp = 0.0;
      for (auto c = symbol.coefficients.rbegin(); c != symbol.coefficients.rend(); ++c) {
        dp = dp * s + p;
        p = p * s + *c;
      }
      if (std::abs(dp) < 1e-300) break;
      const cplx step = p / dp;
      s -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(s))) break;
    }
    const double tol = 1e-9 * std::max(1.0, std::abs(s));
    if (std::abs(s.imag()) <= tol && s.real() >= -tol)
      throw AxiomViolation("omega^2 vanishes at real k (root s = " + std::to_string(s.real()) + ")");
    cplx k = std::sqrt(s);
    if (k.imag() < 0.0) k = -k;
    bool merged = false;
    for (auto& p : pts) {
      if (std::abs(p.k - k) <= 1e-6 * std::max(1.0, std::abs(k))) {
        p.k = (p.k * static_cast<double>(p.multiplicity) + k) / static_cast<double>(p.multiplicity + 1);
        ++p.multiplicity;
        merged = true;
        break;
      }
    }
    if (!merged) pts.push_back({k, 1});
  }
  std::sort(pts.begin(), pts.end(), [](const BranchPoint& a, const BranchPoint& b) {
    return a.k.imag() != b.k.imag() ? a.k.imag() < b.k.imag() : a.k.real() < b.k.real();
  });
  BranchStructure out;
  out.zeros = std::move(pts);
  out.dominant = 0;
  for (const auto& p : out.zeros)
    out.max_residual = std::max(out.max_residual, std::abs(symbol.evaluate(p.k)) / symbol.scale());
  return out;
}

struct AsymptoticPrediction {
  double decay_rate = 0.0;  ///< v_{i0}
  double compton = 0.0;     ///< 1/v_{i0}
  std::string form = "exp(-v r)/r";
};

inline AsymptoticPrediction predict_compton(const SymbolPolynomial& symbol) {
  const auto b = find_branch_points(symbol);
  const double v = b.zeros[b.dominant].k.imag();
  return {v, 1.0 / v, "exp(-v r)/r"};
}

/// Power p in R^lambda(r) ~ exp(-v r) / r^p for large r. The cut
/// discontinuity starts like rho^{lambda n} at a zero of multiplicity n, so
/// p = lambda n + 2; the Yukawa case lambda n = -1 gives exp(-v r)/r.
inline double asymptotic_power(const SymbolPolynomial& symbol, double lambda) {
  const auto b = find_branch_points(symbol);
  return lambda * b.zeros[b.dominant].multiplicity + 2.0;
}

namespace detail {

inline void require_convergent(double lambda) {
  if (!(lambda <= -0.5)) throw InvalidArgument("kernel integral needs lambda <= -1/2 to converge");
}

/// (z)^lambda with arg z taken in (theta_lo, theta_lo + 2 pi].
inline cplx branch_power(cplx z, double lambda, double theta_lo) {
  double theta = std::arg(z);
  while (theta <= theta_lo) theta += 2.0 * std::numbers::pi;
  while (theta > theta_lo + 2.0 * std::numbers::pi) theta -= 2.0 * std::numbers::pi;
  return std::polar(std::pow(std::abs(z), lambda), lambda * theta);
}

/// Upward-cut factor (k - k_j)^lambda: arg in (-3 pi/2, pi/2].
inline cplx up_factor(cplx z, double lambda) { return branch_power(z, lambda, -1.5 * std::numbers::pi); }
/// Downward-cut factor (k + k_j)^lambda: arg in (-pi/2, 3 pi/2].
inline cplx down_factor(cplx z, double lambda) { return branch_power(z, lambda, -0.5 * std::numbers::pi); }

/// omega^{2 lambda}(k) = c^lambda prod_j (k - k_j)^lambda (k + k_j)^lambda,
/// excluding the upward factors listed in `skip` (handled by the caller).
inline cplx symbol_power(const SymbolPolynomial& sym, const std::vector<BranchPoint>& zeros, cplx k, double lambda,
                         const std::vector<char>& skip) {
  cplx acc = std::pow(sym.leading(), lambda);
  for (std::size_t j = 0; j < zeros.size(); ++j) {
    const double mu = lambda * zeros[j].multiplicity;
    if (!skip[j]) acc *= up_factor(k - zeros[j].k, mu);
    acc *= down_factor(k + zeros[j].k, mu);
  }
  return acc;
}

}  // namespace detail

struct CutDiagnostics {
  std::size_t lines = 0;
  std::size_t segments = 0;
  double imaginary_residual = 0.0;  ///< |Im| / |Re| of the summed contributions
};

/// R^lambda(r) by integration around the vertical cuts in the upper half plane.
inline double branch_cut_kernel(const SymbolPolynomial& symbol, double lambda, double r,
                                CutDiagnostics* diag = nullptr) {
  detail::require_convergent(lambda);
  if (!(r > 0.0)) throw InvalidArgument("branch_cut_kernel needs r > 0");
  const auto bs = find_branch_points(symbol);
  const auto& zeros = bs.zeros;
  const double pi = std::numbers::pi;

  // Group zeros by vertical line.
  std::vector<std::vector<std::size_t>> lines;
  for (std::size_t j = 0; j < zeros.size(); ++j) {
    bool placed = false;
    for (auto& line : lines) {
      if (std::abs(zeros[line.front()].k.real() - zeros[j].k.real()) <= 1e-9 * std::max(1.0, std::abs(zeros[j].k))) {
        line.push_back(j);
        placed = true;
        break;
      }
    }
    if (!placed) lines.push_back({j});
  }

  const numerics::GaussLegendre gl(96);
  cplx total = 0.0;
  std::size_t segments = 0;
  for (const auto& line : lines) {
    // Zeros on the line, ascending in height (zeros are globally sorted by Im).
    const std::size_t base = line.front();
    const double u = zeros[base].k.real();
    const double v0 = zeros[base].k.imag();
    if (line.size() > 1 && lambda <= -1.0)
      throw InvalidArgument("cuts through several zeros need lambda > -1 (integrable interior singularities)");

    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < zeros.size(); ++j) {
      if (j != base) dist = std::min(dist, std::abs(zeros[j].k - zeros[base].k));
      dist = std::min(dist, std::abs(zeros[j].k + zeros[base].k));
    }
    const double delta = std::min(0.5 * dist, 1.0 / r);

    std::vector<char> skip(zeros.size(), 0);
    for (std::size_t j : line) skip[j] = 1;

    // Circle of radius delta around the base zero, counterclockwise from the
    // left side of the cut (arg -3pi/2) to its right side (arg pi/2).
    {
      std::vector<char> skip_base(zeros.size(), 0);
      skip_base[base] = 1;
      const double mu = lambda * zeros[base].multiplicity;
      const double a = -1.5 * pi, b = 0.5 * pi;
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      cplx acc = 0.0;
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double theta = mid + half * gl.nodes[i];
        const cplx e = std::polar(1.0, theta);
        const cplx k = zeros[base].k + delta * e;
        const cplx f = std::polar(std::pow(delta, mu), mu * theta) *
                       detail::symbol_power(symbol, zeros, k, lambda, skip_base);
        acc += gl.weights[i] * (k * f * std::exp(cplx(0.0, 1.0) * k * r) * cplx(0.0, delta) * e);
      }
      total += acc * half;
    }

    // Discontinuity along the cut above the circle, split at interior zeros.
    std::vector<double> breaks{delta};
    for (std::size_t idx = 1; idx < line.size(); ++idx) breaks.push_back(zeros[line[idx]].k.imag() - v0);
    breaks.push_back(breaks.back() + 40.0 / r);
    for (std::size_t seg = 0; seg + 1 < breaks.size(); ++seg) {
      const double lo = breaks[seg], hi = breaks[seg + 1];
      // Number of on-line zeros below this segment (including the base).
      double mu_below = 0.0;
      for (std::size_t idx = 0; idx <= seg && idx < line.size(); ++idx) mu_below += lambda * zeros[line[idx]].multiplicity;
      const cplx jump = std::polar(1.0, 0.5 * pi * mu_below) - std::polar(1.0, -1.5 * pi * mu_below);
      if (std::abs(jump) < 1e-15) continue;
      auto integrand = [&](double rho, double da, double db) -> cplx {
        const double y = v0 + rho;
        const cplx k(u, y);
        cplx f = detail::symbol_power(symbol, zeros, k, lambda, skip);
        for (std::size_t idx = 0; idx < line.size(); ++idx) {
          const double mu = lambda * zeros[line[idx]].multiplicity;
          double gap;
          if (idx == seg && seg > 0) gap = da;        // zero at the segment's lower end
          else if (idx == seg + 1) gap = db;          // zero at the segment's upper end
          else gap = std::abs(y - zeros[line[idx]].k.imag());
          if (idx <= seg) {
            f *= std::pow(gap, mu);  // below: phase carried by `jump`
          } else {
            f *= std::polar(std::pow(gap, mu), -0.5 * pi * mu);  // above: arg -pi/2 on both sides
          }
        }
        return k * f * jump * std::exp(cplx(0.0, 1.0) * k * r) * cplx(0.0, 1.0);
      };
      total += numerics::tanh_sinh<cplx>(integrand, lo, hi, 1e-12, 14);
      ++segments;
    }
  }
  const cplx value = total / (cplx(0.0, 1.0) * (4.0 * pi * pi * r));
  if (diag) {
    diag->lines = lines.size();
    diag->segments = segments;
    diag->imaginary_residual = std::abs(value.imag()) / std::max(std::abs(value.real()), 1e-300);
  }
  return value.real();
}

/// Closed form for omega^2 = k^2 + m^2 in three dimensions:
///   R^lambda(r) = 2^{lambda+1} m^{3/2+lambda} / ((2 pi)^{3/2} Gamma(-lambda))
///                 r^{-(3/2+lambda)} K_{3/2+lambda}(m r),   lambda < 0.
inline double klein_gordon_kernel_3d(double mass, double lambda, double r) {
  if (!(lambda < 0.0)) throw InvalidArgument("closed form needs lambda < 0");
  const double nu = 1.5 + lambda;
  return std::pow(2.0, lambda + 1.0) * std::pow(mass, nu) /
         (std::pow(2.0 * std::numbers::pi, 1.5) * std::tgamma(-lambda)) * std::pow(r, -nu) *
         std::cyl_bessel_k(std::abs(nu), mass * r);
}

struct DirectDiagnostics {
  std::size_t panels = 0;
  double last_increment = 0.0;
  double subtraction_mass = 0.0;
};

/// R^lambda(r) = 1/(2 pi^2 r) integral_0^inf k omega^{2 lambda} sin(kr) dk on
/// the real axis. A Klein-Gordon-type term c^lambda k (k^2 + b^2)^{lambda deg}
/// with the same large-k behaviour is subtracted and added back in closed
/// form; the remainder is summed over half-period panels and accelerated
/// with Wynn's epsilon algorithm.
inline double direct_radial_integral(const SymbolPolynomial& symbol, double lambda, double r,
                                     DirectDiagnostics* diag = nullptr, std::size_t panels = 400) {
  detail::require_convergent(lambda);
  if (!(r > 0.0)) throw InvalidArgument("direct_radial_integral needs r > 0");
  symbol.validate();
  const auto bs = find_branch_points(symbol);
  double kmax = 0.0;
  for (const auto& z : bs.zeros) kmax = std::max(kmax, std::abs(z.k));
  const double b = 1.0 + 2.0 * kmax;  // distinct from every zero, same large-k power
  const double c = symbol.leading();
  const double nu = lambda * symbol.degree();
  if (!(nu < 0.0)) throw InvalidArgument("direct integral needs lambda * degree < 0");

  auto remainder = [&](double k) {
    if (k == 0.0) return 0.0;
    const double w2 = symbol.evaluate(cplx(k)).real();
    return k * (std::pow(w2, lambda) - std::pow(c, lambda) * std::pow(k * k + b * b, nu)) * std::sin(k * r);
  };
  const numerics::GaussLegendre gl(24);
  const double period = std::numbers::pi / r;
  std::vector<double> partial;
  double s = 0.0, last = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    last = gl.integrate(remainder, p * period, (p + 1) * period);
    s += last;
    partial.push_back(s);
  }
  const double tail_sum = numerics::wynn_epsilon(partial, 40);
  if (!std::isfinite(tail_sum)) throw ConvergenceError("direct radial integral: acceleration failed");
  if (diag) {
    diag->panels = panels;
    diag->last_increment = last;
    diag->subtraction_mass = b;
  }
  return tail_sum / (2.0 * std::numbers::pi * std::numbers::pi * r) + std::pow(c, lambda) * klein_gordon_kernel_3d(b, nu, r);
}

struct LatticeContinuumReport {
  double lambda = 0.0;
  double continuum_length = 0.0;  ///< 1/v_{i0}
  double lattice_length = 0.0;    ///< fitted from the lattice kernel profile
  double power_exponent = 0.0;    ///< algebraic prefactor removed before fitting
  double deviation = 0.0;         ///< |lattice - continuum| / continuum
  DecayFit fit;
};

/// Decay length of a lattice kernel profile against the continuum prediction.
/// The profile is fitted as exp(-r/L) / r^p with p = (lambda + 1) + (d - 1)/2,
/// the algebraic prefactor of a simple branch point in d dimensions.
inline LatticeContinuumReport lattice_vs_continuum(const SymbolPolynomial& symbol, double lambda,
                                                   const KernelProfile& profile, int dimension, DecayWindow window) {
  LatticeContinuumReport r;
  r.lambda = lambda;
  r.continuum_length = predict_compton(symbol).compton;
  r.power_exponent = (lambda + 1.0) + 0.5 * (dimension - 1);
  r.fit = fit_decay_length(profile, window, r.power_exponent);
  r.lattice_length = r.fit.length;
  r.deviation = std::abs(r.lattice_length - r.continuum_length) / r.continuum_length;
  return r;
}

}  // namespace emergence
