#pragma once

// Newton-Wigner representation: one-particle states as ordinary L2
// wavefunctions psi = sum_k alpha_k f_k, evolving under exp(-i R^1/2 t).
//
//   psi = (R^1/4 phi + i R^-1/4 pi) / sqrt2
//   phi = sqrt2 R^-1/4 Re psi,   pi = sqrt2 R^1/4 Im psi

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "emergence/geometry.hpp"
#include "emergence/modes.hpp"
#include "emergence/particle.hpp"
#include "emergence/spectral.hpp"

namespace emergence {

struct NWWavefunction {
  Lattice lattice;
  Eigen::VectorXcd psi;

  /// Discrete L2 norm sqrt(h^d sum |psi|^2).
  double norm() const { return std::sqrt(lattice.cell_volume() * psi.squaredNorm()); }

  void validate() const {
    if (static_cast<std::size_t>(psi.size()) != lattice.site_count())
      throw LatticeMismatch("wavefunction length does not match lattice");
    if (!psi.allFinite()) throw InvalidArgument("wavefunction has non-finite entries");
  }
};

inline NWWavefunction to_nw(const PhaseVector& u, const Spectrum& spec) {
  u.validate();
  require_same_lattice(u.lattice, spec.lattice(), "to_nw");
  const Eigen::VectorXd re = spec.apply_power(0.25, u.phi);
  const Eigen::VectorXd im = spec.apply_power(-0.25, u.pi);
  NWWavefunction out{u.lattice, Eigen::VectorXcd(re.size())};
  out.psi.real() = re / std::numbers::sqrt2;
  out.psi.imag() = im / std::numbers::sqrt2;
  return out;
}

inline PhaseVector from_nw(const NWWavefunction& w, const Spectrum& spec) {
  w.validate();
  require_same_lattice(w.lattice, spec.lattice(), "from_nw");
  return {w.lattice, std::numbers::sqrt2 * spec.apply_power(-0.25, Eigen::VectorXd(w.psi.real())),
          std::numbers::sqrt2 * spec.apply_power(0.25, Eigen::VectorXd(w.psi.imag()))};
}

/// exp(-i R^1/2 t) psi.
inline NWWavefunction evolve_nw(const NWWavefunction& w, const Spectrum& spec, double t) {
  w.validate();
  require_same_lattice(w.lattice, spec.lattice(), "evolve_nw");
  if (t == 0.0) return w;
  return {w.lattice, spec.apply([t](double w2) { return std::polar(1.0, -std::sqrt(w2) * t); }, w.psi)};
}

/// Site-weighted mean position per axis in physical units, unwrapped around
/// the circular mean of each axis so that packets straddling the periodic
/// boundary are located correctly. Entries beyond the lattice dimension are 0.
inline std::array<double, 3> position_expectation(const NWWavefunction& w) {
  w.validate();
  const Lattice& lat = w.lattice;
  const double total = w.psi.squaredNorm();
  if (!(total > 0.0)) throw InvalidArgument("position of a zero wavefunction");
  std::array<double, 3> out{0.0, 0.0, 0.0};
  for (int a = 0; a < lat.dimension(); ++a) {
    const int n = lat.extent(a);
    double c = 0.0, s = 0.0;
    for (std::size_t x = 0; x < lat.site_count(); ++x) {
      const double theta = 2.0 * std::numbers::pi * lat.coords(x)[static_cast<std::size_t>(a)] / n;
      const double p = std::norm(w.psi[static_cast<Eigen::Index>(x)]);
      c += p * std::cos(theta);
      s += p * std::sin(theta);
    }
    const double center = std::atan2(s, c) / (2.0 * std::numbers::pi) * n;
    double mean = 0.0;
    for (std::size_t x = 0; x < lat.site_count(); ++x) {
      const double coord = lat.coords(x)[static_cast<std::size_t>(a)];
      const double shift = static_cast<double>(n) * std::round((center - coord) / n);
      mean += std::norm(w.psi[static_cast<Eigen::Index>(x)]) * (coord + shift);
    }
    mean /= total;
    mean -= static_cast<double>(n) * std::floor(mean / n);
    out[static_cast<std::size_t>(a)] = mean * lat.spacing();
  }
  return out;
}

/// Unit-norm discrete delta at a site: psi(x) = delta_{x,x0} / h^{d/2}.
inline NWWavefunction nw_delta(const Lattice& lat, std::size_t x0) {
  if (x0 >= lat.site_count()) throw InvalidArgument("site index out of range");
  NWWavefunction w{lat, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(lat.site_count()))};
  w.psi[static_cast<Eigen::Index>(x0)] = 1.0 / std::sqrt(lat.cell_volume());
  return w;
}

/// Unit-norm Gaussian packet exp(-r^2/(4 width^2)) e^{i k0 x} (|psi|^2 has
/// standard deviation `width`), momentum along the first axis.
inline NWWavefunction nw_gaussian(const Lattice& lat, std::size_t center, double width, double k0 = 0.0,
                                  double truncate_radius = std::numeric_limits<double>::infinity()) {
  NWWavefunction w{lat, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(lat.site_count()))};
  const auto c0 = lat.coords(center);
  const int n0 = lat.extent(0);
  for (std::size_t x = 0; x < lat.site_count(); ++x) {
    const double r = lat.distance(center, x);
    if (r > truncate_radius) continue;
    int dx = lat.coords(x)[0] - c0[0];
    dx -= n0 * static_cast<int>(std::lround(static_cast<double>(dx) / n0));
    w.psi[static_cast<Eigen::Index>(x)] = std::exp(-r * r / (4.0 * width * width)) *
                                          std::polar(1.0, k0 * dx * lat.spacing());
  }
  w.psi /= w.norm();
  return w;
}

struct NWDeltaReport {
  std::size_t source = 0;
  Eigen::VectorXd phi2_profile;  ///< phi^2 difference of the one-particle state of the delta
  Eigen::VectorXd pi2_profile;
  double phi2_closed_form_residual = 0.0;  ///< max |profile - 2 kappa (R^-1/4 psi)^2| / peak
  double pi2_closed_form_residual = 0.0;   ///< max |profile - 2 kappa (R^1/4 psi)^2| / peak
  /// For the delta-normalized ket sum_k f_k*(x0)|k>: max |profile - kappa/2 (R^1/4 delta)^2| / peak.
  double literal_form_residual = 0.0;
  bool literal_form_pass = false;
  bool peak_at_source = false;
  DecayFit amplitude_fit;  ///< decay of sqrt(phi2 profile) from the source
  double compton = 0.0;
  bool closed_form_pass = false;
  bool width_pass = false;  ///< fitted amplitude length within 25% of L_c
};

/// Field-space localization of the Newton-Wigner delta at x0.
///
/// The closed forms are evaluated from kernel rows, independently of the
/// from_nw route used for the profiles.
inline NWDeltaReport nw_delta_localization(const Spectrum& spec, std::size_t x0,
                                           std::optional<DecayWindow> window = std::nullopt) {
  const Lattice& lat = spec.lattice();
  NWDeltaReport r;
  r.source = x0;
  r.compton = compton_length(spec);
  const auto delta = nw_delta(lat, x0);
  const auto state = make_particle(from_nw(delta, spec), spec);
  r.phi2_profile = diff_profile(state, spec, Probe::phi2);
  r.pi2_profile = diff_profile(state, spec, Probe::pi2);

  // (R^a psi)(y) = h^d K_a(y, x0) psi(x0) = h^{d/2} K_a(y, x0).
  const double amp = std::sqrt(lat.cell_volume());
  const Eigen::VectorXd down = amp * detail::power_row(spec, -0.25, x0);
  const Eigen::VectorXd up = amp * detail::power_row(spec, 0.25, x0);
  const Eigen::VectorXd phi2_closed = 2.0 * convention_kappa * down.array().square().matrix();
  const Eigen::VectorXd pi2_closed = 2.0 * convention_kappa * up.array().square().matrix();
  const double peak_phi = r.phi2_profile.cwiseAbs().maxCoeff();
  const double peak_pi = r.pi2_profile.cwiseAbs().maxCoeff();
  r.phi2_closed_form_residual = (r.phi2_profile - phi2_closed).cwiseAbs().maxCoeff() / peak_phi;
  r.pi2_closed_form_residual = (r.pi2_profile - pi2_closed).cwiseAbs().maxCoeff() / peak_pi;
  // The ket with coordinates f_k*(x0) is psi = delta_{x,x0}/h^d, i.e. the
  // unit-norm delta scaled by h^{-d/2}; its profile scales by h^{-d}.
  const Eigen::VectorXd ket_profile = r.phi2_profile / lat.cell_volume();
  const Eigen::VectorXd literal = 0.5 * convention_kappa * detail::power_row(spec, 0.25, x0).array().square().matrix();
  r.literal_form_residual = (ket_profile - literal).cwiseAbs().maxCoeff() / ket_profile.cwiseAbs().maxCoeff();
  r.literal_form_pass = r.literal_form_residual < 1e-9;
  r.closed_form_pass = r.phi2_closed_form_residual < 1e-9 && r.pi2_closed_form_residual < 1e-9;

  Eigen::Index arg = 0;
  r.phi2_profile.maxCoeff(&arg);
  r.peak_at_source = static_cast<std::size_t>(arg) == x0;

  const Eigen::VectorXd amplitude = r.phi2_profile.cwiseSqrt();
  const DecayWindow win = window.value_or(DecayWindow{3.0 * r.compton, 20.0 * r.compton});
  r.amplitude_fit = fit_decay_length(bin_by_distance(lat, x0, amplitude), win);
  r.width_pass = r.amplitude_fit.quality && std::abs(r.amplitude_fit.length / r.compton - 1.0) <= 0.25;
  return r;
}

struct NonRelativisticReport {
  double time = 0.0;
  double mass = 0.0;
  double low_momentum_weight = 0.0;  ///< fraction of norm with |k| < m/5
  bool precondition = false;         ///< low_momentum_weight >= 0.999
  double distance = 0.0;             ///< L2 distance between the two evolutions, unit-norm packet
  double tolerance = 0.01;
  bool pass = false;                 ///< precondition holds and distance < tolerance
};

/// Compares exp(-i R^1/2 t) with exp(-i (m + (R - m^2)/(2m)) t) on a packet.
inline NonRelativisticReport nonrelativistic_compare(const NWWavefunction& w, const Spectrum& spec, double t,
                                                     double tolerance = 0.01) {
  w.validate();
  require_same_lattice(w.lattice, spec.lattice(), "nonrelativistic_compare");
  NonRelativisticReport r;
  r.time = t;
  r.tolerance = tolerance;
  r.mass = spec.frequencies().minCoeff();
  const double m = r.mass;
  const Eigen::VectorXcd unit = w.psi / w.norm();
  const Eigen::VectorXcd c = spec.coefficients(unit);
  double low = 0.0;
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    const double keff = std::sqrt(std::max(0.0, spec.eigenvalues()[k] - m * m));
    if (keff < m / 5.0) low += std::norm(c[k]);
  }
  r.low_momentum_weight = low / c.squaredNorm();
  r.precondition = r.low_momentum_weight >= 0.999;
  Eigen::VectorXcd diff(c.size());
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    const double w2 = spec.eigenvalues()[k];
    const double exact = std::sqrt(w2);
    const double approx = m + (w2 - m * m) / (2.0 * m);
    diff[k] = c[k] * (std::polar(1.0, -exact * t) - std::polar(1.0, -approx * t));
  }
  r.distance = diff.norm();
  r.pass = r.precondition && r.distance < tolerance;
  return r;
}

struct LeakageReport {
  double time = 0.0;
  double support_radius = 0.0;  ///< r0
  double light_speed = 1.0;
  bool precondition = false;    ///< initial |psi| > 1e-12 max only within r0
  double leakage = 0.0;         ///< norm fraction beyond r0 + c t
  double phase_space_tail = 0.0;  ///< energy-density fraction of the evolved one-particle state beyond r0 + c t
};

/// Norm fraction of an evolved Newton-Wigner packet found outside the light
/// cone of its initial support.
inline LeakageReport superluminal_leakage(const NWWavefunction& w0, const Spectrum& spec, std::size_t x0, double r0,
                                          double t) {
  w0.validate();
  require_same_lattice(w0.lattice, spec.lattice(), "superluminal_leakage");
  const Lattice& lat = w0.lattice;
  LeakageReport r;
  r.time = t;
  r.support_radius = r0;
  const double peak = w0.psi.cwiseAbs().maxCoeff();
  r.precondition = true;
  for (std::size_t x = 0; x < lat.site_count(); ++x)
    if (std::abs(w0.psi[static_cast<Eigen::Index>(x)]) > 1e-12 * peak && lat.distance(x0, x) > r0) r.precondition = false;
  const NWWavefunction wt = t == 0.0 ? w0 : evolve_nw(w0, spec, t);
  const double cone = r0 + r.light_speed * t;
  const auto state = make_particle(from_nw(wt, spec), spec);
  const Eigen::VectorXd energy = diff_profile(state, spec, Probe::energy_density);
  double outside = 0.0, total = 0.0, e_out = 0.0, e_total = 0.0;
  for (std::size_t x = 0; x < lat.site_count(); ++x) {
    const auto xi = static_cast<Eigen::Index>(x);
    const double p = std::norm(wt.psi[xi]);
    total += p;
    e_total += energy[xi];
    if (lat.distance(x0, x) > cone) {
      outside += p;
      e_out += energy[xi];
    }
  }
  r.leakage = outside / total;
  r.phase_space_tail = e_out / e_total;
  return r;
}

}  // namespace emergence
