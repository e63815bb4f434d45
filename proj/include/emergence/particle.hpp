#pragma once

// One-particle states built from classical phase points, their expectation
// value differences from the vacuum, and localization diagnostics.
//
// The difference formulas carry a single global factor kappa relative to
// the bare classical expressions:
//   <phi(x)^2>_1 - <phi(x)^2>_0 = kappa [phi(x)^2 + (R^-1/2 pi)(x)^2]
//   <pi(x)^2>_1  - <pi(x)^2>_0  = kappa [pi(x)^2 + (R^1/2 phi)(x)^2]
// for normalized states. kappa = 1/2 under the mode convention in modes.hpp
// and is checked against the Fock oracle in the test suite.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "emergence/geometry.hpp"
#include "emergence/modes.hpp"
#include "emergence/spectral.hpp"

namespace emergence {

inline constexpr double convention_kappa = 0.5;
/// Factor between the energy-density difference and 1/2 pi^2 + 1/2 (R^1/2 phi)^2.
inline constexpr double energy_kappa = 2.0 * convention_kappa;

struct OneParticleState {
  ModeVector coordinates;
  PhaseVector progenitor;

  double norm() const { return coordinates.norm_squared(); }
};

inline OneParticleState make_particle(const PhaseVector& u, const Spectrum& spec) { return {to_modes(u, spec), u}; }

inline OneParticleState particle_from_modes(const ModeVector& m, const Spectrum& spec) { return {m, from_modes(m, spec)}; }

/// Free evolution: phase rotation of the coordinates, classical flow of the progenitor.
inline OneParticleState evolve_particle(const OneParticleState& s, const Spectrum& spec, double t) {
  return {evolve_modes(s.coordinates, spec, t), evolve_phase(s.progenitor, spec, t)};
}

/// Complex superposition sum_i c_i |state_i>. The progenitor is built as
/// sum_i Re(c_i) u_i + Im(c_i) J u_i so that small field tails are not
/// swamped by the rounding of a round trip through mode space.
inline OneParticleState superpose(const std::vector<OneParticleState>& states, const std::vector<cplx>& coeffs,
                                  const Spectrum& spec) {
  if (states.empty() || states.size() != coeffs.size())
    throw InvalidArgument("superposition needs one coefficient per state");
  OneParticleState out{ModeVector{Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(spec.mode_count()))},
                       PhaseVector::zero(spec.lattice())};
  for (std::size_t i = 0; i < states.size(); ++i) {
    detail::require_modes(states[i].coordinates, spec);
    out.coordinates.alpha += coeffs[i] * states[i].coordinates.alpha;
    const PhaseVector& u = states[i].progenitor;
    if (coeffs[i].real() != 0.0) out.progenitor = out.progenitor + coeffs[i].real() * u;
    if (coeffs[i].imag() != 0.0) out.progenitor = out.progenitor + coeffs[i].imag() * apply_J(u, spec);
  }
  return out;
}

enum class Probe { phi2, pi2, energy_density };

inline std::string probe_name(Probe p) {
  switch (p) {
    case Probe::phi2: return "phi2";
    case Probe::pi2: return "pi2";
    case Probe::energy_density: return "energy_density";
  }
  return "unknown";
}

/// Difference profile of a probe at every site.
inline Eigen::VectorXd diff_profile(const OneParticleState& s, const Spectrum& spec, Probe probe) {
  const PhaseVector& u = s.progenitor;
  u.validate();
  require_same_lattice(u.lattice, spec.lattice(), "diff_profile");
  switch (probe) {
    case Probe::phi2: {
      const Eigen::VectorXd b = spec.apply_power(-0.5, u.pi);
      return convention_kappa * (u.phi.array().square() + b.array().square()).matrix();
    }
    case Probe::pi2:
    case Probe::energy_density: {
      const Eigen::VectorXd b = spec.apply_power(0.5, u.phi);
      const double f = probe == Probe::pi2 ? convention_kappa : 0.5 * energy_kappa;
      return f * (u.pi.array().square() + b.array().square()).matrix();
    }
  }
  throw InvalidArgument("unknown probe");
}

inline double phi2_diff(const OneParticleState& s, const Spectrum& spec, std::size_t x) {
  return diff_profile(s, spec, Probe::phi2)[static_cast<Eigen::Index>(x)];
}
inline double pi2_diff(const OneParticleState& s, const Spectrum& spec, std::size_t x) {
  return diff_profile(s, spec, Probe::pi2)[static_cast<Eigen::Index>(x)];
}
inline double energy_density_diff(const OneParticleState& s, const Spectrum& spec, std::size_t x) {
  return diff_profile(s, spec, Probe::energy_density)[static_cast<Eigen::Index>(x)];
}

/// <phi(x) phi(y)> in the vacuum: half the kernel of R^-1/2.
inline double vacuum_two_point(const Spectrum& spec, std::size_t x, std::size_t y) {
  const std::size_t n = spec.lattice().site_count();
  if (x >= n || y >= n) throw InvalidArgument("site index out of range");
  return 0.5 * detail::power_row(spec, -0.5, y)[static_cast<Eigen::Index>(x)];
}

/// Compton length 1/omega_min of the spectrum.
inline double compton_length(const Spectrum& spec) { return 1.0 / spec.frequencies().minCoeff(); }

struct LocalizationOptions {
  double support_threshold = 1e-6;  ///< relative to the largest |phi|, |pi|
  double window_start = 2.0;        ///< fit window start beyond the support, in Compton lengths
  double window_span = 12.0;        ///< fit window length, in Compton lengths
  double gate = 1.2;                ///< pass iff fitted length <= gate * L_c
  std::optional<double> compton;    ///< defaults to 1/omega_min
};

struct LocalizationReport {
  std::string probe;
  std::vector<KernelSample> profile;  ///< max diff value per distance from the support
  DecayFit fit;
  std::size_t support_size = 0;
  double compton = 0.0;
  double norm = 0.0;
  bool refused = false;    ///< support too large for a finite-size measurement
  bool localized = false;  ///< fit quality set and length within the gate
  std::string diagnostic;
};

namespace detail {

inline std::vector<char> threshold_support(const PhaseVector& u, double threshold) {
  const double peak = u.max_abs();
  std::vector<char> mask(static_cast<std::size_t>(u.phi.size()), 0);
  if (!(peak > 0.0)) return mask;
  for (Eigen::Index i = 0; i < u.phi.size(); ++i)
    mask[static_cast<std::size_t>(i)] = std::abs(u.phi[i]) > threshold * peak || std::abs(u.pi[i]) > threshold * peak;
  return mask;
}

/// Minimum-image distance from every site to the nearest masked site.
inline std::vector<double> distance_to_region(const Lattice& lat, const std::vector<char>& mask) {
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) members.push_back(i);
  std::vector<double> dist(lat.site_count(), std::numeric_limits<double>::infinity());
  for (std::size_t y = 0; y < lat.site_count(); ++y) {
    if (mask[y]) {
      dist[y] = 0.0;
      continue;
    }
    for (std::size_t s : members) dist[y] = std::min(dist[y], lat.distance(s, y));
  }
  return dist;
}

inline std::vector<KernelSample> bin_by(const std::vector<double>& dist, const Eigen::VectorXd& values) {
  std::map<long long, KernelSample> bins;
  for (std::size_t y = 0; y < dist.size(); ++y) {
    if (!std::isfinite(dist[y])) continue;
    const long long key = std::llround(dist[y] * 1e9);
    const double v = values[static_cast<Eigen::Index>(y)];
    auto [it, inserted] = bins.try_emplace(key, KernelSample{static_cast<double>(key) * 1e-9, v});
    if (!inserted) it->second.value = std::max(it->second.value, v);
  }
  std::vector<KernelSample> out;
  for (const auto& [k, s] : bins) out.push_back(s);
  return out;
}

}  // namespace detail

/// Localization of every probe measured from an explicit region mask.
inline std::vector<LocalizationReport> localization_report_in_region(const OneParticleState& s, const Spectrum& spec,
                                                                     const std::vector<char>& region,
                                                                     const LocalizationOptions& opt = {}) {
  const Lattice& lat = spec.lattice();
  if (region.size() != lat.site_count()) throw InvalidArgument("region mask size does not match the lattice");
  const auto region_size = static_cast<std::size_t>(std::count(region.begin(), region.end(), 1));
  const double lc = opt.compton.value_or(compton_length(spec));
  const auto dist = detail::distance_to_region(lat, region);
  std::vector<LocalizationReport> out;
  for (Probe p : {Probe::phi2, Probe::pi2, Probe::energy_density}) {
    LocalizationReport r;
    r.probe = probe_name(p);
    r.support_size = region_size;
    r.compton = lc;
    r.norm = s.norm();
    if (region_size == 0) {
      r.refused = true;
      r.diagnostic = "empty support";
    } else if (2 * region_size >= lat.site_count()) {
      r.refused = true;
      r.diagnostic = "support covers " + std::to_string(region_size) + " of " + std::to_string(lat.site_count()) +
                     " sites; decay beyond it is not measurable on this lattice";
    }
    if (!r.refused) {
      r.profile = detail::bin_by(dist, diff_profile(s, spec, p));
      r.fit = fit_decay_length(r.profile, {opt.window_start * lc, (opt.window_start + opt.window_span) * lc});
      r.localized = r.fit.quality && r.fit.length <= opt.gate * lc;
      r.diagnostic = r.localized ? "" : (r.fit.diagnostic.empty() ? "decay length exceeds gate" : r.fit.diagnostic);
    }
    out.push_back(std::move(r));
  }
  return out;
}

/// Localization measured from the thresholded support of the progenitor.
inline std::vector<LocalizationReport> localization_report(const OneParticleState& s, const Spectrum& spec,
                                                           const LocalizationOptions& opt = {}) {
  return localization_report_in_region(s, spec, detail::threshold_support(s.progenitor, opt.support_threshold), opt);
}

inline bool all_localized(const std::vector<LocalizationReport>& reports) {
  return !reports.empty() &&
         std::all_of(reports.begin(), reports.end(), [](const LocalizationReport& r) { return r.localized; });
}

/// Sites within `radius` of `center`.
inline std::vector<char> ball_region(const Lattice& lat, std::size_t center, double radius) {
  std::vector<char> mask(lat.site_count(), 0);
  for (std::size_t y = 0; y < lat.site_count(); ++y) mask[y] = lat.distance(center, y) <= radius;
  return mask;
}

struct ElpReport {
  bool precondition = false;  ///< every input state is localized around the region
  std::vector<std::vector<cplx>> coefficients;
  std::vector<std::vector<LocalizationReport>> superpositions;
  bool pass = false;
  std::string diagnostic;
};

/// Random complex superpositions of states localized around a common region
/// must stay localized around it with the same gate.
inline ElpReport elp_check(const std::vector<OneParticleState>& states, const Spectrum& spec,
                           const std::vector<char>& region, std::uint64_t seed, std::size_t count = 10,
                           const LocalizationOptions& opt = {}) {
  ElpReport r;
  r.precondition = true;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (!all_localized(localization_report_in_region(states[i], spec, region, opt))) {
      r.precondition = false;
      r.diagnostic = "input state " + std::to_string(i) + " is not localized around the region";
      return r;
    }
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  r.pass = true;
  for (std::size_t trial = 0; trial < count; ++trial) {
    std::vector<cplx> c;
    for (std::size_t i = 0; i < states.size(); ++i) {
      const double re = normal(rng);
      c.emplace_back(re, normal(rng));
    }
    auto reports = localization_report_in_region(superpose(states, c, spec), spec, region, opt);
    r.pass = r.pass && all_localized(reports);
    r.coefficients.push_back(std::move(c));
    r.superpositions.push_back(std::move(reports));
  }
  if (!r.pass) r.diagnostic = "a superposition failed the localization gate";
  return r;
}

}  // namespace emergence
