#pragma once

// Phase-space points (phi, pi), their complex mode coordinates alpha_k and
// exact mode-by-mode time evolution.
//
// Convention: alpha_k = (q_k + i p_k)/sqrt2 with phi = sum q_k f_k/sqrt(w_k)
// and pi = sum p_k sqrt(w_k) f_k for real f_k; for a general orthonormal
// eigenbasis
//   alpha_k = (1/sqrt2) <f_k, sqrt(w_k) phi + i pi / sqrt(w_k)>,
//   phi = sqrt2 Re sum_k alpha_k f_k / sqrt(w_k),
//   pi  = sqrt2 Im sum_k sqrt(w_k) alpha_k f_k.
// Under this convention alpha_k(t) = alpha_k(0) exp(-i w_k t) and the complex
// structure J acts as multiplication by i.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>

#include "emergence/error.hpp"
#include "emergence/lattice.hpp"
#include "emergence/spectral.hpp"

namespace emergence {

/// Classical phase-space point: field and conjugate momentum on sites.
struct PhaseVector {
  Lattice lattice;
  Eigen::VectorXd phi;
  Eigen::VectorXd pi;

  static PhaseVector zero(const Lattice& lat) {
    const auto n = static_cast<Eigen::Index>(lat.site_count());
    return {lat, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  }

  void validate() const {
    const auto n = static_cast<Eigen::Index>(lattice.site_count());
    if (phi.size() != n || pi.size() != n)
      throw LatticeMismatch("phase vector has " + std::to_string(phi.size()) + "/" + std::to_string(pi.size()) +
                            " samples for " + std::to_string(n) + " sites");
    if (!phi.allFinite() || !pi.allFinite()) throw InvalidArgument("phase vector has non-finite entries");
  }

  PhaseVector& operator+=(const PhaseVector& o) {
    require_same_lattice(lattice, o.lattice, "phase vector sum");
    phi += o.phi;
    pi += o.pi;
    return *this;
  }
  friend PhaseVector operator+(PhaseVector a, const PhaseVector& b) { return a += b; }
  friend PhaseVector operator-(PhaseVector a, const PhaseVector& b) {
    require_same_lattice(a.lattice, b.lattice, "phase vector difference");
    a.phi -= b.phi;
    a.pi -= b.pi;
    return a;
  }
  friend PhaseVector operator*(double s, PhaseVector a) {
    a.phi *= s;
    a.pi *= s;
    return a;
  }

  /// max(|phi|, |pi|) over sites.
  double max_abs() const { return std::max(phi.cwiseAbs().maxCoeff(), pi.cwiseAbs().maxCoeff()); }
};

/// Complex mode amplitudes alpha_k, ordered as in the Spectrum.
struct ModeVector {
  Eigen::VectorXcd alpha;

  std::size_t size() const { return static_cast<std::size_t>(alpha.size()); }
  double norm_squared() const { return alpha.squaredNorm(); }
};

namespace detail {
inline void require_modes(const ModeVector& m, const Spectrum& spec) {
  if (m.size() != spec.mode_count())
    throw LatticeMismatch("mode vector has " + std::to_string(m.size()) + " entries for " +
                          std::to_string(spec.mode_count()) + " modes");
  if (!m.alpha.allFinite()) throw InvalidArgument("mode vector has non-finite entries");
}
}  // namespace detail

inline ModeVector to_modes(const PhaseVector& state, const Spectrum& spec) {
  state.validate();
  require_same_lattice(state.lattice, spec.lattice(), "to_modes");
  const Eigen::VectorXcd cphi = spec.coefficients(state.phi);
  const Eigen::VectorXcd cpi = spec.coefficients(state.pi);
  const Eigen::ArrayXd w = spec.frequencies().array();
  const cplx i(0.0, 1.0);
  Eigen::VectorXcd alpha = (cphi.array() * w.sqrt().cast<cplx>() + i * cpi.array() / w.sqrt().cast<cplx>()) / std::sqrt(2.0);
  return {std::move(alpha)};
}

inline PhaseVector from_modes(const ModeVector& modes, const Spectrum& spec) {
  detail::require_modes(modes, spec);
  const Eigen::ArrayXd w = spec.frequencies().array();
  const Eigen::VectorXcd a_phi = (modes.alpha.array() / w.sqrt().cast<cplx>()).matrix();
  const Eigen::VectorXcd a_pi = (modes.alpha.array() * w.sqrt().cast<cplx>()).matrix();
  PhaseVector out{spec.lattice(), std::sqrt(2.0) * spec.synthesize(a_phi).real(),
                  std::sqrt(2.0) * spec.synthesize(a_pi).imag()};
  return out;
}

/// alpha_k(t) = alpha_k(0) exp(-i w_k t), exactly.
inline ModeVector evolve_modes(const ModeVector& modes, const Spectrum& spec, double t) {
  detail::require_modes(modes, spec);
  ModeVector out = modes;
  for (Eigen::Index k = 0; k < out.alpha.size(); ++k) out.alpha[k] *= std::polar(1.0, -spec.frequencies()[k] * t);
  return out;
}

/// Exact field-space solution of phi'' + R phi = 0:
///   phi(t) = cos(R^1/2 t) phi + R^-1/2 sin(R^1/2 t) pi,
///   pi(t)  = -R^1/2 sin(R^1/2 t) phi + cos(R^1/2 t) pi.
/// Evaluated through spectral functions of R, independently of the mode map.
inline PhaseVector evolve_phase(const PhaseVector& u, const Spectrum& spec, double t) {
  u.validate();
  require_same_lattice(u.lattice, spec.lattice(), "evolve_phase");
  auto cos_t = [t](double w2) { return std::cos(std::sqrt(w2) * t); };
  auto sinc_t = [t](double w2) { return std::sin(std::sqrt(w2) * t) / std::sqrt(w2); };
  auto wsin_t = [t](double w2) { return std::sqrt(w2) * std::sin(std::sqrt(w2) * t); };
  return {u.lattice, spec.apply_real(cos_t, u.phi) + spec.apply_real(sinc_t, u.pi),
          spec.apply_real(cos_t, u.pi) - spec.apply_real(wsin_t, u.phi)};
}

/// H = sum_k w_k |alpha_k|^2.
inline double hamiltonian_energy(const ModeVector& modes, const Spectrum& spec) {
  detail::require_modes(modes, spec);
  return (spec.frequencies().array() * modes.alpha.array().abs2()).sum();
}

/// H = 1/2 integral (pi^2 + phi R phi), by site quadrature.
inline double field_energy(const PhaseVector& u, const ROperator& op) {
  u.validate();
  require_same_lattice(u.lattice, op.lattice(), "field_energy");
  return 0.5 * u.lattice.cell_volume() * (u.pi.squaredNorm() + u.phi.dot(op.apply(u.phi)));
}

struct CanonicalReport {
  double orthonormality_deviation = 0.0;  ///< max |<f_j,f_k> - delta_jk|
  double completeness_deviation = 0.0;    ///< max |sum_k f_k(x) f_k*(y) h^d - delta_xy|
  bool pass = false;                      ///< both deviations below 1e-10
};

/// Checks the discrete orthonormality and completeness relations that make
/// (q_k, p_k) canonical coordinates on the whole phase space.
inline CanonicalReport check_canonical(const Spectrum& spec) {
  const auto& v = spec.modes();
  const double vol = spec.lattice().cell_volume();
  CanonicalReport r;
  const Eigen::MatrixXcd gram = v.adjoint() * v * vol;
  r.orthonormality_deviation = (gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  const Eigen::MatrixXcd proj = v * v.adjoint() * vol;
  r.completeness_deviation = (proj - Eigen::MatrixXcd::Identity(proj.rows(), proj.cols())).cwiseAbs().maxCoeff();
  r.pass = r.orthonormality_deviation < 1e-10 && r.completeness_deviation < 1e-10;
  return r;
}

}  // namespace emergence
