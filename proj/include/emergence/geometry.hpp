#pragma once

// Hilbert-space structure carried by the classical phase space: complex
// structure J, the one-particle inner product in three equivalent forms,
// the symplectic form and the Segal reconstruction.
//
// Sign conventions used throughout:
//   J(phi, pi)  = (-R^-1/2 pi, R^1/2 phi)           (J = i on mode coordinates)
//   Omega(u, v) = 1/2 integral (pi phi' - phi pi')   (= -Im <<u, v>>)
//   <<u, v>>    = Omega(Ju, v) - i Omega(u, v)

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <string_view>

#include "emergence/modes.hpp"
#include "emergence/spectral.hpp"

namespace emergence {

enum class InnerProductForm { qp, alpha, direct };

inline InnerProductForm parse_inner_product_form(std::string_view name) {
  if (name == "qp") return InnerProductForm::qp;
  if (name == "alpha") return InnerProductForm::alpha;
  if (name == "direct") return InnerProductForm::direct;
  throw InvalidArgument("unknown inner product form '" + std::string(name) + "'");
}

inline constexpr std::string_view symplectic_convention = "Omega(u,v) = 1/2 integral (pi phi' - phi pi') = -Im <<u,v>>";

/// The complex structure adapted to the dynamics generated by R.
class ComplexStructure {
 public:
  explicit ComplexStructure(const Spectrum& spec) : spec_(&spec) {}

  PhaseVector apply(const PhaseVector& u) const {
    u.validate();
    require_same_lattice(u.lattice, spec_->lattice(), "apply_J");
    return {u.lattice, -spec_->apply_power(-0.5, u.pi), spec_->apply_power(0.5, u.phi)};
  }

  const Spectrum& spectrum() const { return *spec_; }

 private:
  const Spectrum* spec_;
};

inline PhaseVector apply_J(const PhaseVector& u, const Spectrum& spec) { return ComplexStructure(spec).apply(u); }

namespace detail {
inline void require_pair(const PhaseVector& u, const PhaseVector& v, const Spectrum& spec, const char* what) {
  u.validate();
  v.validate();
  require_same_lattice(u.lattice, v.lattice, what);
  require_same_lattice(u.lattice, spec.lattice(), what);
}
}  // namespace detail

inline double symplectic(const PhaseVector& u, const PhaseVector& v) {
  u.validate();
  v.validate();
  require_same_lattice(u.lattice, v.lattice, "symplectic");
  return 0.5 * u.lattice.cell_volume() * (u.pi.dot(v.phi) - u.phi.dot(v.pi));
}

inline cplx inner_product(const PhaseVector& u, const PhaseVector& v, const Spectrum& spec,
                          InnerProductForm form = InnerProductForm::direct) {
  detail::require_pair(u, v, spec, "inner_product");
  switch (form) {
    case InnerProductForm::alpha:
      return to_modes(u, spec).alpha.dot(to_modes(v, spec).alpha);
    case InnerProductForm::qp: {
      const Eigen::VectorXcd a = to_modes(u, spec).alpha;
      const Eigen::VectorXcd b = to_modes(v, spec).alpha;
      const double s2 = std::sqrt(2.0);
      const Eigen::ArrayXd q = s2 * a.real().array(), p = s2 * a.imag().array();
      const Eigen::ArrayXd q2 = s2 * b.real().array(), p2 = s2 * b.imag().array();
      return 0.5 * cplx((q * q2 + p * p2).sum(), (q * p2 - p * q2).sum());
    }
    case InnerProductForm::direct: {
      // 1/2 integral [(R^1/4 phi)(R^1/4 phi') + (R^-1/4 pi)(R^-1/4 pi')] + i/2 integral (phi pi' - pi phi')
      const double vol = u.lattice.cell_volume();
      const double re = 0.5 * vol *
                        (spec.apply_power(0.25, u.phi).dot(spec.apply_power(0.25, v.phi)) +
                         spec.apply_power(-0.25, u.pi).dot(spec.apply_power(-0.25, v.pi)));
      const double im = 0.5 * vol * (u.phi.dot(v.pi) - u.pi.dot(v.phi));
      return {re, im};
    }
  }
  throw InvalidArgument("unknown inner product form");
}

/// Omega(Ju, v) - i Omega(u, v).
inline cplx segal_inner_product(const PhaseVector& u, const PhaseVector& v, const Spectrum& spec) {
  detail::require_pair(u, v, spec, "segal_inner_product");
  return {symplectic(apply_J(u, spec), v), -symplectic(u, v)};
}

/// Right-hand side of d/dt u = -J R^1/2 u.
inline PhaseVector schrodinger_rhs(const PhaseVector& u, const Spectrum& spec) {
  u.validate();
  require_same_lattice(u.lattice, spec.lattice(), "schrodinger_rhs");
  const PhaseVector r_half{u.lattice, spec.apply_power(0.5, u.phi), spec.apply_power(0.5, u.pi)};
  return -1.0 * apply_J(r_half, spec);
}

/// Hamilton's equations (pi, -R phi) evaluated with the local operator.
inline PhaseVector hamilton_rhs(const PhaseVector& u, const ROperator& op) {
  u.validate();
  require_same_lattice(u.lattice, op.lattice(), "hamilton_rhs");
  return {u.lattice, u.pi, -op.apply(u.phi)};
}

/// Measured decay of the two blocks of J, the kernels of R^1/2 and R^-1/2.
struct JLocality {
  DecayFit upper;  ///< block R^-1/2 acting on pi
  DecayFit lower;  ///< block R^1/2 acting on phi
};

inline JLocality measure_J_locality(const Spectrum& spec, std::size_t source, DecayWindow window) {
  return {fit_decay_length(kernel_profile(spec, -0.5, source), window),
          fit_decay_length(kernel_profile(spec, 0.5, source), window)};
}

}  // namespace emergence
