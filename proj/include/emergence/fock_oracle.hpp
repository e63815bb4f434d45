#pragma once

// Brute-force ground truth: a truncated Fock space over a handful of retained
// modes, with explicit sparse ladder matrices. Analytic one-particle formulas
// are validated against expectation values computed here.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "emergence/error.hpp"
#include "emergence/modes.hpp"
#include "emergence/numerics.hpp"
#include "emergence/spectral.hpp"

namespace emergence {

using SparseOp = Eigen::SparseMatrix<cplx>;

inline constexpr std::size_t fock_max_modes = 3;
inline constexpr std::size_t fock_max_dimension = 100000;

class FockSpace {
 public:
  FockSpace(const Spectrum& spec, std::vector<std::size_t> modes, int n_max)
      : lattice_(spec.lattice()), modes_(std::move(modes)), n_max_(n_max) {
    if (modes_.empty() || modes_.size() > fock_max_modes)
      throw InvalidArgument("Fock oracle supports 1.." + std::to_string(fock_max_modes) + " modes, got " +
                            std::to_string(modes_.size()));
    if (n_max < 1) throw InvalidArgument("occupation cutoff must be at least 1");
    double dim = std::pow(static_cast<double>(n_max + 1), static_cast<double>(modes_.size()));
    if (dim > static_cast<double>(fock_max_dimension))
      throw InvalidArgument("Fock dimension " + std::to_string(static_cast<long long>(dim)) + " exceeds guard " +
                            std::to_string(fock_max_dimension));
    dim_ = static_cast<std::size_t>(dim);
    const auto m = static_cast<Eigen::Index>(modes_.size());
    omega_.resize(m);
    profiles_.resize(spec.modes().rows(), m);
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto k = modes_[static_cast<std::size_t>(j)];
      if (k >= spec.mode_count()) throw InvalidArgument("mode index " + std::to_string(k) + " out of range");
      omega_[j] = spec.frequencies()[static_cast<Eigen::Index>(k)];
      profiles_.col(j) = spec.modes().col(static_cast<Eigen::Index>(k));
    }
    for (std::size_t j = 0; j < modes_.size(); ++j) {
      annihilators_.push_back(build_annihilator(j));
      creators_.push_back(SparseOp(annihilators_.back().adjoint()));
    }
  }

  const Lattice& lattice() const { return lattice_; }
  std::size_t mode_count() const { return modes_.size(); }
  const std::vector<std::size_t>& retained_modes() const { return modes_; }
  int n_max() const { return n_max_; }
  std::size_t dimension() const { return dim_; }
  const Eigen::VectorXd& frequencies() const { return omega_; }
  /// Column j holds the lattice profile f_k(x) of retained mode j.
  const Eigen::MatrixXcd& profiles() const { return profiles_; }

  const SparseOp& a(std::size_t j) const { return annihilators_.at(j); }
  const SparseOp& adag(std::size_t j) const { return creators_.at(j); }

  /// Occupation of retained mode j in basis state `index` (mode 0 varies slowest).
  int occupation(std::size_t index, std::size_t j) const {
    std::size_t stride = 1;
    for (std::size_t i = modes_.size(); i-- > j + 1;) stride *= static_cast<std::size_t>(n_max_ + 1);
    return static_cast<int>((index / stride) % static_cast<std::size_t>(n_max_ + 1));
  }

  std::size_t index_of(const std::vector<int>& occ) const {
    std::size_t idx = 0;
    for (int n : occ) idx = idx * static_cast<std::size_t>(n_max_ + 1) + static_cast<std::size_t>(n);
    return idx;
  }

  SparseOp number_operator() const {
    SparseOp n(dimension_index(), dimension_index());
    for (std::size_t j = 0; j < modes_.size(); ++j) n += creators_[j] * annihilators_[j];
    return n;
  }

  /// Free Hamiltonian sum_k w_k a_k^dag a_k (vacuum energy dropped).
  SparseOp hamiltonian() const {
    SparseOp h(dimension_index(), dimension_index());
    for (std::size_t j = 0; j < modes_.size(); ++j)
      h += cplx(omega_[static_cast<Eigen::Index>(j)]) * (creators_[j] * annihilators_[j]);
    return h;
  }

  SparseOp identity() const {
    SparseOp id(dimension_index(), dimension_index());
    id.setIdentity();
    return id;
  }

  Eigen::Index dimension_index() const { return static_cast<Eigen::Index>(dim_); }

 private:
  SparseOp build_annihilator(std::size_t j) const {
    std::vector<Eigen::Triplet<cplx>> trips;
    std::size_t stride = 1;
    for (std::size_t i = modes_.size(); i-- > j + 1;) stride *= static_cast<std::size_t>(n_max_ + 1);
    for (std::size_t idx = 0; idx < dim_; ++idx) {
      const int n = occupation(idx, j);
      if (n == 0) continue;
      trips.emplace_back(static_cast<Eigen::Index>(idx - stride), static_cast<Eigen::Index>(idx),
                         cplx(std::sqrt(static_cast<double>(n))));
    }
    SparseOp op(dimension_index(), dimension_index());
    op.setFromTriplets(trips.begin(), trips.end());
    return op;
  }

  Lattice lattice_;
  std::vector<std::size_t> modes_;
  int n_max_;
  std::size_t dim_ = 0;
  Eigen::VectorXd omega_;
  Eigen::MatrixXcd profiles_;
  std::vector<SparseOp> annihilators_;
  std::vector<SparseOp> creators_;
};

inline FockSpace build_fock(const Spectrum& spec, std::vector<std::size_t> modes, int n_max = 14) {
  return FockSpace(spec, std::move(modes), n_max);
}

struct FockVector {
  Eigen::VectorXcd amplitudes;
  double truncation_bound = 0.0;  ///< upper bound on the norm-squared lost to the cutoff
  bool guard_violated = false;    ///< some |alpha_k| exceeded n_max/4

  double norm() const { return amplitudes.norm(); }
};

inline FockVector vacuum(const FockSpace& space) {
  FockVector v{Eigen::VectorXcd::Zero(space.dimension_index())};
  v.amplitudes[0] = 1.0;
  return v;
}

/// Rigorous bound on sum_{n > n_max} e^{-x} x^n / n! for x = |alpha|^2, from
/// the Lagrange remainder of the exponential series.
inline double coherent_tail_bound(double abs_alpha, int n_max) {
  const double x = abs_alpha * abs_alpha;
  if (x == 0.0) return 0.0;
  return std::exp(static_cast<double>(n_max + 1) * std::log(x) - std::lgamma(static_cast<double>(n_max + 2)));
}

namespace detail {
/// Per-mode coefficients alpha^n / sqrt(n!) for n = 0..n_max (no Gaussian factor).
inline std::vector<cplx> coherent_series(cplx alpha, int n_max) {
  std::vector<cplx> c(static_cast<std::size_t>(n_max + 1));
  c[0] = 1.0;
  for (int n = 1; n <= n_max; ++n) c[static_cast<std::size_t>(n)] = c[static_cast<std::size_t>(n - 1)] * alpha / std::sqrt(static_cast<double>(n));
  return c;
}

inline void require_direction_size(const FockSpace& space, const Eigen::VectorXcd& v) {
  if (static_cast<std::size_t>(v.size()) != space.mode_count())
    throw InvalidArgument("direction has " + std::to_string(v.size()) + " entries, Fock space retains " +
                          std::to_string(space.mode_count()) + " modes");
}
}  // namespace detail

/// Product of per-mode coherent states e^{-|a|^2/2} sum_n a^n/sqrt(n!) |n>.
inline FockVector coherent_state(const FockSpace& space, const Eigen::VectorXcd& alpha) {
  detail::require_direction_size(space, alpha);
  std::vector<std::vector<cplx>> series;
  FockVector out{Eigen::VectorXcd(space.dimension_index())};
  double prefactor = 1.0;
  for (Eigen::Index j = 0; j < alpha.size(); ++j) {
    const double mag = std::abs(alpha[j]);
    series.push_back(detail::coherent_series(alpha[j], space.n_max()));
    prefactor *= std::exp(-0.5 * mag * mag);
    out.truncation_bound += coherent_tail_bound(mag, space.n_max());
    if (mag > space.n_max() / 4.0) out.guard_violated = true;
  }
  for (std::size_t idx = 0; idx < space.dimension(); ++idx) {
    cplx amp = prefactor;
    for (std::size_t j = 0; j < space.mode_count(); ++j) amp *= series[j][static_cast<std::size_t>(space.occupation(idx, j))];
    out.amplitudes[static_cast<Eigen::Index>(idx)] = amp;
  }
  return out;
}

/// Creation operator A^dag = sum_k alpha_k a_k^dag along a mode direction.
inline SparseOp creation_along(const FockSpace& space, const Eigen::VectorXcd& direction) {
  detail::require_direction_size(space, direction);
  SparseOp op(space.dimension_index(), space.dimension_index());
  for (std::size_t j = 0; j < space.mode_count(); ++j) op += direction[static_cast<Eigen::Index>(j)] * space.adag(j);
  return op;
}

/// e^{-|z|^2/2} e^{z A^dag}|0>, summing the exponential series until it
/// terminates (A^dag is nilpotent on the truncated space).
inline FockVector displacement(const FockSpace& space, const Eigen::VectorXcd& direction, cplx z) {
  detail::require_direction_size(space, direction);
  if (std::abs(direction.squaredNorm() - 1.0) > 1e-12)
    throw InvalidArgument("displacement direction must satisfy sum |alpha_k|^2 = 1");
  const SparseOp raise = creation_along(space, direction);
  FockVector out = vacuum(space);
  Eigen::VectorXcd term = out.amplitudes;
  const int max_order = static_cast<int>(space.mode_count()) * space.n_max();
  for (int n = 1; n <= max_order; ++n) {
    term = (z / static_cast<double>(n)) * (raise * term);
    if (term.squaredNorm() == 0.0) break;
    out.amplitudes += term;
  }
  out.amplitudes *= std::exp(-0.5 * std::norm(z));
  for (Eigen::Index j = 0; j < direction.size(); ++j) {
    const double mag = std::abs(z * direction[j]);
    out.truncation_bound += coherent_tail_bound(mag, space.n_max());
    if (mag > space.n_max() / 4.0) out.guard_violated = true;
  }
  return out;
}

/// sum_k alpha_k a_k^dag |0>.
inline FockVector one_particle(const FockSpace& space, const Eigen::VectorXcd& direction) {
  const auto vac = vacuum(space);
  return {creation_along(space, direction) * vac.amplitudes};
}

enum class FieldKind { phi, pi, root_phi };

/// Field operator at a site, built from the retained modes:
///   phi      = sum (f a + f* a^dag) / sqrt(2w)
///   pi       = sum -i sqrt(w/2) (f a - f* a^dag)
///   root_phi = (R^1/2 phi)(x) = sum sqrt(w/2) (f a + f* a^dag)
inline SparseOp field_operator(const FockSpace& space, std::size_t site, FieldKind which) {
  if (site >= space.lattice().site_count()) throw InvalidArgument("site index out of range");
  SparseOp op(space.dimension_index(), space.dimension_index());
  for (std::size_t j = 0; j < space.mode_count(); ++j) {
    const double w = space.frequencies()[static_cast<Eigen::Index>(j)];
    const cplx f = space.profiles()(static_cast<Eigen::Index>(site), static_cast<Eigen::Index>(j));
    cplx c;
    switch (which) {
      case FieldKind::phi: c = f / std::sqrt(2.0 * w); break;
      case FieldKind::pi: c = cplx(0.0, -1.0) * std::sqrt(w / 2.0) * f; break;
      case FieldKind::root_phi: c = std::sqrt(w / 2.0) * f; break;
    }
    op += c * space.a(j) + std::conj(c) * space.adag(j);
  }
  return op;
}

inline void require_state(const FockSpace& space, const FockVector& state) {
  if (state.amplitudes.size() != space.dimension_index())
    throw InvalidArgument("Fock vector dimension does not match the space");
  if (!(state.amplitudes.squaredNorm() > 0.0)) throw InvalidArgument("expectation value of a zero-norm state");
}

/// <s|op|s> / <s|s>.
inline cplx expectation(const FockSpace& space, const FockVector& state, const SparseOp& op) {
  require_state(space, state);
  return state.amplitudes.dot(op * state.amplitudes) / state.amplitudes.squaredNorm();
}

/// <s|op^2|s> / <s|s> for Hermitian op, as ||op s||^2 / ||s||^2.
inline double expectation_of_square(const FockSpace& space, const FockVector& state, const SparseOp& op) {
  require_state(space, state);
  return (op * state.amplitudes).squaredNorm() / state.amplitudes.squaredNorm();
}

/// exp(-i H t)|s> with H the diagonal free Hamiltonian.
inline FockVector evolve_fock(const FockSpace& space, const FockVector& state, double t) {
  FockVector out = state;
  for (std::size_t idx = 0; idx < space.dimension(); ++idx) {
    double e = 0.0;
    for (std::size_t j = 0; j < space.mode_count(); ++j)
      e += space.frequencies()[static_cast<Eigen::Index>(j)] * space.occupation(idx, j);
    out.amplitudes[static_cast<Eigen::Index>(idx)] *= std::polar(1.0, -e * t);
  }
  return out;
}

/// Restriction of a full mode vector to the retained modes.
inline Eigen::VectorXcd restrict_modes(const FockSpace& space, const ModeVector& m) {
  Eigen::VectorXcd out(static_cast<Eigen::Index>(space.mode_count()));
  for (std::size_t j = 0; j < space.mode_count(); ++j) out[static_cast<Eigen::Index>(j)] = m.alpha[static_cast<Eigen::Index>(space.retained_modes()[j])];
  return out;
}

struct SmallStateReport {
  std::vector<double> lambdas;
  std::vector<double> residuals;
  double exponent = 0.0;  ///< log-log slope of residual against lambda
  bool monotone = false;
  bool pass = false;      ///< exponent within 2 +- 0.1 and monotone
};

/// || D(lambda)|0> - (|0> + lambda |direction>) || over a sweep of lambda.
inline SmallStateReport small_state_limit_check(const FockSpace& space, const Eigen::VectorXcd& direction,
                                                const std::vector<double>& lambdas) {
  SmallStateReport r;
  const Eigen::VectorXcd vac = vacuum(space).amplitudes;
  const Eigen::VectorXcd one = one_particle(space, direction).amplitudes;
  std::vector<double> lx, ly;
  for (double lam : lambdas) {
    if (!(lam > 0.0 && lam <= 0.3)) throw InvalidArgument("small-state sweep needs lambda in (0, 0.3]");
    const Eigen::VectorXcd d = displacement(space, direction, lam).amplitudes;
    const double res = (d - vac - lam * one).norm();
    r.lambdas.push_back(lam);
    r.residuals.push_back(res);
    lx.push_back(std::log(lam));
    ly.push_back(std::log(res));
  }
  if (lx.size() >= 2) r.exponent = numerics::fit_line(lx, ly).slope;
  r.monotone = true;
  for (std::size_t i = 1; i < r.lambdas.size(); ++i)
    if ((r.lambdas[i] - r.lambdas[i - 1]) * (r.residuals[i] - r.residuals[i - 1]) <= 0.0) r.monotone = false;
  r.pass = r.monotone && std::abs(r.exponent - 2.0) <= 0.1;
  return r;
}

/// One oracle-versus-formula comparison.
struct OracleRecord {
  std::string formula;
  double analytic = 0.0;
  double oracle = 0.0;
  double bound = 0.0;  ///< tolerance applied: max(1e-8, truncation bound)
  bool pass = false;
};

inline OracleRecord compare_with_oracle(std::string formula, double analytic, double oracle, double truncation_bound) {
  OracleRecord r{std::move(formula), analytic, oracle, std::max(1e-8, truncation_bound), false};
  r.pass = std::abs(analytic - oracle) <= r.bound * std::max(1.0, std::abs(analytic));
  return r;
}

}  // namespace emergence
