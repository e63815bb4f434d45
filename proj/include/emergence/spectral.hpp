#pragma once

// The spatial operator R of the field equation, its spectral decomposition,
// fractional powers R^lambda and the decay of their kernels.
//
// Discretization conventions: a field is a vector of site values; the
// operator matrix acts as (R f)(x) = sum_y M(x,y) f(y). The continuum kernel
// R(x,y) is M(x,y) / spacing^d, so that sum_y R(x,y) f(y) spacing^d = (R f)(x).
// Mode functions are orthonormal under <f,g> = sum_x conj(f(x)) g(x) spacing^d.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "emergence/error.hpp"
#include "emergence/lattice.hpp"
#include "emergence/numerics.hpp"

extern "C" {
#include <quadmath.h>
}

namespace emergence {

using cplx = std::complex<double>;

/// Real symmetric operator on lattice sites.
class ROperator {
 public:
  /// Wraps a dense matrix. `stencil_radius` is the locality radius in sites
  /// (negative for a nonlocal operator). `kg_mass` is set only for the
  /// translation-invariant Klein-Gordon operator m^2 - Laplacian.
  ROperator(Lattice lattice, Eigen::MatrixXd matrix, int stencil_radius = -1,
            std::optional<double> kg_mass = std::nullopt, bool translation_invariant = false)
      : lattice_(std::move(lattice)),
        matrix_(std::move(matrix)),
        stencil_radius_(stencil_radius),
        kg_mass_(kg_mass),
        translation_invariant_(translation_invariant || kg_mass.has_value()) {
    const auto n = static_cast<Eigen::Index>(lattice_.site_count());
    if (matrix_.rows() != n || matrix_.cols() != n)
      throw LatticeMismatch("operator matrix is " + std::to_string(matrix_.rows()) + "x" +
                            std::to_string(matrix_.cols()) + " for " + std::to_string(n) + " sites");
    const double scale = matrix_.cwiseAbs().maxCoeff();
    const double asym = (matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(scale, 1e-300))
      throw AxiomViolation("operator is not symmetric (max asymmetry " + std::to_string(asym) + ")");
  }

  const Lattice& lattice() const { return lattice_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  int stencil_radius() const { return stencil_radius_; }
  bool is_local() const { return stencil_radius_ >= 0; }
  std::optional<double> kg_mass() const { return kg_mass_; }
  bool translation_invariant() const { return translation_invariant_; }

  /// Continuum kernel value R(x,y).
  double kernel(std::size_t x, std::size_t y) const {
    return matrix_(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) / lattice_.cell_volume();
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& f) const { return matrix_ * f; }

 private:
  Lattice lattice_;
  Eigen::MatrixXd matrix_;
  int stencil_radius_ = -1;
  std::optional<double> kg_mass_;
  bool translation_invariant_ = false;
};

/// R = diag(m(x)^2) - (second-order central Laplacian, periodic).
///
/// A constant mass field yields the translation-invariant Klein-Gordon
/// operator, identical to build_klein_gordon.
inline ROperator build_variable_coefficient(const std::vector<double>& mass_field, const Lattice& lattice) {
  const std::size_t n = lattice.site_count();
  if (mass_field.size() != n)
    throw LatticeMismatch("mass field has " + std::to_string(mass_field.size()) + " samples for " +
                          std::to_string(n) + " sites");
  for (double m : mass_field)
    if (!(m > 0.0) || !std::isfinite(m))
      throw AxiomViolation("mass field must be strictly positive (R would have a non-positive mode)");

  const double inv_h2 = 1.0 / (lattice.spacing() * lattice.spacing());
  Eigen::MatrixXd matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t x = 0; x < n; ++x) {
    const auto i = static_cast<Eigen::Index>(x);
    matrix(i, i) += mass_field[x] * mass_field[x] + 2.0 * lattice.dimension() * inv_h2;
    for (int a = 0; a < lattice.dimension(); ++a) {
      for (int step : {-1, 1}) {
        std::array<int, 3> shift{0, 0, 0};
        shift[static_cast<std::size_t>(a)] = step;
        matrix(i, static_cast<Eigen::Index>(lattice.translate(x, shift))) -= inv_h2;
      }
    }
  }
  const bool uniform = std::all_of(mass_field.begin(), mass_field.end(),
                                   [&](double m) { return m == mass_field.front(); });
  std::optional<double> kg_mass;
  if (uniform) kg_mass = mass_field.front();
  return ROperator(lattice, std::move(matrix), 1, kg_mass);
}

/// R = m^2 - Laplacian with periodic wrap.
inline ROperator build_klein_gordon(double mass, const Lattice& lattice) {
  if (!(mass > 0.0))
    throw AxiomViolation("Klein-Gordon mass must be positive: the constant mode would have eigenvalue " +
                         std::to_string(mass * mass));
  return build_variable_coefficient(std::vector<double>(lattice.site_count(), mass), lattice);
}

namespace detail {

/// Kernel row of R^exponent for the Klein-Gordon Fourier basis, summed in
/// quad precision from the closed-form symbol. Double-precision spectral
/// sums bottom out near 1e-15 of the peak; this keeps exponentially small
/// tails resolved.
inline Eigen::VectorXd kg_power_row_quad(const Lattice& lat, double mass, double exponent, std::size_t source) {
  const int d = lat.dimension();
  const std::size_t n = lat.site_count();
  const __float128 h = lat.spacing();
  const __float128 pi = 4 * atanq(1);
  std::array<std::vector<__complex128>, 3> roots;
  std::array<std::vector<__float128>, 3> symbol;
  for (int a = 0; a < d; ++a) {
    const int na = lat.extent(a);
    auto& r = roots[static_cast<std::size_t>(a)];
    auto& sym = symbol[static_cast<std::size_t>(a)];
    r.resize(static_cast<std::size_t>(na));
    sym.resize(static_cast<std::size_t>(na));
    for (int t = 0; t < na; ++t) {
      const __float128 theta = 2 * pi * t / na;
      __real__ r[static_cast<std::size_t>(t)] = cosq(theta);
      __imag__ r[static_cast<std::size_t>(t)] = sinq(theta);
      sym[static_cast<std::size_t>(t)] = (2 - 2 * cosq(theta)) / (h * h);
    }
  }
  const __float128 norm = 1 / (static_cast<__float128>(n) * powq(h, d));
  std::vector<__float128> g(n);
  std::vector<std::array<int, 3>> jc(n);
  for (std::size_t j = 0; j < n; ++j) {
    jc[j] = lat.coords(j);
    __float128 ev = static_cast<__float128>(mass) * mass;
    for (int a = 0; a < d; ++a) ev += symbol[static_cast<std::size_t>(a)][static_cast<std::size_t>(jc[j][static_cast<std::size_t>(a)])];
    g[j] = powq(ev, exponent) * norm;
  }
  const auto cs = lat.coords(source);
  Eigen::VectorXd row(static_cast<Eigen::Index>(n));
  for (std::size_t y = 0; y < n; ++y) {
    const auto cy = lat.coords(y);
    __float128 acc = 0;
    for (std::size_t j = 0; j < n; ++j) {
      __complex128 phase = 1;
      for (int a = 0; a < d; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        const int na = lat.extent(a);
        const long long idx = (static_cast<long long>(jc[j][ua]) * (cs[ua] - cy[ua])) % na;
        phase *= roots[ua][static_cast<std::size_t>((idx + na) % na)];
      }
      acc += g[j] * crealq(phase);
    }
    row[static_cast<Eigen::Index>(y)] = static_cast<double>(acc);
  }
  return row;
}

/// Kernel rows of R^exponent keyed by exponent, shared between copies of a
/// spectrum.
struct PowerRowCache {
  std::mutex mutex;
  std::map<double, Eigen::VectorXd> rows;
};

/// out(x) = h^d sum_y row(y - x) v(y) on a periodic lattice.
inline Eigen::VectorXd circulant_apply(const Lattice& lat, const Eigen::VectorXd& row, const Eigen::VectorXd& v) {
  const std::size_t n = lat.site_count();
  const int d = lat.dimension();
  std::vector<std::array<int, 3>> c(n);
  for (std::size_t x = 0; x < n; ++x) c[x] = lat.coords(x);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t x = 0; x < n; ++x) {
    double acc = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      std::size_t idx = 0;
      for (int a = 0; a < d; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        const int na = lat.extent(a);
        idx = idx * static_cast<std::size_t>(na) + static_cast<std::size_t>(((c[y][ua] - c[x][ua]) % na + na) % na);
      }
      acc += row[static_cast<Eigen::Index>(idx)] * v[static_cast<Eigen::Index>(y)];
    }
    out[static_cast<Eigen::Index>(x)] = acc * lat.cell_volume();
  }
  return out;
}

}  // namespace detail

/// Orthonormal eigenbasis of R with strictly positive eigenvalues, ascending.
class Spectrum {
 public:
  Spectrum(Lattice lattice, Eigen::VectorXd eigenvalues, Eigen::MatrixXcd modes, bool fourier = false,
           std::vector<std::array<double, 3>> wavevectors = {}, std::optional<double> kg_mass = std::nullopt)
      : lattice_(std::move(lattice)),
        eigenvalues_(std::move(eigenvalues)),
        modes_(std::move(modes)),
        fourier_(fourier),
        wavevectors_(std::move(wavevectors)),
        kg_mass_(kg_mass) {
    if (modes_.rows() != static_cast<Eigen::Index>(lattice_.site_count()) || modes_.cols() != eigenvalues_.size())
      throw LatticeMismatch("mode matrix shape does not match lattice/eigenvalue count");
    if (eigenvalues_.size() == 0) throw InvalidArgument("empty spectrum");
    if (eigenvalues_.minCoeff() <= 0.0) throw AxiomViolation("spectrum contains a non-positive eigenvalue");
    frequencies_ = eigenvalues_.cwiseSqrt();
  }

  const Lattice& lattice() const { return lattice_; }
  std::size_t mode_count() const { return static_cast<std::size_t>(eigenvalues_.size()); }
  /// omega_k^2
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  /// omega_k
  const Eigen::VectorXd& frequencies() const { return frequencies_; }
  /// Column k is f_k sampled on sites.
  const Eigen::MatrixXcd& modes() const { return modes_; }
  bool fourier() const { return fourier_; }
  const std::vector<std::array<double, 3>>& wavevectors() const { return wavevectors_; }
  /// Mass of the complete Klein-Gordon Fourier basis this spectrum came from.
  std::optional<double> kg_mass() const { return kg_mass_; }

  /// c_k = <f_k, v> under the weighted L2 product.
  Eigen::VectorXcd coefficients(const Eigen::VectorXcd& v) const {
    return (modes_.adjoint() * v) * lattice_.cell_volume();
  }
  Eigen::VectorXcd coefficients(const Eigen::VectorXd& v) const { return coefficients(Eigen::VectorXcd(v.cast<cplx>())); }

  /// sum_k c_k f_k
  Eigen::VectorXcd synthesize(const Eigen::VectorXcd& c) const { return modes_ * c; }

  /// g(R) v for a spectral function g of the eigenvalue omega^2.
  template <class G>
  Eigen::VectorXcd apply(G&& g, const Eigen::VectorXcd& v) const {
    Eigen::VectorXcd c = coefficients(v);
    for (Eigen::Index k = 0; k < c.size(); ++k) c[k] *= g(eigenvalues_[k]);
    return synthesize(c);
  }

  /// g(R) v for real v and real g; the result is real up to rounding.
  template <class G>
  Eigen::VectorXd apply_real(G&& g, const Eigen::VectorXd& v) const {
    return apply(std::forward<G>(g), Eigen::VectorXcd(v.cast<cplx>())).real();
  }

  /// R^exponent v. For a complete Klein-Gordon Fourier basis this is a
  /// circulant product with a quad-precision kernel row, which keeps
  /// exponentially small tails accurate relative to their own size.
  Eigen::VectorXd apply_power(double exponent, const Eigen::VectorXd& v) const {
    if (kg_mass_) return detail::circulant_apply(lattice_, power_row(exponent), v);
    return apply_real([exponent](double w2) { return std::pow(w2, exponent); }, v);
  }
  Eigen::VectorXcd apply_power(double exponent, const Eigen::VectorXcd& v) const {
    if (kg_mass_) {
      const Eigen::VectorXd re = apply_power(exponent, Eigen::VectorXd(v.real()));
      const Eigen::VectorXd im = apply_power(exponent, Eigen::VectorXd(v.imag()));
      Eigen::VectorXcd out(v.size());
      out.real() = re;
      out.imag() = im;
      return out;
    }
    return apply([exponent](double w2) { return std::pow(w2, exponent); }, v);
  }

  /// Cached kernel row R^exponent(0, y) of a complete Klein-Gordon basis.
  const Eigen::VectorXd& power_row(double exponent) const {
    if (!kg_mass_) throw InvalidArgument("cached kernel rows need a complete Klein-Gordon basis");
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->rows.find(exponent);
    if (it == cache_->rows.end())
      it = cache_->rows.emplace(exponent, detail::kg_power_row_quad(lattice_, *kg_mass_, exponent, 0)).first;
    return it->second;
  }

  /// Spectrum restricted to a subset of modes (in the given order).
  Spectrum restricted(const std::vector<std::size_t>& keep) const {
    Eigen::VectorXd ev(static_cast<Eigen::Index>(keep.size()));
    Eigen::MatrixXcd md(modes_.rows(), static_cast<Eigen::Index>(keep.size()));
    std::vector<std::array<double, 3>> kv;
    for (std::size_t j = 0; j < keep.size(); ++j) {
      if (keep[j] >= mode_count()) throw InvalidArgument("mode index out of range");
      ev[static_cast<Eigen::Index>(j)] = eigenvalues_[static_cast<Eigen::Index>(keep[j])];
      md.col(static_cast<Eigen::Index>(j)) = modes_.col(static_cast<Eigen::Index>(keep[j]));
      if (!wavevectors_.empty()) kv.push_back(wavevectors_[keep[j]]);
    }
    return Spectrum(lattice_, std::move(ev), std::move(md), fourier_, std::move(kv));  // no longer a full basis
  }

 private:
  Lattice lattice_;
  Eigen::VectorXd eigenvalues_;
  Eigen::VectorXd frequencies_;
  Eigen::MatrixXcd modes_;
  bool fourier_ = false;
  std::vector<std::array<double, 3>> wavevectors_;
  std::optional<double> kg_mass_;
  std::shared_ptr<detail::PowerRowCache> cache_ = std::make_shared<detail::PowerRowCache>();
};

enum class EigenMethod { automatic, dense, fourier };

namespace detail {

inline void check_positivity(const Eigen::VectorXd& ev) {
  const double top = ev.maxCoeff();
  const double floor = 1e-10 * std::max(top, 0.0);
  if (!(top > 0.0) || ev.minCoeff() <= floor)
    throw AxiomViolation("eigenvalue " + std::to_string(ev.minCoeff()) + " at or below positivity floor " +
                         std::to_string(floor));
}

inline Spectrum fourier_spectrum(const Lattice& lattice, double mass) {
  const std::size_t n = lattice.site_count();
  const int d = lattice.dimension();
  const double h = lattice.spacing();
  const double norm = 1.0 / std::sqrt(static_cast<double>(n) * lattice.cell_volume());

  struct Mode {
    double eigenvalue;
    std::size_t index;
    std::array<double, 3> k;
  };
  std::vector<Mode> table;
  table.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto c = lattice.coords(j);
    Mode m{mass * mass, j, {0.0, 0.0, 0.0}};
    for (int a = 0; a < d; ++a) {
      const int na = lattice.extent(a);
      int ja = c[static_cast<std::size_t>(a)];
      if (2 * ja > na) ja -= na;
      const double ka = 2.0 * std::numbers::pi * ja / (na * h);
      m.k[static_cast<std::size_t>(a)] = ka;
      // cos is even, so +k and -k give bitwise-identical eigenvalues.
      m.eigenvalue += (2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * std::abs(ja) / na)) / (h * h);
    }
    table.push_back(m);
  }
  std::stable_sort(table.begin(), table.end(),
                   [](const Mode& x, const Mode& y) { return x.eigenvalue < y.eigenvalue; });

  Eigen::VectorXd ev(static_cast<Eigen::Index>(n));
  Eigen::MatrixXcd modes(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<std::array<double, 3>> kv;
  kv.reserve(n);
  for (std::size_t col = 0; col < n; ++col) {
    ev[static_cast<Eigen::Index>(col)] = table[col].eigenvalue;
    kv.push_back(table[col].k);
    for (std::size_t x = 0; x < n; ++x) {
      const auto c = lattice.coords(x);
      double phase = 0.0;
      for (int a = 0; a < d; ++a) phase += table[col].k[static_cast<std::size_t>(a)] * c[static_cast<std::size_t>(a)] * h;
      modes(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(col)) = std::polar(norm, phase);
    }
  }
  check_positivity(ev);
  return Spectrum(lattice, std::move(ev), std::move(modes), true, std::move(kv), mass);
}

inline Spectrum dense_spectrum(const ROperator& op) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(op.matrix());
  if (solver.info() != Eigen::Success) throw ConvergenceError("symmetric eigensolver failed");
  Eigen::VectorXd ev = solver.eigenvalues();
  check_positivity(ev);
  Eigen::MatrixXd vecs = solver.eigenvectors();

  // Re-orthonormalize each degenerate cluster by modified Gram-Schmidt in
  // index order, then fix signs so the largest component is positive.
  const double tol = 1e-10 * ev.cwiseAbs().maxCoeff();
  const Eigen::Index n = ev.size();
  for (Eigen::Index start = 0; start < n;) {
    Eigen::Index stop = start + 1;
    while (stop < n && ev[stop] - ev[stop - 1] <= tol) ++stop;
    for (Eigen::Index j = start; j < stop; ++j) {
      for (Eigen::Index i = start; i < j; ++i) vecs.col(j) -= vecs.col(i).dot(vecs.col(j)) * vecs.col(i);
      vecs.col(j).normalize();
    }
    start = stop;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::Index arg = 0;
    const double top = vecs.col(j).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::abs(vecs(i, j)) >= top * (1.0 - 1e-9)) {
        arg = i;
        break;
      }
    if (vecs(arg, j) < 0.0) vecs.col(j) *= -1.0;
  }
  Eigen::MatrixXcd modes = (vecs / std::sqrt(op.lattice().cell_volume())).cast<cplx>();
  return Spectrum(op.lattice(), std::move(ev), std::move(modes), false);
}

}  // namespace detail

/// Spectral decomposition of R.
///
/// Translation-invariant Klein-Gordon operators use the closed-form Fourier
/// basis unless a dense solve is requested; everything else goes through the
/// dense symmetric eigensolver.
inline Spectrum diagonalize(const ROperator& op, EigenMethod method = EigenMethod::automatic) {
  if (method == EigenMethod::fourier && !op.kg_mass())
    throw InvalidArgument("Fourier diagonalization needs a translation-invariant Klein-Gordon operator");
  if (method != EigenMethod::dense && op.kg_mass()) return detail::fourier_spectrum(op.lattice(), *op.kg_mass());
  return detail::dense_spectrum(op);
}

namespace detail {

/// Row `source` of the continuum kernel of g(R): sum_k g_k f_k(source) conj(f_k(y)).
template <class G>
Eigen::VectorXd kernel_row(const Spectrum& spec, G&& g, std::size_t source) {
  const auto& v = spec.modes();
  Eigen::VectorXcd weights(v.cols());
  for (Eigen::Index k = 0; k < v.cols(); ++k) weights[k] = g(spec.eigenvalues()[k]) * v(static_cast<Eigen::Index>(source), k);
  return (v.conjugate() * weights).real();
}

/// Kernel row of R^exponent, using the quad-precision path when possible.
inline Eigen::VectorXd power_row(const Spectrum& spec, double exponent, std::size_t source) {
  if (spec.kg_mass()) {
    const Lattice& lat = spec.lattice();
    const Eigen::VectorXd& base = spec.power_row(exponent);
    const auto cs = lat.coords(source);
    Eigen::VectorXd row(base.size());
    for (std::size_t y = 0; y < lat.site_count(); ++y) {
      const auto cy = lat.coords(y);
      row[static_cast<Eigen::Index>(y)] = base[static_cast<Eigen::Index>(lat.index({cy[0] - cs[0], cy[1] - cs[1], cy[2] - cs[2]}))];
    }
    return row;
  }
  return kernel_row(spec, [exponent](double w2) { return std::pow(w2, exponent); }, source);
}

}  // namespace detail

/// Dense operator R^exponent = sum_k omega_k^(2 exponent) f_k f_k^*.
inline ROperator fractional_power(const Spectrum& spec, double exponent) {
  const Lattice& lat = spec.lattice();
  const std::size_t n = lat.site_count();
  const double vol = lat.cell_volume();
  auto g = [exponent](double w2) { return std::pow(w2, exponent); };
  Eigen::MatrixXd matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  if (spec.fourier() && spec.mode_count() == n) {
    // Circulant: one kernel row determines the whole matrix.
    const Eigen::VectorXd row = detail::power_row(spec, exponent, 0);
    for (std::size_t x = 0; x < n; ++x) {
      const auto cx = lat.coords(x);
      for (std::size_t y = 0; y < n; ++y) {
        const auto cy = lat.coords(y);
        std::array<int, 3> diff{cy[0] - cx[0], cy[1] - cx[1], cy[2] - cx[2]};
        matrix(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = vol * row[static_cast<Eigen::Index>(lat.index(diff))];
      }
    }
  } else {
    const auto& v = spec.modes();
    Eigen::VectorXd w(v.cols());
    for (Eigen::Index k = 0; k < v.cols(); ++k) w[k] = g(spec.eigenvalues()[k]);
    matrix = (v * w.asDiagonal() * v.adjoint()).real() * vol;
    matrix = 0.5 * (matrix + matrix.transpose()).eval();
  }
  return ROperator(lat, std::move(matrix), -1, std::nullopt, spec.fourier());
}

struct KernelSample {
  double distance = 0.0;
  double value = 0.0;  ///< max |R^lambda(source, y)| over sites y in the distance bin
};

struct KernelProfile {
  std::size_t source = 0;
  double exponent = 0.0;
  std::vector<KernelSample> samples;  ///< ascending distance
};

/// Bins |values| by minimum-image distance from `source` (rounded to 1e-9),
/// keeping the largest magnitude per bin.
inline std::vector<KernelSample> bin_by_distance(const Lattice& lat, std::size_t source, const Eigen::VectorXd& values) {
  std::map<long long, KernelSample> bins;
  for (std::size_t y = 0; y < lat.site_count(); ++y) {
    const double d = lat.distance(source, y);
    const long long key = std::llround(d * 1e9);
    const double mag = std::abs(values[static_cast<Eigen::Index>(y)]);
    auto [it, inserted] = bins.try_emplace(key, KernelSample{static_cast<double>(key) * 1e-9, mag});
    if (!inserted) it->second.value = std::max(it->second.value, mag);
  }
  std::vector<KernelSample> out;
  out.reserve(bins.size());
  for (const auto& [key, s] : bins) out.push_back(s);
  return out;
}

/// Kernel profile of R^exponent computed from a spectrum.
inline KernelProfile kernel_profile(const Spectrum& spec, double exponent, std::size_t source) {
  if (source >= spec.lattice().site_count()) throw InvalidArgument("source site out of range");
  const Eigen::VectorXd row = detail::power_row(spec, exponent, source);
  return {source, exponent, bin_by_distance(spec.lattice(), source, row)};
}

/// Kernel profile of R^exponent.
///
/// Nonnegative integer exponents use repeated matrix products so entries
/// outside the stencil reach stay exactly zero; other exponents go through
/// the spectral sum.
inline KernelProfile kernel_profile(const ROperator& op, double exponent, std::size_t source) {
  const Lattice& lat = op.lattice();
  if (source >= lat.site_count()) throw InvalidArgument("source site out of range");
  if (exponent >= 0.0 && exponent == std::floor(exponent) && exponent <= 64.0) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lat.site_count()));
    row[static_cast<Eigen::Index>(source)] = 1.0;
    for (int i = 0; i < static_cast<int>(exponent); ++i) row = op.matrix().transpose() * row;
    row /= lat.cell_volume();
    return {source, exponent, bin_by_distance(lat, source, row)};
  }
  return kernel_profile(diagonalize(op), exponent, source);
}

struct DecayWindow {
  double d_min = 0.0;
  double d_max = 0.0;
};

struct DecayFit {
  double length = std::numeric_limits<double>::quiet_NaN();
  DecayWindow window;
  double slope = 0.0;
  double residual = 0.0;  ///< RMS of the log-linear fit residuals
  std::size_t samples = 0;
  bool quality = false;
  std::string diagnostic;
};

/// Log-linear least squares of ln|value| against distance inside the window.
///
/// With `power_exponent` p the fit model is value ~ exp(-d/L) / d^p, which
/// removes the algebraic prefactor of branch-point asymptotics. Only
/// strictly positive samples are used.
inline DecayFit fit_decay_length(const std::vector<KernelSample>& samples, DecayWindow window,
                                 double power_exponent = 0.0) {
  DecayFit fit;
  fit.window = window;
  std::vector<double> xs, ys;
  for (const auto& s : samples) {
    if (s.distance < window.d_min - 1e-12 || s.distance > window.d_max + 1e-12) continue;
    if (!(s.value > 0.0) || !std::isfinite(s.value)) continue;
    if (power_exponent != 0.0 && !(s.distance > 0.0)) continue;
    xs.push_back(s.distance);
    ys.push_back(std::log(s.value) + power_exponent * (power_exponent != 0.0 ? std::log(s.distance) : 0.0));
  }
  fit.samples = xs.size();
  if (xs.size() < 6) {
    fit.diagnostic = "insufficient samples in window (" + std::to_string(xs.size()) + " < 6)";
    return fit;
  }
  const auto line = numerics::fit_line(xs, ys);
  fit.slope = line.slope;
  fit.residual = line.rms_residual;
  if (!(line.slope < 0.0)) {
    fit.diagnostic = "non-negative slope: no decay";
    return fit;
  }
  fit.length = -1.0 / line.slope;
  fit.quality = fit.residual < 0.5;
  if (!fit.quality) fit.diagnostic = "log-linear residual above 0.5";
  return fit;
}

inline DecayFit fit_decay_length(const KernelProfile& profile, DecayWindow window, double power_exponent = 0.0) {
  return fit_decay_length(profile.samples, window, power_exponent);
}

}  // namespace emergence
