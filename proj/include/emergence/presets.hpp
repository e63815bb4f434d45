#pragma once

// Named initial conditions and seeded random states.

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "emergence/modes.hpp"

namespace emergence::presets {

/// exp(-r^2 / (2 width^2)) around `center`, using minimum-image distance.
inline Eigen::VectorXd gaussian(const Lattice& lat, std::size_t center, double width) {
  Eigen::VectorXd g(static_cast<Eigen::Index>(lat.site_count()));
  for (std::size_t x = 0; x < lat.site_count(); ++x) {
    const double r = lat.distance(center, x);
    g[static_cast<Eigen::Index>(x)] = std::exp(-r * r / (2.0 * width * width));
  }
  return g;
}

/// Gaussian bump carried by both quadratures: phi = g, pi = momentum_scale * g.
inline PhaseVector gaussian_bump(const Lattice& lat, std::size_t center, double width, double momentum_scale = 1.0) {
  const Eigen::VectorXd g = gaussian(lat, center, width);
  return {lat, g, momentum_scale * g};
}

inline PhaseVector two_bump(const Lattice& lat, std::size_t c1, std::size_t c2, double width,
                            double momentum_scale = 1.0) {
  return gaussian_bump(lat, c1, width, momentum_scale) + gaussian_bump(lat, c2, width, momentum_scale);
}

/// Phase point whose only nonzero mode coordinate is alpha_k = amplitude.
inline PhaseVector single_mode(const Spectrum& spec, std::size_t k, cplx amplitude = 1.0) {
  ModeVector m{Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(spec.mode_count()))};
  m.alpha[static_cast<Eigen::Index>(k)] = amplitude;
  return from_modes(m, spec);
}

/// Independent standard-normal phi and pi on every site.
inline PhaseVector random_phase(const Lattice& lat, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  PhaseVector u = PhaseVector::zero(lat);
  for (Eigen::Index i = 0; i < u.phi.size(); ++i) u.phi[i] = normal(rng);
  for (Eigen::Index i = 0; i < u.pi.size(); ++i) u.pi[i] = normal(rng);
  return u;
}

inline ModeVector random_modes(std::size_t count, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ModeVector m{Eigen::VectorXcd(static_cast<Eigen::Index>(count))};
  for (Eigen::Index i = 0; i < m.alpha.size(); ++i) {
    const double re = normal(rng);
    m.alpha[i] = cplx(re, normal(rng));
  }
  return m;
}

inline cplx random_complex(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double re = normal(rng);
  return {re, normal(rng)};
}

}  // namespace emergence::presets
