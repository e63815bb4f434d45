#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "emergence/error.hpp"

namespace emergence {

/// Periodic hypercubic lattice in 1, 2 or 3 dimensions.
///
/// Sites are numbered row-major with the last axis fastest. Lengths are in
/// lattice units scaled by `spacing`.
class Lattice {
 public:
  Lattice() = default;

  Lattice(std::vector<int> extents, double spacing = 1.0)
      : extents_(std::move(extents)), spacing_(spacing) {
    if (extents_.empty() || extents_.size() > 3)
      throw InvalidArgument("lattice dimension must be 1, 2 or 3");
    for (int n : extents_)
      if (n <= 0) throw InvalidArgument("lattice extents must be positive");
    if (!(spacing_ > 0.0) || !std::isfinite(spacing_))
      throw InvalidArgument("lattice spacing must be positive");
  }

  static Lattice line(int n, double spacing = 1.0) { return Lattice({n}, spacing); }

  int dimension() const { return static_cast<int>(extents_.size()); }
  const std::vector<int>& extents() const { return extents_; }
  int extent(int axis) const { return extents_.at(static_cast<std::size_t>(axis)); }
  double spacing() const { return spacing_; }

  std::size_t site_count() const {
    return std::accumulate(extents_.begin(), extents_.end(), std::size_t{1},
                           [](std::size_t a, int n) { return a * static_cast<std::size_t>(n); });
  }

  /// Quadrature weight spacing^d of one site.
  double cell_volume() const { return std::pow(spacing_, dimension()); }

  std::array<int, 3> coords(std::size_t site) const {
    std::array<int, 3> c{0, 0, 0};
    for (int a = dimension() - 1; a >= 0; --a) {
      const auto n = static_cast<std::size_t>(extents_[static_cast<std::size_t>(a)]);
      c[static_cast<std::size_t>(a)] = static_cast<int>(site % n);
      site /= n;
    }
    return c;
  }

  std::size_t index(const std::array<int, 3>& c) const {
    std::size_t site = 0;
    for (int a = 0; a < dimension(); ++a) {
      const int n = extents_[static_cast<std::size_t>(a)];
      const int wrapped = ((c[static_cast<std::size_t>(a)] % n) + n) % n;
      site = site * static_cast<std::size_t>(n) + static_cast<std::size_t>(wrapped);
    }
    return site;
  }

  /// Site reached from `site` by the integer offset `shift` (periodic wrap).
  std::size_t translate(std::size_t site, const std::array<int, 3>& shift) const {
    auto c = coords(site);
    for (int a = 0; a < dimension(); ++a) c[static_cast<std::size_t>(a)] += shift[static_cast<std::size_t>(a)];
    return index(c);
  }

  /// Minimum-image separation along one axis, in sites (0 <= result <= n/2).
  int axis_separation(int axis, int ci, int cj) const {
    const int n = extents_[static_cast<std::size_t>(axis)];
    const int d = std::abs(ci - cj) % n;
    return std::min(d, n - d);
  }

  /// Minimum-image Euclidean distance in length units.
  double distance(std::size_t x, std::size_t y) const {
    const auto cx = coords(x);
    const auto cy = coords(y);
    double sum = 0.0;
    for (int a = 0; a < dimension(); ++a) {
      const double d = axis_separation(a, cx[static_cast<std::size_t>(a)], cy[static_cast<std::size_t>(a)]) * spacing_;
      sum += d * d;
    }
    return std::sqrt(sum);
  }

  /// Physical length of the periodic box along `axis`.
  double box_length(int axis) const { return extent(axis) * spacing_; }

  std::string describe() const {
    std::string s = std::to_string(dimension()) + "D [";
    for (std::size_t a = 0; a < extents_.size(); ++a) {
      if (a) s += "x";
      s += std::to_string(extents_[a]);
    }
    return s + "] spacing " + std::to_string(spacing_);
  }

  friend bool operator==(const Lattice& a, const Lattice& b) {
    return a.extents_ == b.extents_ && a.spacing_ == b.spacing_;
  }

 private:
  std::vector<int> extents_{1};
  double spacing_ = 1.0;
};

inline void require_same_lattice(const Lattice& a, const Lattice& b, const char* where) {
  if (!(a == b))
    throw LatticeMismatch(std::string(where) + ": " + a.describe() + " vs " + b.describe());
}

}  // namespace emergence
