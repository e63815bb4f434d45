#include <gtest/gtest.h>

#include <random>

#include "emergence/lattice.hpp"

namespace {

using emergence::Lattice;

TEST(Lattice, SiteCountIsProductOfExtents) {
  EXPECT_EQ(Lattice({4}).site_count(), 4u);
  EXPECT_EQ(Lattice({3, 5}).site_count(), 15u);
  EXPECT_EQ(Lattice({2, 3, 4}, 0.5).site_count(), 24u);
  EXPECT_DOUBLE_EQ(Lattice({2, 3, 4}, 0.5).cell_volume(), 0.125);
}

TEST(Lattice, RejectsInvalidShapes) {
  EXPECT_THROW(Lattice(std::vector<int>{}), emergence::InvalidArgument);
  EXPECT_THROW(Lattice({1, 2, 3, 4}), emergence::InvalidArgument);
  EXPECT_THROW(Lattice({0}), emergence::InvalidArgument);
  EXPECT_THROW(Lattice({4}, 0.0), emergence::InvalidArgument);
}

TEST(Lattice, IndexAndCoordsAreInverse) {
  Lattice lat({3, 4, 5});
  for (std::size_t s = 0; s < lat.site_count(); ++s) EXPECT_EQ(lat.index(lat.coords(s)), s);
}

TEST(Lattice, MinimumImageDistanceWrapsAround) {
  Lattice lat = Lattice::line(10, 0.5);
  EXPECT_DOUBLE_EQ(lat.distance(0, 9), 0.5);
  EXPECT_DOUBLE_EQ(lat.distance(0, 5), 2.5);
  EXPECT_DOUBLE_EQ(lat.distance(2, 8), 2.0);
}

TEST(Lattice, DistanceIsSymmetricAndSatisfiesTriangleInequality) {
  Lattice lat({7, 6});
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<std::size_t> pick(0, lat.site_count() - 1);
  for (int trial = 0; trial < 500; ++trial) {
    const auto x = pick(rng), y = pick(rng), z = pick(rng);
    EXPECT_DOUBLE_EQ(lat.distance(x, y), lat.distance(y, x));
    EXPECT_LE(lat.distance(x, z), lat.distance(x, y) + lat.distance(y, z) + 1e-12);
  }
}

}  // namespace
