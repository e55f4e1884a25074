#include <doctest.h>

#include <random>

#include "phogsvm/phog.hpp"
#include "support/oracles.hpp"

using namespace phogsvm;

namespace {

PhogParams params(int L, int H, double A = 360.0, double t = 0.1) {
  PhogParams p;
  p.levels = L;
  p.bins = H;
  p.angle_range = A;
  p.edge_threshold = t;
  return p;
}

GrayImage step_edge() {
  GrayImage img = GrayImage::Zero(16, 16);
  img.rightCols(8).setOnes();
  return img;
}

// Pixel values on a 1/256 grid so every filter sum is exact in double.
GrayImage dyadic_image(std::mt19937_64& rng, long w, long h) {
  std::uniform_int_distribution<int> level(0, 255);
  GrayImage img(h, w);
  for (long i = 0; i < img.size(); ++i) img.data()[i] = level(rng) / 256.0;
  return img;
}

}  // namespace

TEST_CASE("descriptor_length") {
  CHECK(descriptor_length(2, 8) == 168);
  CHECK(descriptor_length(2, 16) == 336);
  CHECK(descriptor_length(3, 8) == 680);
  CHECK(descriptor_length(3, 16) == 1360);
  CHECK(descriptor_length(0, 8) == 8);
  for (int L = 0; L <= 4; ++L) {
    for (const int H : {4, 8, 16}) {
      long cells = 0;
      for (int l = 0; l <= L; ++l) cells += (1L << l) * (1L << l);
      CHECK(descriptor_length(L, H) == H * cells);
      CHECK(descriptor_length(L, H) * 3 == H * ((1L << (2 * (L + 1))) - 1));
    }
  }
  CHECK_THROWS_AS(descriptor_length(-1, 8), InvalidArgument);
  CHECK_THROWS_AS(descriptor_length(2, 0), InvalidArgument);
}

TEST_CASE("gradient_magnitude and gradient_orientation") {
  GrayImage gx(1, 4), gy(1, 4);
  gx << 3, 0, 1, -1;
  gy << 4, 0, 1, 0;
  const GrayImage mag = gradient_magnitude(gx, gy);
  CHECK(mag(0, 0) == 5);
  CHECK(mag(0, 1) == 0);
  CHECK(mag(0, 2) == doctest::Approx(1.41421356237).epsilon(1e-11));

  CHECK(orientation_degrees(1.0, 0.0, 360.0) == 0.0);
  CHECK(orientation_degrees(0.0, 1.0, 360.0) == 90.0);
  CHECK(orientation_degrees(-1.0, 0.0, 180.0) == 0.0);
  CHECK(orientation_degrees(-1.0, 0.0, 360.0) == 180.0);
  CHECK(orientation_degrees(0.0, -1.0, 360.0) == 270.0);
  CHECK(orientation_degrees(0.0, -1.0, 180.0) == 90.0);
  CHECK(orientation_degrees(0.0, 0.0, 360.0) == 0.0);
  CHECK(orientation_degrees(1.0, -1e-300, 360.0) == 0.0);  // would round to 360

  const GrayImage theta = gradient_orientation(gx, gy, 180.0);
  CHECK(theta(0, 3) == 0.0);
  CHECK(theta(0, 2) == doctest::Approx(45.0));

  CHECK_THROWS_AS(gradient_magnitude(gx, GrayImage(2, 2)), DimensionMismatch);
  CHECK_THROWS_AS(gradient_orientation(gx, GrayImage(1, 3), 360.0), DimensionMismatch);
}

TEST_CASE("map_orientation_to_bin") {
  CHECK(map_orientation_to_bin(0.0, 360.0, 8) == 0);
  CHECK(map_orientation_to_bin(90.0, 360.0, 8) == 2);
  CHECK(map_orientation_to_bin(359.9, 360.0, 8) == 7);
  CHECK(map_orientation_to_bin(44.999, 360.0, 8) == 0);
  CHECK(map_orientation_to_bin(45.0, 360.0, 8) == 1);
  CHECK(map_orientation_to_bin(179.99999999999997, 180.0, 16) == 15);
  CHECK(map_orientation_to_bin(360.0, 360.0, 8) == 7);  // clamp guard
}

TEST_CASE("edge_mask") {
  CHECK(edge_mask(GrayImage::Zero(4, 4), 0.1).count() == 0);
  CHECK(edge_mask(GrayImage::Zero(4, 4), 0.0).count() == 0);

  std::mt19937_64 rng(1);
  const GrayImage lap = oracle::random_image(rng, 5, 5).array() - 0.5;
  CHECK(edge_mask(lap, 0.0).count() == 25);
  CHECK(edge_mask(lap, 1.0).count() == 1);

  GrayImage impulse = GrayImage::Zero(3, 3);
  impulse(1, 1) = -4;
  impulse(0, 1) = impulse(2, 1) = impulse(1, 0) = impulse(1, 2) = 1;
  const EdgeMask m = edge_mask(impulse, 0.5);
  CHECK(m.count() == 1);
  CHECK(m(1, 1));
}

TEST_CASE("cell boundaries use floor partitioning") {
  const Eigen::VectorXi b = cell_boundaries(10, 4);
  CHECK(b(0) == 0);
  CHECK(b(1) == 2);
  CHECK(b(2) == 5);
  CHECK(b(3) == 7);
  CHECK(b(4) == 10);
}

TEST_CASE("PhogParams validation") {
  CHECK_NOTHROW(PhogParams{}.validate());
  CHECK_THROWS_AS(params(-1, 8).validate(), InvalidArgument);
  CHECK_THROWS_AS(params(2, 0).validate(), InvalidArgument);
  CHECK_THROWS_AS(params(2, 8, 90.0).validate(), InvalidArgument);
  CHECK_THROWS_AS(params(2, 8, 360.0, 1.5).validate(), InvalidArgument);
  CHECK_THROWS_AS(params(2, 8, 360.0, -0.1).validate(), InvalidArgument);
}

TEST_CASE("phog_descriptor") {
  SUBCASE("constant image gives the zero vector") {
    for (const auto& [L, H] : {std::pair{0, 8}, {2, 8}, {3, 16}}) {
      const auto d = phog_descriptor(GrayImage::Constant(32, 24, 0.6), params(L, H));
      CHECK(d.values.size() == descriptor_length(L, H));
      CHECK(d.values.isZero(0.0));
    }
  }
  SUBCASE("image must hold the finest grid") {
    CHECK_THROWS_AS(phog_descriptor(GrayImage::Ones(8, 7), params(3, 8)), ImageTooSmall);
    CHECK_NOTHROW(phog_descriptor(GrayImage::Ones(8, 8), params(3, 8)));
  }
  SUBCASE("step edge fixture") {
    const PhogParams p = params(1, 8, 360.0, 0.0);
    const auto d = phog_descriptor(step_edge(), p);
    REQUIRE(d.values.size() == 40);
    // Columns 7 and 8 carry gx = 4 at 0 degrees; each level holds half the mass.
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(40);
    expected(0) = 0.5;
    for (int cell = 0; cell < 4; ++cell) expected(8 + cell * 8) = 0.125;
    CHECK((d.values - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((d.values - oracle::phog(step_edge(), p)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(d.params == p);
  }
  SUBCASE("matches the brute-force accumulator on random images") {
    std::mt19937_64 rng(123);
    std::uniform_int_distribution<int> L(0, 3);
    std::uniform_real_distribution<double> t(0.0, 0.6);
    const int bins[] = {4, 8, 16};
    for (int trial = 0; trial < 60; ++trial) {
      const GrayImage img = oracle::random_image(rng, 16 + trial % 5, 16 + trial % 3);
      PhogParams p = params(L(rng), bins[trial % 3], trial % 2 ? 180.0 : 360.0, t(rng));
      p.grad_source = trial % 4 == 3 ? GradientSource::Laplacian : GradientSource::Image;
      const auto d = phog_descriptor(img, p);
      const Eigen::VectorXd ref = oracle::phog(img, p);
      REQUIRE(d.values.size() == ref.size());
      CHECK((d.values - ref).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
  SUBCASE("normalization, non-negativity and per-level mass") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
      const PhogParams p = params(3, 8);
      const auto d = phog_descriptor(oracle::random_image(rng, 32, 20), p);
      CHECK(d.values.minCoeff() >= 0.0);
      CHECK(std::abs(d.values.sum() - 1.0) < 1e-9);
      Eigen::Index offset = 0;
      for (int l = 0; l <= p.levels; ++l) {
        const Eigen::Index len = (Eigen::Index{1} << (2 * l)) * p.bins;
        CHECK(std::abs(d.values.segment(offset, len).sum() - 1.0 / (p.levels + 1)) < 1e-9);
        offset += len;
      }
    }
  }
  SUBCASE("unnormalized mode keeps raw vote mass") {
    PhogParams p = params(1, 8, 360.0, 0.0);
    p.normalize = false;
    const auto d = phog_descriptor(step_edge(), p);
    CHECK(d.values(0) == 128.0);
    CHECK(d.values.sum() == 256.0);
  }
  SUBCASE("intensity shift is invisible") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
      const GrayImage img = dyadic_image(rng, 24, 24);
      const auto a = phog_descriptor(img, params(2, 8));
      const auto b = phog_descriptor((img.array() + 0.375).matrix(), params(2, 8));
      CHECK(a.values == b.values);
    }
    const GrayImage img = oracle::random_image(rng, 24, 24);
    const auto a = phog_descriptor(img, params(2, 8));
    const auto b = phog_descriptor((img.array() + 0.3).matrix(), params(2, 8));
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("positive intensity scale is invisible") {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 20; ++trial) {
      const GrayImage img = oracle::random_image(rng, 24, 24);
      const auto a = phog_descriptor(img, params(3, 16));
      for (const double s : {0.01, 0.7, 3.0, 250.0}) {
        const auto b = phog_descriptor(GrayImage(s * img), params(3, 16));
        CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 1e-9);
      }
    }
  }
}
