#include "oracles.hpp"
#include "wbc/errors.hpp"
#include "wbc/geometry.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace wbc;

namespace {

ManifoldSpec box2() { return ManifoldSpec::box(Eigen::Vector2d(-5, -5), Eigen::Vector2d(5, 5)); }
ManifoldSpec torus2() { return ManifoldSpec::torus(Eigen::Vector2d(1, 1)); }
ManifoldSpec sphere2() { return ManifoldSpec::sphere(2); }

Eigen::Vector3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Vector3d v(g(rng), g(rng), g(rng));
  return v.normalized();
}

} // namespace

TEST(Geometry, CurvatureAndDiameter) {
  EXPECT_DOUBLE_EQ(sphere2().ricci_lower_bound(), 1.0);
  EXPECT_DOUBLE_EQ(ManifoldSpec::sphere(3, 2.0).ricci_lower_bound(), 0.5);
  EXPECT_DOUBLE_EQ(ManifoldSpec::sphere(2, 2.0).diameter(), 2 * M_PI);
  EXPECT_DOUBLE_EQ(torus2().ricci_lower_bound(), 0.0);
  EXPECT_NEAR(torus2().diameter(), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(box2().diameter(), std::sqrt(200.0), 1e-12);
}

TEST(Geometry, BoxDistanceIsPythagoras) {
  EXPECT_DOUBLE_EQ(distance(box2(), Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 4)), 5.0);
  EXPECT_DOUBLE_EQ(cost(box2(), Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 4)), 12.5);
}

TEST(Geometry, TorusWraps) {
  EXPECT_NEAR(distance(torus2(), Eigen::Vector2d(0.9, 0), Eigen::Vector2d(0.1, 0)), 0.2, 1e-15);
  const Tangent t = log_map(torus2(), Eigen::Vector2d(0.9, 0.5), Eigen::Vector2d(0.1, 0.5));
  EXPECT_NEAR(t.vec(0), 0.2, 1e-15);
  EXPECT_NEAR(t.vec(1), 0.0, 1e-15);
}

TEST(Geometry, SphereDistanceMatchesAtan2Oracle) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 500; ++k) {
    const Eigen::Vector3d p = random_unit(rng), q = random_unit(rng);
    EXPECT_NEAR(distance(sphere2(), p, q), oracle::sphere_distance(p, q), 1e-12);
  }
  EXPECT_NEAR(distance(sphere2(), Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(0, 0, -1)), M_PI,
              1e-15);
}

TEST(Geometry, TorusDistanceMatchesOracle) {
  const ManifoldSpec t = ManifoldSpec::torus(Eigen::Vector3d(1.0, 2.0, 0.5));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 500; ++k) {
    const Eigen::Vector3d p(u(rng), 2 * u(rng), 0.5 * u(rng));
    const Eigen::Vector3d q(u(rng), 2 * u(rng), 0.5 * u(rng));
    EXPECT_NEAR(distance(t, p, q), oracle::torus_distance(p, q, t.lengths()), 1e-13);
  }
}

TEST(Geometry, SphereExpFollowsRotation) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 200; ++k) {
    const Eigen::Vector3d p = random_unit(rng), q = random_unit(rng);
    const double d = oracle::sphere_distance(p, q);
    if (d > 3.0 || d < 1e-3)
      continue;
    const Tangent t = log_map(sphere2(), p, q);
    EXPECT_NEAR(t.vec.norm(), d, 1e-12);
    const Point mid = exp_map(sphere2(), p, 0.3 * t.vec);
    EXPECT_LT((mid - oracle::sphere_geodesic(p, q, 0.3 * d)).norm(), 1e-12);
  }
}

TEST(Geometry, ExpLogRoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 200; ++k) {
    const Eigen::Vector2d p(u(rng), u(rng)), q(u(rng), u(rng));
    const Point back = exp_map(torus2(), log_map(torus2(), p, q));
    EXPECT_LT(oracle::torus_distance(back, q, Eigen::Vector2d(1, 1)), 1e-13);
  }
}

TEST(Geometry, FlatHessiansAreIdentity) {
  const CostHessians h = cost_hessians(box2(), Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 2));
  EXPECT_LT((h.dxx - Eigen::Matrix2d::Identity()).norm(), 1e-14);
  EXPECT_LT((h.dxy_neg - Eigen::Matrix2d::Identity()).norm(), 1e-14);
}

TEST(Geometry, SphereHessiansMatchFiniteDifferences) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 30; ++k) {
    const Eigen::Vector3d p = random_unit(rng), q = random_unit(rng);
    if (oracle::sphere_distance(p, q) > 2.8)
      continue;
    const CostHessians a = cost_hessians(sphere2(), p, q);
    const CostHessians b = cost_hessians_numeric(sphere2(), p, q);
    EXPECT_LT((a.dxx - b.dxx).norm(), 1e-5);
    EXPECT_NEAR(std::abs(a.dxy_neg.determinant()), std::abs(b.dxy_neg.determinant()), 1e-5);
  }
}

TEST(Geometry, ExpconLowerBound) {
  // On the unit 2-sphere det(-D_xy c) = d / sin d, exactly the comparison value.
  for (double d : {0.1, 0.7, 1.5, 2.5}) {
    const Eigen::Vector3d p(0, 0, 1);
    const Eigen::Vector3d q(std::sin(d), 0, std::cos(d));
    const CostHessians h = cost_hessians(sphere2(), p, q);
    EXPECT_NEAR(h.dxy_neg.determinant(), d / std::sin(d), 1e-10);
    EXPECT_GE(h.dxy_neg.determinant(), expcon_lower_bound(sphere2(), d) - 1e-9);
  }
  EXPECT_DOUBLE_EQ(s_coeff(0.0, 1.3), 1.0);
  EXPECT_NEAR(s_coeff(1.0, 1.0), std::sin(1.0), 1e-15);
  EXPECT_NEAR(s_coeff(-1.0, 1.0), std::sinh(1.0), 1e-15);
}

TEST(Geometry, CutLocusIsReported) {
  EXPECT_THROW(log_map(sphere2(), Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(0, 0, -1)), CutLocus);
  EXPECT_THROW(cost_hessians(torus2(), Eigen::Vector2d(0, 0), Eigen::Vector2d(0.5, 0)), CutLocus);
}

TEST(Geometry, InvalidPointsAreRejected) {
  EXPECT_THROW(validate_point(sphere2(), Eigen::Vector3d(0, 0, 2)), InvalidPoint);
  EXPECT_THROW(validate_point(box2(), Eigen::Vector2d(6, 0)), InvalidPoint);
  EXPECT_THROW(validate_point(box2(), Eigen::Vector3d(0, 0, 0)), InvalidPoint);
  EXPECT_NO_THROW(validate_point(torus2(), Eigen::Vector2d(3.2, -1.0)));
}

TEST(Geometry, FaultHookScalesDistances) {
  {
    wbc::testing::ScopedGeometryFault fault(2.0);
    EXPECT_DOUBLE_EQ(distance(box2(), Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 4)), 10.0);
  }
  EXPECT_DOUBLE_EQ(distance(box2(), Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 4)), 5.0);
}
