#include "wbc/errors.hpp"
#include "wbc/measures.hpp"
#include "wbc/ot.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace wbc;

namespace {

ManifoldSpec torus1() { return ManifoldSpec::torus(Eigen::VectorXd::Ones(1)); }
ManifoldSpec torus2() { return ManifoldSpec::torus(Eigen::Vector2d(1, 1)); }

std::vector<bool> half_torus(const MeshPtr& mesh) {
  std::vector<bool> s(mesh->size());
  for (int c = 0; c < mesh->size(); ++c)
    s[c] = mesh->center(c)(0) < 0.5;
  return s;
}

} // namespace

TEST(Measures, NormalizesNearlyUnitMasses) {
  const DiscreteMeasure m(torus1(), {Point::Constant(1, 0.2), Point::Constant(1, 1.4)},
                          {0.5, 0.5 + 1e-8});
  EXPECT_NEAR(m.mass(0) + m.mass(1), 1.0, 1e-15);
  EXPECT_NEAR(m.point(1)(0), 0.4, 1e-15); // wrapped into the fundamental domain
}

TEST(Measures, RejectsBadMasses) {
  EXPECT_THROW(DiscreteMeasure(torus1(), {Point::Constant(1, 0.2)}, {0.5}), InvalidArgument);
  EXPECT_THROW(DiscreteMeasure(torus1(), {Point::Constant(1, 0.2), Point::Constant(1, 0.3)},
                               {1.5, -0.5}),
               InvalidArgument);
  EXPECT_THROW(DiscreteMeasure::from_weights(torus1(), {Point::Constant(1, 0.2)}, {0.0}),
               InvalidArgument);
}

TEST(Measures, FromWeightsDropsZeros) {
  const DiscreteMeasure m = DiscreteMeasure::from_weights(
      torus1(), {Point::Constant(1, 0.1), Point::Constant(1, 0.2), Point::Constant(1, 0.3)},
      {2.0, 0.0, 6.0});
  ASSERT_EQ(m.size(), 2);
  EXPECT_DOUBLE_EQ(m.mass(0), 0.25);
  EXPECT_DOUBLE_EQ(m.mass(1), 0.75);
}

TEST(Mesh, TorusCellsHaveEqualVolume) {
  const MeshPtr mesh = Mesh::build(torus1(), 4);
  ASSERT_EQ(mesh->size(), 4);
  for (int c = 0; c < 4; ++c)
    EXPECT_DOUBLE_EQ(mesh->volume(c), 0.25);
}

TEST(Mesh, SphereBandsSumToArea) {
  for (int res : {2, 5, 16}) {
    const MeshPtr mesh = Mesh::build(ManifoldSpec::sphere(2), res);
    EXPECT_NEAR(mesh->total_volume(), 4 * M_PI, 1e-12);
    EXPECT_EQ(mesh->size(), res * 2 * res);
  }
}

TEST(Mesh, BoxGrid) {
  const MeshPtr mesh = Mesh::build(ManifoldSpec::box(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)), 3);
  ASSERT_EQ(mesh->size(), 9);
  for (int c = 0; c < 9; ++c)
    EXPECT_NEAR(mesh->volume(c), 1.0 / 9, 1e-15);
  EXPECT_THROW(mesh->cell_of(Eigen::Vector2d(1.5, 0.5)), InvalidPoint);
}

TEST(Mesh, CellOfCenterIsItself) {
  const MeshPtr sphere = Mesh::build(ManifoldSpec::sphere(2), 6);
  for (int c = 0; c < sphere->size(); ++c)
    EXPECT_EQ(sphere->cell_of(sphere->center(c)), c);
  const MeshPtr torus = Mesh::build(torus2(), 5);
  for (int c = 0; c < torus->size(); ++c) {
    EXPECT_EQ(torus->cell_of(torus->center(c)), c);
    EXPECT_EQ(torus->neighbours(c).size(), 8u);
  }
}

TEST(Mesh, GaussianReferenceMasses) {
  const ManifoldSpec box = ManifoldSpec::box(Eigen::VectorXd::Constant(1, -8), Eigen::VectorXd::Constant(1, 8));
  const MeshPtr mesh =
      Mesh::build(box, 64, ReferenceMeasure::gaussian(Eigen::VectorXd::Zero(1), 1.0));
  // Total mass of exp(-x^2/2) over the box is sqrt(2 pi) up to the tails.
  EXPECT_NEAR(mesh->total_volume(), std::sqrt(2 * M_PI), 1e-3);
}

TEST(MeshDensity, UniformOnSet) {
  const MeshPtr mesh = Mesh::build(torus2(), 8);
  const MeshDensity full = uniform_on_set(mesh, std::vector<bool>(mesh->size(), true));
  for (int c = 0; c < mesh->size(); ++c)
    EXPECT_NEAR(full.value(c), 1.0, 1e-14);
  const MeshDensity half = uniform_on_set(mesh, half_torus(mesh));
  EXPECT_NEAR(ess_sup(half), 2.0, 1e-14);
  EXPECT_THROW(uniform_on_set(mesh, std::vector<bool>(mesh->size(), false)), EmptySet);
}

TEST(MeshDensity, ToDiscrete) {
  const MeshPtr mesh = Mesh::build(torus1(), 4);
  const DiscreteMeasure d = to_discrete(MeshDensity(mesh, Eigen::VectorXd::Ones(4)));
  ASSERT_EQ(d.size(), 4);
  for (int i = 0; i < 4; ++i)
    EXPECT_DOUBLE_EQ(d.mass(i), 0.25);
  Eigen::VectorXd one = Eigen::VectorXd::Zero(4);
  one(2) = 4.0;
  EXPECT_EQ(to_discrete(MeshDensity(mesh, one)).size(), 1);
}

TEST(MeshDensity, BinningRoundTrip) {
  const MeshPtr mesh = Mesh::build(torus2(), 4);
  Eigen::VectorXd v(16);
  for (int c = 0; c < 16; ++c)
    v(c) = 1.0 + 0.05 * c;
  const MeshDensity md = MeshDensity::from_unnormalized(mesh, v);
  const MeshDensity back = bin_to_mesh(to_discrete(md), mesh);
  EXPECT_LT((back.values() - md.values()).cwiseAbs().maxCoeff(), 1e-12);

  const MeshDensity dirac = bin_to_mesh(DiscreteMeasure::dirac(torus2(), Eigen::Vector2d(0.1, 0.1)), mesh);
  EXPECT_NEAR(dirac.value(mesh->cell_of(Eigen::Vector2d(0.1, 0.1))), 16.0, 1e-12);
}

TEST(MeshDensity, LinearDepositConservesMass) {
  const MeshPtr mesh = Mesh::build(torus2(), 8);
  const DiscreteMeasure m(torus2(), {Eigen::Vector2d(0.03, 0.97), Eigen::Vector2d(0.5, 0.51)},
                          {0.3, 0.7});
  const MeshDensity md = deposit_linear(m, mesh);
  EXPECT_NEAR(md.total_mass(), 1.0, 1e-14);
  // A constant field interpolates to itself everywhere.
  const MeshDensity one(mesh, Eigen::VectorXd::Ones(mesh->size()));
  EXPECT_NEAR(interpolate_linear(one, Eigen::Vector2d(0.99, 0.01)), 1.0, 1e-14);
}

TEST(MeshDensity, DiscretizationErrorShrinks) {
  // W2 from the cell-center discretization to a fine reference decreases in resolution.
  const ManifoldSpec t = torus2();
  const DensityFunction f = [](const Point& p) {
    return std::exp(std::cos(2 * M_PI * p(0)) + 0.5 * std::sin(2 * M_PI * p(1)));
  };
  const DiscreteMeasure ref = to_discrete(discretize_density(Mesh::build(t, 32), f));
  const double e8 = w2(to_discrete(discretize_density(Mesh::build(t, 8), f)), ref, t);
  const double e16 = w2(to_discrete(discretize_density(Mesh::build(t, 16), f)), ref, t);
  EXPECT_LT(e16, e8);
}

TEST(MeshDensity, RejectsBadValues) {
  const MeshPtr mesh = Mesh::build(torus1(), 4);
  EXPECT_THROW(MeshDensity(mesh, Eigen::VectorXd::Constant(4, 2.0)), InvalidArgument);
  Eigen::VectorXd neg = Eigen::VectorXd::Ones(4);
  neg(0) = -1.0;
  EXPECT_THROW(MeshDensity::from_unnormalized(mesh, neg), InvalidArgument);
}
