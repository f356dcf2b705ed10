#include "oracles.hpp"
#include "wbc/distortion.hpp"
#include "wbc/errors.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace wbc;

namespace {

ManifoldSpec box2() { return ManifoldSpec::box(Eigen::Vector2d(-5, -5), Eigen::Vector2d(5, 5)); }
ManifoldSpec torus2() { return ManifoldSpec::torus(Eigen::Vector2d(1, 1)); }
ManifoldSpec sphere2() { return ManifoldSpec::sphere(2); }

Eigen::Vector3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
}

// Two-point alpha on the unit 2-sphere from the Jacobi fields of the cost:
// D_zz c at distance r has eigenvalues 1 and r cot r, det(-D_yz c) = r / sin r.
double two_point_alpha(double wx, double d) {
  const double a = (1 - wx) * d; // from x to the barycenter
  const double b = wx * d;       // from y to the barycenter
  auto rcot = [](double r) { return r < 1e-12 ? 1.0 : r / std::tan(r); };
  auto rsin = [](double r) { return r < 1e-12 ? 1.0 : r / std::sin(r); };
  return rsin(b) / (wx * rcot(a) + (1 - wx) * rcot(b));
}

} // namespace

TEST(Distortion, FlatIsOne) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 100; ++k) {
    const WeightedConfig lam{{Eigen::Vector2d(u(rng), u(rng)), Eigen::Vector2d(u(rng), u(rng)),
                              Eigen::Vector2d(u(rng), u(rng))},
                             {0.2, 0.3, 0.5}};
    EXPECT_EQ(alpha(box2(), lam, lam.points[1]).alpha, 1.0);
    const WeightedConfig local{{Eigen::Vector2d(0.3, 0.3), Eigen::Vector2d(0.3 + 0.2 * u(rng), 0.4)},
                               {0.5, 0.5}};
    EXPECT_NEAR(alpha(torus2(), local, local.points[0]).alpha, 1.0, 1e-12);
  }
}

TEST(Distortion, SphereTwoPointClosedForm) {
  for (double d : {0.2, 0.8, 1.5, 2.4})
    for (double wx : {0.25, 0.5, 0.7}) {
      const Eigen::Vector3d x(0, 0, 1), y(std::sin(d), 0, std::cos(d));
      const WeightedConfig lam{{x, y}, {wx, 1 - wx}};
      const DistortionReport r = alpha(sphere2(), lam, y);
      EXPECT_NEAR(r.alpha, two_point_alpha(wx, d), 1e-10) << d << " " << wx;
      EXPECT_NEAR(alpha_numeric(sphere2(), lam, y).alpha, r.alpha, 1e-5);
    }
}

TEST(Distortion, SphereMatchesInterpolationJacobian) {
  // At d = pi/2, t = 1/2 the alpha of the two-point lam is the classical distortion.
  const Eigen::Vector3d x(0, 0, 1), y(1, 0, 0);
  const WeightedConfig lam{{x, y}, {0.5, 0.5}};
  const double oracle_value = two_point_distortion_oracle(sphere2(), y, x, 0.5);
  EXPECT_NEAR(alpha(sphere2(), lam, y).alpha / oracle_value, 1.0, 1e-5);
}

TEST(Distortion, SphereAlphaAtLeastOne) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  int checked = 0;
  for (int k = 0; k < 300; ++k) {
    const Eigen::Vector3d c = random_unit(rng);
    WeightedConfig lam;
    for (int i = 0; i < 3; ++i) {
      Eigen::Vector3d v = random_unit(rng);
      v -= v.dot(c) * c;
      lam.points.push_back(exp_map(sphere2(), c, 1.2 * u(rng) * v.normalized()));
      lam.weights.push_back(1.0 / 3);
    }
    try {
      EXPECT_GE(alpha(sphere2(), lam, lam.points[0]).alpha, 1.0 - 1e-9);
      ++checked;
    } catch (const Error&) {
    }
  }
  EXPECT_GT(checked, 250);
}

TEST(Distortion, LowerBound) {
  EXPECT_EQ(alpha_lower_bound(torus2()), 1.0);
  EXPECT_EQ(alpha_lower_bound(sphere2()), 1.0);
  // K = -1, diam = 2, n = 2: (S(2)^{-1} * 2 / tanh 2)^{-2} with S(2) = sinh(2) / 2.
  const double s = std::sinh(2.0) / 2.0;
  const double expect = std::pow((1.0 / s) * 2.0 / std::tanh(2.0), -2.0);
  EXPECT_NEAR(alpha_lower_bound(2.0, -1.0, 2), expect, 1e-12);
}

TEST(Distortion, SingularDenominatorOnTheSphere) {
  // Antipodal weights put the barycenter where the averaged Hessian degenerates.
  const Eigen::Vector3d x(0, 0, 1), y(1, 0, 0);
  const WeightedConfig lam{{x, y}, {0.5, 0.5}};
  EXPECT_NO_THROW(alpha(sphere2(), lam, y));
  const WeightedConfig ambiguous{{x, Eigen::Vector3d(0, 0, -1)}, {0.5, 0.5}};
  EXPECT_THROW(alpha(sphere2(), ambiguous, x), Error);
}

TEST(Jacobian, SingleEntryIsExactlyOne) {
  const MeshPtr mesh = Mesh::build(torus2(), 8);
  const DensityFunction f = [](const Point& p) { return 1.5 + std::cos(2 * M_PI * p(0)); };
  OmegaSpec om{torus2(), {OmegaEntry::continuous(1.0, discretize_density(mesh, f), f)}};
  const BarycenterResult r = solve_fixed_point(om);
  const JacobianReport jr = jacobian_inequality_check(r, om, mesh);
  ASSERT_GT(jr.evaluated, 0);
  for (const auto& a : jr.atoms)
    if (a.evaluated)
      EXPECT_NEAR(a.lhs, 1.0, 1e-12);
  EXPECT_EQ(jr.fraction_within, 1.0);
}

TEST(Jacobian, TranslationPairIsOne) {
  // Translations are optimal only in flat space without wrap-around, so the
  // pair lives on the unit square with supports two cells apart.
  const ManifoldSpec b = ManifoldSpec::box(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1));
  const MeshPtr mesh = Mesh::build(b, 8);
  auto profile = [](double shift) {
    return DensityFunction([shift](const Point& p) {
      const double x = p(0) - shift;
      return x >= 0 && x < 0.75 ? 1.5 + std::cos(2 * M_PI * x / 0.75) : 0.0;
    });
  };
  OmegaSpec om{b, {OmegaEntry::continuous(0.5, discretize_density(mesh, profile(0.0)), profile(0.0)),
                   OmegaEntry::continuous(0.5, discretize_density(mesh, profile(0.25)), profile(0.25))}};
  const BarycenterResult r = solve_multimarginal(om);
  ASSERT_EQ(r.measure.size(), 48);
  const JacobianReport jr = jacobian_inequality_check(r, om, mesh);
  ASSERT_EQ(jr.evaluated, 48);
  for (const auto& a : jr.atoms)
    if (a.evaluated)
      EXPECT_NEAR(a.lhs, 1.0, 1e-9);
}
