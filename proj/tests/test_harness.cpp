#include "wbc/errors.hpp"
#include "wbc/harness.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace wbc;

namespace {

ManifoldSpec torus2() { return ManifoldSpec::torus(Eigen::Vector2d(1, 1)); }

DensityFunction bump(double cx, double cy, double k) {
  return [=](const Point& p) {
    return std::exp(k * (std::cos(2 * M_PI * (p(0) - cx)) + std::cos(2 * M_PI * (p(1) - cy))));
  };
}

OmegaSpec torus_omega() {
  const MeshPtr mesh = Mesh::build(torus2(), 8);
  OmegaSpec om{torus2(), {}};
  om.entries.push_back(OmegaEntry::continuous(0.5, discretize_density(mesh, bump(0.4, 0.4, 0.8)),
                                              bump(0.4, 0.4, 0.8)));
  om.entries.push_back(OmegaEntry::continuous(0.5, discretize_density(mesh, bump(0.6, 0.5, 0.4)),
                                              bump(0.6, 0.5, 0.4)));
  return om;
}

std::vector<bool> box_cells(const MeshPtr& mesh, double x0, double y0, double x1, double y1) {
  std::vector<bool> s(mesh->size());
  for (int c = 0; c < mesh->size(); ++c) {
    const Point& p = mesh->center(c);
    s[c] = p(0) >= x0 && p(0) <= x1 && p(1) >= y0 && p(1) <= y1;
  }
  return s;
}

} // namespace

TEST(Report, GateAndVerdicts) {
  InequalityReport r;
  r.lhs = 1.0;
  r.rhs = 0.98;
  r.slack = 0.05;
  r.decide();
  EXPECT_TRUE(r.pass());
  r.slack = 0.0;
  r.decide();
  EXPECT_EQ(r.verdict, Verdict::Fail);
  r.verdict = Verdict::Inconclusive;
  r.decide();
  EXPECT_EQ(r.verdict, Verdict::Inconclusive);
  EXPECT_EQ(to_string(Verdict::NotApplicable), "not_applicable");
  r.set_metric("x", 2.0);
  EXPECT_EQ(r.metric("x"), 2.0);
  EXPECT_THROW(r.metric("y"), InvalidArgument);
}

TEST(Report, RefinementSlack) {
  InequalityReport a, b;
  a.lhs = 1.0;
  a.rhs = 1.1;
  b.lhs = 1.0;
  b.rhs = 1.08;
  EXPECT_NEAR(refinement_slack(a, b), 0.04, 1e-15);
}

TEST(Report, CsvHasHeaderAndRows) {
  DiagnosticsTable t{{"cell", "value"}, {{0, 1.5}, {1, 2.0}}};
  std::ostringstream s;
  t.write_csv(s);
  const std::string text = s.str();
  EXPECT_EQ(text.substr(0, 11), "cell,value\n");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}

TEST(Jensen, TorusEntropiesPass) {
  JensenOptions o;
  o.mesh_res = 8;
  o.solver.max_iter = 30;
  const PreparedOmega p = prepare_omega(torus_omega(), {}, o);
  for (const EntropySpec& e : {EntropySpec::u_infinity(), EntropySpec::un(3)}) {
    const InequalityReport r = jensen_check(p, e, 0.05);
    EXPECT_TRUE(r.pass()) << r.lhs << " " << r.rhs;
    EXPECT_TRUE(r.has_metric("w2_sq_average"));
  }
}

TEST(Jensen, PotentialAndInteraction) {
  // Squared distance is geodesically convex on the box but not on the torus.
  const ManifoldSpec t = ManifoldSpec::box(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1));
  const MeshPtr mesh = Mesh::build(t, 8);
  auto gauss = [](double cx, double cy) {
    return DensityFunction([=](const Point& p) {
      return std::exp(-((p(0) - cx) * (p(0) - cx) + (p(1) - cy) * (p(1) - cy)) / 0.05);
    });
  };
  OmegaSpec om{t, {OmegaEntry::continuous(0.5, discretize_density(mesh, gauss(0.3, 0.4)), gauss(0.3, 0.4)),
                   OmegaEntry::continuous(0.5, discretize_density(mesh, gauss(0.7, 0.6)), gauss(0.7, 0.6))}};
  JensenOptions o;
  o.mesh_res = 8;
  const PreparedOmega p = prepare_omega(om, {}, o);
  const Point c = Eigen::Vector2d(0.5, 0.5);
  const PotentialFunctional V{[t, c](const Point& x) { return cost(t, x, c); }, "potential"};
  EXPECT_TRUE(jensen_check(p, V, 1e-3).pass());
  const InteractionFunctional W{[t](const Point& x, const Point& y) { return cost(t, x, y); }, "w"};
  EXPECT_TRUE(jensen_check(p, W, 1e-3).pass());
}

TEST(Jensen, RejectsNegativeCurvatureDimension) {
  JensenOptions o;
  o.mesh_res = 8;
  const EntropySpec g = EntropySpec::u_infinity(ReferenceMeasure::gaussian(Eigen::Vector2d(0.5, 0.5), 1.0));
  EXPECT_THROW(jensen_check(torus_omega(), g, o), CDViolated);
}

TEST(Jensen, DistortedCollapsesOnFlatSpaces) {
  JensenOptions o;
  o.mesh_res = 8;
  o.solver.max_iter = 30;
  const PreparedOmega p = prepare_omega(torus_omega(), {}, o);
  const InequalityReport plain = jensen_check(p, EntropySpec::u_infinity(), 0.05);
  const InequalityReport dist = distorted_jensen_check(p, EntropySpec::u_infinity(), 0.05);
  EXPECT_NEAR(plain.rhs, dist.rhs, 1e-12);
  EXPECT_NEAR(plain.lhs, dist.lhs, 1e-12);
  EXPECT_EQ(dist.metric("alpha_min"), 1.0);
}

TEST(DensityBound, TorusAndNotApplicable) {
  const OmegaSpec om = torus_omega();
  const BarycenterResult r = solve_fixed_point(om);
  const InequalityReport rep = density_bound_check(om, r, 8);
  EXPECT_TRUE(rep.pass()) << rep.lhs << " " << rep.rhs;

  OmegaSpec dirac{torus2(), {OmegaEntry::discrete(1.0, DiscreteMeasure::dirac(torus2(), Eigen::Vector2d(0.2, 0.2)))}};
  EXPECT_EQ(density_bound_check(dirac, solve_fixed_point(dirac), 8).verdict, Verdict::NotApplicable);
}

TEST(BrunnMinkowski, SingleSetIsEquality) {
  const MeshPtr mesh = Mesh::build(torus2(), 16);
  const auto a = box_cells(mesh, 0.1, 0.1, 0.4, 0.3);
  const InequalityReport r = multiset_bm(mesh, {a}, {1.0}, 2.0);
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.lhs, r.rhs);
}

TEST(BrunnMinkowski, SameSetTwice) {
  const ManifoldSpec box = ManifoldSpec::box(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1));
  const MeshPtr mesh = Mesh::build(box, 16);
  const auto a = box_cells(mesh, 0.3, 0.3, 0.6, 0.55);
  const InequalityReport r = multiset_bm(mesh, {a, a}, {0.5, 0.5}, 2.0);
  EXPECT_TRUE(r.pass());
  EXPECT_GE(r.metric("nu_Z"), r.metric("nu_A_0"));
}

TEST(BrunnMinkowski, TwoTorusSets) {
  const MeshPtr mesh = Mesh::build(torus2(), 16);
  const auto a = box_cells(mesh, 0.1, 0.1, 0.4, 0.35);
  const auto b = box_cells(mesh, 0.3, 0.3, 0.55, 0.5);
  const InequalityReport r = multiset_bm(mesh, {a, b}, {0.5, 0.5}, 2.0);
  EXPECT_TRUE(r.pass()) << r.lhs << " " << r.rhs;
  EXPECT_EQ(r.metric("ambiguous_tuples"), 0.0);
  EXPECT_THROW(multiset_bm(mesh, {a, std::vector<bool>(mesh->size(), false)}, {0.5, 0.5}, 2.0),
               EmptySet);
}

TEST(BrunnMinkowski, RandomSetsRecordEnhancement) {
  const ManifoldSpec box = ManifoldSpec::box(Eigen::Vector2d(-2, -2), Eigen::Vector2d(2, 2));
  const MeshPtr mesh = Mesh::build(box, 12, ReferenceMeasure::gaussian(Eigen::Vector2d(0, 0), 1.0));
  RandomSetSpec rs{mesh, {0.5, 0.5},
                   {box_cells(mesh, -1.5, -1.0, -0.5, 0.5), box_cells(mesh, 0.2, -0.5, 1.2, 1.0)}};
  const InequalityReport r = random_bm(rs, std::numeric_limits<double>::infinity());
  EXPECT_TRUE(r.pass()) << r.lhs << " " << r.rhs;
  EXPECT_GT(r.metric("alpha_X_estimate"), 0.0);
  EXPECT_EQ(r.metric("K"), 1.0);
}
