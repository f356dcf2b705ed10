#include "wbc/selftest.hpp"

#include "wbc/barycenter.hpp"
#include "wbc/distortion.hpp"
#include "wbc/errors.hpp"
#include "wbc/functionals.hpp"
#include "wbc/harness.hpp"
#include "wbc/karcher.hpp"
#include "wbc/measures.hpp"
#include "wbc/ot.hpp"
#include "wbc/parallel.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <sstream>

namespace wbc {

namespace {

using Outcome = std::pair<bool, std::string>;

Outcome near(double got, double want, double tol) {
  std::ostringstream s;
  s.precision(17);
  s << "got " << got << ", expected " << want;
  return {std::abs(got - want) <= tol, s.str()};
}

Outcome near(const Eigen::VectorXd& got, const Eigen::VectorXd& want, double tol) {
  if (got.size() != want.size())
    return {false, "dimension mismatch"};
  std::ostringstream s;
  s.precision(17);
  s << "error " << (got - want).norm();
  return {(got - want).norm() <= tol, s.str()};
}

template <class E, class F>
Outcome throws(F&& f) {
  try {
    f();
  } catch (const E&) {
    return {true, "raised as expected"};
  } catch (const std::exception& e) {
    return {false, std::string("raised a different error: ") + e.what()};
  }
  return {false, "no error raised"};
}

Point P(std::initializer_list<double> v) {
  Point p(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v)
    p(i++) = x;
  return p;
}

class Runner {
public:
  void operator()(const std::string& module, const std::string& name,
                  const std::function<Outcome()>& f) {
    SelfTestCheck c{module, name, false, ""};
    try {
      auto [ok, detail] = f();
      c.pass = ok;
      c.detail = detail;
    } catch (const std::exception& e) {
      c.detail = std::string("unexpected error: ") + e.what();
    }
    report.failed += c.pass ? 0 : 1;
    report.checks.push_back(std::move(c));
  }
  SelfTestReport report;
};

} // namespace

SelfTestReport run_selftest(const std::string& inject_fault) {
  std::unique_ptr<testing::ScopedGeometryFault> fault;
  if (inject_fault == "geometry")
    fault = std::make_unique<testing::ScopedGeometryFault>(1.5);
  else if (!inject_fault.empty())
    throw InvalidArgument("unknown fault '" + inject_fault + "'");
  // The fault hook is thread-local, so everything runs here.
  const int saved_threads = default_threads();
  set_default_threads(1);

  const double pi = M_PI;
  const ManifoldSpec E2 = ManifoldSpec::box(P({-5, -5}), P({5, 5}));
  const ManifoldSpec T1 = ManifoldSpec::torus(P({1}));
  const ManifoldSpec T2 = ManifoldSpec::torus(P({1, 1}));
  const ManifoldSpec S2 = ManifoldSpec::sphere(2);
  const Point north = P({0, 0, 1}), south = P({0, 0, -1}), eq0 = P({1, 0, 0});
  Runner run;

  // geometry
  run("geometry", "box distance (0,0)-(3,4) is 5",
      [&] { return near(distance(E2, P({0, 0}), P({3, 4})), 5.0, 1e-12); });
  run("geometry", "torus distance wraps (0.9,0)-(0.1,0) to 0.2",
      [&] { return near(distance(T2, P({0.9, 0}), P({0.1, 0})), 0.2, 1e-12); });
  run("geometry", "sphere pole to pole is pi",
      [&] { return near(distance(S2, north, south), pi, 1e-12); });
  run("geometry", "flat log is subtraction",
      [&] { return near(log_map(E2, P({0, 0}), P({1, 2})).vec, P({1, 2}), 1e-12); });
  run("geometry", "sphere log pole to equator has norm pi/2 along longitude 0", [&] {
    return near(log_map(S2, north, eq0).vec, P({pi / 2, 0, 0}), 1e-12);
  });
  run("geometry", "torus log at half period is a cut locus",
      [&] { return throws<CutLocus>([&] { log_map(T1, P({0.1}), P({0.6})); }); });
  run("geometry", "flat exp adds",
      [&] { return near(exp_map(E2, P({0, 0}), P({1, 1})), P({1, 1}), 1e-12); });
  run("geometry", "sphere exp of length pi reaches the antipode",
      [&] { return near(exp_map(S2, north, P({pi, 0, 0})), south, 1e-12); });
  run("geometry", "torus exp wraps 0.9 + 0.3 to 0.2",
      [&] { return near(exp_map(T1, P({0.9}), P({0.3})), P({0.2}), 1e-12); });
  run("geometry", "cost (0,0)-(3,4) is 12.5",
      [&] { return near(cost(E2, P({0, 0}), P({3, 4})), 12.5, 1e-12); });
  run("geometry", "cost of a point to itself is 0",
      [&] { return near(cost(S2, eq0, eq0), 0.0, 1e-15); });
  run("geometry", "sphere antipodal cost is pi^2/2",
      [&] { return near(cost(S2, north, south), pi * pi / 2, 1e-12); });
  run("geometry", "flat cost Hessians are identities", [&] {
    const CostHessians h = cost_hessians(E2, P({0.3, -1}), P({2, 1.5}));
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
    return Outcome{(h.dxx - I).norm() < 1e-12 && (h.dxy_neg - I).norm() < 1e-12,
                   "deviation " + std::to_string((h.dxx - I).norm() + (h.dxy_neg - I).norm())};
  });
  run("geometry", "S_1(pi/2) = 2/pi", [&] { return near(s_coeff(1.0, pi / 2), 2 / pi, 1e-12); });
  run("geometry", "S_-1(1) = sinh(1)", [&] { return near(s_coeff(-1.0, 1.0), std::sinh(1.0), 1e-12); });

  // measures
  run("measures", "torus res 4 has 4 cells of volume 0.25", [&] {
    const MeshPtr m = Mesh::build(T1, 4);
    bool ok = m->size() == 4;
    for (int c = 0; ok && c < 4; ++c)
      ok = std::abs(m->volume(c) - 0.25) < 1e-15;
    return Outcome{ok, std::to_string(m->size()) + " cells"};
  });
  run("measures", "sphere res 2 volume sums to 4 pi",
      [&] { return near(Mesh::build(S2, 2)->total_volume(), 4 * pi, 1e-12); });
  run("measures", "box [0,1]^2 res 3 has 9 cells of volume 1/9", [&] {
    const MeshPtr m = Mesh::build(ManifoldSpec::box(P({0, 0}), P({1, 1})), 3);
    bool ok = m->size() == 9;
    for (int c = 0; ok && c < 9; ++c)
      ok = std::abs(m->volume(c) - 1.0 / 9) < 1e-15;
    return Outcome{ok, std::to_string(m->size()) + " cells"};
  });
  const MeshPtr t8 = Mesh::build(T1, 8);
  std::vector<bool> half(8, false);
  for (int c = 0; c < 4; ++c)
    half[c] = true;
  run("measures", "uniform on the whole torus is 1", [&] {
    const MeshDensity d = uniform_on_set(t8, std::vector<bool>(8, true));
    return near(d.values(), Eigen::VectorXd::Ones(8), 1e-12);
  });
  run("measures", "uniform on half the torus is 2 there", [&] {
    return near(ess_sup(uniform_on_set(t8, half)), 2.0, 1e-12);
  });
  run("measures", "empty selection raises EmptySet",
      [&] { return throws<EmptySet>([&] { uniform_on_set(t8, std::vector<bool>(8, false)); }); });
  run("measures", "constant density on 4 cells gives 4 atoms of mass 1/4", [&] {
    const DiscreteMeasure d =
        to_discrete(uniform_on_set(Mesh::build(T1, 4), std::vector<bool>(4, true)));
    bool ok = d.size() == 4;
    for (int i = 0; ok && i < 4; ++i)
      ok = std::abs(d.mass(i) - 0.25) < 1e-15;
    return Outcome{ok, std::to_string(d.size()) + " atoms"};
  });
  run("measures", "one-cell density gives a single Dirac", [&] {
    std::vector<bool> one(8, false);
    one[3] = true;
    return Outcome{to_discrete(uniform_on_set(t8, one)).size() == 1, "atom count"};
  });
  run("measures", "binning a cell-aligned measure is the identity", [&] {
    const MeshDensity d = uniform_on_set(t8, half);
    return near(bin_to_mesh(to_discrete(d), t8).values(), d.values(), 1e-12);
  });
  run("measures", "Dirac in a cell of volume 1/4 has value 4", [&] {
    const MeshDensity d = bin_to_mesh(DiscreteMeasure::dirac(T1, P({0.3})), Mesh::build(T1, 4));
    return near(ess_sup(d), 4.0, 1e-12);
  });

  // ot
  run("ot", "Dirac to Dirac costs d^2/2", [&] {
    const OTResult r = solve_exact(DiscreteMeasure::dirac(E2, P({0, 0})),
                                   DiscreteMeasure::dirac(E2, P({3, 4})), E2);
    return near(r.plan.transport_cost, 12.5, 1e-12);
  });
  const DiscreteMeasure mu3(E2, {P({0, 0}), P({1, 0}), P({0, 2})}, {0.2, 0.3, 0.5});
  const DiscreteMeasure nu3(E2, {P({1, 1}), P({-1, 0.5}), P({2, 2})}, {0.4, 0.4, 0.2});
  run("ot", "identical measures cost 0",
      [&] { return near(solve_exact(mu3, mu3, E2).plan.transport_cost, 0.0, 1e-12); });
  run("ot", "swapping the measures transposes the plan", [&] {
    const Eigen::MatrixXd a = solve_exact(mu3, nu3, E2).plan.coupling;
    const Eigen::MatrixXd b = solve_exact(nu3, mu3, E2).plan.coupling;
    return Outcome{(a - b.transpose()).norm() < 1e-10,
                   "deviation " + std::to_string((a - b.transpose()).norm())};
  });
  run("ot", "w2 between Diracs is the distance", [&] {
    return near(w2(DiscreteMeasure::dirac(S2, north), DiscreteMeasure::dirac(S2, eq0), S2), pi / 2,
                1e-12);
  });
  run("ot", "w2 of identical measures is 0", [&] { return near(w2(nu3, nu3, E2), 0.0, 1e-12); });
  run("ot", "conditional targets of a split row", [&] {
    TransportPlan plan;
    plan.source = DiscreteMeasure::dirac(E2, P({0, 0}));
    plan.target = DiscreteMeasure(E2, {P({1, 0}), P({0, 1})}, {0.3, 0.7});
    plan.coupling = Eigen::MatrixXd(1, 2);
    plan.coupling << 0.3, 0.7;
    const DiscreteMeasure c = conditional_targets(plan, 0, E2);
    return Outcome{c.size() == 2 && std::abs(c.mass(0) - 0.3) < 1e-15 && !is_map_like(plan, 0),
                   "row split 0.3 / 0.7"};
  });

  // karcher
  run("karcher", "flat Karcher mean is the weighted average", [&] {
    const WeightedConfig cfg{{P({0, 0}), P({2, 0}), P({0, 4})}, {0.5, 0.25, 0.25}};
    const KarcherResult k = karcher_mean(cfg, E2, P({0, 0}));
    return Outcome{(k.point - P({0.5, 1})).norm() < 1e-12 && k.iterations <= 2,
                   std::to_string(k.iterations) + " iterations"};
  });
  run("karcher", "one point is its own barycenter",
      [&] { return near(bc_map(S2, {1.0}, {eq0}), eq0, 1e-12); });
  run("karcher", "torus midpoint of 0.1 and 0.3 is 0.2",
      [&] { return near(bc_map(T1, {0.5, 0.5}, {P({0.1}), P({0.3})}), P({0.2}), 1e-12); });
  run("karcher", "flat Lipschitz inverse recovers x1", [&] {
    const std::vector<double> w = {0.5, 0.3, 0.2};
    const std::vector<Point> others = {P({1, 2}), P({-1, 0})};
    const Point x1 = P({0.4, -0.7});
    const Point z = 0.5 * x1 + 0.3 * others[0] + 0.2 * others[1];
    return near(lipschitz_inverse(E2, w, others, z), x1, 1e-12);
  });
  run("karcher", "flat Lipschitz constant is 1/w1", [&] {
    const double L = empirical_lipschitz(E2, {0.25, 0.75}, {P({1, 1})}, P({0, 0}), 1.0, 50, 1);
    return near(L, 4.0, 1e-9);
  });

  // barycenter
  run("barycenter", "single-entry Omega returns the entry", [&] {
    OmegaSpec o{E2, {OmegaEntry::discrete(1.0, nu3)}};
    const BarycenterResult r = solve_fixed_point(o);
    return near(w2(r.measure, nu3, E2), 0.0, 1e-12);
  });
  run("barycenter", "Dirac entries give the Dirac at the weighted mean", [&] {
    OmegaSpec o{E2,
                {OmegaEntry::discrete(0.2, DiscreteMeasure::dirac(E2, P({0, 0}))),
                 OmegaEntry::discrete(0.8, DiscreteMeasure::dirac(E2, P({1, 3})))}};
    const BarycenterResult r = solve_fixed_point(o);
    return near(r.measure.point(0), P({0.8, 2.4}), 1e-9);
  });
  run("barycenter", "multi-marginal Dirac entries give one tuple", [&] {
    OmegaSpec o{T2,
                {OmegaEntry::discrete(0.5, DiscreteMeasure::dirac(T2, P({0.1, 0.1}))),
                 OmegaEntry::discrete(0.5, DiscreteMeasure::dirac(T2, P({0.3, 0.2})))}};
    const BarycenterResult r = solve_multimarginal(o);
    return Outcome{r.measure.size() == 1 && (r.measure.point(0) - P({0.2, 0.15})).norm() < 1e-9,
                   std::to_string(r.measure.size()) + " atoms"};
  });
  run("barycenter", "converged residuals are below tolerance", [&] {
    OmegaSpec o{E2, {OmegaEntry::discrete(0.5, mu3), OmegaEntry::discrete(0.5, nu3)}};
    FixedPointOptions fo;
    fo.support_size = 6;
    const BarycenterResult r = solve_fixed_point(o, fo);
    double worst = 0.0;
    for (double v : r.first_order_residuals)
      worst = std::max(worst, v);
    return Outcome{r.converged && worst <= 1e-6 * E2.diameter(),
                   "max residual " + std::to_string(worst)};
  });
  run("barycenter", "Dirac entries pass through re-discretization", [&] {
    OmegaSpec o{E2, {OmegaEntry::discrete(1.0, nu3)}};
    const ApproximatedOmega a = approximate_omega(o, 4);
    return near(w2(a.omega.entries[0].measure, nu3, E2) + a.radius[0], 0.0, 1e-15);
  });

  // distortion
  run("distortion", "flat alpha is 1", [&] {
    const WeightedConfig cfg{{P({0.1, 0.2}), P({0.4, 0.3})}, {0.3, 0.7}};
    return near(alpha(T2, cfg, P({0.4, 0.3})).alpha, 1.0, 1e-12);
  });
  run("distortion", "two-point oracle is 1 on flat space",
      [&] { return near(two_point_distortion_oracle(E2, P({0, 0}), P({1, 1}), 0.5), 1.0, 1e-8); });
  run("distortion", "two-point oracle tends to 1 as t -> 1",
      [&] { return near(two_point_distortion_oracle(S2, north, eq0, 1.0), 1.0, 1e-8); });
  run("distortion", "alpha lower bound is 1 for nonnegative Ricci", [&] {
    return Outcome{alpha_lower_bound(T2) == 1.0 && alpha_lower_bound(S2) == 1.0, "torus, sphere"};
  });
  run("distortion", "alpha lower bound formula for K=-1, diam 2, n 2", [&] {
    const double a = 2.0;
    const double direct = std::pow(std::pow(std::sinh(a) / a, -1.0) * a / std::tanh(a), -2.0);
    return near(alpha_lower_bound(2.0, -1.0, 2), direct, 1e-12);
  });
  run("distortion", "single-entry Jacobian check gives lhs 1 on the torus", [&] {
    const MeshPtr m = Mesh::build(T2, 4);
    Eigen::VectorXd v(m->size());
    for (int c = 0; c < m->size(); ++c)
      v(c) = 1.0 + 0.5 * std::cos(2 * pi * m->center(c)(0));
    OmegaSpec o{T2, {OmegaEntry::continuous(1.0, MeshDensity::from_unnormalized(m, v))}};
    const BarycenterResult r = solve_fixed_point(o);
    const JacobianReport j = jacobian_inequality_check(r, o, m, 0.0);
    return Outcome{j.evaluated == j.total && std::abs(j.max_lhs - 1.0) < 1e-12,
                   "max lhs " + std::to_string(j.max_lhs)};
  });

  // functionals
  run("functionals", "uniform density has zero entropy", [&] {
    return near(entropy(EntropySpec::u_infinity(), uniform_on_set(t8, std::vector<bool>(8, true))),
                0.0, 1e-15);
  });
  run("functionals", "uniform on half the torus has entropy log 2", [&] {
    return near(entropy(EntropySpec::u_infinity(), uniform_on_set(t8, half)), std::log(2.0), 1e-12);
  });
  run("functionals", "U_4 of the constant density is 0", [&] {
    return near(entropy(EntropySpec::un(4), uniform_on_set(t8, std::vector<bool>(8, true))), 0.0,
                1e-15);
  });
  run("functionals", "pressures", [&] {
    const double a = p_of_r(EntropySpec::u_infinity(), 2.0), b = p_of_r(EntropySpec::un(2), 4.0);
    const double z = std::abs(p_of_r(EntropySpec::u_infinity(), 0.0)) +
                     std::abs(p_of_r(EntropySpec::un(2), 0.0));
    return Outcome{std::abs(a - 2) < 1e-12 && std::abs(b - 2) < 1e-12 && z == 0.0,
                   std::to_string(a) + ", " + std::to_string(b)};
  });
  run("functionals", "constant potential and interaction", [&] {
    const double a = potential_energy([](const Point&) { return 3.0; }, nu3);
    const double b = interaction_energy([](const Point&, const Point&) { return 3.0; }, nu3);
    return Outcome{std::abs(a - 3) < 1e-12 && std::abs(b - 3) < 1e-12, "both 3"};
  });
  run("functionals", "half squared distance on a Dirac is the cost", [&] {
    const Point p = P({0.1, 0.2}), q = P({0.7, 0.9});
    const double e = potential_energy([&](const Point& x) { return cost(T2, x, p); },
                                      DiscreteMeasure::dirac(T2, q));
    return near(e, cost(T2, p, q), 1e-15);
  });
  run("functionals", "convexity class", [&] {
    const bool a = convexity_class_check(EntropySpec::u_infinity(), 3).pass;
    const ConvexityCheck c = convexity_class_check(EntropySpec::custom("-r^2"), 2);
    return Outcome{a && !c.pass && c.witness > 0.0, "witness " + std::to_string(c.witness)};
  });
  run("functionals", "curvature-dimension constants", [&] {
    const double a = cd_condition(T2, {}, INFINITY);
    const double b = cd_condition(S2, {}, INFINITY);
    const double c = cd_condition(E2, ReferenceMeasure::gaussian(P({0, 0}), 0.25), INFINITY);
    return Outcome{a == 0.0 && std::abs(b - 1) < 1e-15 && std::abs(c - 4) < 1e-12,
                   std::to_string(a) + ", " + std::to_string(b) + ", " + std::to_string(c)};
  });

  // harness
  const MeshPtr t4 = Mesh::build(T2, 4);
  Eigen::VectorXd bump(t4->size());
  for (int c = 0; c < t4->size(); ++c)
    bump(c) = 1.0 + 0.5 * std::sin(2 * pi * t4->center(c)(1));
  const OmegaSpec single{T2, {OmegaEntry::continuous(1.0, MeshDensity::from_unnormalized(t4, bump))}};
  JensenOptions jo;
  jo.mesh_res = 4;
  jo.estimator = DensityEstimator::NearestCell;
  run("harness", "Jensen with one entry is an equality", [&] {
    const InequalityReport r = jensen_check(single, EntropySpec::u_infinity(), jo);
    return Outcome{r.pass() && std::abs(r.lhs - r.rhs) < 1e-12,
                   "lhs - rhs = " + std::to_string(r.lhs - r.rhs)};
  });
  run("harness", "distorted Jensen collapses on flat space", [&] {
    const PreparedOmega p = prepare_omega(single, {}, jo);
    const InequalityReport a = jensen_check(p, EntropySpec::u_infinity(), 0.0);
    const InequalityReport b = distorted_jensen_check(p, EntropySpec::u_infinity(), 0.0);
    return near(a.rhs, b.rhs, 1e-12);
  });
  run("harness", "density bound with one entry", [&] {
    const BarycenterResult r = solve_fixed_point(single);
    return Outcome{density_bound_check(single, r, 4).pass(), "single entry"};
  });
  std::vector<bool> block(t4->size(), false);
  block[0] = block[1] = block[4] = block[5] = true;
  run("harness", "one-set Brunn-Minkowski is an equality", [&] {
    const InequalityReport r = multiset_bm(t4, {block}, {1.0}, 3.0);
    return Outcome{r.pass() && r.lhs == r.rhs, "nu(Z) = " + std::to_string(r.metric("nu_Z"))};
  });
  run("harness", "Brunn-Minkowski of a convex set with itself", [&] {
    const ManifoldSpec B = ManifoldSpec::box(P({0, 0}), P({1, 1}));
    const MeshPtr m = Mesh::build(B, 6);
    std::vector<bool> a(m->size(), false);
    for (int c = 0; c < m->size(); ++c)
      a[c] = m->center(c)(0) > 0.3 && m->center(c)(0) < 0.7 && m->center(c)(1) > 0.3 &&
             m->center(c)(1) < 0.7;
    const InequalityReport r = multiset_bm(m, {a, a}, {0.5, 0.5}, 2.5);
    return Outcome{r.pass(), "lhs " + std::to_string(r.lhs) + " rhs " + std::to_string(r.rhs)};
  });
  run("harness", "deterministic random set is an equality", [&] {
    const InequalityReport r = random_bm(RandomSetSpec{t4, {1.0}, {block}}, INFINITY);
    return Outcome{r.pass() && r.lhs == r.rhs, "log nu(Z) = " + std::to_string(r.rhs)};
  });

  set_default_threads(saved_threads);
  return run.report;
}

} // namespace wbc
