// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include "oracles.hpp"
#include "wbc/barycenter.hpp"
#include "wbc/cli.hpp"
#include "wbc/distortion.hpp"
#include "wbc/errors.hpp"
#include "wbc/harness.hpp"
#include "wbc/io.hpp"

#include <fmt/core.h>

#include <chrono>
#include <functional>
#include <random>
#include <sstream>

using namespace wbc;

namespace {

const std::string kData = WBC_TEST_DATA;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Check {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty())
        detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& s) {
    if (pass) {
      if (!detail.empty())
        detail += "; ";
      detail += s;
    }
  }
};

ManifoldSpec torus2() { return ManifoldSpec::torus(Eigen::Vector2d(1, 1)); }
ManifoldSpec unit_box() { return ManifoldSpec::box(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)); }
ManifoldSpec sphere2() { return ManifoldSpec::sphere(2); }

Point random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
}

// Point at geodesic distance r * u (u uniform in [0, 1)) from c on the sphere.
Point sphere_near(const Point& c, double r, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0, 1);
  const Eigen::VectorXd v = project_tangent(sphere2(), c, Eigen::Vector3d(g(rng), g(rng), g(rng)));
  return exp_map(sphere2(), c, v.normalized() * r * u(rng));
}

DensityFunction torus_field(double a, double b, double kx, double ky) {
  return [=](const Point& p) {
    return std::exp(kx * std::cos(2 * M_PI * (p(0) - a)) + ky * std::cos(2 * M_PI * (p(1) - b)));
  };
}

DensityFunction sphere_field(Eigen::Vector3d c, double k) {
  c.normalize();
  return [=](const Point& p) { return std::exp(k * p.dot(c)); };
}

// Three smooth bumps on the torus with seeded centre offsets.
OmegaSpec torus_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> off(-0.1, 0.1);
  const MeshPtr mesh = Mesh::build(torus2(), 8);
  const DensityFunction f[3] = {torus_field(0.5 + off(rng), 0.5 + off(rng), 2.0, 0.3),
                                torus_field(0.4 + off(rng), 0.6 + off(rng), 0.3, 2.0),
                                torus_field(0.6 + off(rng), 0.45 + off(rng), 1.5, 1.5)};
  const double w[3] = {0.4, 0.35, 0.25};
  OmegaSpec om{torus2(), {}};
  for (int i = 0; i < 3; ++i)
    om.entries.push_back(OmegaEntry::continuous(w[i], discretize_density(mesh, f[i]), f[i]));
  return om;
}

// Two or three von Mises-Fisher bumps on the sphere with jittered centres.
OmegaSpec sphere_instance(std::uint64_t seed, int m = 3, double kappa = 4.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0, 0.15);
  const MeshPtr mesh = Mesh::build(sphere2(), 8);
  const Eigen::Vector3d centre[3] = {{1, 0, 0.2}, {0.6, 0.8, -0.1}, {0.7, 0.3, 0.6}};
  const double ks[3] = {kappa, 0.6 * kappa, 1.3 * kappa};
  const std::vector<double> w = m == 2 ? std::vector<double>{0.5, 0.5} : std::vector<double>{0.4, 0.35, 0.25};
  OmegaSpec om{sphere2(), {}};
  for (int i = 0; i < m; ++i) {
    const Eigen::Vector3d c = centre[i] + Eigen::Vector3d(jitter(rng), jitter(rng), jitter(rng));
    const DensityFunction f = sphere_field(c, ks[i]);
    om.entries.push_back(OmegaEntry::continuous(w[i], discretize_density(mesh, f), f));
  }
  return om;
}

std::vector<bool> rect(const MeshPtr& mesh, double x0, double x1, double y0, double y1) {
  std::vector<bool> s(mesh->size());
  for (int c = 0; c < mesh->size(); ++c) {
    const Point& p = mesh->center(c);
    s[c] = p(0) > x0 && p(0) < x1 && p(1) > y0 && p(1) < y1;
  }
  return s;
}

std::vector<bool> cap(const MeshPtr& mesh, Eigen::Vector3d c, double r) {
  c.normalize();
  std::vector<bool> s(mesh->size());
  for (int k = 0; k < mesh->size(); ++k)
    s[k] = std::acos(std::clamp(mesh->center(k).dot(c), -1.0, 1.0)) < r;
  return s;
}

// ---------------------------------------------------------------------------

Check oracle_equivalence() {
  Check v;
  const auto t0 = Clock::now();
  const int K = 6;
  double worst = 0;
  for (int inst = 0; inst < 20; ++inst) {
    std::mt19937_64 rng(inst);
    std::uniform_real_distribution<double> u(0, 1);
    const ManifoldSpec spec = inst % 2 == 0 ? torus2() : unit_box();
    OmegaSpec om{spec, {}};
    const double w0 = 0.2 + 0.1 * u(rng);
    const double w[3] = {w0, 0.3, 0.7 - w0};
    for (int i = 0; i < 3; ++i) {
      // 2 to 4 atoms, masses on the 1/K grid.
      const int na = 2 + static_cast<int>(rng() % 3);
      std::vector<int> count(na, 1);
      for (int k = na; k < K; ++k)
        ++count[rng() % na];
      std::vector<Point> pts;
      std::vector<double> mass;
      for (int k = 0; k < na; ++k) {
        pts.push_back(Eigen::Vector2d(u(rng), u(rng)));
        mass.push_back(count[k] / double(K));
      }
      om.entries.push_back(OmegaEntry::discrete(w[i], DiscreteMeasure(spec, pts, mass)));
    }
    const BarycenterResult mm = solve_multimarginal(om);
    FixedPointOptions fo;
    fo.support_size = K;
    fo.restarts = 256;
    fo.seed = inst;
    const BarycenterResult fp = solve_fixed_point(om, fo);
    const double radius = spec.diameter() * std::sqrt(oracle::grid_rounding_tv(mm.measure.masses(), K));
    const double d = w2(fp.measure, mm.measure, spec);
    worst = std::max(worst, d - 2 * radius);
    v.require(d <= 2 * radius + 1e-6, fmt::format("instance {} W2 {:.3g} radius {:.3g}", inst, d, radius));
  }
  const double t = seconds_since(t0);
  v.require(t <= 60, fmt::format("took {:.1f} s", t));
  v.note(fmt::format("20 instances, max W2 - 2 radius {:.2e}, {:.1f} s", worst, t));
  return v;
}

Check euclidean_closed_forms() {
  Check v;
  const auto t0 = Clock::now();
  const ManifoldSpec box = ManifoldSpec::box(Eigen::Vector2d(-5, -5), Eigen::Vector2d(5, 5));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3, 3), wd(0.1, 1.0);
  double dirac_err = 0, shift_err = 0;
  for (int trial = 0; trial < 10; ++trial) {
    OmegaSpec om{box, {}};
    std::vector<double> w(4);
    double total = 0;
    for (double& x : w)
      total += (x = wd(rng));
    Eigen::Vector2d expect(0, 0);
    for (int i = 0; i < 4; ++i) {
      const Eigen::Vector2d p(u(rng), u(rng));
      expect += w[i] / total * p;
      om.entries.push_back(OmegaEntry::discrete(w[i] / total, DiscreteMeasure::dirac(box, p)));
    }
    for (const BarycenterResult& r : {solve_fixed_point(om), solve_multimarginal(om)}) {
      const double e = r.measure.size() == 1 ? (r.measure.point(0) - expect).norm() : 1e300;
      dirac_err = std::max(dirac_err, e);
    }
  }
  v.require(dirac_err <= 1e-9, fmt::format("Dirac error {:.2e}", dirac_err));

  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Point> pts, moved;
    const Eigen::Vector2d shift(u(rng) / 2, u(rng) / 2);
    for (int k = 0; k < 8; ++k)
      pts.push_back(Eigen::Vector2d(u(rng) / 2, u(rng) / 2));
    const std::vector<double> mass(8, 1.0 / 8);
    for (const Point& p : pts)
      moved.push_back(p + shift);
    const DiscreteMeasure mu0(box, pts, mass), mu1(box, moved, mass);
    for (double t : {0.2, 0.5, 0.75}) {
      std::vector<Point> mid;
      for (const Point& p : pts)
        mid.push_back(p + t * shift);
      const DiscreteMeasure expect(box, mid, mass);
      OmegaSpec om{box, {OmegaEntry::discrete(1 - t, mu0), OmegaEntry::discrete(t, mu1)}};
      shift_err = std::max(shift_err, w2(solve_fixed_point(om).measure, expect, box));
      shift_err = std::max(shift_err, w2(solve_multimarginal(om).measure, expect, box));
    }
  }
  v.require(shift_err <= 1e-6, fmt::format("translation W2 {:.2e}", shift_err));
  const double t = seconds_since(t0);
  v.require(t <= 5, fmt::format("took {:.2f} s", t));
  v.note(fmt::format("Dirac {:.1e}, translation {:.1e}, {:.2f} s", dirac_err, shift_err, t));
  return v;
}

Check first_order_balance() {
  Check v;
  int converged = 0;
  double worst = 0;
  for (int inst = 0; inst < 10; ++inst) {
    std::mt19937_64 rng(100 + inst);
    std::uniform_real_distribution<double> u(0.1, 0.6), wd(0.2, 1.0);
    const ManifoldSpec spec = inst % 2 == 0 ? torus2() : sphere2();
    OmegaSpec om{spec, {}};
    const Point centre = random_unit(rng);
    for (double w : {0.5, 0.3, 0.2}) {
      std::vector<Point> pts;
      std::vector<double> mass;
      for (int k = 0; k < 6; ++k) {
        pts.push_back(spec.kind() == ManifoldKind::Torus ? Point(Eigen::Vector2d(u(rng), u(rng)))
                                                          : sphere_near(centre, 0.8, rng));
        mass.push_back(wd(rng));
      }
      om.entries.push_back(OmegaEntry::discrete(w, DiscreteMeasure::from_weights(spec, pts, mass)));
    }
    const BarycenterResult r = solve_fixed_point(om);
    if (!r.converged)
      continue;
    ++converged;
    for (double res : r.first_order_residuals)
      worst = std::max(worst, res / spec.diameter());
  }
  v.require(converged > 0, "no run converged");
  v.require(worst <= 1e-6, fmt::format("residual / diameter {:.2e}", worst));

  // Second-order diagnostic at the mesh scale on the torus. Four barycenter
  // atoms per cell keep the Laguerre-cell graininess of the duals below the slack.
  const auto j = io::read_json_file(kData + "/omega_torus3.json");
  const OmegaSpec instances[3] = {io::omega_from_json(j, kData), torus_instance(1), torus_instance(2)};
  int checked = 0;
  double max_eig = -1e300, slack = 0;
  for (const OmegaSpec& om : instances) {
    JensenOptions jo;
    jo.mesh_res = 16;
    jo.solver.max_iter = 100;
    jo.solver.support_size = 4 * 16 * 16;
    jo.solver.seed = 1;
    jo.refine = false;
    const PreparedOmega p = prepare_omega(om, {}, jo);
    const BalanceReport b = balance_certificate(p.result, p.omega, p.mesh->cell_size());
    max_eig = std::max(max_eig, b.max_second_order);
    slack = b.slack;
    v.require(b.second_order_evaluated && b.second_order_within_slack,
              fmt::format("torus instance {} max eigenvalue {:.3g} > slack {:.3g}", checked, b.max_second_order,
                          b.slack));
    ++checked;
  }
  v.note(fmt::format("{} converged runs, max residual/diam {:.1e}; {} torus res 16 runs, max eigenvalue {:.3g} <= {:.3g}",
                     converged, worst, checked, max_eig, slack));
  return v;
}

Check lipschitz_inverse_check() {
  Check v;
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 1);
  double err[3] = {0, 0, 0};
  const ManifoldSpec specs[3] = {ManifoldSpec::box(Eigen::Vector2d(-5, -5), Eigen::Vector2d(5, 5)), torus2(),
                                 sphere2()};
  for (int s = 0; s < 3; ++s)
    for (int k = 0; k < 1000; ++k) {
      const int m = 2 + static_cast<int>(rng() % 3);
      std::vector<double> w(m);
      double total = 0;
      for (double& x : w)
        total += (x = 0.1 + u(rng));
      for (double& x : w)
        x /= total;
      std::vector<Point> pts;
      const Point c = s == 2 ? random_unit(rng) : Point(Eigen::Vector2d(0.3 + 0.4 * u(rng), 0.3 + 0.4 * u(rng)));
      for (int i = 0; i < m; ++i) {
        if (s == 0)
          pts.push_back(Eigen::Vector2d(-4 + 8 * u(rng), -4 + 8 * u(rng)));
        else if (s == 1) // inside a 0.1 square so no lift is competitive
          pts.push_back(Point(c + Eigen::Vector2d(0.1 * u(rng), 0.1 * u(rng))));
        else
          pts.push_back(sphere_near(c, 0.3, rng));
      }
      // The inverse amplifies barycenter error by 1/w_1, so solve tightly.
      KarcherOptions tight;
      tight.tol = 1e-14;
      const Point z = bc_map(specs[s], w, pts, tight);
      const Point x1 = lipschitz_inverse(specs[s], w, {pts.begin() + 1, pts.end()}, z);
      err[s] = std::max(err[s], distance(specs[s], x1, pts[0]));
    }
  const char* names[3] = {"box", "torus", "sphere"};
  for (int s = 0; s < 3; ++s)
    v.require(err[s] <= 1e-8, fmt::format("{} inverse error {:.2e}", names[s], err[s]));

  double lip_err = 0;
  for (int k = 0; k < 20; ++k) {
    const double w1 = 0.1 + 0.8 * u(rng);
    const std::vector<double> w{w1, (1 - w1) / 2, (1 - w1) / 2};
    const std::vector<Point> others{Eigen::Vector2d(u(rng), u(rng)), Eigen::Vector2d(u(rng), u(rng))};
    const double L = empirical_lipschitz(specs[0], w, others, Eigen::Vector2d(0, 0), 1.0, 50, k);
    lip_err = std::max(lip_err, std::abs(L - 1 / w1));
  }
  v.require(lip_err <= 1e-9, fmt::format("Lipschitz constant off by {:.2e}", lip_err));
  v.note(fmt::format("inverse errors box {:.1e} torus {:.1e} sphere {:.1e}; |L - 1/w1| {:.1e}", err[0], err[1],
                     err[2], lip_err));
  return v;
}

Check distortion_check() {
  Check v;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 1);
  double flat_err = 0;
  for (int k = 0; k < 1000; ++k) {
    const bool torus = k % 2 == 1;
    const ManifoldSpec spec = torus ? torus2() : unit_box();
    const int m = 2 + static_cast<int>(rng() % 3);
    WeightedConfig lam;
    const double span = torus ? 0.3 : 1.0;
    for (int i = 0; i < m; ++i) {
      lam.points.push_back(Eigen::Vector2d(0.2 + span * u(rng) * (torus ? 1 : 0.6),
                                           0.2 + span * u(rng) * (torus ? 1 : 0.6)));
      lam.weights.push_back(1.0 / m);
    }
    flat_err = std::max(flat_err, std::abs(alpha(spec, lam, lam.points[0]).alpha - 1.0));
  }
  v.require(flat_err <= 1e-12, fmt::format("flat |alpha - 1| {:.2e}", flat_err));

  double min_alpha = 1e300;
  int sphere_ok = 0, skipped = 0;
  for (int k = 0; k < 1000; ++k) {
    const Point c = random_unit(rng);
    const int m = 2 + static_cast<int>(rng() % 4);
    WeightedConfig lam;
    double total = 0;
    for (int i = 0; i < m; ++i) {
      lam.points.push_back(sphere_near(c, 1.2, rng));
      total += lam.weights.emplace_back(0.05 + u(rng));
    }
    for (double& w : lam.weights)
      w /= total;
    try {
      min_alpha = std::min(min_alpha, alpha(sphere2(), lam, lam.points[0]).alpha);
      ++sphere_ok;
    } catch (const Error&) {
      ++skipped;
    }
  }
  v.require(min_alpha >= 1 - 1e-9, fmt::format("sphere min alpha {:.12f}", min_alpha));
  v.require(sphere_ok >= 990, fmt::format("{} sphere configs skipped", skipped));

  double det_margin = 1e300, rel = 0;
  int pairs = 0;
  while (pairs < 100) {
    const Point x = random_unit(rng), y = random_unit(rng);
    const double d = distance(sphere2(), x, y);
    if (d > 3.0)
      continue;
    const CostHessians h = cost_hessians(sphere2(), x, y);
    det_margin = std::min(det_margin, h.dxy_neg.determinant() - expcon_lower_bound(sphere2(), d));
    const double t = 0.1 + 0.8 * u(rng);
    const WeightedConfig lam{{x, y}, {t, 1 - t}};
    const double a = alpha(sphere2(), lam, x).alpha;
    const double o = two_point_distortion_oracle(sphere2(), x, y, t);
    rel = std::max(rel, std::abs(a - o) / o);
    ++pairs;
  }
  for (int k = 0; k < 200; ++k) {
    const Point x = Eigen::Vector2d(u(rng), u(rng)), y = Eigen::Vector2d(u(rng), u(rng));
    const CostHessians h = cost_hessians(torus2(), x, y);
    det_margin = std::min(det_margin, h.dxy_neg.determinant() - expcon_lower_bound(torus2(), distance(torus2(), x, y)));
  }
  v.require(det_margin >= -1e-9, fmt::format("det(-D_xy c) below bound by {:.2e}", -det_margin));
  v.require(rel <= 1e-5, fmt::format("two-point alpha vs oracle {:.2e}", rel));
  v.note(fmt::format("flat {:.1e}, sphere min alpha {:.6f} ({} configs), det margin {:.1e}, two-point rel {:.1e}",
                     flat_err, min_alpha, sphere_ok, det_margin, rel));
  return v;
}

Check jacobian_check() {
  Check v;
  const auto j = io::read_json_file(kData + "/omega_torus3.json");
  const OmegaSpec om = io::omega_from_json(j, kData);
  double frac[2] = {0, 0};
  int evaluated[2] = {0, 0};
  const int res[2] = {8, 16};
  for (int k = 0; k < 2; ++k) {
    JensenOptions o;
    o.mesh_res = res[k];
    o.solver.max_iter = 100;
    o.solver.support_size = 4 * res[k] * res[k];
    o.refine = true;
    const PreparedOmega p = prepare_omega(om, {}, o);
    const JacobianReport jr = jacobian_inequality_check(p.result, p.omega, p.mesh, 0.05, DensityEstimator::Linear);
    frac[k] = jr.fraction_within;
    evaluated[k] = jr.evaluated;
  }
  v.require(frac[1] >= 0.95, fmt::format("res 16 fraction within slack {:.3f}", frac[1]));
  v.require(1 - frac[1] < 1 - frac[0], fmt::format("violations did not shrink: {:.3f} -> {:.3f}", 1 - frac[0], 1 - frac[1]));
  v.note(fmt::format("within slack: res 8 {:.3f} of {}, res 16 {:.3f} of {}", frac[0], evaluated[0], frac[1],
                     evaluated[1]));
  return v;
}

Check density_bounds() {
  Check v;
  double worst = 0;
  int runs = 0;
  for (int inst = 0; inst < 10; ++inst) {
    for (bool sphere : {false, true}) {
      const OmegaSpec om = sphere ? sphere_instance(200 + inst) : torus_instance(200 + inst);
      FixedPointOptions fo;
      fo.max_iter = 30;
      fo.seed = inst;
      const ApproximatedOmega a = approximate_omega(om, 8);
      const BarycenterResult r = solve_fixed_point(a.omega, fo);
      const InequalityReport rep = density_bound_check(a.omega, r, 8);
      ++runs;
      worst = std::max(worst, rep.lhs / rep.rhs);
      v.require(rep.pass(), fmt::format("{} seed {}: ess sup {:.3g} > bound {:.3g}", sphere ? "sphere" : "torus",
                                        inst, rep.lhs, rep.rhs));
    }
  }
  v.note(fmt::format("{} instances, largest ess sup / bound {:.3f}", runs, worst));
  return v;
}

Check jensen_suite() {
  Check v;
  struct Case {
    std::string name;
    OmegaSpec omega;
    int coarse, fine;
  };
  const Case cases[2] = {{"torus", torus_instance(7), 8, 16}, {"sphere", sphere_instance(7), 6, 12}};
  double max_slack = 0, collapse = 0;
  for (const Case& c : cases) {
    JensenOptions o;
    o.solver.max_iter = 30;
    o.solver.seed = 1;
    o.mesh_res = c.coarse;
    const PreparedOmega pc = prepare_omega(c.omega, {}, o);
    o.mesh_res = c.fine;
    const PreparedOmega pf = prepare_omega(c.omega, {}, o);
    for (const EntropySpec& e : {EntropySpec::u_infinity(), EntropySpec::un(3), EntropySpec::un(2.5)}) {
      const std::string label = fmt::format("{} {}", c.name, e.family() == EntropyFamily::UInfinity
                                                                 ? std::string("Uinf")
                                                                 : fmt::format("U{}", e.N()));
      const double slack = refinement_slack(jensen_check(pc, e, 0.0), jensen_check(pf, e, 0.0));
      max_slack = std::max(max_slack, slack);
      v.require(slack <= 0.05, fmt::format("{} refinement slack {:.3g}", label, slack));
      const InequalityReport plain = jensen_check(pf, e, slack);
      v.require(plain.pass(), fmt::format("{} plain {:.4g} > {:.4g}", label, plain.lhs, plain.rhs));
      const double dslack = refinement_slack(distorted_jensen_check(pc, e, 0.0), distorted_jensen_check(pf, e, 0.0));
      const InequalityReport dist = distorted_jensen_check(pf, e, std::max(slack, dslack));
      v.require(dslack <= 0.05 && dist.pass(),
                fmt::format("{} distorted {:.4g} > {:.4g} (slack {:.3g})", label, dist.lhs, dist.rhs, dslack));
      if (c.name == "torus")
        collapse = std::max({collapse, std::abs(plain.lhs - dist.lhs), std::abs(plain.rhs - dist.rhs)});
    }
  }
  v.require(collapse <= 1e-12, fmt::format("flat distorted differs by {:.2e}", collapse));
  v.note(fmt::format("max refinement slack {:.4f}, flat collapse {:.1e}", max_slack, collapse));
  return v;
}

Check brunn_minkowski() {
  Check v;
  auto timed = [&](const std::string& name, const std::function<InequalityReport()>& f) {
    const auto t0 = Clock::now();
    const InequalityReport r = f();
    const double t = seconds_since(t0);
    v.require(r.pass(), fmt::format("{} {} lhs {:.4g} rhs {:.4g}", name, to_string(r.verdict), r.lhs, r.rhs));
    v.require(t <= 120, fmt::format("{} took {:.1f} s", name, t));
    return r;
  };
  const MeshPtr tm = Mesh::build(torus2(), 16);
  const auto A = rect(tm, 0.1, 0.4, 0.1, 0.35), B = rect(tm, 0.3, 0.55, 0.3, 0.5), C = rect(tm, 0.2, 0.45, 0.05, 0.3);
  timed("torus m=2", [&] { return multiset_bm(tm, {A, B}, {0.5, 0.5}, 2.0); });
  timed("torus m=3", [&] { return multiset_bm(tm, {A, B, C}, {0.3, 0.3, 0.4}, 3.0); });
  const InequalityReport single = timed("torus single", [&] { return multiset_bm(tm, {A}, {1.0}, 2.0); });
  v.require(single.lhs == single.rhs, "single set is not an equality");

  const MeshPtr sm = Mesh::build(sphere2(), 16);
  const auto c1 = cap(sm, {1, 0, 0.2}, 0.5), c2 = cap(sm, {0.2, 1, 0}, 0.4), c3 = cap(sm, {0.5, 0.5, 0.8}, 0.35);
  timed("sphere m=2", [&] { return multiset_bm(sm, {c1, c2}, {0.5, 0.5}, 2.0); });
  timed("sphere m=3", [&] { return multiset_bm(sm, {c1, c2, c3}, {0.3, 0.3, 0.4}, 3.0); });

  const ManifoldSpec box = ManifoldSpec::box(Eigen::Vector2d(-2, -2), Eigen::Vector2d(2, 2));
  const MeshPtr bm = Mesh::build(box, 16, ReferenceMeasure::gaussian(Eigen::Vector2d(0, 0), 1.0));
  const RandomSetSpec rs{bm, {0.5, 0.5}, {rect(bm, -1.5, -0.5, -1, 0.5), rect(bm, 0.2, 1.6, -0.3, 1.2)}};
  timed("gaussian box N=inf", [&] { return random_bm(rs, std::numeric_limits<double>::infinity()); });
  v.note("torus m=2,3, single-set equality, sphere m=2,3, gaussian box N=inf");
  return v;
}

Check determinism() {
  Check v;
  const std::vector<std::vector<std::string>> runs = {
      {"jensen", "--config", kData + "/jensen_torus.json", "--seed", "3"},
      {"bm", "--config", kData + "/bm_torus.json"},
      {"bm-random", "--config", kData + "/bm_random_torus.json"},
      {"density-bound", "--config", kData + "/density_torus.json", "--mesh-res", "8"},
      {"barycenter", "--omega", kData + "/omega_torus3.json", "--seed", "5"},
  };
  int compared = 0;
  for (const auto& base : runs) {
    std::string reference;
    for (const char* threads : {"1", "2", "3"}) {
      std::vector<std::string> args = base;
      args.insert(args.end(), {"--threads", threads});
      std::ostringstream out, err;
      const int code = cli::run(args, out, err);
      v.require(code == 0 || code == 1, fmt::format("{} exited {}: {}", base[0], code, err.str()));
      if (reference.empty())
        reference = out.str();
      else
        v.require(out.str() == reference, fmt::format("{} differs at --threads {}", base[0], threads));
      ++compared;
    }
  }
  v.note(fmt::format("{} runs over 5 experiments byte-identical across --threads 1/2/3", compared));
  return v;
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"oracle equivalence", oracle_equivalence},
      {"euclidean closed forms", euclidean_closed_forms},
      {"first-order balance", first_order_balance},
      {"lipschitz inverse", lipschitz_inverse_check},
      {"distortion", distortion_check},
      {"jacobian inequality", jacobian_check},
      {"density bounds", density_bounds},
      {"jensen", jensen_suite},
      {"brunn-minkowski", brunn_minkowski},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = Clock::now();
    Check v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failures += !v.pass;
    fmt::print("criterion {}: {} {} ({}) [{:.1f} s]\n", k + 1, v.pass ? "PASS" : "FAIL", criteria[k].first, v.detail,
               seconds_since(t0));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
