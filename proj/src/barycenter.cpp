#include "wbc/barycenter.hpp"

#include "wbc/errors.hpp"
#include "wbc/lp.hpp"
#include "wbc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace wbc {

OmegaEntry OmegaEntry::discrete(double weight, DiscreteMeasure m) {
  OmegaEntry e;
  e.weight = weight;
  e.measure = std::move(m);
  return e;
}

OmegaEntry OmegaEntry::continuous(double weight, MeshDensity md, DensityFunction field) {
  OmegaEntry e;
  e.weight = weight;
  e.measure = to_discrete(md);
  e.density = std::move(md);
  e.field = std::move(field);
  return e;
}

void OmegaSpec::validate() const {
  if (entries.empty())
    throw InvalidArgument("Omega needs at least one entry");
  double total = 0.0;
  for (const auto& e : entries) {
    if (!(e.weight > 0.0) || !std::isfinite(e.weight))
      throw InvalidArgument("Omega weights must be positive");
    if (e.measure.size() == 0)
      throw InvalidArgument("Omega entry without atoms");
    if (e.density && !(e.density->mesh()->spec() == manifold))
      throw InvalidArgument("Omega entry density lives on a different manifold");
    total += e.weight;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw InvalidArgument("Omega weights must sum to 1");
}

std::vector<double> OmegaSpec::weights() const {
  std::vector<double> w;
  for (const auto& e : entries)
    w.push_back(e.weight);
  return w;
}

bool OmegaSpec::has_absolutely_continuous() const {
  for (const auto& e : entries)
    if (e.absolutely_continuous())
      return true;
  return false;
}

namespace {

struct Iterate {
  std::vector<Point> atoms;
  std::vector<OTResult> ot;
  double functional = 0.0;
  double max_gap = 0.0;
};

DiscreteMeasure uniform_measure(const ManifoldSpec& spec, const std::vector<Point>& atoms) {
  return DiscreteMeasure(spec, atoms,
                         std::vector<double>(atoms.size(), 1.0 / static_cast<double>(atoms.size())));
}

void solve_all(const OmegaSpec& omega, Iterate& it, int threads) {
  const DiscreteMeasure bar = uniform_measure(omega.manifold, it.atoms);
  it.ot.assign(omega.entries.size(), {});
  parallel_for(
      static_cast<int>(omega.entries.size()),
      [&](int i) { it.ot[i] = solve_exact(bar, omega.entries[i].measure, omega.manifold); },
      threads);
  it.functional = 0.0;
  it.max_gap = 0.0;
  for (std::size_t i = 0; i < omega.entries.size(); ++i) {
    it.functional += omega.entries[i].weight * 2.0 * it.ot[i].plan.transport_cost;
    it.max_gap = std::max(it.max_gap, it.ot[i].gap);
  }
}

// lambda_x for barycenter atom k.
WeightedConfig transported_images(const OmegaSpec& omega, const Iterate& it, int k) {
  WeightedConfig cfg;
  for (std::size_t i = 0; i < omega.entries.size(); ++i) {
    const Eigen::MatrixXd& g = it.ot[i].plan.coupling;
    const double row = g.row(k).sum();
    for (int j = 0; j < g.cols(); ++j) {
      const double v = g(k, j);
      if (v > 1e-12 * row) {
        cfg.points.push_back(omega.entries[i].measure.point(j));
        cfg.weights.push_back(omega.entries[i].weight * v / row);
      }
    }
  }
  double total = 0.0;
  for (double w : cfg.weights)
    total += w;
  for (double& w : cfg.weights)
    w /= total;
  return cfg;
}

std::vector<double> residuals(const OmegaSpec& omega, const Iterate& it) {
  std::vector<double> r(it.atoms.size());
  for (std::size_t k = 0; k < it.atoms.size(); ++k) {
    const WeightedConfig cfg = transported_images(omega, it, static_cast<int>(k));
    r[k] = karcher_direction(omega.manifold, cfg, it.atoms[k]).norm();
  }
  return r;
}

std::vector<Point> move_atoms(const OmegaSpec& omega, const Iterate& it, const KarcherOptions& ko,
                              int threads) {
  std::vector<Point> next(it.atoms.size());
  parallel_for(
      static_cast<int>(it.atoms.size()),
      [&](int k) {
        const WeightedConfig cfg = transported_images(omega, it, k);
        try {
          next[k] = karcher_mean(cfg, omega.manifold, it.atoms[k], ko).point;
        } catch (const Error&) {
          next[k] = bc_map(omega.manifold, cfg, ko);
        }
      },
      threads);
  return next;
}

int init_source(const OmegaSpec& omega) {
  int best = -1;
  for (std::size_t i = 0; i < omega.entries.size(); ++i) {
    const auto& e = omega.entries[i];
    if (e.absolutely_continuous() && (best < 0 || e.weight > omega.entries[best].weight))
      best = static_cast<int>(i);
  }
  if (best >= 0)
    return best;
  best = 0;
  for (std::size_t i = 1; i < omega.entries.size(); ++i)
    if (omega.entries[i].weight > omega.entries[best].weight)
      best = static_cast<int>(i);
  return best;
}

// Systematic sampling: one uniform offset, K equally spaced quantiles of the
// source masses. Mesh entries are sampled uniformly inside the chosen cell.
std::vector<Point> systematic_init(const OmegaSpec& omega, int source, int K,
                                   std::mt19937_64& rng) {
  const OmegaEntry& e = omega.entries[source];
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double offset = unif(rng);
  std::vector<Point> atoms;
  atoms.reserve(K);
  if (e.absolutely_continuous()) {
    const MeshDensity& md = *e.density;
    const Mesh& mesh = *md.mesh();
    std::vector<double> cum(mesh.size());
    double acc = 0.0;
    for (int c = 0; c < mesh.size(); ++c) {
      acc += md.value(c) * mesh.volume(c);
      cum[c] = acc;
    }
    int c = 0;
    for (int k = 0; k < K; ++k) {
      const double u = (k + offset) / K * acc;
      while (c + 1 < mesh.size() && cum[c] < u)
        ++c;
      atoms.push_back(mesh.sample_in_cell(c, rng));
    }
    return atoms;
  }
  const DiscreteMeasure& m = e.measure;
  double acc = 0.0;
  int j = 0;
  acc = m.mass(0);
  for (int k = 0; k < K; ++k) {
    const double u = (k + offset) / K;
    while (j + 1 < m.size() && acc < u) {
      ++j;
      acc += m.mass(j);
    }
    atoms.push_back(m.point(j));
  }
  return atoms;
}

// Random couplings: every entry is quantile-sampled onto K slots, the slots
// are shuffled independently and atom k starts at the barycenter of the k-th
// slot of every entry. The induced coupling respects all marginals up to 1/K.
std::vector<Point> tuple_init(const OmegaSpec& omega, int K, std::mt19937_64& rng,
                              const KarcherOptions& ko) {
  std::vector<std::vector<int>> slots;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (const auto& e : omega.entries) {
    const DiscreteMeasure& m = e.measure;
    const double offset = unif(rng);
    std::vector<int> s;
    int j = 0;
    double acc = m.mass(0);
    for (int k = 0; k < K; ++k) {
      const double u = (k + offset) / K;
      while (j + 1 < m.size() && acc < u)
        acc += m.mass(++j);
      s.push_back(j);
    }
    std::shuffle(s.begin(), s.end(), rng);
    slots.push_back(std::move(s));
  }
  std::vector<Point> atoms;
  for (int k = 0; k < K; ++k) {
    WeightedConfig cfg;
    for (std::size_t i = 0; i < omega.entries.size(); ++i) {
      cfg.points.push_back(omega.entries[i].measure.point(slots[i][k]));
      cfg.weights.push_back(omega.entries[i].weight);
    }
    atoms.push_back(evaluate_barycenter(omega.manifold, cfg, ko).best.point);
  }
  return atoms;
}

BarycenterResult single_entry(const OmegaSpec& omega) {
  BarycenterResult r;
  r.method = "fixed-point";
  const DiscreteMeasure& mu = omega.entries[0].measure;
  OTResult ot = solve_exact(mu, mu, omega.manifold);
  r.measure = mu;
  r.plans.push_back(ot.plan);
  r.duals.push_back(ot.duals);
  r.first_order_residuals.assign(mu.size(), 0.0);
  r.functional = 2.0 * ot.plan.transport_cost;
  r.functional_log = {r.functional};
  r.certificate_gap = ot.gap;
  r.converged = true;
  return r;
}

BarycenterResult run_fixed_point(const OmegaSpec& omega, std::vector<Point> atoms,
                                 const FixedPointOptions& opts) {
  const ManifoldSpec& spec = omega.manifold;
  const double diam = spec.diameter();
  const double tol = opts.tol > 0.0 ? opts.tol : 1e-6 * diam;
  KarcherOptions ko;
  ko.tol = opts.karcher_tol > 0.0 ? opts.karcher_tol : 1e-9 * diam;

  BarycenterResult r;
  r.method = "fixed-point";
  Iterate it;
  it.atoms = std::move(atoms);
  solve_all(omega, it, opts.threads);
  r.functional_log.push_back(it.functional);
  int iter = 0;
  for (iter = 1; iter <= opts.max_iter; ++iter) {
    Iterate next;
    next.atoms = move_atoms(omega, it, ko, opts.threads);
    double disp = 0.0;
    for (std::size_t k = 0; k < it.atoms.size(); ++k)
      disp = std::max(disp, distance(spec, it.atoms[k], next.atoms[k]));
    solve_all(omega, next, opts.threads);
    const double decrease = it.functional - next.functional;
    it = std::move(next);
    r.functional_log.push_back(it.functional);
    if (disp <= tol || decrease < 1e-12) {
      r.converged = true;
      break;
    }
  }
  // A final plan change can leave an atom off its Karcher mean; a few polish
  // passes restore first-order balance.
  std::vector<double> res = residuals(omega, it);
  for (int polish = 0; polish < 3 && *std::max_element(res.begin(), res.end()) > tol; ++polish) {
    Iterate next;
    next.atoms = move_atoms(omega, it, ko, opts.threads);
    solve_all(omega, next, opts.threads);
    if (next.functional > it.functional + 1e-15 * (1.0 + it.functional))
      break;
    it = std::move(next);
    r.functional_log.push_back(it.functional);
    res = residuals(omega, it);
  }

  r.iterations = std::min(iter, opts.max_iter);
  r.measure = uniform_measure(spec, it.atoms);
  for (auto& o : it.ot) {
    r.plans.push_back(o.plan);
    r.duals.push_back(o.duals);
  }
  r.first_order_residuals = res;
  r.functional = it.functional;
  r.certificate_gap = it.max_gap;
  return r;
}

void add_common_warnings(const OmegaSpec& omega, BarycenterResult& r) {
  if (!omega.has_absolutely_continuous())
    r.warnings.push_back("no absolutely continuous entry: the barycenter may be non-unique");
  if (omega.manifold.kind() == ManifoldKind::Box) {
    const auto lo = omega.manifold.lower(), hi = omega.manifold.upper();
    for (const auto& p : r.measure.points())
      if (((p - lo).array() < -1e-9).any() || ((p - hi).array() > 1e-9).any()) {
        r.warnings.push_back("barycenter atom left the box");
        break;
      }
  }
}

} // namespace

BarycenterResult solve_fixed_point(const OmegaSpec& omega, const FixedPointOptions& opts) {
  omega.validate();
  if (omega.entries.size() == 1) {
    BarycenterResult r = single_entry(omega);
    add_common_warnings(omega, r);
    return r;
  }
  const int source = init_source(omega);
  int K = opts.support_size;
  if (K <= 0)
    K = opts.init ? opts.init->size() : omega.entries[source].measure.size();
  KarcherOptions ko;
  ko.tol = opts.karcher_tol > 0.0 ? opts.karcher_tol : 1e-9 * omega.manifold.diameter();

  std::optional<BarycenterResult> best;
  const int restarts = std::max(1, opts.restarts);
  for (int rs = 0; rs < restarts; ++rs) {
    std::mt19937_64 rng(opts.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(rs));
    std::vector<Point> atoms;
    if (rs == 0 && opts.init) {
      atoms = opts.init->points();
      K = static_cast<int>(atoms.size());
    } else if (rs == 0) {
      atoms = systematic_init(omega, source, K, rng);
    } else {
      atoms = tuple_init(omega, K, rng, ko);
      // Odd restarts hop from the incumbent: a random third of its atoms is
      // replaced by fresh tuple barycenters.
      if (rs % 2 == 1 && best && best->measure.size() == K) {
        std::vector<Point> hop = best->measure.points();
        std::uniform_int_distribution<int> pick(0, K - 1);
        for (int j = 0; j < std::max(1, K / 3); ++j) {
          const int k = pick(rng);
          hop[k] = atoms[k];
        }
        atoms = std::move(hop);
      }
    }
    BarycenterResult r = run_fixed_point(omega, std::move(atoms), opts);
    r.restart_used = rs;
    if (!best || r.functional < best->functional - 1e-14 * (1.0 + best->functional))
      best = std::move(r);
  }
  add_common_warnings(omega, *best);
  if (!best->converged)
    best->warnings.push_back("fixed-point iteration hit the iteration limit");
  return *best;
}

BarycenterResult solve_multimarginal(const OmegaSpec& omega, const KarcherOptions& kopts,
                                     int threads) {
  omega.validate();
  const ManifoldSpec& spec = omega.manifold;
  const int m = static_cast<int>(omega.entries.size());
  long tuples = 1;
  for (const auto& e : omega.entries) {
    tuples *= e.measure.size();
    if (tuples > kMultimarginalTupleLimit)
      throw SizeLimit("multi-marginal problem exceeds " +
                      std::to_string(kMultimarginalTupleLimit) + " tuples");
  }
  std::vector<int> radix(m);
  for (int i = 0; i < m; ++i)
    radix[i] = omega.entries[i].measure.size();
  auto digits = [&](long t) {
    std::vector<int> d(m);
    for (int i = m - 1; i >= 0; --i) {
      d[i] = static_cast<int>(t % radix[i]);
      t /= radix[i];
    }
    return d;
  };

  std::vector<double> cost(tuples);
  std::vector<Point> bary(tuples);
  std::vector<char> ambiguous(tuples, 0);
  parallel_for(
      static_cast<int>(tuples),
      [&](int t) {
        const std::vector<int> d = digits(t);
        WeightedConfig cfg;
        for (int i = 0; i < m; ++i) {
          cfg.points.push_back(omega.entries[i].measure.point(d[i]));
          cfg.weights.push_back(omega.entries[i].weight);
        }
        const BarycenterEvaluation ev = evaluate_barycenter(spec, cfg, kopts);
        cost[t] = 2.0 * ev.best.functional;
        bary[t] = ev.best.point;
        ambiguous[t] = ev.ambiguous;
      },
      threads);

  std::vector<Eigen::VectorXd> marginals;
  for (const auto& e : omega.entries)
    marginals.push_back(Eigen::Map<const Eigen::VectorXd>(e.measure.masses().data(),
                                                          e.measure.size()));
  const MultiIndexLP lp = solve_multi_index_transport(marginals, cost);

  std::vector<long> support;
  for (long t = 0; t < tuples; ++t)
    if (lp.x[t] > 1e-15)
      support.push_back(t);
  for (long t : support)
    if (ambiguous[t])
      throw AmbiguousBarycenter("a tuple in the optimal multi-marginal plan has no unique "
                                "barycenter");

  BarycenterResult r;
  r.method = "multimarginal";
  std::vector<Point> atoms;
  std::vector<double> masses;
  for (long t : support) {
    atoms.push_back(bary[t]);
    masses.push_back(lp.x[t]);
  }
  r.measure = DiscreteMeasure::from_weights(spec, atoms, masses);
  const int K = r.measure.size();
  for (int i = 0; i < m; ++i) {
    TransportPlan plan;
    plan.source = r.measure;
    plan.target = omega.entries[i].measure;
    plan.coupling = Eigen::MatrixXd::Zero(K, radix[i]);
    for (int k = 0; k < K; ++k)
      plan.coupling(k, digits(support[k])[i]) = r.measure.mass(k);
    plan.transport_cost = (plan.coupling.array() *
                           cost_matrix(spec, plan.source, plan.target).array())
                              .sum();
    // duals from an exact two-marginal solve on the same pair
    r.duals.push_back(solve_exact(r.measure, omega.entries[i].measure, spec).duals);
    r.plans.push_back(std::move(plan));
  }
  for (int k = 0; k < K; ++k) {
    WeightedConfig cfg;
    const std::vector<int> d = digits(support[k]);
    for (int i = 0; i < m; ++i) {
      cfg.points.push_back(omega.entries[i].measure.point(d[i]));
      cfg.weights.push_back(omega.entries[i].weight);
    }
    r.first_order_residuals.push_back(karcher_direction(spec, cfg, r.measure.point(k)).norm());
  }
  r.functional = lp.primal;
  r.functional_log = {lp.primal};
  r.certificate_gap = std::abs(lp.primal - lp.dual) + lp.dual_infeasibility;
  r.iterations = lp.iterations;
  r.converged = true;
  add_common_warnings(omega, r);
  return r;
}

BalanceReport balance_certificate(const BarycenterResult& result, const OmegaSpec& omega,
                                  double cell_size, double slack) {
  const ManifoldSpec& spec = omega.manifold;
  BalanceReport rep;
  rep.first_order = result.first_order_residuals;
  for (double v : rep.first_order)
    rep.max_first_order = std::max(rep.max_first_order, v);
  if (!spec.is_flat() || spec.kind() == ManifoldKind::Sphere || !(cell_size > 0.0))
    return rep;

  rep.second_order_evaluated = true;
  rep.step = cell_size;
  rep.slack = slack > 0.0 ? slack : 0.05 / cell_size;
  const int n = spec.dim();
  auto phi = [&](const Point& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < omega.entries.size(); ++i) {
      const auto& tgt = result.plans[i].target;
      double best = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < tgt.size(); ++j)
        best = std::max(best, result.duals[i].uc(j) - cost(spec, y, tgt.point(j)));
      s += omega.entries[i].weight * best;
    }
    return s;
  };
  const double h = cell_size;
  for (int k = 0; k < result.measure.size(); ++k) {
    const Point& x = result.measure.point(k);
    auto at = [&](const Eigen::VectorXd& off) { return phi(canonicalize(spec, x + off)); };
    const double f0 = at(Eigen::VectorXd::Zero(n));
    Eigen::MatrixXd H(n, n);
    for (int a = 0; a < n; ++a) {
      const Eigen::VectorXd ea = h * Eigen::VectorXd::Unit(n, a);
      H(a, a) = (at(ea) - 2.0 * f0 + at(-ea)) / (h * h);
      for (int b = a + 1; b < n; ++b) {
        const Eigen::VectorXd eb = h * Eigen::VectorXd::Unit(n, b);
        const double v =
            (at(ea + eb) - at(ea - eb) - at(-ea + eb) + at(-ea - eb)) / (4.0 * h * h);
        H(a, b) = v;
        H(b, a) = v;
      }
    }
    const double top = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H).eigenvalues().maxCoeff();
    rep.second_order.push_back(top);
    rep.max_second_order = std::max(rep.max_second_order, top);
  }
  if (rep.second_order.empty())
    rep.max_second_order = 0.0;
  else
    rep.max_second_order = *std::max_element(rep.second_order.begin(), rep.second_order.end());
  rep.second_order_within_slack = rep.max_second_order <= rep.slack;
  return rep;
}

BarycenterResult refine_map_like(const OmegaSpec& omega, const BarycenterResult& result,
                                 const KarcherOptions& kopts, int threads) {
  const ManifoldSpec& spec = omega.manifold;
  const int m = static_cast<int>(omega.entries.size());
  const int K = result.measure.size();
  if (static_cast<int>(result.plans.size()) != m)
    throw InvalidArgument("result has one plan per Omega entry");

  struct Piece {
    double mass;
    std::vector<int> targets;
    Point point;
  };
  std::vector<std::vector<Piece>> pieces(K);
  parallel_for(
      K,
      [&](int k) {
        // Row k of every plan as (target, fraction of the row), merged in
        // north-west corner order.
        std::vector<std::vector<std::pair<int, double>>> rows(m);
        for (int i = 0; i < m; ++i) {
          const Eigen::MatrixXd& g = result.plans[i].coupling;
          const double row = g.row(k).sum();
          for (int j = 0; j < g.cols(); ++j)
            if (g(k, j) > 1e-12 * row)
              rows[i].emplace_back(j, g(k, j) / row);
          double s = 0.0;
          for (auto& t : rows[i])
            s += t.second;
          for (auto& t : rows[i])
            t.second /= s;
        }
        const double atom = result.measure.mass(k);
        std::vector<std::size_t> pos(m, 0);
        std::vector<double> left(m);
        for (int i = 0; i < m; ++i)
          left[i] = rows[i][0].second;
        for (;;) {
          double d = left[0];
          for (int i = 1; i < m; ++i)
            d = std::min(d, left[i]);
          Piece p{d * atom, std::vector<int>(m), result.measure.point(k)};
          for (int i = 0; i < m; ++i)
            p.targets[i] = rows[i][pos[i]].first;
          if (p.mass > 1e-15 * atom)
            pieces[k].push_back(std::move(p));
          bool done = false;
          for (int i = 0; i < m; ++i) {
            left[i] -= d;
            if (left[i] <= 1e-14) {
              if (++pos[i] == rows[i].size()) {
                done = true;
              } else {
                left[i] = rows[i][pos[i]].second;
              }
            }
          }
          if (done)
            break;
        }
        if (pieces[k].size() < 2)
          return;
        for (Piece& p : pieces[k]) {
          WeightedConfig cfg;
          for (int i = 0; i < m; ++i) {
            cfg.points.push_back(result.plans[i].target.point(p.targets[i]));
            cfg.weights.push_back(omega.entries[i].weight);
          }
          try {
            p.point = karcher_mean(cfg, spec, p.point, kopts).point;
          } catch (const Error&) {
            p.point = bc_map(spec, cfg, kopts);
          }
        }
      },
      threads);

  std::vector<Point> pts;
  std::vector<double> masses;
  std::vector<const Piece*> flat;
  for (const auto& list : pieces)
    for (const Piece& p : list) {
      pts.push_back(p.point);
      masses.push_back(p.mass);
      flat.push_back(&p);
    }
  BarycenterResult r;
  r.method = result.method + "+map-refined";
  r.measure = DiscreteMeasure(spec, pts, masses);
  r.iterations = result.iterations;
  r.converged = result.converged;
  r.restart_used = result.restart_used;
  r.warnings = result.warnings;
  r.functional_log = result.functional_log;
  const int P = r.measure.size();
  r.functional = 0.0;
  r.certificate_gap = 0.0;
  for (int i = 0; i < m; ++i) {
    const DiscreteMeasure& tgt = result.plans[i].target;
    TransportPlan plan;
    plan.source = r.measure;
    plan.target = tgt;
    plan.coupling = Eigen::MatrixXd::Zero(P, tgt.size());
    for (int p = 0; p < P; ++p) {
      const int j = flat[p]->targets[i];
      plan.coupling(p, j) += r.measure.mass(p);
      plan.transport_cost += r.measure.mass(p) * cost(spec, r.measure.point(p), tgt.point(j));
    }
    // The target potentials stay feasible; the source side is their c-transform.
    DualPotentials du;
    du.uc = result.duals.size() == static_cast<std::size_t>(m) ? result.duals[i].uc
                                                                : Eigen::VectorXd::Zero(tgt.size());
    du.u.resize(P);
    double dual = 0.0;
    for (int p = 0; p < P; ++p) {
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < tgt.size(); ++j)
        best = std::min(best, cost(spec, r.measure.point(p), tgt.point(j)) - du.uc(j));
      du.u(p) = best;
      dual += r.measure.mass(p) * best;
    }
    for (int j = 0; j < tgt.size(); ++j)
      dual += tgt.mass(j) * du.uc(j);
    r.certificate_gap = std::max(r.certificate_gap, plan.transport_cost - dual);
    r.functional += omega.entries[i].weight * 2.0 * plan.transport_cost;
    r.plans.push_back(std::move(plan));
    r.duals.push_back(std::move(du));
  }
  r.first_order_residuals.resize(P);
  for (int p = 0; p < P; ++p) {
    WeightedConfig cfg;
    for (int i = 0; i < m; ++i) {
      cfg.points.push_back(result.plans[i].target.point(flat[p]->targets[i]));
      cfg.weights.push_back(omega.entries[i].weight);
    }
    r.first_order_residuals[p] = karcher_direction(spec, cfg, r.measure.point(p)).norm();
  }
  return r;
}

ApproximatedOmega approximate_omega(const OmegaSpec& omega, int resolution, int subsamples) {
  ApproximatedOmega out;
  out.omega.manifold = omega.manifold;
  for (const auto& e : omega.entries) {
    if (!e.absolutely_continuous()) {
      out.omega.entries.push_back(e);
      out.radius.push_back(0.0);
      continue;
    }
    const MeshPtr& old = e.density->mesh();
    MeshPtr mesh = old->resolution() == resolution
                       ? old
                       : Mesh::build(omega.manifold, resolution, old->reference());
    if (e.field) {
      out.omega.entries.push_back(OmegaEntry::continuous(
          e.weight, discretize_density(mesh, e.field, subsamples), e.field));
    } else if (mesh == old) {
      out.omega.entries.push_back(e);
    } else {
      throw InvalidArgument("a tabulated density cannot be re-discretized at another resolution");
    }
    out.radius.push_back(mesh->cell_diameter());
  }
  return out;
}

} // namespace wbc
