#include "wbc/harness.hpp"

#include "wbc/distortion.hpp"
#include "wbc/errors.hpp"
#include "wbc/karcher.hpp"
#include "wbc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

namespace wbc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

// Density of an entry on its own mesh, or its atoms binned on `mesh`.
MeshDensity entry_density(const OmegaEntry& e, const MeshPtr& mesh, DensityEstimator est) {
  if (e.absolutely_continuous())
    return *e.density;
  return estimate_density(e.measure, mesh, est);
}

void record_solver(InequalityReport& rep, const BarycenterResult& r) {
  rep.set_metric("w2_sq_average", r.functional);
  rep.set_metric("solver_iterations", r.iterations);
  rep.set_metric("solver_converged", r.converged ? 1.0 : 0.0);
  rep.set_metric("certificate_gap", r.certificate_gap);
  rep.set_metric("barycenter_atoms", r.measure.size());
  rep.set_info("solver", r.method);
  for (const auto& w : r.warnings)
    rep.warnings.push_back(w);
}

// Checks the hypotheses of the k = 0 Jensen inequality for an entropy.
double require_nonnegative_cd(const ManifoldSpec& spec, const EntropySpec& es) {
  es.validate(spec.dim());
  double N = es.N();
  if (es.family() == EntropyFamily::Custom) {
    if (!es.reference().is_volume())
      throw Unsupported("custom energies are only checked against the volume measure");
    N = kInf;
  }
  const double K = cd_condition(spec, es.reference(), N);
  if (!(K >= 0.0))
    throw CDViolated("Ric_N of the reference is not bounded below by 0 (K = " +
                     std::to_string(K) + ")");
  const ConvexityCheck cc = convexity_class_check(es, spec.dim());
  if (!cc.pass)
    throw InvalidArgument("energy is outside the displacement convex class: " + cc.reason +
                          " at r = " + std::to_string(cc.witness));
  return K;
}

} // namespace

std::string to_string(Verdict v) {
  switch (v) {
  case Verdict::Pass: return "pass";
  case Verdict::Fail: return "fail";
  case Verdict::Inconclusive: return "inconclusive";
  case Verdict::NotApplicable: return "not_applicable";
  }
  return "?";
}

void DiagnosticsTable::write_csv(std::ostream& out) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    out << (i ? "," : "") << columns[i];
  out << '\n';
  const auto old = out.precision(17);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << row[i];
    out << '\n';
  }
  out.precision(old);
}

void InequalityReport::set_metric(const std::string& name, double value) {
  for (auto& [k, v] : metrics)
    if (k == name) {
      v = value;
      return;
    }
  metrics.emplace_back(name, value);
}

bool InequalityReport::has_metric(const std::string& name) const {
  for (const auto& kv : metrics)
    if (kv.first == name)
      return true;
  return false;
}

double InequalityReport::metric(const std::string& name) const {
  for (const auto& [k, v] : metrics)
    if (k == name)
      return v;
  throw InvalidArgument("report has no metric '" + name + "'");
}

void InequalityReport::set_info(const std::string& name, const std::string& value) {
  for (auto& [k, v] : info)
    if (k == name) {
      v = value;
      return;
    }
  info.emplace_back(name, value);
}

void InequalityReport::decide() {
  if (verdict == Verdict::Inconclusive || verdict == Verdict::NotApplicable)
    return;
  verdict = holds() ? Verdict::Pass : Verdict::Fail;
}

double refinement_slack(const InequalityReport& coarse, const InequalityReport& fine) {
  return 2.0 * std::abs((coarse.lhs - coarse.rhs) - (fine.lhs - fine.rhs));
}

PreparedOmega prepare_omega(const OmegaSpec& omega, const ReferenceMeasure& reference,
                            const JensenOptions& opts) {
  omega.validate();
  if (opts.mesh_res < 1)
    throw InvalidArgument("mesh resolution must be positive");
  PreparedOmega p;
  p.options = opts;
  p.omega = approximate_omega(omega, opts.mesh_res, opts.subsamples).omega;
  p.mesh = Mesh::build(omega.manifold, opts.mesh_res, reference);
  FixedPointOptions fp = opts.solver;
  if (fp.support_size <= 0)
    fp.support_size = p.mesh->size();
  p.options.solver = fp;
  p.result = solve_fixed_point(p.omega, fp);
  if (opts.refine)
    p.result = refine_map_like(p.omega, p.result, {}, fp.threads);
  return p;
}

InequalityReport jensen_check(const PreparedOmega& prepared, const JensenFunctional& functional,
                              double slack) {
  const OmegaSpec& omega = prepared.omega;
  const ManifoldSpec& spec = omega.manifold;
  const DensityEstimator est = prepared.options.estimator;
  InequalityReport rep;
  rep.experiment = "jensen";
  rep.slack = slack;
  rep.seed = prepared.options.solver.seed;
  rep.resolutions = {prepared.mesh->resolution()};
  record_solver(rep, prepared.result);

  std::vector<double> values(omega.entries.size());
  if (const auto* es = std::get_if<EntropySpec>(&functional)) {
    rep.set_info("functional", "entropy:" + to_string(es->family()));
    rep.set_metric("K", require_nonnegative_cd(spec, *es));
    const MeshDensity fbar = estimate_density(prepared.result.measure, prepared.mesh, est);
    rep.lhs = entropy(*es, fbar);
    for (std::size_t i = 0; i < omega.entries.size(); ++i)
      values[i] = entropy(*es, entry_density(omega.entries[i], prepared.mesh, est));
    rep.diagnostics.columns = {"cell", "barycenter_density"};
    for (int c = 0; c < fbar.size(); ++c)
      rep.diagnostics.rows.push_back({double(c), fbar.value(c)});
  } else if (const auto* pf = std::get_if<PotentialFunctional>(&functional)) {
    rep.set_info("functional", pf->name);
    rep.lhs = potential_energy(pf->V, prepared.result.measure);
    for (std::size_t i = 0; i < omega.entries.size(); ++i)
      values[i] = potential_energy(pf->V, omega.entries[i].measure);
  } else {
    const auto& inf = std::get<InteractionFunctional>(functional);
    rep.set_info("functional", inf.name);
    rep.lhs = interaction_energy(inf.W, prepared.result.measure);
    for (std::size_t i = 0; i < omega.entries.size(); ++i)
      values[i] = interaction_energy(inf.W, omega.entries[i].measure);
  }
  rep.rhs = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    rep.rhs += omega.entries[i].weight * values[i];
    rep.set_metric("F_entry_" + std::to_string(i), values[i]);
  }
  rep.decide();
  return rep;
}

InequalityReport jensen_check(const OmegaSpec& omega, const JensenFunctional& functional,
                              const JensenOptions& opts) {
  ReferenceMeasure ref;
  if (const auto* es = std::get_if<EntropySpec>(&functional))
    ref = es->reference();
  return jensen_check(prepare_omega(omega, ref, opts), functional, opts.slack);
}

InequalityReport distorted_jensen_check(const PreparedOmega& prepared, const EntropySpec& es,
                                        double slack) {
  const OmegaSpec& omega = prepared.omega;
  const ManifoldSpec& spec = omega.manifold;
  const BarycenterResult& res = prepared.result;
  if (!es.reference().is_volume())
    throw InvalidArgument("the distorted Jensen check is stated for the volume measure");
  for (const auto& e : omega.entries)
    if (!e.absolutely_continuous())
      throw InvalidArgument("the distorted Jensen check needs a density for every entry");
  require_nonnegative_cd(spec, es);

  InequalityReport rep;
  rep.experiment = "jensen-distorted";
  rep.slack = slack;
  rep.seed = prepared.options.solver.seed;
  rep.resolutions = {prepared.mesh->resolution()};
  rep.set_info("functional", "entropy:" + to_string(es.family()));
  record_solver(rep, res);

  const int K = res.measure.size();
  const int m = static_cast<int>(omega.entries.size());

  // alpha_{lambda_x}(y) for every barycenter atom x and every target y it
  // sends mass to; lambda_x collects all transported images of x.
  struct Pair {
    int entry, target;
    double mass, alpha;
  };
  std::vector<std::vector<Pair>> pairs(K);
  std::vector<char> map_like(K, 1), failed(K, 0);
  parallel_for(
      K,
      [&](int k) {
        WeightedConfig lam;
        std::vector<Pair>& out = pairs[k];
        for (int i = 0; i < m; ++i) {
          const TransportPlan& plan = res.plans[i];
          map_like[k] = map_like[k] && is_map_like(plan, k);
          const double row = plan.coupling.row(k).sum();
          for (int j = 0; j < plan.coupling.cols(); ++j) {
            const double g = plan.coupling(k, j);
            if (g > 1e-12 * row) {
              lam.points.push_back(plan.target.point(j));
              lam.weights.push_back(omega.entries[i].weight * g / row);
              out.push_back({i, j, g, 1.0});
            }
          }
        }
        try {
          const Point bar = bc_map(spec, lam, {});
          for (std::size_t p = 0; p < out.size(); ++p)
            out[p].alpha = alpha_at(spec, lam, bar, lam.points[p]).alpha;
        } catch (const Error&) {
          failed[k] = 1;
          out.clear();
        }
      },
      prepared.options.solver.threads);

  int not_map_like = 0, n_failed = 0;
  for (int k = 0; k < K; ++k) {
    not_map_like += map_like[k] ? 0 : 1;
    n_failed += failed[k];
  }

  const MeshDensity fbar = estimate_density(res.measure, prepared.mesh, prepared.options.estimator);
  rep.lhs = entropy(es, fbar);
  rep.diagnostics.columns = {"entry", "cell", "density", "alpha"};
  rep.rhs = 0.0;
  double alpha_min = kInf, alpha_max = -kInf;
  for (int i = 0; i < m; ++i) {
    const MeshDensity& g = *omega.entries[i].density;
    const Mesh& mesh = *g.mesh();
    std::vector<double> num(mesh.size(), 0.0), den(mesh.size(), 0.0);
    std::vector<int> cell_of_target(res.plans[i].target.size());
    for (int j = 0; j < res.plans[i].target.size(); ++j)
      cell_of_target[j] = mesh.cell_of(res.plans[i].target.point(j));
    for (int k = 0; k < K; ++k)
      for (const Pair& p : pairs[k])
        if (p.entry == i) {
          num[cell_of_target[p.target]] += p.mass * p.alpha;
          den[cell_of_target[p.target]] += p.mass;
        }
    const double total = mesh.total_volume();
    std::vector<double> parts(mesh.size());
    for (int c = 0; c < mesh.size(); ++c) {
      const double a = den[c] > 0.0 ? num[c] / den[c] : 1.0;
      if (den[c] > 0.0) {
        alpha_min = std::min(alpha_min, a);
        alpha_max = std::max(alpha_max, a);
      }
      parts[c] = es.U(g.value(c) * total / a) * a * (mesh.volume(c) / total);
      rep.diagnostics.rows.push_back({double(i), double(c), g.value(c), a});
    }
    const double Fi = pairwise_sum(parts.data(), parts.size());
    rep.rhs += omega.entries[i].weight * Fi;
    rep.set_metric("F_entry_" + std::to_string(i), Fi);
  }
  rep.set_metric("alpha_min", alpha_min);
  rep.set_metric("alpha_max", alpha_max);
  rep.set_metric("not_map_like_atoms", not_map_like);
  rep.set_metric("alpha_failures", n_failed);
  const double frac = K > 0 ? double(not_map_like) / K : 0.0;
  rep.set_metric("not_map_like_fraction", frac);
  if (frac > 0.2) {
    rep.verdict = Verdict::Inconclusive;
    rep.warnings.push_back("more than 20% of barycenter atoms are split by the transport plans");
  }
  rep.decide();
  return rep;
}

InequalityReport distorted_jensen_check(const OmegaSpec& omega, const EntropySpec& spec,
                                        const JensenOptions& opts) {
  return distorted_jensen_check(prepare_omega(omega, spec.reference(), opts), spec, opts.slack);
}

InequalityReport density_bound_check(const OmegaSpec& omega, const BarycenterResult& result,
                                     int mesh_res, DensityEstimator estimator) {
  omega.validate();
  const ManifoldSpec& spec = omega.manifold;
  const int n = spec.dim();
  InequalityReport rep;
  rep.experiment = "density-bound";
  rep.resolutions = {mesh_res};
  record_solver(rep, result);

  const MeshPtr mesh = Mesh::build(spec, mesh_res);
  const MeshDensity fbar = estimate_density(result.measure, mesh, estimator);
  rep.lhs = ess_sup(fbar);

  double L = 0.0, mass = 0.0;
  for (const auto& e : omega.entries) {
    if (!e.absolutely_continuous())
      continue;
    if (!e.density->mesh()->reference().is_volume())
      throw Unsupported("density bounds are stated for densities with respect to volume");
    L = std::max(L, ess_sup(*e.density));
    mass += e.weight;
  }
  const double C = alpha_lower_bound(spec);
  rep.set_metric("C", C);
  rep.set_metric("L", L);
  rep.set_metric("omega_A_L", mass);
  rep.set_metric("binning_factor", 1.1);
  rep.diagnostics.columns = {"cell", "barycenter_density"};
  for (int c = 0; c < fbar.size(); ++c)
    rep.diagnostics.rows.push_back({double(c), fbar.value(c)});
  if (!(mass > 0.0)) {
    rep.rhs = kInf;
    rep.verdict = Verdict::NotApplicable;
    rep.warnings.push_back("no absolutely continuous entry; the barycenter need not have a density");
    return rep;
  }
  const double bound = L * std::pow(mass, -static_cast<double>(n)) / C;
  rep.set_metric("bound", bound);
  rep.rhs = 1.1 * bound;
  rep.decide();
  return rep;
}

namespace {

struct BMCore {
  double nu_Z = 0.0, nu_hit = 0.0;
  std::vector<double> nu_A;
  long tuples = 0, ambiguous = 0, outside = 0;
  bool sampled = false, dilated = false;
  double min_spread = kInf; // min over tuples of sum_i w_i d^2(z, x_i)
  std::vector<char> hit, in_Z;
};

BMCore bm_core(const MeshPtr& mesh, const std::vector<std::vector<bool>>& sets,
               const std::vector<double>& weights, const BMOptions& opts) {
  if (!mesh)
    throw InvalidArgument("Brunn-Minkowski needs a mesh");
  if (sets.empty() || sets.size() != weights.size())
    throw InvalidArgument("one weight per set is required");
  const ManifoldSpec& spec = mesh->spec();
  const double total = mesh->total_volume();

  double wsum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw InvalidArgument("set weights must be nonnegative");
    wsum += w;
  }
  if (!(wsum > 0.0))
    throw InvalidArgument("set weights must not all vanish");

  BMCore core;
  std::vector<std::vector<int>> cells;
  std::vector<double> w;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const double a = set_measure(*mesh, sets[i]);
    if (!(a > 0.0))
      throw EmptySet("set " + std::to_string(i) + " has zero reference measure");
    core.nu_A.push_back(a / total);
    if (weights[i] == 0.0)
      continue;
    std::vector<int> c;
    for (int k = 0; k < mesh->size(); ++k)
      if (sets[i][k])
        c.push_back(k);
    cells.push_back(std::move(c));
    w.push_back(weights[i] / wsum);
  }
  const int m = static_cast<int>(cells.size());

  double product = 1.0;
  for (const auto& c : cells)
    product *= static_cast<double>(c.size());
  core.sampled = product > static_cast<double>(opts.sample_budget);
  const long T = core.sampled ? opts.sample_budget : static_cast<long>(product);
  if (T > static_cast<long>(std::numeric_limits<int>::max()))
    throw SizeLimit("too many tuples");

  // Sampled tuples are drawn in sequence so a larger budget extends a smaller one.
  std::vector<int> picks;
  if (core.sampled) {
    picks.resize(static_cast<std::size_t>(T) * m);
    std::mt19937_64 rng(opts.seed);
    for (long t = 0; t < T; ++t)
      for (int i = 0; i < m; ++i) {
        std::uniform_int_distribution<int> d(0, static_cast<int>(cells[i].size()) - 1);
        picks[t * m + i] = d(rng);
      }
  }

  std::vector<int> hit_cell(T, -1);
  std::vector<char> status(T, 0); // 0 ok, 1 ambiguous, 2 outside
  std::vector<double> spread(T, kInf);
  parallel_for(
      static_cast<int>(T),
      [&](int t) {
        WeightedConfig cfg;
        cfg.weights = w;
        long code = t;
        for (int i = 0; i < m; ++i) {
          int idx;
          if (core.sampled) {
            idx = picks[static_cast<std::size_t>(t) * m + i];
          } else {
            const long sz = static_cast<long>(cells[i].size());
            idx = static_cast<int>(code % sz);
            code /= sz;
          }
          cfg.points.push_back(mesh->center(cells[i][idx]));
        }
        const BarycenterEvaluation ev = evaluate_barycenter(spec, cfg, opts.karcher);
        if (ev.ambiguous) {
          status[t] = 1;
          return;
        }
        spread[t] = 2.0 * ev.best.functional;
        try {
          hit_cell[t] = mesh->cell_of(ev.best.point);
        } catch (const InvalidPoint&) {
          status[t] = 2;
        }
      },
      opts.threads);

  core.tuples = T;
  core.hit.assign(mesh->size(), 0);
  for (long t = 0; t < T; ++t) {
    if (status[t] == 1)
      ++core.ambiguous;
    else if (status[t] == 2)
      ++core.outside;
    if (status[t] == 0) {
      core.hit[hit_cell[t]] = 1;
      core.min_spread = std::min(core.min_spread, spread[t]);
    }
  }
  // One set means Z = A exactly; otherwise cover the gaps between samples.
  core.dilated = m > 1;
  core.in_Z = core.hit;
  if (core.dilated)
    for (int c = 0; c < mesh->size(); ++c)
      if (core.hit[c])
        for (int nb : mesh->neighbours(c))
          core.in_Z[nb] = 1;
  std::vector<bool> hit(core.hit.begin(), core.hit.end());
  std::vector<bool> z(core.in_Z.begin(), core.in_Z.end());
  core.nu_hit = set_measure(*mesh, hit) / total;
  core.nu_Z = set_measure(*mesh, z) / total;
  return core;
}

InequalityReport bm_report(const std::string& name, const MeshPtr& mesh,
                           const std::vector<std::vector<bool>>& sets,
                           const std::vector<double>& weights, double N, const BMOptions& opts,
                           BMCore* core_out) {
  const double K = cd_condition(mesh->spec(), mesh->reference(), N);
  if (!(K >= 0.0))
    throw CDViolated("Brunn-Minkowski is checked only under CD(0, N)");

  BMCore core = bm_core(mesh, sets, weights, opts);
  InequalityReport rep;
  rep.experiment = name;
  rep.slack = opts.slack;
  rep.seed = opts.seed;
  rep.resolutions = {mesh->resolution()};
  rep.set_metric("K", K);
  rep.set_metric("N", N);

  double wsum = 0.0;
  for (double w : weights)
    wsum += w;
  const bool finite = std::isfinite(N);
  rep.lhs = 0.0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const double a = core.nu_A[i];
    rep.lhs += weights[i] / wsum * (finite ? std::pow(a, 1.0 / N) : std::log(a));
    rep.set_metric("nu_A_" + std::to_string(i), a);
  }
  rep.rhs = finite ? std::pow(core.nu_Z, 1.0 / N) : std::log(core.nu_Z);
  rep.set_metric("nu_Z", core.nu_Z);
  rep.set_metric("nu_Z_hit_cells", core.nu_hit);
  rep.set_metric("tuples", static_cast<double>(core.tuples));
  rep.set_metric("ambiguous_tuples", static_cast<double>(core.ambiguous));
  rep.set_metric("outside_tuples", static_cast<double>(core.outside));
  rep.set_info("sampled", fmt_bool(core.sampled));
  rep.set_info("dilated", fmt_bool(core.dilated));
  rep.set_info("branch", finite ? "power" : "log");

  rep.diagnostics.columns = {"cell", "hit", "in_Z"};
  for (std::size_t i = 0; i < sets.size(); ++i)
    rep.diagnostics.columns.push_back("in_A_" + std::to_string(i));
  for (int c = 0; c < mesh->size(); ++c) {
    std::vector<double> row = {double(c), double(core.hit[c]), double(core.in_Z[c])};
    for (const auto& s : sets)
      row.push_back(s[c] ? 1.0 : 0.0);
    rep.diagnostics.rows.push_back(std::move(row));
  }

  if (core.tuples > 0 &&
      static_cast<double>(core.ambiguous) / core.tuples > opts.max_ambiguous_fraction) {
    rep.verdict = Verdict::Inconclusive;
    rep.warnings.push_back("too many tuples have more than one barycenter");
  }
  if (core.outside > 0)
    rep.warnings.push_back("some barycenters fell outside the mesh");
  rep.decide();
  if (core_out)
    *core_out = std::move(core);
  return rep;
}

} // namespace

InequalityReport multiset_bm(const MeshPtr& mesh, const std::vector<std::vector<bool>>& sets,
                             const std::vector<double>& weights, double N,
                             const BMOptions& opts) {
  return bm_report("bm", mesh, sets, weights, N, opts, nullptr);
}

void RandomSetSpec::validate() const {
  if (!mesh)
    throw InvalidArgument("random set needs a mesh");
  if (sets.empty() || sets.size() != probabilities.size())
    throw InvalidArgument("one probability per set is required");
  double s = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0))
      throw InvalidArgument("probabilities must be nonnegative");
    s += p;
  }
  if (!(s > 0.0))
    throw InvalidArgument("probabilities must not all vanish");
  for (const auto& a : sets) {
    if (static_cast<int>(a.size()) != mesh->size())
      throw InvalidArgument("indicator size does not match the mesh");
    if (!(set_measure(*mesh, a) > 0.0))
      throw EmptySet("every realization of the random set needs positive measure");
  }
}

InequalityReport random_bm(const RandomSetSpec& rset, double N, const BMOptions& opts) {
  rset.validate();
  BMCore core;
  InequalityReport rep =
      bm_report("bm-random", rset.mesh, rset.sets, rset.probabilities, N, opts, &core);
  if (!std::isfinite(N)) {
    // Recorded only: the gate keeps k = 0.
    const double K = rep.metric("K");
    rep.set_metric("alpha_X_estimate", core.min_spread);
    rep.set_metric("k_term", 0.5 * K * core.min_spread);
    rep.set_metric("enhanced_lhs", rep.lhs + 0.5 * K * core.min_spread);
    rep.set_info("enhanced_holds", fmt_bool(rep.lhs + 0.5 * K * core.min_spread <= rep.rhs));
  }
  return rep;
}

} // namespace wbc
