#include "wbc/cli.hpp"

#include "wbc/errors.hpp"
#include "wbc/io.hpp"
#include "wbc/parallel.hpp"
#include "wbc/selftest.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <optional>
#include <sstream>

namespace wbc::cli {

namespace {

using io::Json;

struct Common {
  int threads = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  std::string csv;
};

struct Args {
  std::string manifold, mu, nu, method, omega, points, weights, init, lam, y, result, config,
      estimator, inject_fault;
  double epsilon = 1e-2;
  double tol = 0.0;
  double slack = -1.0;
  double min_fraction = 0.95;
  int support_size = 0;
  int restarts = 1;
  int max_iter = 100;
  int mesh_res = 0;
  bool refine = false;
  bool numeric = false;
};

class Context {
public:
  Context(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  void emit(const std::string& command, Json config, Json result, const Common& c) {
    Json doc;
    doc["command"] = command;
    config["seed"] = c.seed;
    doc["config"] = std::move(config);
    doc["result"] = std::move(result);
    const std::string text = io::dump(doc);
    if (c.out.empty())
      out_ << text;
    else
      io::write_file_atomic(c.out, text);
  }

  void emit_csv(const DiagnosticsTable& t, const Common& c) {
    if (c.csv.empty())
      return;
    std::ostringstream s;
    t.write_csv(s);
    io::write_file_atomic(c.csv, s.str());
  }

  std::ostream& out() { return out_; }
  std::ostream& err() { return err_; }

private:
  std::ostream& out_;
  std::ostream& err_;
};

Json load(const std::string& path) { return io::read_json_file(path); }

// Inline the manifold so the echoed config stands on its own.
Json resolved_omega(const Json& j, const std::string& base) {
  Json out = io::resolve(j, base);
  if (out.contains("manifold"))
    out["manifold"] = io::resolve(out.at("manifold"), base);
  for (auto& e : out.at("entries"))
    if (e.contains("measure"))
      e["measure"] = io::resolve(e.at("measure"), base);
  return out;
}

std::string base_of(const std::string& path) { return io::directory_of(path); }

int verdict_code(const InequalityReport& r) {
  return r.pass() ? kSuccess : kInequalityFailed;
}

FixedPointOptions solver_from_json(const Json& j, const Common& c) {
  FixedPointOptions fo;
  fo.support_size = j.value("support_size", 0);
  fo.max_iter = j.value("max_iter", fo.max_iter);
  fo.restarts = j.value("restarts", 1);
  fo.tol = j.value("tol", 0.0);
  fo.seed = c.seed_set ? c.seed : j.value("seed", std::uint64_t{0});
  fo.threads = c.threads;
  return fo;
}

JensenFunctional functional_from_json(const ManifoldSpec& spec, const Json& j) {
  if (j.contains("potential")) {
    const Json& p = j.at("potential");
    if (p.value("kind", std::string()) != "half_squared_distance")
      throw InvalidArgument("potential kind must be half_squared_distance");
    const Point c = io::point_from_json(p.at("center"));
    validate_point(spec, c);
    return PotentialFunctional{[spec, c](const Point& x) { return cost(spec, x, c); },
                               "potential:half_squared_distance"};
  }
  if (j.contains("interaction")) {
    const Json& w = j.at("interaction");
    if (w.value("kind", std::string()) != "half_squared_distance")
      throw InvalidArgument("interaction kind must be half_squared_distance");
    return InteractionFunctional{
        [spec](const Point& x, const Point& y) { return cost(spec, x, y); },
        "interaction:half_squared_distance"};
  }
  return io::entropy_from_json(j);
}

// --- subcommands -----------------------------------------------------------

int cmd_ot(Context& ctx, const Args& a, const Common& c, bool only_w2) {
  const ManifoldSpec spec = io::manifold_from_json(load(a.manifold));
  const DiscreteMeasure mu = io::measure_from_json(spec, load(a.mu));
  const DiscreteMeasure nu = io::measure_from_json(spec, load(a.nu));
  const std::string method = a.method.empty() ? "exact" : a.method;
  EntropicOptions eo;
  eo.epsilon = a.epsilon;
  OTResult r;
  if (method == "exact")
    r = solve_exact(mu, nu, spec);
  else if (method == "entropic")
    r = solve_entropic(mu, nu, spec, eo);
  else
    throw InvalidArgument("method must be exact or entropic");
  const double value = std::sqrt(std::max(0.0, 2.0 * r.plan.transport_cost));

  Json config{{"manifold", io::to_json(spec)},
              {"mu", io::to_json(mu)},
              {"nu", io::to_json(nu)},
              {"method", method}};
  if (method == "entropic")
    config["epsilon"] = a.epsilon;
  if (only_w2) {
    ctx.out() << Json(value).dump() << "\n";
    if (!c.out.empty())
      ctx.emit("w2", config, {{"w2", value}}, c);
    return kSuccess;
  }
  Json res = io::to_json(r.plan, &r.duals);
  res["w2"] = value;
  res["gap"] = r.gap;
  res["iterations"] = r.iterations;
  ctx.emit("ot", config, res, c);
  return kSuccess;
}

int cmd_karcher(Context& ctx, const Args& a, const Common& c) {
  const ManifoldSpec spec = io::manifold_from_json(load(a.manifold));
  Json pts = load(a.points);
  if (pts.is_object())
    pts = pts.at("points");
  WeightedConfig cfg;
  for (const auto& p : pts)
    cfg.points.push_back(io::point_from_json(p));
  Json w = load(a.weights);
  if (w.is_object())
    w = w.at("weights");
  cfg.weights = w.get<std::vector<double>>();
  cfg.validate(spec);
  KarcherOptions ko;
  ko.tol = a.tol;
  Json config{{"manifold", io::to_json(spec)}, {"points", pts}, {"weights", cfg.weights}};
  Json res;
  if (!a.init.empty()) {
    const Point init = io::point_from_string(a.init);
    config["init"] = io::to_json(init);
    res = io::to_json(karcher_mean(cfg, spec, init, ko));
  } else {
    const BarycenterEvaluation ev = evaluate_barycenter(spec, cfg, ko);
    res = io::to_json(ev.best);
    res["ambiguous"] = ev.ambiguous;
    res["starts"] = ev.starts;
    if (ev.ambiguous) {
      res["rival"] = io::to_json(ev.rival);
      ctx.emit("karcher", config, res, c);
      ctx.err() << "error: the weighted points have more than one barycenter\n";
      return kSolverError;
    }
  }
  ctx.emit("karcher", config, res, c);
  return kSuccess;
}

int cmd_barycenter(Context& ctx, const Args& a, const Common& c) {
  const Json oj = resolved_omega(load(a.omega), base_of(a.omega));
  const OmegaSpec omega = io::omega_from_json(oj, base_of(a.omega));
  const std::string method = a.method.empty() ? "fixed-point" : a.method;
  Json config{{"omega", oj}, {"method", method}};
  BarycenterResult r;
  if (method == "fixed-point") {
    FixedPointOptions fo;
    fo.support_size = a.support_size;
    fo.seed = c.seed;
    fo.restarts = a.restarts;
    fo.max_iter = a.max_iter;
    fo.tol = a.tol;
    fo.threads = c.threads;
    config["support_size"] = a.support_size;
    config["restarts"] = a.restarts;
    config["max_iter"] = a.max_iter;
    config["tol"] = a.tol;
    r = solve_fixed_point(omega, fo);
  } else if (method == "multimarginal") {
    r = solve_multimarginal(omega, {}, c.threads);
  } else {
    throw InvalidArgument("method must be fixed-point or multimarginal");
  }
  if (a.refine) {
    config["refine"] = true;
    r = refine_map_like(omega, r, {}, c.threads);
  }
  Json res = io::to_json(r);
  if (a.mesh_res > 0) {
    config["mesh_res"] = a.mesh_res;
    const MeshPtr mesh = Mesh::build(omega.manifold, a.mesh_res);
    res["balance"] = io::to_json(balance_certificate(r, omega, mesh->cell_size(),
                                                     a.slack > 0 ? a.slack : 0.0));
  }
  ctx.emit("barycenter", config, res, c);
  DiagnosticsTable t{{"atom", "mass", "residual"}, {}};
  for (int k = 0; k < r.measure.size(); ++k)
    t.rows.push_back({double(k), r.measure.mass(k),
                      k < static_cast<int>(r.first_order_residuals.size())
                          ? r.first_order_residuals[k]
                          : 0.0});
  ctx.emit_csv(t, c);
  return kSuccess;
}

int cmd_alpha(Context& ctx, const Args& a, const Common& c) {
  const ManifoldSpec spec = io::manifold_from_json(load(a.manifold));
  const Json lj = load(a.lam);
  const DiscreteMeasure lam = io::measure_from_json(spec, lj);
  const Point y = io::point_from_string(a.y);
  const WeightedConfig cfg{lam.points(), lam.masses()};
  const DistortionReport d = a.numeric ? alpha_numeric(spec, cfg, y) : alpha(spec, cfg, y);
  Json config{{"manifold", io::to_json(spec)},
              {"lam", io::to_json(lam)},
              {"y", io::to_json(y)},
              {"numeric", a.numeric}};
  Json res = io::to_json(d);
  res["lower_bound"] = alpha_lower_bound(spec);
  ctx.emit("alpha", config, res, c);
  return kSuccess;
}

int cmd_jacobian(Context& ctx, const Args& a, const Common& c) {
  const Json oj = resolved_omega(load(a.omega), base_of(a.omega));
  const OmegaSpec omega = io::omega_from_json(oj, base_of(a.omega));
  const Json rj = load(a.result);
  const Json& body = rj.contains("result") ? rj.at("result") : rj;
  if (!body.contains("plans") || body.at("plans").empty()) {
    throw InvalidArgument("result file carries no plans");
  }
  BarycenterResult r = io::result_from_json(omega.manifold, body);
  io::attach_plans(r, omega, body);
  if (a.mesh_res <= 0)
    throw InvalidArgument("--mesh-res is required");
  const double slack = a.slack >= 0 ? a.slack : 0.05;
  const DensityEstimator est =
      a.estimator.empty() ? DensityEstimator::NearestCell : io::estimator_from_string(a.estimator);
  const JacobianReport jr = jacobian_inequality_check(
      r, omega, Mesh::build(omega.manifold, a.mesh_res), slack, est, c.threads);
  Json config{{"omega", oj},
              {"result", body},
              {"mesh_res", a.mesh_res},
              {"slack", slack},
              {"estimator", io::to_string(est)},
              {"min_fraction", a.min_fraction}};
  Json res = io::to_json(jr);
  const bool ok = jr.evaluated > 0 && jr.fraction_within >= a.min_fraction;
  res["pass"] = ok;
  ctx.emit("jacobian-check", config, res, c);
  DiagnosticsTable t{{"atom", "lhs", "density", "density_bound"}, {}};
  for (const auto& at : jr.atoms)
    if (at.evaluated)
      t.rows.push_back({double(at.atom), at.lhs, at.density, at.density_bound});
  ctx.emit_csv(t, c);
  return ok ? kSuccess : kInequalityFailed;
}

struct Experiment {
  Json config;
  std::string base;
};

Experiment load_experiment(const Args& a) {
  if (a.config.empty())
    throw InvalidArgument("--config is required");
  return {load(a.config), base_of(a.config)};
}

int cmd_jensen(Context& ctx, const Args& a, const Common& c, bool distorted) {
  Experiment ex = load_experiment(a);
  Json& cfg = ex.config;
  if (!a.omega.empty())
    cfg["omega"] = a.omega;
  const Json oj = resolved_omega(cfg.at("omega"), ex.base);
  const OmegaSpec omega = io::omega_from_json(oj, ex.base);
  cfg["omega"] = oj;
  if (a.mesh_res > 0)
    cfg["mesh_res"] = a.mesh_res;
  if (a.slack >= 0)
    cfg["slack"] = a.slack;
  if (!a.estimator.empty())
    cfg["estimator"] = a.estimator;

  JensenOptions jo;
  jo.mesh_res = cfg.value("mesh_res", 16);
  jo.slack = cfg.value("slack", 0.05);
  jo.estimator = io::estimator_from_string(cfg.value("estimator", std::string("linear")));
  jo.solver = solver_from_json(cfg.value("solver", Json::object()), c);
  jo.refine = cfg.value("refine", true);
  const JensenFunctional functional =
      functional_from_json(omega.manifold, cfg.value("functional", Json{{"family", "Uinf"}}));
  ReferenceMeasure ref;
  if (const auto* es = std::get_if<EntropySpec>(&functional))
    ref = es->reference();
  if (distorted && !std::holds_alternative<EntropySpec>(functional))
    throw InvalidArgument("the distorted check takes an entropy functional");

  auto one = [&](int res, double slack) {
    JensenOptions o = jo;
    o.mesh_res = res;
    const PreparedOmega p = prepare_omega(omega, ref, o);
    return distorted ? distorted_jensen_check(p, std::get<EntropySpec>(functional), slack)
                     : jensen_check(p, functional, slack);
  };

  InequalityReport rep;
  Json study;
  if (cfg.value("refinement_study", false)) {
    // Slack from the gap drift between R/2 and R, capped by the configured slack.
    const InequalityReport coarse = one(std::max(1, jo.mesh_res / 2), 0.0);
    const double derived = refinement_slack(coarse, one(jo.mesh_res, 0.0));
    rep = one(jo.mesh_res, derived);
    rep.resolutions = {coarse.resolutions[0], jo.mesh_res};
    rep.set_metric("coarse_gap", coarse.lhs - coarse.rhs);
    rep.set_info("slack_source", "refinement study");
    if (derived > jo.slack) {
      rep.verdict = Verdict::Fail;
      rep.warnings.push_back("refinement slack exceeds the configured cap");
    }
  } else {
    rep = one(jo.mesh_res, jo.slack);
    rep.set_info("slack_source", "configured");
  }
  rep.seed = jo.solver.seed;
  ctx.emit(distorted ? "jensen-distorted" : "jensen", cfg, io::to_json(rep), c);
  ctx.emit_csv(rep.diagnostics, c);
  return verdict_code(rep);
}

int cmd_density_bound(Context& ctx, const Args& a, const Common& c) {
  Experiment ex = load_experiment(a);
  Json& cfg = ex.config;
  if (!a.omega.empty())
    cfg["omega"] = a.omega;
  const Json oj = resolved_omega(cfg.at("omega"), ex.base);
  const OmegaSpec omega = io::omega_from_json(oj, ex.base);
  cfg["omega"] = oj;
  if (a.mesh_res > 0)
    cfg["mesh_res"] = a.mesh_res;
  if (!a.estimator.empty())
    cfg["estimator"] = a.estimator;
  const int res = cfg.value("mesh_res", 16);
  const DensityEstimator est =
      io::estimator_from_string(cfg.value("estimator", std::string("nearest")));
  BarycenterResult r;
  if (cfg.contains("result")) {
    const Json rj = io::resolve(cfg.at("result"), ex.base);
    r = io::result_from_json(omega.manifold, rj.contains("result") ? rj.at("result") : rj);
  } else {
    r = solve_fixed_point(omega, solver_from_json(cfg.value("solver", Json::object()), c));
  }
  InequalityReport rep = density_bound_check(omega, r, res, est);
  rep.seed = c.seed_set ? c.seed : cfg.value("solver", Json::object()).value("seed", std::uint64_t{0});
  ctx.emit("density-bound", cfg, io::to_json(rep), c);
  ctx.emit_csv(rep.diagnostics, c);
  return verdict_code(rep);
}

int cmd_bm(Context& ctx, const Args& a, const Common& c, bool random) {
  Experiment ex = load_experiment(a);
  Json& cfg = ex.config;
  if (a.mesh_res > 0)
    cfg["mesh_res"] = a.mesh_res;
  const Json mj = io::resolve(cfg.at("manifold"), ex.base);
  cfg["manifold"] = mj;
  const ManifoldSpec spec = io::manifold_from_json(mj);
  const MeshPtr mesh = Mesh::build(spec, cfg.value("mesh_res", 16),
                                   io::reference_from_json(cfg.value("reference", Json())));
  std::vector<std::vector<bool>> sets;
  for (const auto& s : cfg.at("sets"))
    sets.push_back(io::cell_set_from_json(mesh, s));
  const double N = cfg.contains("N") ? (cfg.at("N").is_string()
                                            ? std::numeric_limits<double>::infinity()
                                            : cfg.at("N").get<double>())
                                     : std::numeric_limits<double>::infinity();
  BMOptions bo;
  bo.sample_budget = cfg.value("sample_budget", bo.sample_budget);
  bo.seed = c.seed_set ? c.seed : cfg.value("seed", std::uint64_t{0});
  bo.slack = a.slack >= 0 ? a.slack : cfg.value("slack", 0.0);
  bo.threads = c.threads;
  InequalityReport rep;
  if (random) {
    RandomSetSpec rs{mesh, cfg.at("probabilities").get<std::vector<double>>(), sets};
    rep = random_bm(rs, N, bo);
  } else {
    rep = multiset_bm(mesh, sets, cfg.at("weights").get<std::vector<double>>(), N, bo);
  }
  ctx.emit(random ? "bm-random" : "bm", cfg, io::to_json(rep), c);
  ctx.emit_csv(rep.diagnostics, c);
  return verdict_code(rep);
}

int cmd_selftest(Context& ctx, const Args& a, const Common& c) {
  const SelfTestReport r = run_selftest(a.inject_fault);
  Json checks = Json::array();
  for (const auto& k : r.checks)
    checks.push_back(
        {{"module", k.module}, {"name", k.name}, {"pass", k.pass}, {"detail", k.detail}});
  Json res{{"pass", r.pass()},
           {"checks_run", r.checks.size()},
           {"failed", r.failed},
           {"checks", checks}};
  Json config = Json::object();
  if (!a.inject_fault.empty())
    config["inject_fault"] = a.inject_fault;
  ctx.emit("selftest", config, res, c);
  for (const auto& k : r.checks)
    if (!k.pass)
      ctx.err() << "FAIL " << k.module << ": " << k.name << " (" << k.detail << ")\n";
  return r.pass() ? kSuccess : kInequalityFailed;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--threads", c.threads, "Worker cap (0 = hardware)")->check(CLI::NonNegativeNumber);
  sub->add_option("--seed", c.seed, "Random seed")->each([&c](const std::string&) {
    c.seed_set = true;
  });
  sub->add_option("--out", c.out, "Write the JSON result here instead of stdout");
  sub->add_option("--csv", c.csv, "Write per-atom or per-cell diagnostics here");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wasserstein barycenters on compact manifolds", "wbc"};
  app.require_subcommand(1);
  Common c;
  Args a;
  Context ctx(out, err);

  auto* ot = app.add_subcommand("ot", "Optimal transport plan between two measures");
  auto* w2c = app.add_subcommand("w2", "Wasserstein distance between two measures");
  for (auto* s : {ot, w2c}) {
    s->add_option("--manifold", a.manifold)->required()->check(CLI::ExistingFile);
    s->add_option("--mu", a.mu)->required()->check(CLI::ExistingFile);
    s->add_option("--nu", a.nu)->required()->check(CLI::ExistingFile);
    s->add_option("--method", a.method, "exact | entropic");
    s->add_option("--epsilon", a.epsilon, "Entropic regularization");
    add_common(s, c);
  }
  auto* kar = app.add_subcommand("karcher", "Barycenter of weighted points");
  kar->add_option("--manifold", a.manifold)->required()->check(CLI::ExistingFile);
  kar->add_option("--points", a.points)->required()->check(CLI::ExistingFile);
  kar->add_option("--weights", a.weights)->required()->check(CLI::ExistingFile);
  kar->add_option("--init", a.init, "Single start \"x,y,...\"");
  kar->add_option("--tol", a.tol);
  add_common(kar, c);

  auto* bar = app.add_subcommand("barycenter", "Wasserstein barycenter of an Omega file");
  bar->add_option("--omega", a.omega)->required()->check(CLI::ExistingFile);
  bar->add_option("--method", a.method, "fixed-point | multimarginal");
  bar->add_option("--support-size", a.support_size);
  bar->add_option("--restarts", a.restarts);
  bar->add_option("--max-iter", a.max_iter);
  bar->add_option("--tol", a.tol);
  bar->add_option("--mesh-res", a.mesh_res, "Also report the balance certificate at this cell size");
  bar->add_option("--slack", a.slack);
  bar->add_flag("--refine", a.refine, "Split atoms so every plan is map-like");
  add_common(bar, c);

  auto* alp = app.add_subcommand("alpha", "Barycentric distortion coefficient");
  alp->add_option("--manifold", a.manifold)->required()->check(CLI::ExistingFile);
  alp->add_option("--lam", a.lam)->required()->check(CLI::ExistingFile);
  alp->add_option("--y", a.y)->required();
  alp->add_flag("--numeric", a.numeric, "Use finite differences");
  add_common(alp, c);

  auto* jac = app.add_subcommand("jacobian-check", "Discrete Jacobian inequality");
  jac->add_option("--result", a.result)->required()->check(CLI::ExistingFile);
  jac->add_option("--omega", a.omega)->required()->check(CLI::ExistingFile);
  jac->add_option("--mesh-res", a.mesh_res)->required();
  jac->add_option("--slack", a.slack);
  jac->add_option("--estimator", a.estimator, "nearest | linear");
  jac->add_option("--min-fraction", a.min_fraction);
  add_common(jac, c);

  auto* jen = app.add_subcommand("jensen", "Wasserstein Jensen inequality");
  auto* jed = app.add_subcommand("jensen-distorted", "Distorted Jensen inequality");
  auto* den = app.add_subcommand("density-bound", "Barycenter density bound");
  for (auto* s : {jen, jed, den}) {
    s->add_option("--config", a.config, "Experiment JSON")->required()->check(CLI::ExistingFile);
    s->add_option("--omega", a.omega, "Override the experiment's Omega");
    s->add_option("--mesh-res", a.mesh_res);
    s->add_option("--estimator", a.estimator, "nearest | linear");
    if (s != den) {
      s->add_option("--slack", a.slack);
      s->add_option("--tol", a.tol);
    }
    add_common(s, c);
  }
  auto* bm = app.add_subcommand("bm", "Multi-set Brunn-Minkowski inequality");
  auto* bmr = app.add_subcommand("bm-random", "Random Brunn-Minkowski inequality");
  for (auto* s : {bm, bmr}) {
    s->add_option("--config", a.config, "Experiment JSON")->required()->check(CLI::ExistingFile);
    s->add_option("--mesh-res", a.mesh_res);
    s->add_option("--slack", a.slack);
    add_common(s, c);
  }
  auto* st = app.add_subcommand("selftest", "Closed-form checks of every module");
  st->add_option("--inject-fault", a.inject_fault, "geometry");
  add_common(st, c);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  if (c.threads > 0)
    set_default_threads(c.threads);
  try {
    if (ot->parsed())
      return cmd_ot(ctx, a, c, false);
    if (w2c->parsed())
      return cmd_ot(ctx, a, c, true);
    if (kar->parsed())
      return cmd_karcher(ctx, a, c);
    if (bar->parsed())
      return cmd_barycenter(ctx, a, c);
    if (alp->parsed())
      return cmd_alpha(ctx, a, c);
    if (jac->parsed())
      return cmd_jacobian(ctx, a, c);
    if (jen->parsed())
      return cmd_jensen(ctx, a, c, false);
    if (jed->parsed())
      return cmd_jensen(ctx, a, c, true);
    if (den->parsed())
      return cmd_density_bound(ctx, a, c);
    if (bm->parsed())
      return cmd_bm(ctx, a, c, false);
    if (bmr->parsed())
      return cmd_bm(ctx, a, c, true);
    if (st->parsed())
      return cmd_selftest(ctx, a, c);
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "usage error: malformed JSON input: " << e.what() << "\n";
    return kUsage;
  } catch (const SizeLimit& e) {
    err << "error: SizeLimit: " << e.what() << "\n";
    return kSolverError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kSolverError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kSolverError;
  }
  err << "usage error: no subcommand\n";
  return kUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i)
    args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

} // namespace wbc::cli
