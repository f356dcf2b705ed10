#include "wbc/io.hpp"

#include "wbc/errors.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace wbc::io {

namespace {

const Json& need(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw InvalidArgument(std::string("missing JSON field '") + key + "'");
  return j.at(key);
}

double number(const Json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "infinity")
      return std::numeric_limits<double>::infinity();
    throw InvalidArgument("expected a number, got '" + s + "'");
  }
  if (!j.is_number())
    throw InvalidArgument("expected a number");
  return j.get<double>();
}

// JSON has no infinity; it is written as the string "inf".
Json num_json(double v) {
  if (std::isinf(v))
    return v > 0 ? Json("inf") : Json("-inf");
  if (std::isnan(v))
    return Json("nan");
  return Json(v);
}

Json vec_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i)
    a.push_back(num_json(v(i)));
  return a;
}

Eigen::VectorXd vec_from(const Json& j) {
  if (!j.is_array())
    throw InvalidArgument("expected a JSON array of numbers");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<int>(i)) = number(j[i]);
  return v;
}

} // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw InvalidArgument("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw InvalidArgument("cannot write '" + tmp + "'");
    out << content;
    out.flush();
    if (!out)
      throw InvalidArgument("failed writing '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InvalidArgument("cannot move output into place at '" + path + "'");
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string directory_of(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  return parent.empty() ? std::string(".") : parent.string();
}

Json resolve(const Json& j, const std::string& base_dir) {
  if (!j.is_string())
    return j;
  std::filesystem::path p(j.get<std::string>());
  if (p.is_relative())
    p = std::filesystem::path(base_dir) / p;
  return read_json_file(p.string());
}

Json to_json(const Point& p) { return vec_json(p); }
Point point_from_json(const Json& j) { return vec_from(j); }

Point point_from_string(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used])))
        ++used;
      if (used != item.size())
        throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidArgument("bad coordinate list '" + s + "'");
    }
  }
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<int>(v.size()));
}

Json to_json(const ManifoldSpec& spec) {
  Json j;
  j["kind"] = to_string(spec.kind());
  j["dim"] = spec.dim();
  switch (spec.kind()) {
  case ManifoldKind::Sphere:
    j["radius"] = spec.radius();
    break;
  case ManifoldKind::Torus:
    j["periods"] = vec_json(spec.lengths());
    break;
  case ManifoldKind::Box: {
    Json b = Json::array();
    for (int i = 0; i < spec.dim(); ++i)
      b.push_back({spec.lower()(i), spec.upper()(i)});
    j["bounds"] = b;
    break;
  }
  }
  return j;
}

ManifoldSpec manifold_from_json(const Json& j) {
  const std::string kind = need(j, "kind").get<std::string>();
  if (kind == "sphere")
    return ManifoldSpec::sphere(need(j, "dim").get<int>(), j.value("radius", 1.0));
  if (kind == "torus") {
    if (j.contains("periods"))
      return ManifoldSpec::torus(vec_from(j.at("periods")));
    return ManifoldSpec::torus(Eigen::VectorXd::Ones(need(j, "dim").get<int>()));
  }
  if (kind == "box") {
    const Json& b = need(j, "bounds");
    Eigen::VectorXd lo(b.size()), hi(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (!b[i].is_array() || b[i].size() != 2)
        throw InvalidArgument("box bounds are [lower, upper] pairs");
      lo(static_cast<int>(i)) = number(b[i][0]);
      hi(static_cast<int>(i)) = number(b[i][1]);
    }
    if (j.contains("dim") && j.at("dim").get<int>() != static_cast<int>(b.size()))
      throw InvalidArgument("box dim does not match its bounds");
    return ManifoldSpec::box(lo, hi);
  }
  throw InvalidArgument("unknown manifold kind '" + kind + "'");
}

Json to_json(const ReferenceMeasure& ref) {
  Json j;
  switch (ref.kind) {
  case ReferenceMeasure::Kind::Zero:
    j["V"] = "zero";
    break;
  case ReferenceMeasure::Kind::Gaussian:
    j["V"] = "gaussian";
    j["center"] = vec_json(ref.center);
    j["variance"] = ref.variance;
    break;
  case ReferenceMeasure::Kind::Tabulated:
    j["V"] = "tabulated";
    j["values"] = ref.table;
    break;
  }
  return j;
}

ReferenceMeasure reference_from_json(const Json& j) {
  if (j.is_null())
    return {};
  const std::string v = j.value("V", std::string("zero"));
  if (v == "zero")
    return {};
  if (v == "gaussian") {
    const double var = j.contains("sigma") ? std::pow(number(j.at("sigma")), 2)
                                           : number(need(j, "variance"));
    return ReferenceMeasure::gaussian(vec_from(need(j, "center")), var);
  }
  if (v == "tabulated")
    return ReferenceMeasure::tabulated(need(j, "values").get<std::vector<double>>());
  throw InvalidArgument("unknown reference potential '" + v + "'");
}

Json to_json(const DiscreteMeasure& m) {
  Json atoms = Json::array();
  for (int i = 0; i < m.size(); ++i)
    atoms.push_back({{"coords", vec_json(m.point(i))}, {"mass", m.mass(i)}});
  return {{"atoms", atoms}};
}

DiscreteMeasure measure_from_json(const ManifoldSpec& spec, const Json& j) {
  const Json& atoms = need(j, "atoms");
  std::vector<Point> pts;
  std::vector<double> w;
  for (const auto& a : atoms) {
    pts.push_back(vec_from(need(a, "coords")));
    w.push_back(number(need(a, "mass")));
  }
  return DiscreteMeasure::from_weights(spec, std::move(pts), std::move(w));
}

DensityFunction density_field_from_json(const ManifoldSpec& spec, const Json& j) {
  const std::string kind = need(j, "kind").get<std::string>();
  if (kind == "uniform")
    return [](const Point&) { return 1.0; };
  const Point c = vec_from(need(j, "center"));
  validate_point(spec, c);
  if (kind == "gaussian") {
    const double s = number(need(j, "sigma"));
    if (!(s > 0.0))
      throw InvalidArgument("gaussian sigma must be positive");
    return [spec, c, s](const Point& p) {
      const double d = distance(spec, p, c);
      return std::exp(-d * d / (2.0 * s * s));
    };
  }
  if (kind == "von_mises_fisher") {
    if (spec.kind() != ManifoldKind::Sphere)
      throw InvalidArgument("von_mises_fisher densities live on the sphere");
    const double k = number(need(j, "kappa"));
    const Point u = c.normalized();
    return [u, k, r = spec.radius()](const Point& p) { return std::exp(k * p.dot(u) / r); };
  }
  if (kind == "cosine") {
    if (spec.kind() != ManifoldKind::Torus)
      throw InvalidArgument("cosine densities live on the torus");
    const Eigen::VectorXd k = vec_from(need(j, "kappa"));
    if (k.size() != spec.dim())
      throw InvalidArgument("cosine density needs one kappa per axis");
    return [c, k, L = spec.lengths()](const Point& p) {
      double s = 0.0;
      for (int a = 0; a < p.size(); ++a)
        s += k(a) * std::cos(2.0 * M_PI * (p(a) - c(a)) / L(a));
      return std::exp(s);
    };
  }
  if (kind == "ball") {
    const double r = number(need(j, "radius"));
    return [spec, c, r](const Point& p) { return distance(spec, p, c) <= r ? 1.0 : 0.0; };
  }
  throw InvalidArgument("unknown density kind '" + kind + "'");
}

OmegaEntry omega_entry_from_json(const ManifoldSpec& spec, const Json& j,
                                 const std::string& base_dir) {
  const double w = number(need(j, "weight"));
  const Json m = resolve(need(j, "measure"), base_dir);
  if (m.contains("atoms"))
    return OmegaEntry::discrete(w, measure_from_json(spec, m));
  if (m.contains("mesh_density")) {
    const Json& md = m.at("mesh_density");
    const MeshPtr mesh = Mesh::build(spec, need(md, "resolution").get<int>(),
                                     reference_from_json(md.value("reference", Json())));
    const Eigen::VectorXd v = vec_from(need(md, "values"));
    if (v.size() != mesh->size())
      throw InvalidArgument("mesh_density has " + std::to_string(v.size()) + " values for " +
                            std::to_string(mesh->size()) + " cells");
    return OmegaEntry::continuous(w, MeshDensity::from_unnormalized(mesh, v));
  }
  if (m.contains("field")) {
    const MeshPtr mesh = Mesh::build(spec, m.value("resolution", 16),
                                     reference_from_json(m.value("reference", Json())));
    DensityFunction f = density_field_from_json(spec, m.at("field"));
    return OmegaEntry::continuous(w, discretize_density(mesh, f, m.value("subsamples", 2)), f);
  }
  throw InvalidArgument("measure needs 'atoms', 'mesh_density' or 'field'");
}

OmegaSpec omega_from_json(const Json& j, const std::string& base_dir) {
  OmegaSpec o;
  o.manifold = manifold_from_json(resolve(need(j, "manifold"), base_dir));
  for (const auto& e : need(j, "entries"))
    o.entries.push_back(omega_entry_from_json(o.manifold, e, base_dir));
  o.validate();
  return o;
}

Json to_json(const MeshDensity& md) {
  Json j;
  j["resolution"] = md.mesh()->resolution();
  j["reference"] = to_json(md.mesh()->reference());
  j["values"] = vec_json(md.values());
  return {{"mesh_density", j}};
}

Json to_json(const TransportPlan& plan, const DualPotentials* duals) {
  Json j;
  j["cost"] = plan.transport_cost;
  Json trip = Json::array();
  for (int a = 0; a < plan.coupling.rows(); ++a)
    for (int b = 0; b < plan.coupling.cols(); ++b)
      if (plan.coupling(a, b) != 0.0)
        trip.push_back({a, b, plan.coupling(a, b)});
  j["coupling"] = trip;
  if (duals)
    j["duals"] = {{"u", vec_json(duals->u)}, {"uc", vec_json(duals->uc)}};
  return j;
}

Json to_json(const BarycenterResult& r) {
  Json j;
  j["method"] = r.method;
  Json m = to_json(r.measure);
  j["atoms"] = m["atoms"];
  j["functional"] = r.functional;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["certificate_gap"] = r.certificate_gap;
  j["restart_used"] = r.restart_used;
  j["residuals"] = r.first_order_residuals;
  j["functional_log"] = r.functional_log;
  Json plans = Json::array();
  for (std::size_t i = 0; i < r.plans.size(); ++i)
    plans.push_back(to_json(r.plans[i], i < r.duals.size() ? &r.duals[i] : nullptr));
  j["plans"] = plans;
  j["warnings"] = r.warnings;
  return j;
}

BarycenterResult result_from_json(const ManifoldSpec& spec, const Json& j) {
  BarycenterResult r;
  r.method = j.value("method", std::string("unknown"));
  r.measure = measure_from_json(spec, j);
  r.functional = j.value("functional", 0.0);
  r.iterations = j.value("iterations", 0);
  r.converged = j.value("converged", false);
  r.certificate_gap = j.value("certificate_gap", 0.0);
  if (j.contains("residuals"))
    r.first_order_residuals = j.at("residuals").get<std::vector<double>>();
  if (j.contains("warnings"))
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
  return r;
}

void attach_plans(BarycenterResult& r, const OmegaSpec& omega, const Json& j) {
  const Json& plans = need(j, "plans");
  if (plans.size() != omega.entries.size())
    throw InvalidArgument("result has " + std::to_string(plans.size()) + " plans for " +
                          std::to_string(omega.entries.size()) + " entries");
  r.plans.clear();
  r.duals.clear();
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const DiscreteMeasure& target = omega.entries[i].measure;
    TransportPlan plan{r.measure, target,
                       Eigen::MatrixXd::Zero(r.measure.size(), target.size()), 0.0};
    for (const auto& t : need(plans[i], "coupling")) {
      const long a = t.at(0).get<long>();
      const long b = t.at(1).get<long>();
      if (a < 0 || a >= r.measure.size() || b < 0 || b >= target.size())
        throw InvalidArgument("plan entry out of range");
      plan.coupling(a, b) = number(t.at(2));
      plan.transport_cost +=
          plan.coupling(a, b) * cost(omega.manifold, r.measure.point(a), target.point(b));
    }
    r.plans.push_back(std::move(plan));
    DualPotentials d;
    if (plans[i].contains("duals")) {
      d.u = vec_from(plans[i].at("duals").at("u"));
      d.uc = vec_from(plans[i].at("duals").at("uc"));
    }
    r.duals.push_back(std::move(d));
  }
}

Json to_json(const BalanceReport& b) {
  Json j;
  j["max_first_order"] = b.max_first_order;
  j["second_order_evaluated"] = b.second_order_evaluated;
  j["max_second_order"] = num_json(b.max_second_order);
  j["step"] = b.step;
  j["slack"] = b.slack;
  j["second_order_within_slack"] = b.second_order_within_slack;
  return j;
}

Json to_json(const DistortionReport& d) {
  return {{"alpha", d.alpha},
          {"barycenter", vec_json(d.barycenter)},
          {"numerator", d.numerator},
          {"denominator", d.denominator}};
}

Json to_json(const JacobianReport& r, bool per_atom) {
  Json j;
  j["total"] = r.total;
  j["map_like"] = r.map_like;
  j["evaluated"] = r.evaluated;
  j["skipped_not_map_like"] = r.skipped_not_map_like;
  j["skipped_zero_density"] = r.skipped_zero_density;
  j["skipped_other"] = r.skipped_other;
  j["slack"] = r.slack;
  j["within_slack"] = r.within_slack;
  j["fraction_within"] = r.fraction_within;
  j["density_within_slack"] = r.density_within_slack;
  j["density_fraction_within"] = r.density_fraction_within;
  j["max_lhs"] = r.max_lhs;
  if (per_atom) {
    Json atoms = Json::array();
    for (const auto& a : r.atoms)
      if (a.evaluated)
        atoms.push_back({{"atom", a.atom},
                         {"lhs", a.lhs},
                         {"density", a.density},
                         {"density_bound", a.density_bound}});
    j["atoms"] = atoms;
  }
  return j;
}

Json to_json(const KarcherResult& k) {
  return {{"point", vec_json(k.point)},
          {"residual", k.residual},
          {"functional", k.functional},
          {"iterations", k.iterations}};
}

Json to_json(const EntropySpec& e) {
  Json j;
  j["family"] = to_string(e.family());
  if (e.family() == EntropyFamily::UN)
    j["N"] = e.N();
  if (e.family() == EntropyFamily::Custom) {
    if (!e.expression().empty()) {
      j["expression"] = e.expression();
    } else {
      Json terms = Json::array();
      for (const auto& t : e.terms())
        terms.push_back({{"coefficient", t.coefficient},
                         {"power", t.power},
                         {"log_power", t.log_power}});
      j["terms"] = terms;
    }
  }
  j["reference"] = to_json(e.reference());
  return j;
}

EntropySpec entropy_from_json(const Json& j) {
  const std::string f = need(j, "family").get<std::string>();
  const ReferenceMeasure ref = reference_from_json(j.value("reference", Json()));
  if (f == "Uinf" || f == "U_infinity")
    return EntropySpec::u_infinity(ref);
  if (f == "UN" || f == "U_N")
    return EntropySpec::un(number(need(j, "N")), ref);
  if (f == "custom") {
    if (j.contains("expression"))
      return EntropySpec::custom(j.at("expression").get<std::string>(), ref);
    std::vector<EnergyTerm> terms;
    for (const auto& t : need(j, "terms"))
      terms.push_back({number(need(t, "coefficient")), number(need(t, "power")),
                       t.value("log_power", 0)});
    return EntropySpec::custom(std::move(terms), ref);
  }
  throw InvalidArgument("unknown entropy family '" + f + "'");
}

Json to_json(const InequalityReport& r) {
  Json j;
  j["experiment"] = r.experiment;
  j["verdict"] = to_string(r.verdict);
  j["pass"] = r.pass();
  j["lhs"] = num_json(r.lhs);
  j["rhs"] = num_json(r.rhs);
  j["slack"] = r.slack;
  j["seed"] = r.seed;
  j["resolutions"] = r.resolutions;
  Json metrics = Json::object();
  for (const auto& [k, v] : r.metrics)
    metrics[k] = num_json(v);
  j["metrics"] = metrics;
  Json info = Json::object();
  for (const auto& [k, v] : r.info)
    info[k] = v;
  j["info"] = info;
  j["warnings"] = r.warnings;
  return j;
}

std::vector<bool> cell_set_from_json(const MeshPtr& mesh, const Json& j) {
  std::vector<bool> s(mesh->size(), false);
  const ManifoldSpec& spec = mesh->spec();
  if (j.contains("cells")) {
    for (const auto& c : j.at("cells")) {
      const int k = c.get<int>();
      if (k < 0 || k >= mesh->size())
        throw InvalidArgument("cell index out of range");
      s[k] = true;
    }
  } else if (j.contains("box")) {
    const Eigen::VectorXd lo = vec_from(need(j.at("box"), "lower"));
    const Eigen::VectorXd hi = vec_from(need(j.at("box"), "upper"));
    if (lo.size() != spec.ambient_dim() || hi.size() != spec.ambient_dim())
      throw InvalidArgument("box corners have the wrong dimension");
    for (int c = 0; c < mesh->size(); ++c) {
      const Point& p = mesh->center(c);
      s[c] = ((p - lo).array() >= 0.0).all() && ((hi - p).array() >= 0.0).all();
    }
  } else if (j.contains("ball")) {
    const Point center = vec_from(need(j.at("ball"), "center"));
    validate_point(spec, center);
    const double r = number(need(j.at("ball"), "radius"));
    for (int c = 0; c < mesh->size(); ++c)
      s[c] = distance(spec, mesh->center(c), center) <= r;
  } else {
    throw InvalidArgument("a set needs 'cells', 'box' or 'ball'");
  }
  return s;
}

DensityEstimator estimator_from_string(const std::string& s) {
  if (s == "nearest" || s == "nearest-cell")
    return DensityEstimator::NearestCell;
  if (s == "linear")
    return DensityEstimator::Linear;
  throw InvalidArgument("unknown density estimator '" + s + "'");
}

std::string to_string(DensityEstimator e) {
  return e == DensityEstimator::Linear ? "linear" : "nearest";
}

} // namespace wbc::io
