#include "wbc/measures.hpp"

#include "wbc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

namespace wbc {

namespace {

constexpr double kMassTol = 1e-6;

double kahan_sum(const std::vector<double>& v) {
  double s = 0.0, c = 0.0;
  for (double x : v) {
    const double y = x - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

} // namespace

DiscreteMeasure::DiscreteMeasure(const ManifoldSpec& spec, std::vector<Point> points,
                                 std::vector<double> masses) {
  if (points.empty())
    throw InvalidArgument("a measure needs at least one atom");
  if (points.size() != masses.size())
    throw InvalidArgument("atom and mass counts differ");
  for (double m : masses)
    if (!(m > 0.0) || !std::isfinite(m))
      throw InvalidArgument("atom masses must be positive and finite");
  const double total = kahan_sum(masses);
  if (std::abs(total - 1.0) > kMassTol)
    throw InvalidArgument("atom masses sum to " + std::to_string(total) + ", expected 1");
  for (double& m : masses)
    m /= total;
  for (auto& p : points) {
    validate_point(spec, p);
    p = canonicalize(spec, p);
  }
  points_ = std::move(points);
  masses_ = std::move(masses);
}

DiscreteMeasure DiscreteMeasure::from_weights(const ManifoldSpec& spec, std::vector<Point> points,
                                              std::vector<double> weights) {
  if (points.size() != weights.size())
    throw InvalidArgument("atom and weight counts differ");
  std::vector<Point> kept;
  std::vector<double> w;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (weights[i] < 0.0 || !std::isfinite(weights[i]))
      throw InvalidArgument("weights must be nonnegative and finite");
    if (weights[i] > 0.0) {
      kept.push_back(std::move(points[i]));
      w.push_back(weights[i]);
    }
  }
  const double total = kahan_sum(w);
  if (!(total > 0.0))
    throw InvalidArgument("all weights are zero");
  for (double& x : w)
    x /= total;
  return DiscreteMeasure(spec, std::move(kept), std::move(w));
}

DiscreteMeasure DiscreteMeasure::dirac(const ManifoldSpec& spec, const Point& p) {
  return DiscreteMeasure(spec, {p}, {1.0});
}

ReferenceMeasure ReferenceMeasure::gaussian(Point center, double variance) {
  if (!(variance > 0.0))
    throw InvalidArgument("gaussian reference needs a positive variance");
  ReferenceMeasure r;
  r.kind = Kind::Gaussian;
  r.center = std::move(center);
  r.variance = variance;
  return r;
}

ReferenceMeasure ReferenceMeasure::tabulated(std::vector<double> values) {
  for (double v : values)
    if (!std::isfinite(v))
      throw InvalidArgument("tabulated potential must be finite");
  ReferenceMeasure r;
  r.kind = Kind::Tabulated;
  r.table = std::move(values);
  return r;
}

double ReferenceMeasure::potential(const ManifoldSpec& spec, const Point& p, int cell) const {
  switch (kind) {
  case Kind::Zero:
    return 0.0;
  case Kind::Gaussian: {
    const double d = distance(spec, p, center);
    return d * d / (2.0 * variance);
  }
  case Kind::Tabulated:
    if (cell < 0 || cell >= static_cast<int>(table.size()))
      throw InvalidArgument("tabulated potential queried outside the mesh");
    return table[cell];
  }
  return 0.0;
}

std::shared_ptr<const Mesh> Mesh::build(const ManifoldSpec& spec, int resolution,
                                        ReferenceMeasure reference) {
  if (resolution < 2)
    throw InvalidArgument("mesh resolution must be at least 2");
  auto mesh = std::make_shared<Mesh>();
  mesh->spec_ = spec;
  mesh->resolution_ = resolution;
  const int n = spec.dim();

  if (spec.kind() == ManifoldKind::Sphere) {
    if (n != 2)
      throw Unsupported("sphere meshes are only available for the 2-sphere");
    if (!reference.is_volume())
      throw Unsupported("non-uniform reference measures are only supported on box and torus");
    const int nlat = resolution, nlon = 2 * resolution;
    mesh->shape_ = {nlat, nlon};
    const double r = spec.radius();
    const double dphi = std::numbers::pi / nlat;
    const double dlon = 2.0 * std::numbers::pi / nlon;
    for (int a = 0; a < nlat; ++a) {
      const double bot = -0.5 * std::numbers::pi + a * dphi;
      const double top = bot + dphi;
      const double mid = 0.5 * (bot + top);
      const double area = r * r * dlon * (std::sin(top) - std::sin(bot));
      for (int b = 0; b < nlon; ++b) {
        const double lon = (b + 0.5) * dlon;
        Point c(3);
        c << r * std::cos(mid) * std::cos(lon), r * std::cos(mid) * std::sin(lon),
            r * std::sin(mid);
        mesh->centers_.push_back(c);
        mesh->volumes_.push_back(area);
        mesh->riemannian_.push_back(area);
      }
    }
    mesh->cell_diameter_ = r * (dphi + dlon);
    mesh->cell_size_ = r * dphi;
  } else {
    mesh->shape_.assign(n, resolution);
    const Eigen::VectorXd h = spec.lengths() / resolution;
    const double cell_vol = h.prod();
    int total = 1;
    for (int k = 0; k < n; ++k)
      total *= resolution;
    if (reference.kind == ReferenceMeasure::Kind::Tabulated &&
        static_cast<int>(reference.table.size()) != total)
      throw InvalidArgument("tabulated potential has the wrong number of cells");
    for (int c = 0; c < total; ++c) {
      int rem = c;
      Point p(n);
      for (int k = n - 1; k >= 0; --k) {
        const int i = rem % resolution;
        rem /= resolution;
        p(k) = spec.lower()(k) + (i + 0.5) * h(k);
      }
      mesh->centers_.push_back(p);
      mesh->riemannian_.push_back(cell_vol);
      mesh->volumes_.push_back(cell_vol * std::exp(-reference.potential(spec, p, c)));
    }
    mesh->cell_diameter_ = h.norm();
    mesh->cell_size_ = h(0);
  }
  for (double v : mesh->volumes_)
    if (!(v > 0.0) || !std::isfinite(v))
      throw InvalidArgument("mesh cell has non-positive reference mass");
  mesh->reference_ = std::move(reference);
  return mesh;
}

double Mesh::total_volume() const { return kahan_sum(volumes_); }

std::vector<int> Mesh::unravel(int c) const {
  std::vector<int> idx(shape_.size());
  for (int k = static_cast<int>(shape_.size()) - 1; k >= 0; --k) {
    idx[k] = c % shape_[k];
    c /= shape_[k];
  }
  return idx;
}

int Mesh::ravel(const std::vector<int>& idx) const {
  int c = 0;
  for (std::size_t k = 0; k < shape_.size(); ++k)
    c = c * shape_[k] + idx[k];
  return c;
}

int Mesh::cell_of(const Point& p) const {
  if (p.size() != spec_.ambient_dim())
    throw InvalidPoint("point dimension does not match the mesh");
  std::vector<int> idx(shape_.size());
  if (spec_.kind() == ManifoldKind::Sphere) {
    const double r = p.norm();
    const double phi = std::asin(std::clamp(p(2) / r, -1.0, 1.0));
    double lon = std::atan2(p(1), p(0));
    if (lon < 0.0)
      lon += 2.0 * std::numbers::pi;
    idx[0] = static_cast<int>(std::floor((phi + 0.5 * std::numbers::pi) / std::numbers::pi *
                                         shape_[0]));
    idx[1] = static_cast<int>(std::floor(lon / (2.0 * std::numbers::pi) * shape_[1]));
    idx[0] = std::clamp(idx[0], 0, shape_[0] - 1);
    idx[1] = std::clamp(idx[1], 0, shape_[1] - 1);
    return ravel(idx);
  }
  const Point q = canonicalize(spec_, p);
  for (int k = 0; k < spec_.dim(); ++k) {
    const double len = spec_.lengths()(k);
    const double rel = (q(k) - spec_.lower()(k)) / len;
    if (spec_.kind() == ManifoldKind::Box && (rel < -1e-12 || rel > 1.0 + 1e-12))
      throw InvalidPoint("point lies outside the box mesh");
    idx[k] = std::clamp(static_cast<int>(std::floor(rel * shape_[k])), 0, shape_[k] - 1);
  }
  return ravel(idx);
}

std::vector<int> Mesh::neighbours(int c) const {
  const std::vector<int> base = unravel(c);
  const int n = static_cast<int>(shape_.size());
  std::vector<int> out;
  if (spec_.kind() == ManifoldKind::Sphere) {
    const int nlat = shape_[0], nlon = shape_[1];
    for (int da = -1; da <= 1; ++da) {
      const int a = base[0] + da;
      if (a < 0 || a >= nlat)
        continue;
      // cells touching a pole share that pole point with the whole row
      const bool polar = (a == 0 || a == nlat - 1);
      for (int b = 0; b < nlon; ++b) {
        int db = std::abs(b - base[1]);
        db = std::min(db, nlon - db);
        if ((polar || db <= 1) && !(a == base[0] && b == base[1]))
          out.push_back(ravel({a, b}));
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  int combos = 1;
  for (int k = 0; k < n; ++k)
    combos *= 3;
  for (int t = 0; t < combos; ++t) {
    int rem = t;
    std::vector<int> idx(n);
    bool valid = true, self = true;
    for (int k = 0; k < n; ++k) {
      const int off = rem % 3 - 1;
      rem /= 3;
      if (off != 0)
        self = false;
      int v = base[k] + off;
      if (spec_.kind() == ManifoldKind::Torus) {
        v = (v + shape_[k]) % shape_[k];
      } else if (v < 0 || v >= shape_[k]) {
        valid = false;
      }
      idx[k] = v;
    }
    if (valid && !self)
      out.push_back(ravel(idx));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  out.erase(std::remove(out.begin(), out.end(), c), out.end());
  return out;
}

Point Mesh::sample_in_cell(int c, std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const std::vector<int> idx = unravel(c);
  if (spec_.kind() == ManifoldKind::Sphere) {
    const double dphi = std::numbers::pi / shape_[0];
    const double dlon = 2.0 * std::numbers::pi / shape_[1];
    const double bot = -0.5 * std::numbers::pi + idx[0] * dphi;
    const double s = std::sin(bot) + unif(rng) * (std::sin(bot + dphi) - std::sin(bot));
    const double phi = std::asin(std::clamp(s, -1.0, 1.0));
    const double lon = (idx[1] + unif(rng)) * dlon;
    const double r = spec_.radius();
    Point p(3);
    p << r * std::cos(phi) * std::cos(lon), r * std::cos(phi) * std::sin(lon), r * std::sin(phi);
    return p;
  }
  Point p(spec_.dim());
  for (int k = 0; k < spec_.dim(); ++k) {
    const double h = spec_.lengths()(k) / shape_[k];
    p(k) = spec_.lower()(k) + (idx[k] + unif(rng)) * h;
  }
  return canonicalize(spec_, p);
}

MeshDensity::MeshDensity(MeshPtr mesh, Eigen::VectorXd values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (!mesh_)
    throw InvalidArgument("density without a mesh");
  if (values_.size() != mesh_->size())
    throw InvalidArgument("density has " + std::to_string(values_.size()) +
                          " values for a mesh of " + std::to_string(mesh_->size()) + " cells");
  for (int c = 0; c < values_.size(); ++c)
    if (!(values_(c) >= 0.0) || !std::isfinite(values_(c)))
      throw InvalidArgument("density values must be nonnegative and finite");
  const double total = total_mass();
  if (std::abs(total - 1.0) > kMassTol)
    throw InvalidArgument("density integrates to " + std::to_string(total) + ", expected 1");
  values_ /= total;
}

MeshDensity MeshDensity::from_unnormalized(MeshPtr mesh, Eigen::VectorXd values) {
  if (!mesh || values.size() != mesh->size())
    throw InvalidArgument("density size does not match the mesh");
  double total = 0.0;
  for (int c = 0; c < values.size(); ++c) {
    if (!(values(c) >= 0.0) || !std::isfinite(values(c)))
      throw InvalidArgument("density values must be nonnegative and finite");
    total += values(c) * mesh->volume(c);
  }
  if (!(total > 0.0))
    throw EmptySet("density has zero total mass");
  return MeshDensity(std::move(mesh), values / total);
}

double MeshDensity::total_mass() const {
  std::vector<double> parts(values_.size());
  for (int c = 0; c < values_.size(); ++c)
    parts[c] = values_(c) * mesh_->volume(c);
  return kahan_sum(parts);
}

double set_measure(const Mesh& mesh, const std::vector<bool>& indicator) {
  if (static_cast<int>(indicator.size()) != mesh.size())
    throw InvalidArgument("indicator size does not match the mesh");
  std::vector<double> parts;
  for (int c = 0; c < mesh.size(); ++c)
    if (indicator[c])
      parts.push_back(mesh.volume(c));
  return kahan_sum(parts);
}

MeshDensity uniform_on_set(const MeshPtr& mesh, const std::vector<bool>& indicator) {
  const double mass = set_measure(*mesh, indicator);
  if (!(mass > 0.0))
    throw EmptySet("selected set has zero reference measure");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(mesh->size());
  for (int c = 0; c < mesh->size(); ++c)
    if (indicator[c])
      v(c) = 1.0 / mass;
  return MeshDensity(mesh, std::move(v));
}

DiscreteMeasure to_discrete(const MeshDensity& md) {
  std::vector<Point> pts;
  std::vector<double> w;
  const Mesh& mesh = *md.mesh();
  for (int c = 0; c < mesh.size(); ++c) {
    const double m = md.value(c) * mesh.volume(c);
    if (m > 0.0) {
      pts.push_back(mesh.center(c));
      w.push_back(m);
    }
  }
  return DiscreteMeasure::from_weights(mesh.spec(), std::move(pts), std::move(w));
}

double ess_sup(const MeshDensity& md) { return md.values().maxCoeff(); }

MeshDensity bin_to_mesh(const DiscreteMeasure& dm, const MeshPtr& mesh) {
  std::vector<std::vector<double>> per_cell(mesh->size());
  for (int i = 0; i < dm.size(); ++i)
    per_cell[mesh->cell_of(dm.point(i))].push_back(dm.mass(i));
  Eigen::VectorXd v(mesh->size());
  for (int c = 0; c < mesh->size(); ++c)
    v(c) = kahan_sum(per_cell[c]) / mesh->volume(c);
  return MeshDensity(mesh, std::move(v));
}

namespace {

// Corner cells and multilinear weights of p in grid coordinates where cell
// centers sit at integer + 1/2.
void linear_stencil(const Mesh& mesh, const Point& p, std::vector<int>& cells,
                    std::vector<double>& weights) {
  const ManifoldSpec& spec = mesh.spec();
  const std::vector<int>& shape = mesh.shape();
  const int n = static_cast<int>(shape.size());
  std::vector<double> g(n);
  std::vector<char> periodic(n, 0);
  if (spec.kind() == ManifoldKind::Sphere) {
    const double r = p.norm();
    const double phi = std::asin(std::clamp(p(2) / r, -1.0, 1.0));
    double lon = std::atan2(p(1), p(0));
    if (lon < 0.0)
      lon += 2.0 * std::numbers::pi;
    g[0] = (phi + 0.5 * std::numbers::pi) / std::numbers::pi * shape[0];
    g[1] = lon / (2.0 * std::numbers::pi) * shape[1];
    periodic[1] = 1;
  } else {
    const Point q = canonicalize(spec, p);
    for (int k = 0; k < n; ++k) {
      g[k] = (q(k) - spec.lower()(k)) / spec.lengths()(k) * shape[k];
      periodic[k] = spec.kind() == ManifoldKind::Torus;
    }
  }
  std::vector<int> lo(n);
  std::vector<double> frac(n);
  for (int k = 0; k < n; ++k) {
    const double u = g[k] - 0.5;
    lo[k] = static_cast<int>(std::floor(u));
    frac[k] = u - lo[k];
  }
  cells.clear();
  weights.clear();
  std::vector<int> idx(n);
  for (int corner = 0; corner < (1 << n); ++corner) {
    double w = 1.0;
    for (int k = 0; k < n; ++k) {
      const int bit = (corner >> k) & 1;
      w *= bit ? frac[k] : 1.0 - frac[k];
      int i = lo[k] + bit;
      if (periodic[k])
        i = ((i % shape[k]) + shape[k]) % shape[k];
      else
        i = std::clamp(i, 0, shape[k] - 1);
      idx[k] = i;
    }
    if (w > 0.0) {
      cells.push_back(mesh.ravel(idx));
      weights.push_back(w);
    }
  }
}

} // namespace

MeshDensity deposit_linear(const DiscreteMeasure& dm, const MeshPtr& mesh) {
  std::vector<std::vector<double>> per_cell(mesh->size());
  std::vector<int> cells;
  std::vector<double> weights;
  for (int i = 0; i < dm.size(); ++i) {
    mesh->cell_of(dm.point(i)); // rejects points outside a box
    linear_stencil(*mesh, dm.point(i), cells, weights);
    for (std::size_t k = 0; k < cells.size(); ++k)
      per_cell[cells[k]].push_back(dm.mass(i) * weights[k]);
  }
  Eigen::VectorXd v(mesh->size());
  for (int c = 0; c < mesh->size(); ++c)
    v(c) = kahan_sum(per_cell[c]) / mesh->volume(c);
  return MeshDensity::from_unnormalized(mesh, std::move(v));
}

MeshDensity estimate_density(const DiscreteMeasure& dm, const MeshPtr& mesh,
                             DensityEstimator estimator) {
  return estimator == DensityEstimator::Linear ? deposit_linear(dm, mesh) : bin_to_mesh(dm, mesh);
}

double interpolate_linear(const MeshDensity& md, const Point& p) {
  std::vector<int> cells;
  std::vector<double> weights;
  linear_stencil(*md.mesh(), p, cells, weights);
  double s = 0.0;
  for (std::size_t k = 0; k < cells.size(); ++k)
    s += weights[k] * md.value(cells[k]);
  return s;
}

double evaluate_density(const MeshDensity& md, const Point& p, DensityEstimator estimator) {
  if (estimator == DensityEstimator::Linear)
    return interpolate_linear(md, p);
  return md.value(md.mesh()->cell_of(p));
}

MeshDensity discretize_density(const MeshPtr& mesh, const DensityFunction& f, int subsamples) {
  const int s = std::max(1, subsamples);
  const ManifoldSpec& spec = mesh->spec();
  Eigen::VectorXd v(mesh->size());
  for (int c = 0; c < mesh->size(); ++c) {
    const std::vector<int> idx = mesh->unravel(c);
    double acc = 0.0, wsum = 0.0;
    if (spec.kind() == ManifoldKind::Sphere) {
      const double dphi = std::numbers::pi / mesh->shape()[0];
      const double dlon = 2.0 * std::numbers::pi / mesh->shape()[1];
      const double r = spec.radius();
      for (int a = 0; a < s; ++a) {
        const double bot = -0.5 * std::numbers::pi + (idx[0] + double(a) / s) * dphi;
        const double top = bot + dphi / s;
        const double mid = 0.5 * (bot + top);
        const double w = std::sin(top) - std::sin(bot);
        for (int b = 0; b < s; ++b) {
          const double lon = (idx[1] + (b + 0.5) / s) * dlon;
          Point p(3);
          p << r * std::cos(mid) * std::cos(lon), r * std::cos(mid) * std::sin(lon),
              r * std::sin(mid);
          acc += w * f(p);
          wsum += w;
        }
      }
    } else {
      const int n = spec.dim();
      int total = 1;
      for (int k = 0; k < n; ++k)
        total *= s;
      for (int t = 0; t < total; ++t) {
        int rem = t;
        Point p(n);
        for (int k = n - 1; k >= 0; --k) {
          const int sub = rem % s;
          rem /= s;
          const double h = spec.lengths()(k) / mesh->shape()[k];
          p(k) = spec.lower()(k) + (idx[k] + (sub + 0.5) / s) * h;
        }
        acc += f(p);
        wsum += 1.0;
      }
    }
    v(c) = acc / wsum;
  }
  return MeshDensity::from_unnormalized(mesh, std::move(v));
}

void write_density_csv(std::ostream& out, const MeshDensity& md) {
  const Mesh& mesh = *md.mesh();
  const int amb = mesh.spec().ambient_dim();
  out << "cell_index";
  for (int k = 0; k < amb; ++k)
    out << ",x" << k;
  out << ",volume,value\n";
  out.precision(17);
  for (int c = 0; c < mesh.size(); ++c) {
    out << c;
    for (int k = 0; k < amb; ++k)
      out << ',' << mesh.center(c)(k);
    out << ',' << mesh.volume(c) << ',' << md.value(c) << '\n';
  }
}

} // namespace wbc
