#include "wbc/geometry.hpp"

#include "wbc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace wbc {

namespace {

thread_local double g_distance_fault = 1.0;

constexpr double kPointTol = 1e-12;
constexpr double kSphereCutMargin = 1e-8;
constexpr double kTorusTieTol = 1e-12;

// theta * cot(theta), with its Taylor expansion near zero.
double theta_cot(double theta) {
  if (std::abs(theta) < 1e-6)
    return 1.0 - theta * theta / 3.0;
  return theta * std::cos(theta) / std::sin(theta);
}

// theta / sin(theta).
double theta_over_sin(double theta) {
  if (std::abs(theta) < 1e-6)
    return 1.0 + theta * theta / 6.0;
  return theta / std::sin(theta);
}

double wrap_delta(double delta, double period) {
  return delta - period * std::round(delta / period);
}

// Unit tangent direction from p towards q and the angle between them
// (sphere only). Direction is zero when p == q.
struct SphereGeodesic {
  Eigen::VectorXd dir;
  double theta = 0.0;
};

SphereGeodesic sphere_geodesic(const ManifoldSpec& spec, const Point& p, const Point& q) {
  const double r = spec.radius();
  const Eigen::VectorXd ph = p / r;
  const Eigen::VectorXd qh = q / r;
  const double c = ph.dot(qh);
  Eigen::VectorXd v = qh - c * ph;
  const double s = v.norm();
  SphereGeodesic g;
  g.theta = std::atan2(s, c);
  if (s > 0.0)
    g.dir = v / s;
  else
    g.dir = Eigen::VectorXd::Zero(p.size());
  return g;
}

void check_sizes(const ManifoldSpec& spec, const Point& p) {
  if (p.size() != spec.ambient_dim())
    throw InvalidPoint("point has " + std::to_string(p.size()) + " coordinates, expected " +
                       std::to_string(spec.ambient_dim()));
  if (!p.allFinite())
    throw InvalidPoint("point has non-finite coordinates");
}

} // namespace

std::string to_string(ManifoldKind kind) {
  switch (kind) {
  case ManifoldKind::Box:
    return "box";
  case ManifoldKind::Torus:
    return "torus";
  case ManifoldKind::Sphere:
    return "sphere";
  }
  return "unknown";
}

ManifoldSpec ManifoldSpec::box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  if (lower.size() == 0 || lower.size() != upper.size())
    throw InvalidArgument("box bounds must be non-empty and of equal length");
  ManifoldSpec s;
  s.kind_ = ManifoldKind::Box;
  s.dim_ = static_cast<int>(lower.size());
  s.lower_ = lower;
  s.lengths_ = upper - lower;
  if ((s.lengths_.array() <= 0.0).any() || !s.lengths_.allFinite())
    throw InvalidArgument("box side lengths must be positive");
  return s;
}

ManifoldSpec ManifoldSpec::torus(const Eigen::VectorXd& periods) {
  if (periods.size() == 0)
    throw InvalidArgument("torus needs at least one period");
  if ((periods.array() <= 0.0).any() || !periods.allFinite())
    throw InvalidArgument("torus periods must be positive");
  ManifoldSpec s;
  s.kind_ = ManifoldKind::Torus;
  s.dim_ = static_cast<int>(periods.size());
  s.lengths_ = periods;
  s.lower_ = Eigen::VectorXd::Zero(periods.size());
  return s;
}

ManifoldSpec ManifoldSpec::sphere(int dim, double radius) {
  if (dim < 1)
    throw InvalidArgument("sphere dimension must be positive");
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw InvalidArgument("sphere radius must be positive");
  ManifoldSpec s;
  s.kind_ = ManifoldKind::Sphere;
  s.dim_ = dim;
  s.radius_ = radius;
  return s;
}

double ManifoldSpec::ricci_lower_bound() const {
  if (kind_ == ManifoldKind::Sphere)
    return (dim_ - 1) / (radius_ * radius_);
  return 0.0;
}

double ManifoldSpec::diameter() const {
  switch (kind_) {
  case ManifoldKind::Box:
    return lengths_.norm();
  case ManifoldKind::Torus:
    return 0.5 * lengths_.norm();
  case ManifoldKind::Sphere:
    return std::numbers::pi * radius_;
  }
  return 0.0;
}

double ManifoldSpec::volume() const {
  if (kind_ != ManifoldKind::Sphere)
    return lengths_.prod();
  // |S^n| = 2 pi^{(n+1)/2} / Gamma((n+1)/2) r^n
  const double n = dim_;
  return 2.0 * std::pow(std::numbers::pi, 0.5 * (n + 1.0)) / std::tgamma(0.5 * (n + 1.0)) *
         std::pow(radius_, n);
}

double ManifoldSpec::injectivity_radius() const {
  switch (kind_) {
  case ManifoldKind::Box:
    return std::numeric_limits<double>::infinity();
  case ManifoldKind::Torus:
    return 0.5 * lengths_.minCoeff();
  case ManifoldKind::Sphere:
    return std::numbers::pi * radius_;
  }
  return 0.0;
}

bool ManifoldSpec::operator==(const ManifoldSpec& other) const {
  return kind_ == other.kind_ && dim_ == other.dim_ && radius_ == other.radius_ &&
         lengths_ == other.lengths_ && lower_ == other.lower_;
}

void validate_point(const ManifoldSpec& spec, const Point& p) {
  check_sizes(spec, p);
  switch (spec.kind()) {
  case ManifoldKind::Sphere:
    if (std::abs(p.norm() - spec.radius()) > kPointTol * std::max(1.0, spec.radius()))
      throw InvalidPoint("sphere point is off the sphere");
    break;
  case ManifoldKind::Box: {
    const Eigen::VectorXd tol = kPointTol * spec.lengths().cwiseMax(1.0);
    if (((p - spec.lower()).array() < -tol.array()).any() ||
        ((p - spec.upper()).array() > tol.array()).any())
      throw InvalidPoint("box point lies outside the bounds");
    break;
  }
  case ManifoldKind::Torus:
    break;
  }
}

Point canonicalize(const ManifoldSpec& spec, const Point& p) {
  if (spec.kind() != ManifoldKind::Torus)
    return p;
  Point out = p;
  for (int k = 0; k < p.size(); ++k) {
    const double period = spec.lengths()(k);
    double x = std::fmod(p(k), period);
    if (x < 0.0)
      x += period;
    if (x >= period)
      x -= period;
    out(k) = x;
  }
  return out;
}

Eigen::VectorXd project_tangent(const ManifoldSpec& spec, const Point& p,
                                const Eigen::VectorXd& v) {
  if (spec.kind() != ManifoldKind::Sphere)
    return v;
  const Eigen::VectorXd ph = p / spec.radius();
  return v - ph.dot(v) * ph;
}

double distance(const ManifoldSpec& spec, const Point& p, const Point& q) {
  check_sizes(spec, p);
  check_sizes(spec, q);
  double d = 0.0;
  switch (spec.kind()) {
  case ManifoldKind::Box:
    d = (q - p).norm();
    break;
  case ManifoldKind::Torus: {
    double acc = 0.0;
    for (int k = 0; k < p.size(); ++k) {
      const double w = wrap_delta(q(k) - p(k), spec.lengths()(k));
      acc += w * w;
    }
    d = std::sqrt(acc);
    break;
  }
  case ManifoldKind::Sphere:
    d = spec.radius() * sphere_geodesic(spec, p, q).theta;
    break;
  }
  return d * g_distance_fault;
}

double cost(const ManifoldSpec& spec, const Point& p, const Point& q) {
  const double d = distance(spec, p, q);
  return 0.5 * d * d;
}

Tangent log_map(const ManifoldSpec& spec, const Point& p, const Point& q) {
  check_sizes(spec, p);
  check_sizes(spec, q);
  Tangent t{p, Eigen::VectorXd()};
  switch (spec.kind()) {
  case ManifoldKind::Box:
    t.vec = q - p;
    break;
  case ManifoldKind::Torus: {
    t.vec.resize(p.size());
    for (int k = 0; k < p.size(); ++k) {
      const double period = spec.lengths()(k);
      const double w = wrap_delta(q(k) - p(k), period);
      if (std::abs(std::abs(w) - 0.5 * period) <= kTorusTieTol * std::max(1.0, period))
        throw CutLocus("torus points are separated by half a period along axis " +
                       std::to_string(k));
      t.vec(k) = w;
    }
    break;
  }
  case ManifoldKind::Sphere: {
    const SphereGeodesic g = sphere_geodesic(spec, p, q);
    const double d = spec.radius() * g.theta;
    if (d > std::numbers::pi * spec.radius() - kSphereCutMargin)
      throw CutLocus("sphere points are antipodal");
    if (g.dir.squaredNorm() == 0.0)
      t.vec = Eigen::VectorXd::Zero(p.size());
    else
      t.vec = d * g.dir;
    break;
  }
  }
  return t;
}

Point exp_map(const ManifoldSpec& spec, const Point& p, const Eigen::VectorXd& v) {
  check_sizes(spec, p);
  if (v.size() != p.size())
    throw InvalidArgument("tangent vector size does not match the base point");
  switch (spec.kind()) {
  case ManifoldKind::Box:
    return p + v;
  case ManifoldKind::Torus:
    return canonicalize(spec, p + v);
  case ManifoldKind::Sphere: {
    const double r = spec.radius();
    const Eigen::VectorXd ph = p / r;
    const Eigen::VectorXd vt = v - ph.dot(v) * ph;
    const double len = vt.norm();
    if (len == 0.0)
      return p * (r / p.norm());
    const double angle = len / r;
    Point out = r * (std::cos(angle) * ph + std::sin(angle) * (vt / len));
    return out * (r / out.norm());
  }
  }
  return p;
}

Point exp_map(const ManifoldSpec& spec, const Tangent& t) { return exp_map(spec, t.base, t.vec); }

Eigen::MatrixXd tangent_frame(const ManifoldSpec& spec, const Point& p,
                              const Eigen::VectorXd& first) {
  const int n = spec.dim();
  const int amb = spec.ambient_dim();
  Eigen::MatrixXd frame(amb, n);
  int filled = 0;
  auto try_add = [&](Eigen::VectorXd v) {
    v = project_tangent(spec, p, v);
    for (int k = 0; k < filled; ++k)
      v -= frame.col(k).dot(v) * frame.col(k);
    // second pass for numerical orthogonality
    for (int k = 0; k < filled; ++k)
      v -= frame.col(k).dot(v) * frame.col(k);
    const double len = v.norm();
    if (len > 1e-8) {
      frame.col(filled++) = v / len;
    }
  };
  if (first.size() == amb && first.norm() > 0.0)
    try_add(first / first.norm());
  for (int k = 0; k < amb && filled < n; ++k)
    try_add(Eigen::VectorXd::Unit(amb, k));
  if (filled != n)
    throw InvalidArgument("failed to build a tangent frame");
  return frame;
}

Eigen::MatrixXd cost_hessian_xx_ambient(const ManifoldSpec& spec, const Point& p,
                                        const Point& q) {
  const int amb = spec.ambient_dim();
  if (spec.kind() != ManifoldKind::Sphere)
    return Eigen::MatrixXd::Identity(amb, amb);
  // log_map raises CutLocus at the antipode
  const Tangent t = log_map(spec, p, q);
  const Eigen::VectorXd ph = p / spec.radius();
  const Eigen::MatrixXd tangent_proj =
      Eigen::MatrixXd::Identity(amb, amb) - ph * ph.transpose();
  const double len = t.vec.norm();
  if (len == 0.0)
    return tangent_proj;
  const Eigen::VectorXd u = t.vec / len;
  const double theta = len / spec.radius();
  const Eigen::MatrixXd along = u * u.transpose();
  return along + theta_cot(theta) * (tangent_proj - along);
}

CostHessians cost_hessians(const ManifoldSpec& spec, const Point& p, const Point& q) {
  const int n = spec.dim();
  CostHessians h;
  const Tangent t = log_map(spec, p, q);
  h.distance = t.vec.norm();
  h.frame_p = tangent_frame(spec, p, t.vec);
  if (spec.kind() != ManifoldKind::Sphere) {
    h.frame_q = h.frame_p;
    h.dxx = Eigen::MatrixXd::Identity(n, n);
    h.dxy_neg = Eigen::MatrixXd::Identity(n, n);
    return h;
  }
  const double theta = h.distance / spec.radius();
  // parallel transport along the great circle: the geodesic direction turns,
  // the transverse directions stay fixed in the embedding
  h.frame_q = h.frame_p;
  if (h.distance > 0.0) {
    const Eigen::VectorXd ph = p / spec.radius();
    const Eigen::VectorXd u = h.frame_p.col(0);
    h.frame_q.col(0) = -std::sin(theta) * ph + std::cos(theta) * u;
  }
  h.dxx = Eigen::MatrixXd::Identity(n, n);
  h.dxy_neg = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k < n; ++k) {
    h.dxx(k, k) = theta_cot(theta);
    h.dxy_neg(k, k) = theta_over_sin(theta);
  }
  return h;
}

CostHessians cost_hessians_numeric(const ManifoldSpec& spec, const Point& p, const Point& q,
                                   double step) {
  const int n = spec.dim();
  CostHessians h;
  const Tangent t = log_map(spec, p, q);
  h.distance = t.vec.norm();
  h.frame_p = tangent_frame(spec, p, t.vec);
  // reuse the transported frame from the closed form; only the derivatives are
  // computed numerically
  h.frame_q = cost_hessians(spec, p, q).frame_q;

  auto shifted_p = [&](const Eigen::VectorXd& s) {
    return exp_map(spec, p, h.frame_p * s);
  };
  auto shifted_q = [&](const Eigen::VectorXd& s) {
    return exp_map(spec, q, h.frame_q * s);
  };
  const double c0 = cost(spec, p, q);
  h.dxx.resize(n, n);
  h.dxy_neg.resize(n, n);
  for (int a = 0; a < n; ++a) {
    const Eigen::VectorXd ea = step * Eigen::VectorXd::Unit(n, a);
    h.dxx(a, a) = (cost(spec, shifted_p(ea), q) + cost(spec, shifted_p(-ea), q) - 2.0 * c0) /
                  (step * step);
    for (int b = 0; b < n; ++b) {
      const Eigen::VectorXd eb = step * Eigen::VectorXd::Unit(n, b);
      if (b > a) {
        const double v = (cost(spec, shifted_p(ea + eb), q) - cost(spec, shifted_p(ea - eb), q) -
                          cost(spec, shifted_p(-ea + eb), q) +
                          cost(spec, shifted_p(-ea - eb), q)) /
                         (4.0 * step * step);
        h.dxx(a, b) = v;
        h.dxx(b, a) = v;
      }
      const double m =
          (cost(spec, shifted_p(ea), shifted_q(eb)) - cost(spec, shifted_p(ea), shifted_q(-eb)) -
           cost(spec, shifted_p(-ea), shifted_q(eb)) +
           cost(spec, shifted_p(-ea), shifted_q(-eb))) /
          (4.0 * step * step);
      h.dxy_neg(a, b) = -m;
    }
  }
  return h;
}

double s_coeff(double K, double d) {
  if (K == 0.0 || d == 0.0)
    return 1.0;
  if (K > 0.0) {
    const double a = std::sqrt(K) * d;
    return std::sin(a) / a;
  }
  const double a = std::sqrt(-K) * d;
  return std::sinh(a) / a;
}

double expcon_lower_bound(const ManifoldSpec& spec, double d) {
  const int n = spec.dim();
  if (n == 1)
    return 1.0;
  const double k = spec.ricci_lower_bound() / (n - 1);
  return std::pow(s_coeff(k, d), -(n - 1));
}

double hessbound_trace(int n, double K, double d) {
  if (K == 0.0 || d == 0.0)
    return n;
  const double a = std::sqrt(K) * d;
  return n * a / std::tanh(a);
}

namespace testing {
ScopedGeometryFault::ScopedGeometryFault(double scale) : previous_(g_distance_fault) {
  g_distance_fault = scale;
}
ScopedGeometryFault::~ScopedGeometryFault() { g_distance_fault = previous_; }
} // namespace testing

} // namespace wbc
