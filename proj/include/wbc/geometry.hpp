#pragma once

#include <Eigen/Dense>

#include <string>

namespace wbc {

// Sphere points live in embedding coordinates (n + 1 entries); torus and box
// points use n chart coordinates.
using Point = Eigen::VectorXd;

enum class ManifoldKind { Box, Torus, Sphere };

std::string to_string(ManifoldKind kind);

/// A compact Riemannian manifold with closed-form geometry.
///
/// Three families are supported: a Euclidean box (flat, geodesics are straight
/// lines and the box only bounds the inputs), a flat torus with per-axis
/// periods and a round sphere of given radius. Curvature data is derived from
/// the parameters: the sphere has Ric >= (n - 1) / radius^2, the flat spaces
/// have Ric = 0.
class ManifoldSpec {
public:
  static ManifoldSpec box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);
  static ManifoldSpec torus(const Eigen::VectorXd& periods);
  static ManifoldSpec sphere(int dim, double radius = 1.0);

  ManifoldKind kind() const { return kind_; }
  int dim() const { return dim_; }
  // Length of coordinate vectors: dim + 1 on the sphere, dim otherwise.
  int ambient_dim() const { return kind_ == ManifoldKind::Sphere ? dim_ + 1 : dim_; }
  bool is_flat() const { return kind_ != ManifoldKind::Sphere || dim_ == 1; }

  double radius() const { return radius_; }
  // Torus periods or box side lengths.
  const Eigen::VectorXd& lengths() const { return lengths_; }
  const Eigen::VectorXd& lower() const { return lower_; }
  Eigen::VectorXd upper() const { return lower_ + lengths_; }

  double ricci_lower_bound() const;
  double diameter() const;
  double volume() const;
  // Injectivity radius; infinite for the box.
  double injectivity_radius() const;

  bool operator==(const ManifoldSpec& other) const;

private:
  ManifoldKind kind_ = ManifoldKind::Box;
  int dim_ = 1;
  double radius_ = 1.0;
  Eigen::VectorXd lengths_;
  Eigen::VectorXd lower_;
};

struct Tangent {
  Point base;
  Eigen::VectorXd vec;
};

/// Hessians of c(x, y) = d(x, y)^2 / 2 in orthonormal frames.
///
/// `frame_p` spans T_p with the geodesic direction towards q as first column,
/// `frame_q` is the parallel-transported frame at q. Both are stored as
/// ambient_dim x dim matrices.
struct CostHessians {
  Eigen::MatrixXd dxx;
  Eigen::MatrixXd dxy_neg;
  Eigen::MatrixXd frame_p;
  Eigen::MatrixXd frame_q;
  double distance = 0.0;
};

void validate_point(const ManifoldSpec& spec, const Point& p);
// Wraps torus coordinates into [0, period); other kinds are returned as is.
Point canonicalize(const ManifoldSpec& spec, const Point& p);
// Projects an ambient vector onto T_p (identity on flat spaces).
Eigen::VectorXd project_tangent(const ManifoldSpec& spec, const Point& p,
                                const Eigen::VectorXd& v);

double distance(const ManifoldSpec& spec, const Point& p, const Point& q);
double cost(const ManifoldSpec& spec, const Point& p, const Point& q);
Tangent log_map(const ManifoldSpec& spec, const Point& p, const Point& q);
Point exp_map(const ManifoldSpec& spec, const Tangent& t);
Point exp_map(const ManifoldSpec& spec, const Point& p, const Eigen::VectorXd& v);

/// Orthonormal basis of T_p as columns. When `first` is nonzero its tangent
/// part becomes the first column; the rest is completed by Gram-Schmidt.
Eigen::MatrixXd tangent_frame(const ManifoldSpec& spec, const Point& p,
                              const Eigen::VectorXd& first = Eigen::VectorXd());

CostHessians cost_hessians(const ManifoldSpec& spec, const Point& p, const Point& q);

// Hessian of c(., q) at p as a symmetric operator on ambient vectors
// (restricted to T_p). Throws CutLocus when q is cut-conjugate to p.
Eigen::MatrixXd cost_hessian_xx_ambient(const ManifoldSpec& spec, const Point& p,
                                        const Point& q);

// Same quantities by central differences of `cost` in normal coordinates.
CostHessians cost_hessians_numeric(const ManifoldSpec& spec, const Point& p,
                                   const Point& q, double step = 1e-4);

/// Comparison coefficient S_K(d): sin(sqrt(K) d) / (sqrt(K) d) for K > 0,
/// 1 for K = 0 and sinh(sqrt(-K) d) / (sqrt(-K) d) for K < 0.
double s_coeff(double K, double d);

// Lower bound on det(-D_xy c) at distance d from Bishop-Gromov comparison,
// S_k(d)^{-(n-1)} with k = K / (n - 1) the per-direction curvature bound.
double expcon_lower_bound(const ManifoldSpec& spec, double d);

// Upper bound on trace(D_xx c) at distance d under Ric >= -K, K >= 0.
double hessbound_trace(int n, double K, double d);

namespace testing {
// Multiplies every distance by `scale` on the current thread while alive.
// Used by selftest to demonstrate that corrupted geometry is detected.
class ScopedGeometryFault {
public:
  explicit ScopedGeometryFault(double scale);
  ~ScopedGeometryFault();
  ScopedGeometryFault(const ScopedGeometryFault&) = delete;
  ScopedGeometryFault& operator=(const ScopedGeometryFault&) = delete;

private:
  double previous_;
};
} // namespace testing

} // namespace wbc
