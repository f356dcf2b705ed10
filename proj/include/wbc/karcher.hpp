#pragma once

#include "wbc/geometry.hpp"

#include <cstdint>
#include <vector>

namespace wbc {

/// Points with probability weights (zero weights allowed).
struct WeightedConfig {
  std::vector<Point> points;
  std::vector<double> weights;

  void validate(const ManifoldSpec& spec) const;
};

struct KarcherOptions {
  double tol = 0.0; // gradient-norm tolerance; 0 means 1e-9 * diameter
  int max_iter = 200;
};

struct KarcherResult {
  Point point;
  double residual = 0.0;   // |sum_i w_i log_z x_i|
  double functional = 0.0; // (1/2) sum_i w_i d^2(z, x_i)
  int iterations = 0;
};

double barycenter_functional(const ManifoldSpec& spec, const WeightedConfig& cfg, const Point& z);
// sum_i w_i log_z(x_i), the negative gradient of the functional.
Eigen::VectorXd karcher_direction(const ManifoldSpec& spec, const WeightedConfig& cfg,
                                  const Point& z);

/// Riemannian gradient descent z <- exp_z(s sum w_i log_z x_i) from `init`,
/// with s = 1 halved until the functional does not increase.
KarcherResult karcher_mean(const WeightedConfig& cfg, const ManifoldSpec& spec, const Point& init,
                           const KarcherOptions& opts = {});

struct BarycenterEvaluation {
  KarcherResult best;
  bool ambiguous = false;
  Point rival; // second minimizer when ambiguous
  int starts = 0;
};

/// Multi-start barycenter search. Starts at the highest-weight point, at every
/// input point and, on the sphere, at the normalized extrinsic mean. Starts on
/// a cut locus are perturbed along each frame direction. Reports ambiguity
/// instead of throwing.
BarycenterEvaluation evaluate_barycenter(const ManifoldSpec& spec, const WeightedConfig& cfg,
                                         const KarcherOptions& opts = {});

// bc_lambda(x_1..x_m); throws AmbiguousBarycenter when two minimizers tie.
Point bc_map(const ManifoldSpec& spec, const WeightedConfig& cfg,
             const KarcherOptions& opts = {});
Point bc_map(const ManifoldSpec& spec, const std::vector<double>& weights,
             const std::vector<Point>& points, const KarcherOptions& opts = {});

/// G(z) = exp_z(-(1/w_1) sum_{i>=2} w_i log_z x_i); inverts x_1 -> bc(x_1, x_2..x_m).
/// `others` holds x_2..x_m and `weights` all m weights.
Point lipschitz_inverse(const ManifoldSpec& spec, const std::vector<double>& weights,
                        const std::vector<Point>& others, const Point& z);

/// Largest observed ratio d(G z, G z') / d(z, z') over `trials` seeded pairs
/// drawn in the geodesic ball of the given radius around `center`.
double empirical_lipschitz(const ManifoldSpec& spec, const std::vector<double>& weights,
                           const std::vector<Point>& others, const Point& center, double radius,
                           int trials, std::uint64_t seed);

} // namespace wbc
