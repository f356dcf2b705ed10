#pragma once

#include "wbc/barycenter.hpp"
#include "wbc/karcher.hpp"
#include "wbc/measures.hpp"

#include <vector>

namespace wbc {

struct DistortionReport {
  double alpha = 0.0;
  Point barycenter;
  double numerator = 0.0;   // det[-D_yz c(y, xbar)]
  double denominator = 0.0; // det[sum_i w_i D_zz c(x_i, xbar)]
};

/// Barycentric volume distortion alpha_lam(y) from closed-form cost Hessians
/// in normal coordinates at the barycenter xbar = bc(lam) and at y.
DistortionReport alpha(const ManifoldSpec& spec, const WeightedConfig& lam, const Point& y,
                       const KarcherOptions& kopts = {});
DistortionReport alpha(const ManifoldSpec& spec, const DiscreteMeasure& lam, const Point& y,
                       const KarcherOptions& kopts = {});

// Same ratio with the barycenter `bar` of `lam` already known.
DistortionReport alpha_at(const ManifoldSpec& spec, const WeightedConfig& lam, const Point& bar,
                          const Point& y);

/// Same ratio from central differences of the cost (step `step`) in fixed
/// orthonormal frames; the numerator is taken in absolute value because the
/// two frames are not orientation-matched.
DistortionReport alpha_numeric(const ManifoldSpec& spec, const WeightedConfig& lam,
                               const Point& y, double step = 1e-4,
                               const KarcherOptions& kopts = {});

/// Classical two-point distortion of the interpolation x' -> point at
/// fraction (1 - t) from x' to y: |det Jacobian at x| / t^n, the Jacobian
/// taken by central differences with step `step`.
double two_point_distortion_oracle(const ManifoldSpec& spec, const Point& x, const Point& y,
                                   double t, double step = 1e-4);

/// C(diam, K, n) with Ric >= K. Nonnegative K gives 1; for K < 0, with
/// k = -K, (S_{-k}(diam)^{-(n-1)} * sqrt(k) diam / tanh(sqrt(k) diam))^{-n}.
double alpha_lower_bound(double diameter, double ricci_lower, int n);
double alpha_lower_bound(const ManifoldSpec& spec);

struct JacobianAtom {
  int atom = -1;
  bool map_like = false;
  bool evaluated = false;
  double lhs = 0.0;
  // f(x) and its distortion bound [sum_i w_i alpha^{1/n} g_i^{-1/n}]^{-n}.
  double density = 0.0;
  double density_bound = 0.0;
};

struct JacobianReport {
  std::vector<JacobianAtom> atoms;
  int total = 0;
  int map_like = 0;
  int skipped_not_map_like = 0;
  int skipped_zero_density = 0;
  int skipped_other = 0; // cut locus, ambiguous or singular distortion
  int evaluated = 0;
  int within_slack = 0;
  int density_within_slack = 0;
  double slack = 0.05;
  double fraction_within = 0.0; // among evaluated atoms
  double density_fraction_within = 0.0;
  double max_lhs = 0.0;
};

/// Discrete Jacobian inequality at every map-like barycenter atom:
/// lhs = sum_i w_i alpha_{lam_x}(T_i x)^{1/n} (f(x) / g_i(T_i x))^{1/n}, with f
/// the barycenter binned on `mesh` and g_i each entry binned on the same mesh
/// with the same estimator.
JacobianReport jacobian_inequality_check(
    const BarycenterResult& result, const OmegaSpec& omega, const MeshPtr& mesh,
    double slack = 0.05, DensityEstimator estimator = DensityEstimator::NearestCell,
    int threads = 0);

} // namespace wbc
