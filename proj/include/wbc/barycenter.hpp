#pragma once

#include "wbc/karcher.hpp"
#include "wbc/measures.hpp"
#include "wbc/ot.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wbc {

struct OmegaEntry {
  double weight = 0.0;
  DiscreteMeasure measure;
  // Present for absolutely continuous entries; `measure` is then its
  // cell-center discretization.
  std::optional<MeshDensity> density;
  // Optional closed-form density used to re-discretize at other resolutions.
  DensityFunction field;

  bool absolutely_continuous() const { return density.has_value(); }

  static OmegaEntry discrete(double weight, DiscreteMeasure m);
  static OmegaEntry continuous(double weight, MeshDensity md, DensityFunction field = {});
};

/// Finitely supported Omega = sum_i w_i delta_{mu_i} on one manifold.
struct OmegaSpec {
  ManifoldSpec manifold;
  std::vector<OmegaEntry> entries;

  void validate() const;
  std::vector<double> weights() const;
  bool has_absolutely_continuous() const;
};

struct BarycenterResult {
  std::string method;
  DiscreteMeasure measure;
  std::vector<TransportPlan> plans; // barycenter -> entry i
  std::vector<DualPotentials> duals;
  std::vector<double> first_order_residuals;
  std::vector<double> functional_log; // sum_i w_i W2^2(bar mu_k, mu_i)
  double functional = 0.0;
  int iterations = 0;
  bool converged = false;
  double certificate_gap = 0.0; // max OT gap, or the LP gap for the multi-marginal method
  int restart_used = 0;
  std::vector<std::string> warnings;
};

struct FixedPointOptions {
  int support_size = 0;  // 0: atom count of the initialisation source
  std::uint64_t seed = 0;
  double tol = 0.0;      // displacement tolerance; 0 means 1e-6 * diameter
  double karcher_tol = 0.0; // 0 means 1e-9 * diameter
  int max_iter = 100;
  int restarts = 1;
  std::optional<DiscreteMeasure> init;
  int threads = 0;
};

/// Free-support fixed-point iteration: solve OT from the current support to
/// every entry, then move each atom to the Karcher mean of its transported
/// images lambda_x = sum_i w_i conditional_targets(plan_i, x).
BarycenterResult solve_fixed_point(const OmegaSpec& omega, const FixedPointOptions& opts = {});

constexpr long kMultimarginalTupleLimit = 1000000;

/// Multi-marginal LP over the product of supports with cost
/// min_z sum_i w_i d^2(x_i, z), pushed forward through bc_map.
BarycenterResult solve_multimarginal(const OmegaSpec& omega, const KarcherOptions& kopts = {},
                                     int threads = 0);

/// Splits every barycenter atom along its plan rows (north-west corner order
/// across entries) into pieces with a single target per entry, each moved to
/// the barycenter of its targets. The functional cannot increase and all
/// plans become map-like. `certificate_gap` is the largest primal-dual gap of
/// the new plans against the old target potentials.
BarycenterResult refine_map_like(const OmegaSpec& omega, const BarycenterResult& result,
                                 const KarcherOptions& kopts = {}, int threads = 0);

struct BalanceReport {
  std::vector<double> first_order; // per barycenter atom
  double max_first_order = 0.0;
  bool second_order_evaluated = false;
  std::vector<double> second_order; // max Hessian eigenvalue of sum_i w_i u_i per atom
  double max_second_order = 0.0;
  double step = 0.0;
  double slack = 0.0;
  bool second_order_within_slack = true;
};

/// First-order residuals at every atom and, on flat manifolds, the largest
/// eigenvalue of the finite-difference Hessian of phi = sum_i w_i u_i with
/// u_i(y) = max_j [uc_ij - c(y, y_j)], at step `cell_size`. `slack` <= 0 means
/// 0.05 / cell_size.
BalanceReport balance_certificate(const BarycenterResult& result, const OmegaSpec& omega,
                                  double cell_size, double slack = 0.0);

struct ApproximatedOmega {
  OmegaSpec omega;
  std::vector<double> radius; // per entry W2 discretization radius
};

/// Re-discretizes continuous entries at `resolution` (using their density
/// field when available); discrete entries pass through with radius 0.
ApproximatedOmega approximate_omega(const OmegaSpec& omega, int resolution, int subsamples = 2);

} // namespace wbc
