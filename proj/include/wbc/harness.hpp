#pragma once

#include "wbc/barycenter.hpp"
#include "wbc/functionals.hpp"
#include "wbc/measures.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace wbc {

enum class Verdict { Pass, Fail, Inconclusive, NotApplicable };
std::string to_string(Verdict v);

/// Rows of per-atom or per-cell numbers, written out as CSV.
struct DiagnosticsTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void write_csv(std::ostream& out) const;
};

/// Outcome of one inequality experiment. The gate is lhs <= rhs + slack;
/// `verdict` can still be Inconclusive or NotApplicable when the inputs do
/// not support a decision.
struct InequalityReport {
  std::string experiment;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  Verdict verdict = Verdict::Fail;
  std::uint64_t seed = 0;
  std::vector<int> resolutions;
  // Ordered so that serialized reports are reproducible.
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::pair<std::string, std::string>> info;
  std::vector<std::string> warnings;
  DiagnosticsTable diagnostics;

  bool pass() const { return verdict == Verdict::Pass; }
  bool holds() const { return lhs <= rhs + slack; }
  void set_metric(const std::string& name, double value);
  double metric(const std::string& name) const; // throws InvalidArgument if absent
  bool has_metric(const std::string& name) const;
  void set_info(const std::string& name, const std::string& value);
  // Sets verdict from the gate unless it is already Inconclusive/NotApplicable.
  void decide();
};

/// Slack justified by running an experiment at R and 2R: twice the drift of
/// the gap lhs - rhs between the two resolutions.
double refinement_slack(const InequalityReport& coarse, const InequalityReport& fine);

struct PotentialFunctional {
  ScalarField V;
  std::string name = "potential";
};
struct InteractionFunctional {
  Kernel W;
  std::string name = "interaction";
};
using JensenFunctional = std::variant<EntropySpec, PotentialFunctional, InteractionFunctional>;

struct JensenOptions {
  int mesh_res = 16;
  double slack = 0.05;
  DensityEstimator estimator = DensityEstimator::Linear;
  // support_size 0 uses one barycenter atom per mesh cell.
  FixedPointOptions solver;
  int subsamples = 2;
  // Split atoms so every plan is map-like (refine_map_like).
  bool refine = true;
};

/// Barycenter of an Omega re-discretized at a mesh resolution, shared by
/// the plain and distorted Jensen checks and the density bound.
struct PreparedOmega {
  OmegaSpec omega; // entries at the mesh resolution
  MeshPtr mesh;
  BarycenterResult result;
  JensenOptions options;
};

PreparedOmega prepare_omega(const OmegaSpec& omega, const ReferenceMeasure& reference,
                            const JensenOptions& opts = {});

/// F(bar mu) <= sum_i w_i F(mu_i) + slack for a displacement convex F. Entropy
/// functionals require cd_condition >= 0 (CDViolated otherwise) and the
/// convexity class; the average W2^2 is recorded as `w2_sq_average`.
InequalityReport jensen_check(const PreparedOmega& prepared, const JensenFunctional& functional,
                              double slack);
InequalityReport jensen_check(const OmegaSpec& omega, const JensenFunctional& functional,
                              const JensenOptions& opts = {});

/// U(bar mu) <= sum_i w_i sum_cells U(f_i / alpha) alpha nu, with alpha the
/// barycentric distortion at the preimage of each cell. Needs the volume
/// reference; more than 20% non-map-like atoms makes the result Inconclusive.
InequalityReport distorted_jensen_check(const PreparedOmega& prepared, const EntropySpec& spec,
                                        double slack);
InequalityReport distorted_jensen_check(const OmegaSpec& omega, const EntropySpec& spec,
                                        const JensenOptions& opts = {});

/// ess_sup of the binned barycenter against L / (C * Omega(A_L)^n) times
/// 1.1, with L the largest entry ess_sup and C = alpha_lower_bound. Without
/// an absolutely continuous entry the verdict is NotApplicable.
InequalityReport density_bound_check(const OmegaSpec& omega, const BarycenterResult& result,
                                     int mesh_res,
                                     DensityEstimator estimator = DensityEstimator::NearestCell);

struct BMOptions {
  long sample_budget = 1000000; // full product enumeration up to this many tuples
  std::uint64_t seed = 0;
  double slack = 0.0;
  KarcherOptions karcher;
  int threads = 0;
  // Ambiguous tuples above this fraction make the verdict Inconclusive.
  double max_ambiguous_fraction = 0.01;
};

/// Barycenters of all tuples of cell centers drawn one from each set,
/// rasterized to cells and dilated by one ring (outer measure). With a
/// single set Z = A is exact and no dilation is applied. N finite:
/// sum_i w_i nu(A_i)^{1/N} <= nu(Z)^{1/N}; N infinite: sum_i w_i log nu(A_i) <=
/// log nu(Z). nu is the mesh reference, normalized to a probability.
InequalityReport multiset_bm(const MeshPtr& mesh, const std::vector<std::vector<bool>>& sets,
                             const std::vector<double>& weights, double N,
                             const BMOptions& opts = {});

struct RandomSetSpec {
  MeshPtr mesh;
  std::vector<double> probabilities;
  std::vector<std::vector<bool>> sets;

  void validate() const;
};

/// multiset_bm with probabilities as weights; for N infinite it also records
/// alpha(X), estimated by the smallest sum_i p_i d^2(z, S_i) over evaluated
/// selections, and the curvature-enhanced bound with k = K.
InequalityReport random_bm(const RandomSetSpec& rset, double N, const BMOptions& opts = {});

} // namespace wbc
