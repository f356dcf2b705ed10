#pragma once

#include "wbc/measures.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace wbc {

/// One term coefficient * r^power * log(r)^log_power of an internal energy
/// density U; log_power is 0 or 1.
struct EnergyTerm {
  double coefficient = 1.0;
  double power = 1.0;
  int log_power = 0;
};

enum class EntropyFamily { UN, UInfinity, Custom };

/// Internal energy U_nu[mu] = sum over cells of U(f) nu(cell). UN is
/// U(r) = -N (r^{1 - 1/N} - r), UInfinity is r log r and Custom is a sum of
/// EnergyTerm values parsed from expressions such as "-2*r^0.5 + r*log(r)".
class EntropySpec {
public:
  static EntropySpec un(double N, ReferenceMeasure reference = {});
  static EntropySpec u_infinity(ReferenceMeasure reference = {});
  static EntropySpec custom(const std::string& expression, ReferenceMeasure reference = {});
  static EntropySpec custom(std::vector<EnergyTerm> terms, ReferenceMeasure reference = {});

  EntropyFamily family() const { return family_; }
  // Infinity for UInfinity, the parameter for UN, NaN for Custom.
  double N() const { return N_; }
  const ReferenceMeasure& reference() const { return reference_; }
  const std::vector<EnergyTerm>& terms() const { return terms_; }
  const std::string& expression() const { return expression_; }

  // Requires N > dim for the UN family.
  void validate(int dim) const;

  double U(double r) const;
  // p(r) = r U'(r) - U(r), from the closed-form derivative of every term.
  double p(double r) const;

private:
  EntropyFamily family_ = EntropyFamily::UInfinity;
  double N_ = std::numeric_limits<double>::infinity();
  ReferenceMeasure reference_;
  std::vector<EnergyTerm> terms_;
  std::string expression_;
};

std::string to_string(EntropyFamily family);

/// sum_c U(f_c) nu_c with nu rescaled to a probability on the mesh and the
/// density rescaled accordingly.
double entropy(const EntropySpec& spec, const MeshDensity& md);
double p_of_r(const EntropySpec& spec, double r);

using ScalarField = std::function<double(const Point&)>;
using Kernel = std::function<double(const Point&, const Point&)>;

double potential_energy(const ScalarField& V, const DiscreteMeasure& mu);
double potential_energy(const ScalarField& V, const MeshDensity& md);
// sum_{i,j} W(x_i, x_j) m_i m_j
double interaction_energy(const Kernel& W, const DiscreteMeasure& mu);
double interaction_energy(const Kernel& W, const MeshDensity& md);

struct ConvexityCheck {
  bool pass = true;
  double witness = 0.0; // first failing r
  std::string reason;
  double min_second_derivative = std::numeric_limits<double>::infinity();
  double max_first_derivative = -std::numeric_limits<double>::infinity();
};

/// Checks that h(r) = r^n U(r^{-n}) is convex and nonincreasing on a log grid
/// over [1e-6, 1e6] by central differences.
ConvexityCheck convexity_class_check(const EntropySpec& spec, int n, int grid = 2001);

/// Infimum over mesh nodes and cell centers of the smallest eigenvalue of
/// Ric + Hess V - dV (x) dV / (N - n). N = infinity drops the last term.
/// Tabulated potentials and Gaussians on the sphere are Unsupported; a
/// Gaussian on the torus has concave kinks on the cut locus of its center
/// and yields -infinity.
double cd_condition(const ManifoldSpec& spec, const ReferenceMeasure& reference, double N,
                    int resolution = 16);

} // namespace wbc
