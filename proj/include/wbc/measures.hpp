#pragma once

#include "wbc/geometry.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <random>
#include <vector>

namespace wbc {

/// Weighted atom cloud. Masses are strictly positive and sum to one.
class DiscreteMeasure {
public:
  DiscreteMeasure() = default;
  // Validates every point against `spec`, canonicalizes torus coordinates and
  // renormalizes masses whose sum is within 1e-6 of one.
  DiscreteMeasure(const ManifoldSpec& spec, std::vector<Point> points, std::vector<double> masses);

  // Drops zero weights and normalizes the rest; negative weights are rejected.
  static DiscreteMeasure from_weights(const ManifoldSpec& spec, std::vector<Point> points,
                                      std::vector<double> weights);
  static DiscreteMeasure dirac(const ManifoldSpec& spec, const Point& p);

  int size() const { return static_cast<int>(points_.size()); }
  const std::vector<Point>& points() const { return points_; }
  const std::vector<double>& masses() const { return masses_; }
  const Point& point(int i) const { return points_[i]; }
  double mass(int i) const { return masses_[i]; }

private:
  std::vector<Point> points_;
  std::vector<double> masses_;
};

/// Reference measure dnu = exp(-V) dvol.
struct ReferenceMeasure {
  enum class Kind { Zero, Gaussian, Tabulated };
  Kind kind = Kind::Zero;
  // Gaussian: V(x) = |x - center|^2 / (2 variance).
  Point center;
  double variance = 1.0;
  // Tabulated: one value of V per mesh cell.
  std::vector<double> table;

  static ReferenceMeasure zero() { return {}; }
  static ReferenceMeasure gaussian(Point center, double variance);
  static ReferenceMeasure tabulated(std::vector<double> values);

  bool is_volume() const { return kind == Kind::Zero; }
  // Potential at `p`; `cell` is needed for tabulated potentials.
  double potential(const ManifoldSpec& spec, const Point& p, int cell = -1) const;
};

/// Regular grid of cells: uniform boxes on torus and box, latitude-longitude
/// bands (res x 2 res) on the 2-sphere. Cell volumes are reference-measure
/// masses.
class Mesh {
public:
  static std::shared_ptr<const Mesh> build(const ManifoldSpec& spec, int resolution,
                                           ReferenceMeasure reference = {});

  const ManifoldSpec& spec() const { return spec_; }
  const ReferenceMeasure& reference() const { return reference_; }
  int resolution() const { return resolution_; }
  const std::vector<int>& shape() const { return shape_; }
  int size() const { return static_cast<int>(centers_.size()); }

  const Point& center(int c) const { return centers_[c]; }
  // Reference-measure mass of the cell.
  double volume(int c) const { return volumes_[c]; }
  // Riemannian volume of the cell.
  double riemannian_volume(int c) const { return riemannian_[c]; }
  const std::vector<double>& volumes() const { return volumes_; }
  double total_volume() const;
  // Upper bound on the geodesic diameter of any cell.
  double cell_diameter() const { return cell_diameter_; }
  // Side length of a cell along the first axis (box, torus) or latitude step.
  double cell_size() const { return cell_size_; }

  // Index of the cell containing p; throws InvalidPoint outside a box.
  int cell_of(const Point& p) const;
  // Cells sharing at least a corner with c (one ring), excluding c.
  std::vector<int> neighbours(int c) const;
  // Point drawn uniformly (w.r.t. volume) inside cell c.
  Point sample_in_cell(int c, std::mt19937_64& rng) const;

  std::vector<int> unravel(int c) const;
  int ravel(const std::vector<int>& idx) const;

private:
  ManifoldSpec spec_;
  ReferenceMeasure reference_;
  int resolution_ = 0;
  std::vector<int> shape_;
  std::vector<Point> centers_;
  std::vector<double> volumes_;
  std::vector<double> riemannian_;
  double cell_diameter_ = 0.0;
  double cell_size_ = 0.0;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Per-cell density with respect to the mesh reference measure.
class MeshDensity {
public:
  MeshDensity() = default;
  // Rejects negative or non-finite values; requires sum(values * volume) = 1
  // within 1e-6 and renormalizes exactly.
  MeshDensity(MeshPtr mesh, Eigen::VectorXd values);
  // Normalizes arbitrary nonnegative weights into a density.
  static MeshDensity from_unnormalized(MeshPtr mesh, Eigen::VectorXd values);

  const MeshPtr& mesh() const { return mesh_; }
  const Eigen::VectorXd& values() const { return values_; }
  double value(int c) const { return values_(c); }
  int size() const { return static_cast<int>(values_.size()); }
  double total_mass() const;

private:
  MeshPtr mesh_;
  Eigen::VectorXd values_;
};

MeshDensity uniform_on_set(const MeshPtr& mesh, const std::vector<bool>& indicator);
DiscreteMeasure to_discrete(const MeshDensity& md);
double ess_sup(const MeshDensity& md);
MeshDensity bin_to_mesh(const DiscreteMeasure& dm, const MeshPtr& mesh);

/// How a discrete measure is turned into a density on a mesh. `NearestCell`
/// assigns each atom to its cell (bin_to_mesh). `Linear` spreads each atom
/// over the 2^n nearest cell centers with multilinear weights in grid
/// coordinates (cloud-in-cell) and reads values back by the same weights.
enum class DensityEstimator { NearestCell, Linear };

MeshDensity deposit_linear(const DiscreteMeasure& dm, const MeshPtr& mesh);
MeshDensity estimate_density(const DiscreteMeasure& dm, const MeshPtr& mesh,
                             DensityEstimator estimator);
// Multilinear interpolation between cell centers (wrapping on periodic axes,
// clamped at box faces and at the sphere's polar rows).
double interpolate_linear(const MeshDensity& md, const Point& p);
double evaluate_density(const MeshDensity& md, const Point& p, DensityEstimator estimator);

// Reference mass of the selected cells.
double set_measure(const Mesh& mesh, const std::vector<bool>& indicator);

// Unnormalized density (w.r.t. the mesh reference measure) as a function.
using DensityFunction = std::function<double(const Point&)>;

/// Cell averages of f by the midpoint rule on s^n sub-cells (volume
/// weighted), normalized to a probability density.
MeshDensity discretize_density(const MeshPtr& mesh, const DensityFunction& f, int subsamples = 2);

void write_density_csv(std::ostream& out, const MeshDensity& md);

} // namespace wbc
