#pragma once

#include "wbc/barycenter.hpp"
#include "wbc/distortion.hpp"
#include "wbc/functionals.hpp"
#include "wbc/harness.hpp"
#include "wbc/karcher.hpp"
#include "wbc/measures.hpp"
#include "wbc/ot.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace wbc::io {

// Insertion-ordered so that identical inputs serialize to identical bytes.
using Json = nlohmann::ordered_json;

Json read_json_file(const std::string& path);
// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);
std::string dump(const Json& j);

// A JSON value that is either an inline object or a string naming a file
// (resolved relative to `base_dir`).
Json resolve(const Json& j, const std::string& base_dir);
std::string directory_of(const std::string& path);

Json to_json(const Point& p);
Point point_from_json(const Json& j);
// Parses "x,y,z" into a point.
Point point_from_string(const std::string& s);

// {"kind": "sphere", "dim": n, "radius": r} | {"kind": "torus", "dim": n,
// "periods": [...]} | {"kind": "box", "dim": n, "bounds": [[lo, hi], ...]}
Json to_json(const ManifoldSpec& spec);
ManifoldSpec manifold_from_json(const Json& j);

// {"V": "zero"} | {"V": "gaussian", "center": [...], "variance": v} |
// {"V": "tabulated", "values": [...]}
Json to_json(const ReferenceMeasure& ref);
ReferenceMeasure reference_from_json(const Json& j);

Json to_json(const DiscreteMeasure& m);
DiscreteMeasure measure_from_json(const ManifoldSpec& spec, const Json& j);

/// Closed-form unnormalized densities: "uniform", "gaussian" (center,
/// sigma; exp(-d^2 / 2 sigma^2)), "von_mises_fisher" (center, kappa; sphere),
/// "cosine" (center, kappa per axis; torus: exp(sum_a kappa_a cos(2 pi (x_a -
/// c_a) / L_a))) and "ball" (center, radius; indicator of a geodesic ball).
DensityFunction density_field_from_json(const ManifoldSpec& spec, const Json& j);

/// One Omega entry: {"weight": w, "measure": M} where M is a measure object,
/// {"mesh_density": {"resolution": R, "values": [...], "reference": ...}} or
/// {"field": F, "resolution": R, "reference": ...}.
OmegaEntry omega_entry_from_json(const ManifoldSpec& spec, const Json& j,
                                 const std::string& base_dir);
// {"manifold": ..., "entries": [...]}
OmegaSpec omega_from_json(const Json& j, const std::string& base_dir);

Json to_json(const MeshDensity& md);

Json to_json(const TransportPlan& plan, const DualPotentials* duals = nullptr);
Json to_json(const BarycenterResult& r);
BarycenterResult result_from_json(const ManifoldSpec& spec, const Json& j);
// Rebuilds the stored couplings against the entries of `omega`.
void attach_plans(BarycenterResult& r, const OmegaSpec& omega, const Json& j);
Json to_json(const BalanceReport& b);
Json to_json(const DistortionReport& d);
Json to_json(const JacobianReport& r, bool per_atom = false);
Json to_json(const KarcherResult& k);

// {"family": "UN" | "Uinf" | "custom", "N": ..., "expression": ...,
// "reference": {...}}
Json to_json(const EntropySpec& e);
EntropySpec entropy_from_json(const Json& j);

Json to_json(const InequalityReport& r);

/// Indicator of a set of mesh cells: {"cells": [...]} or {"box": {"lower":
/// [...], "upper": [...]}} (cell centers inside, coordinates as on the
/// manifold) or {"ball": {"center": [...], "radius": r}}.
std::vector<bool> cell_set_from_json(const MeshPtr& mesh, const Json& j);

DensityEstimator estimator_from_string(const std::string& s);
std::string to_string(DensityEstimator e);

} // namespace wbc::io
