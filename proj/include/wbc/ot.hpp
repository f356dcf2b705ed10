#pragma once

#include "wbc/geometry.hpp"
#include "wbc/measures.hpp"

#include <Eigen/Dense>

namespace wbc {

struct TransportPlan {
  DiscreteMeasure source;
  DiscreteMeasure target;
  Eigen::MatrixXd coupling; // rows = source atoms, cols = target atoms
  double transport_cost = 0.0; // sum gamma_ij c(x_i, y_j), c = d^2 / 2
};

struct DualPotentials {
  Eigen::VectorXd u;  // per source atom, u(0) = 0
  Eigen::VectorXd uc; // per target atom, u_i + uc_j <= c(x_i, y_j)
};

struct OTResult {
  TransportPlan plan;
  DualPotentials duals;
  // |primal - dual| for the exact solver; entropic solver reports the L1
  // marginal violation here instead.
  double gap = 0.0;
  int iterations = 0;
};

enum class OTMethod { Exact, Entropic };

struct EntropicOptions {
  double epsilon = 1e-2;
  int max_iter = 10000;
  double marginal_tol = 1e-9;
};

constexpr int kExactAtomLimit = 2000;

Eigen::MatrixXd cost_matrix(const ManifoldSpec& spec, const DiscreteMeasure& mu,
                            const DiscreteMeasure& nu);

OTResult solve_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                     const ManifoldSpec& spec);
OTResult solve_entropic(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                        const ManifoldSpec& spec, const EntropicOptions& opts = {});

double w2(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const ManifoldSpec& spec,
          OTMethod method = OTMethod::Exact, const EntropicOptions& opts = {});

// Row i renormalized to a probability measure on the target atoms.
DiscreteMeasure conditional_targets(const TransportPlan& plan, int i,
                                    const ManifoldSpec& spec);
// True when row i has a single entry above 1e-12 times the row mass.
bool is_map_like(const TransportPlan& plan, int i);
// Target atom index carrying the largest mass in row i.
int dominant_target(const TransportPlan& plan, int i);

} // namespace wbc
