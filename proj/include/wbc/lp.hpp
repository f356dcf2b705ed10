#pragma once

#include <Eigen/Dense>

#include <vector>

namespace wbc {

struct MultiIndexLP {
  std::vector<double> x;   // one entry per tuple, mixed radix with the first marginal slowest
  Eigen::VectorXd duals;   // one per kept constraint row
  double primal = 0.0;
  double dual = 0.0;
  double dual_infeasibility = 0.0; // max(0, -min reduced cost)
  int iterations = 0;
};

/// Multi-index transportation problem
///   min sum_t cost[t] x[t]  s.t. every marginal of x equals marginals[i], x >= 0
/// solved by a two-phase revised simplex with an explicit basis inverse.
/// One redundant row per marginal beyond the first is dropped. Pricing is
/// Dantzig's rule with a switch to Bland's rule after a run of degenerate
/// pivots, so ties are resolved deterministically.
MultiIndexLP solve_multi_index_transport(const std::vector<Eigen::VectorXd>& marginals,
                                         const std::vector<double>& cost);

} // namespace wbc
