#pragma once

#include <Eigen/Dense>

namespace wbc {

struct TransportLP {
  Eigen::MatrixXd flow; // n x m, row sums a, column sums b
  Eigen::VectorXd u;    // source potentials, u(0) = 0
  Eigen::VectorXd v;    // sink potentials; u_i + v_j <= C_ij
  double primal = 0.0;
  double dual = 0.0;
  int pivots = 0;
};

/// Exact solver for the balanced transportation problem
///   min <C, P>  s.t.  P 1 = a, P^T 1 = b, P >= 0
/// by the primal network simplex method on the bipartite graph with a
/// big-M artificial root. Uses a strongly feasible spanning tree, block
/// pricing in a fixed cyclic order and the last-blocking-arc leaving rule, so
/// the result is deterministic. Final flows are recomputed from the tree,
/// which makes the marginals exact up to summation rounding.
TransportLP solve_transportation(const Eigen::MatrixXd& C, const Eigen::VectorXd& a,
                                 const Eigen::VectorXd& b, long max_pivots = 0);

} // namespace wbc
