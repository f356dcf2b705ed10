#pragma once

// Reference computations written without the library's geometry or solvers,
// used to cross-check results in the unit and acceptance tests.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

inline double sphere_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q, double r = 1.0) {
  // atan2 form stays accurate near 0 and pi, unlike acos of the dot product.
  const Eigen::VectorXd a = p / r, b = q / r;
  const double dot = a.dot(b);
  const double cross = std::sqrt(std::max(0.0, a.squaredNorm() * b.squaredNorm() - dot * dot));
  return r * std::atan2(cross, dot);
}

inline double torus_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                             const Eigen::VectorXd& periods) {
  double s = 0.0;
  for (int k = 0; k < p.size(); ++k) {
    double d = std::fmod(std::abs(p(k) - q(k)), periods(k));
    d = std::min(d, periods(k) - d);
    s += d * d;
  }
  return std::sqrt(s);
}

// Rodrigues rotation of p about the unit axis by angle theta (3D only).
inline Eigen::Vector3d rotate(const Eigen::Vector3d& p, const Eigen::Vector3d& axis, double theta) {
  const Eigen::Vector3d k = axis.normalized();
  return p * std::cos(theta) + k.cross(p) * std::sin(theta) + k * k.dot(p) * (1 - std::cos(theta));
}

// Point at arc length s from p towards q on the unit 2-sphere.
inline Eigen::Vector3d sphere_geodesic(const Eigen::Vector3d& p, const Eigen::Vector3d& q, double s) {
  const Eigen::Vector3d axis = p.cross(q);
  return rotate(p, axis, s);
}

// Optimal assignment between two uniform clouds of equal size by enumerating
// permutations; the LP optimum is attained at a permutation matrix.
inline double assignment_cost(const Eigen::MatrixXd& C) {
  const int n = static_cast<int>(C.rows());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      s += C(i, perm[i]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / n;
}

// Squared W2 on the line by the quantile coupling (sorted atoms).
inline double w2_sq_line(std::vector<std::pair<double, double>> mu,
                         std::vector<std::pair<double, double>> nu) {
  std::sort(mu.begin(), mu.end());
  std::sort(nu.begin(), nu.end());
  std::size_t i = 0, j = 0;
  double a = mu[0].second, b = nu[0].second, total = 0.0;
  while (i < mu.size() && j < nu.size()) {
    const double m = std::min(a, b);
    total += m * (mu[i].first - nu[j].first) * (mu[i].first - nu[j].first);
    a -= m;
    b -= m;
    if (a <= 1e-15 && ++i < mu.size())
      a = mu[i].second;
    if (b <= 1e-15 && ++j < nu.size())
      b = nu[j].second;
  }
  return total;
}

// Minimizes f over a box by a coarse grid followed by shrinking pattern search.
inline Eigen::VectorXd grid_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                                     const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                     int grid = 60) {
  const int n = static_cast<int>(lo.size());
  Eigen::VectorXd best = lo;
  double fb = std::numeric_limits<double>::infinity();
  std::vector<int> idx(n, 0);
  long total = 1;
  for (int k = 0; k < n; ++k)
    total *= grid + 1;
  for (long t = 0; t < total; ++t) {
    long c = t;
    Eigen::VectorXd x(n);
    for (int k = 0; k < n; ++k) {
      x(k) = lo(k) + (hi(k) - lo(k)) * double(c % (grid + 1)) / grid;
      c /= grid + 1;
    }
    const double v = f(x);
    if (v < fb) {
      fb = v;
      best = x;
    }
  }
  double step = (hi - lo).maxCoeff() / grid;
  while (step > 1e-12) {
    bool moved = false;
    for (int k = 0; k < n; ++k)
      for (double s : {step, -step}) {
        Eigen::VectorXd y = best;
        y(k) += s;
        const double v = f(y);
        if (v < fb) {
          fb = v;
          best = y;
          moved = true;
        }
      }
    if (!moved)
      step /= 2;
  }
  return best;
}

} // namespace oracle

namespace oracle {

// Total variation between `masses` and their best rounding onto multiples of
// 1/K (largest remainders), the mass that a K-atom uniform support misplaces.
inline double grid_rounding_tv(const std::vector<double>& masses, int K) {
  std::vector<double> rem(masses.size());
  std::vector<long> units(masses.size());
  long used = 0;
  for (std::size_t j = 0; j < masses.size(); ++j) {
    units[j] = static_cast<long>(std::floor(masses[j] * K + 1e-12));
    rem[j] = masses[j] * K - units[j];
    used += units[j];
  }
  std::vector<std::size_t> order(masses.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; k < order.size() && used < K; ++k, ++used)
    ++units[order[k]];
  double tv = 0.0;
  for (std::size_t j = 0; j < masses.size(); ++j)
    tv += std::abs(masses[j] - double(units[j]) / K);
  return 0.5 * tv;
}

} // namespace oracle
