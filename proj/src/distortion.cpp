#include "wbc/distortion.hpp"

#include "wbc/errors.hpp"
#include "wbc/parallel.hpp"

#include <cmath>

namespace wbc {

namespace {

constexpr double kSingular = 1e-14;

DistortionReport finish(Point bar, double num, double den) {
  if (!(den > kSingular))
    throw SingularDenominator("distortion denominator determinant is not positive");
  return {num / den, std::move(bar), num, den};
}

WeightedConfig from_measure(const DiscreteMeasure& m) {
  return {m.points(), m.masses()};
}

} // namespace

DistortionReport alpha_at(const ManifoldSpec& spec, const WeightedConfig& lam, const Point& bar,
                          const Point& y) {
  const int n = spec.dim();
  const Eigen::MatrixXd frame = tangent_frame(spec, bar);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < lam.points.size(); ++i)
    if (lam.weights[i] > 0.0)
      sum += lam.weights[i] *
             (frame.transpose() * cost_hessian_xx_ambient(spec, bar, lam.points[i]) * frame);
  const double num = cost_hessians(spec, y, bar).dxy_neg.determinant();
  return finish(bar, num, sum.determinant());
}

DistortionReport alpha(const ManifoldSpec& spec, const WeightedConfig& lam, const Point& y,
                       const KarcherOptions& kopts) {
  validate_point(spec, y);
  return alpha_at(spec, lam, bc_map(spec, lam, kopts), y);
}

DistortionReport alpha(const ManifoldSpec& spec, const DiscreteMeasure& lam, const Point& y,
                       const KarcherOptions& kopts) {
  return alpha(spec, from_measure(lam), y, kopts);
}

DistortionReport alpha_numeric(const ManifoldSpec& spec, const WeightedConfig& lam,
                               const Point& y, double step, const KarcherOptions& kopts) {
  validate_point(spec, y);
  const Point bar = bc_map(spec, lam, kopts);
  const int n = spec.dim();
  const double h = step;
  const Eigen::MatrixXd eb = tangent_frame(spec, bar);
  const Eigen::MatrixXd ey = tangent_frame(spec, y);
  auto at_bar = [&](const Eigen::VectorXd& s) { return exp_map(spec, bar, eb * s); };
  auto at_y = [&](const Eigen::VectorXd& s) { return exp_map(spec, y, ey * s); };
  auto F = [&](const Eigen::VectorXd& s) { return barycenter_functional(spec, lam, at_bar(s)); };

  Eigen::MatrixXd den(n, n), num(n, n);
  const double f0 = F(Eigen::VectorXd::Zero(n));
  for (int a = 0; a < n; ++a) {
    const Eigen::VectorXd ua = h * Eigen::VectorXd::Unit(n, a);
    den(a, a) = (F(ua) - 2.0 * f0 + F(-ua)) / (h * h);
    for (int b = a + 1; b < n; ++b) {
      const Eigen::VectorXd ub = h * Eigen::VectorXd::Unit(n, b);
      den(a, b) = den(b, a) = (F(ua + ub) - F(ua - ub) - F(-ua + ub) + F(-ua - ub)) / (4 * h * h);
    }
    for (int b = 0; b < n; ++b) {
      const Eigen::VectorXd ub = h * Eigen::VectorXd::Unit(n, b);
      const double v = cost(spec, at_y(ua), at_bar(ub)) - cost(spec, at_y(ua), at_bar(-ub)) -
                       cost(spec, at_y(-ua), at_bar(ub)) + cost(spec, at_y(-ua), at_bar(-ub));
      num(a, b) = -v / (4 * h * h);
    }
  }
  return finish(bar, std::abs(num.determinant()), den.determinant());
}

double two_point_distortion_oracle(const ManifoldSpec& spec, const Point& x, const Point& y,
                                   double t, double step) {
  if (!(t > 0.0 && t <= 1.0))
    throw InvalidArgument("interpolation weight must lie in (0, 1]");
  validate_point(spec, x);
  validate_point(spec, y);
  const int n = spec.dim();
  auto interp = [&](const Point& p) {
    return exp_map(spec, p, (1.0 - t) * log_map(spec, p, y).vec);
  };
  const Point z = interp(x);
  const Eigen::MatrixXd ex = tangent_frame(spec, x);
  const Eigen::MatrixXd ez = tangent_frame(spec, z);
  Eigen::MatrixXd J(n, n);
  for (int k = 0; k < n; ++k) {
    const Point plus = interp(exp_map(spec, x, step * ex.col(k)));
    const Point minus = interp(exp_map(spec, x, -step * ex.col(k)));
    J.col(k) = ez.transpose() *
               (log_map(spec, z, plus).vec - log_map(spec, z, minus).vec) / (2.0 * step);
  }
  return std::abs(J.determinant()) / std::pow(t, n);
}

double alpha_lower_bound(double diameter, double ricci_lower, int n) {
  if (ricci_lower >= 0.0)
    return 1.0;
  const double k = -ricci_lower;
  const double a = std::sqrt(k) * diameter;
  const double inner = std::pow(s_coeff(-k, diameter), -(n - 1)) * a / std::tanh(a);
  return std::pow(inner, -n);
}

double alpha_lower_bound(const ManifoldSpec& spec) {
  return alpha_lower_bound(spec.diameter(), spec.ricci_lower_bound(), spec.dim());
}

JacobianReport jacobian_inequality_check(const BarycenterResult& result, const OmegaSpec& omega,
                                         const MeshPtr& mesh, double slack,
                                         DensityEstimator estimator, int threads) {
  const ManifoldSpec& spec = omega.manifold;
  const int n = spec.dim();
  const int m = static_cast<int>(omega.entries.size());
  if (static_cast<int>(result.plans.size()) != m)
    throw InvalidArgument("result has one plan per Omega entry");

  const MeshDensity fbar = estimate_density(result.measure, mesh, estimator);
  std::vector<MeshDensity> g;
  for (const auto& e : omega.entries)
    g.push_back(estimate_density(e.measure, mesh, estimator));

  JacobianReport rep;
  rep.slack = slack;
  rep.total = result.measure.size();
  rep.atoms.resize(rep.total);
  std::vector<int> status(rep.total, 0); // 0 ok, 1 not map-like, 2 zero density, 3 other
  const double inv_n = 1.0 / n;

  parallel_for(
      rep.total,
      [&](int k) {
        JacobianAtom& a = rep.atoms[k];
        a.atom = k;
        a.map_like = true;
        for (const auto& plan : result.plans)
          a.map_like = a.map_like && is_map_like(plan, k);
        if (!a.map_like) {
          status[k] = 1;
          return;
        }
        WeightedConfig lam;
        std::vector<double> gi(m);
        for (int i = 0; i < m; ++i) {
          const Point& y = result.plans[i].target.point(dominant_target(result.plans[i], k));
          lam.points.push_back(y);
          lam.weights.push_back(omega.entries[i].weight);
          gi[i] = evaluate_density(g[i], y, estimator);
        }
        const double f = evaluate_density(fbar, result.measure.point(k), estimator);
        a.density = f;
        for (double v : gi)
          if (!(v > 0.0)) {
            status[k] = 2;
            return;
          }
        try {
          const Point bar = bc_map(spec, lam);
          double lhs = 0.0, inv = 0.0;
          for (int i = 0; i < m; ++i) {
            const double al = alpha_at(spec, lam, bar, lam.points[i]).alpha;
            lhs += lam.weights[i] * std::pow(al, inv_n) * std::pow(f / gi[i], inv_n);
            inv += lam.weights[i] * std::pow(al / gi[i], inv_n);
          }
          a.lhs = lhs;
          a.density_bound = std::pow(inv, -static_cast<double>(n));
          a.evaluated = true;
        } catch (const Error&) {
          status[k] = 3;
        }
      },
      threads);

  for (int k = 0; k < rep.total; ++k) {
    const JacobianAtom& a = rep.atoms[k];
    if (a.map_like)
      ++rep.map_like;
    switch (status[k]) {
    case 1: ++rep.skipped_not_map_like; continue;
    case 2: ++rep.skipped_zero_density; continue;
    case 3: ++rep.skipped_other; continue;
    default: break;
    }
    ++rep.evaluated;
    rep.max_lhs = std::max(rep.max_lhs, a.lhs);
    if (a.lhs <= 1.0 + slack)
      ++rep.within_slack;
    if (a.density <= a.density_bound * std::pow(1.0 + slack, n))
      ++rep.density_within_slack;
  }
  if (rep.evaluated > 0) {
    rep.fraction_within = static_cast<double>(rep.within_slack) / rep.evaluated;
    rep.density_fraction_within = static_cast<double>(rep.density_within_slack) / rep.evaluated;
  }
  return rep;
}

} // namespace wbc
