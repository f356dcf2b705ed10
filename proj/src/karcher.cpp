#include "wbc/karcher.hpp"

#include "wbc/errors.hpp"

#include <cmath>
#include <random>

namespace wbc {

void WeightedConfig::validate(const ManifoldSpec& spec) const {
  if (points.empty() || points.size() != weights.size())
    throw InvalidArgument("configuration needs matching, non-empty points and weights");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw InvalidArgument("configuration weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw InvalidArgument("configuration weights must sum to 1");
  for (const auto& p : points)
    validate_point(spec, p);
}

double barycenter_functional(const ManifoldSpec& spec, const WeightedConfig& cfg, const Point& z) {
  double f = 0.0;
  for (std::size_t i = 0; i < cfg.points.size(); ++i)
    if (cfg.weights[i] > 0.0)
      f += cfg.weights[i] * cost(spec, z, cfg.points[i]);
  return f;
}

Eigen::VectorXd karcher_direction(const ManifoldSpec& spec, const WeightedConfig& cfg,
                                  const Point& z) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(z.size());
  for (std::size_t i = 0; i < cfg.points.size(); ++i)
    if (cfg.weights[i] > 0.0)
      g += cfg.weights[i] * log_map(spec, z, cfg.points[i]).vec;
  return g;
}

KarcherResult karcher_mean(const WeightedConfig& cfg, const ManifoldSpec& spec, const Point& init,
                           const KarcherOptions& opts) {
  const double tol = opts.tol > 0.0 ? opts.tol : 1e-9 * spec.diameter();
  Point z = canonicalize(spec, init);
  double f = barycenter_functional(spec, cfg, z);
  Eigen::VectorXd g = karcher_direction(spec, cfg, z);
  double step = 1.0;
  for (int it = 0;; ++it) {
    const double res = g.norm();
    if (res <= tol)
      return {z, res, f, it};
    if (it >= opts.max_iter)
      throw NoConvergence("Karcher iteration did not converge", it, res);
    bool accepted = false;
    while (step >= 1e-12) {
      const Point cand = exp_map(spec, z, step * g);
      const double fc = barycenter_functional(spec, cfg, cand);
      if (fc <= f + 1e-15 * (1.0 + std::abs(f))) {
        try {
          g = karcher_direction(spec, cfg, cand);
        } catch (const CutLocus&) {
          step *= 0.5;
          continue;
        }
        z = cand;
        f = fc;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted)
      throw NoConvergence("Karcher line search stalled", it, res);
    step = std::min(1.0, 2.0 * step);
  }
}

namespace {

std::vector<Point> start_points(const ManifoldSpec& spec, const WeightedConfig& cfg) {
  std::vector<Point> starts;
  auto add = [&](const Point& p) {
    for (const auto& s : starts)
      if (s == p)
        return;
    starts.push_back(p);
  };
  int heaviest = 0;
  for (std::size_t i = 1; i < cfg.weights.size(); ++i)
    if (cfg.weights[i] > cfg.weights[heaviest])
      heaviest = static_cast<int>(i);
  add(cfg.points[heaviest]);
  if (spec.kind() == ManifoldKind::Box)
    return starts; // the functional is convex: one start suffices
  for (std::size_t i = 0; i < cfg.points.size(); ++i)
    if (cfg.weights[i] > 0.0)
      add(cfg.points[i]);
  if (spec.kind() == ManifoldKind::Torus) {
    // The lifted functional is a convex quadratic for every choice of lattice
    // shifts, so the global minimum is the weighted mean of some lift. Shifts
    // in {-1, 0, 1} relative to the heaviest point cover every optimal lift.
    std::vector<int> active;
    for (std::size_t i = 0; i < cfg.points.size(); ++i)
      if (cfg.weights[i] > 0.0 && static_cast<int>(i) != heaviest)
        active.push_back(static_cast<int>(i));
    const int n = spec.dim();
    const int digits = n * static_cast<int>(active.size());
    if (digits <= 8) {
      long combos = 1;
      for (int d = 0; d < digits; ++d)
        combos *= 3;
      const Eigen::VectorXd& P = spec.lengths();
      for (long c = 0; c < combos; ++c) {
        long code = c;
        Eigen::VectorXd mean = cfg.weights[heaviest] * cfg.points[heaviest];
        for (int i : active) {
          Eigen::VectorXd lift = cfg.points[i];
          for (int a = 0; a < n; ++a) {
            lift(a) += static_cast<double>(code % 3 - 1) * P(a);
            code /= 3;
          }
          mean += cfg.weights[i] * lift;
        }
        add(canonicalize(spec, mean));
      }
    }
  }
  if (spec.kind() == ManifoldKind::Sphere) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(spec.ambient_dim());
    for (std::size_t i = 0; i < cfg.points.size(); ++i)
      m += cfg.weights[i] * cfg.points[i];
    if (m.norm() > 1e-8 * spec.radius())
      add(m * (spec.radius() / m.norm()));
  }
  return starts;
}

// Karcher runs from `start`; when the start lies on a cut locus of some
// input point, from small perturbations of it along +-frame directions.
void run_from(const ManifoldSpec& spec, const WeightedConfig& cfg, const Point& start,
              const KarcherOptions& opts, std::vector<KarcherResult>& out) {
  try {
    out.push_back(karcher_mean(cfg, spec, start, opts));
    return;
  } catch (const CutLocus&) {
  } catch (const NoConvergence&) {
    return;
  }
  const Eigen::MatrixXd frame = tangent_frame(spec, start);
  const double h = 1e-3 * spec.diameter();
  for (int k = 0; k < frame.cols(); ++k)
    for (double sgn : {1.0, -1.0}) {
      try {
        out.push_back(karcher_mean(cfg, spec, exp_map(spec, start, sgn * h * frame.col(k)), opts));
      } catch (const CutLocus&) {
      } catch (const NoConvergence&) {
      }
    }
}

} // namespace

BarycenterEvaluation evaluate_barycenter(const ManifoldSpec& spec, const WeightedConfig& cfg,
                                         const KarcherOptions& opts) {
  cfg.validate(spec);
  const double tol = opts.tol > 0.0 ? opts.tol : 1e-9 * spec.diameter();
  BarycenterEvaluation ev;
  if (cfg.points.size() == 1) {
    const Point p = canonicalize(spec, cfg.points[0]);
    ev.best = {p, 0.0, 0.0, 0};
    ev.starts = 1;
    return ev;
  }
  const std::vector<Point> starts = start_points(spec, cfg);
  std::vector<KarcherResult> results;
  for (const auto& s : starts)
    run_from(spec, cfg, s, opts, results);
  ev.starts = static_cast<int>(starts.size());
  if (results.empty())
    throw NoConvergence("no barycenter start converged", opts.max_iter, 0.0);

  std::size_t best = 0;
  for (std::size_t k = 1; k < results.size(); ++k)
    if (results[k].functional < results[best].functional)
      best = k;
  ev.best = results[best];

  for (std::size_t k = 0; k < results.size(); ++k) {
    if (k == best)
      continue;
    if (std::abs(results[k].functional - ev.best.functional) > tol)
      continue;
    if (distance(spec, results[k].point, ev.best.point) <= 10.0 * tol)
      continue;
    // Distinct-looking minima with equal values: polish both with a tighter
    // tolerance before calling the configuration ambiguous.
    KarcherOptions tight = opts;
    tight.tol = std::max(1e-3 * tol, 1e-14 * spec.diameter());
    tight.max_iter = opts.max_iter + 200;
    Point a = ev.best.point, b = results[k].point;
    try {
      a = karcher_mean(cfg, spec, a, tight).point;
      b = karcher_mean(cfg, spec, b, tight).point;
    } catch (const Error&) {
    }
    if (distance(spec, a, b) > 10.0 * tol) {
      ev.ambiguous = true;
      ev.rival = results[k].point;
      break;
    }
  }
  return ev;
}

Point bc_map(const ManifoldSpec& spec, const WeightedConfig& cfg, const KarcherOptions& opts) {
  const BarycenterEvaluation ev = evaluate_barycenter(spec, cfg, opts);
  if (ev.ambiguous)
    throw AmbiguousBarycenter("configuration has several barycenters with equal functional value");
  return ev.best.point;
}

Point bc_map(const ManifoldSpec& spec, const std::vector<double>& weights,
             const std::vector<Point>& points, const KarcherOptions& opts) {
  return bc_map(spec, WeightedConfig{points, weights}, opts);
}

Point lipschitz_inverse(const ManifoldSpec& spec, const std::vector<double>& weights,
                        const std::vector<Point>& others, const Point& z) {
  if (weights.size() != others.size() + 1)
    throw InvalidArgument("need one weight per point including x_1");
  if (!(weights[0] > 0.0))
    throw InvalidArgument("the weight of x_1 must be positive");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(z.size());
  for (std::size_t i = 0; i < others.size(); ++i)
    v += weights[i + 1] * log_map(spec, z, others[i]).vec;
  return exp_map(spec, z, -v / weights[0]);
}

double empirical_lipschitz(const ManifoldSpec& spec, const std::vector<double>& weights,
                           const std::vector<Point>& others, const Point& center, double radius,
                           int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Eigen::MatrixXd frame = tangent_frame(spec, center);
  const int n = spec.dim();
  auto sample = [&]() {
    Eigen::VectorXd c(n);
    for (int k = 0; k < n; ++k)
      c(k) = normal(rng);
    c *= radius * std::pow(unif(rng), 1.0 / n) / c.norm();
    return exp_map(spec, center, frame * c);
  };
  double best = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Point z1 = sample(), z2 = sample();
    const double d = distance(spec, z1, z2);
    if (d < 1e-3 * radius)
      continue;
    const double dg = distance(spec, lipschitz_inverse(spec, weights, others, z1),
                               lipschitz_inverse(spec, weights, others, z2));
    best = std::max(best, dg / d);
  }
  return best;
}

} // namespace wbc
