#include "wbc/ot.hpp"

#include "wbc/errors.hpp"
#include "wbc/network_simplex.hpp"

#include <cmath>
#include <limits>

namespace wbc {

namespace {

constexpr double kMapLikeRel = 1e-12;

Eigen::VectorXd masses_vec(const DiscreteMeasure& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.masses().data(), m.size());
}

double log_sum_exp(const Eigen::VectorXd& v) {
  const double mx = v.maxCoeff();
  if (!std::isfinite(mx))
    return mx;
  return mx + std::log((v.array() - mx).exp().sum());
}

} // namespace

Eigen::MatrixXd cost_matrix(const ManifoldSpec& spec, const DiscreteMeasure& mu,
                            const DiscreteMeasure& nu) {
  Eigen::MatrixXd C(mu.size(), nu.size());
  for (int i = 0; i < mu.size(); ++i)
    for (int j = 0; j < nu.size(); ++j)
      C(i, j) = cost(spec, mu.point(i), nu.point(j));
  return C;
}

OTResult solve_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                     const ManifoldSpec& spec) {
  if (mu.size() > kExactAtomLimit || nu.size() > kExactAtomLimit)
    throw SizeLimit("exact solver supports at most " + std::to_string(kExactAtomLimit) +
                    " atoms per side");
  const Eigen::MatrixXd C = cost_matrix(spec, mu, nu);
  TransportLP lp = solve_transportation(C, masses_vec(mu), masses_vec(nu));
  OTResult out;
  out.plan.source = mu;
  out.plan.target = nu;
  out.plan.coupling = std::move(lp.flow);
  out.plan.transport_cost = lp.primal;
  out.duals.u = std::move(lp.u);
  out.duals.uc = std::move(lp.v);
  out.gap = std::abs(lp.primal - lp.dual);
  out.iterations = lp.pivots;
  return out;
}

OTResult solve_entropic(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                        const ManifoldSpec& spec, const EntropicOptions& opts) {
  if (!(opts.epsilon > 0.0))
    throw InvalidArgument("entropic regularization must be positive");
  const Eigen::MatrixXd C = cost_matrix(spec, mu, nu);
  const int n = mu.size(), m = nu.size();
  const Eigen::VectorXd a = masses_vec(mu), b = masses_vec(nu);
  const Eigen::VectorXd loga = a.array().log(), logb = b.array().log();
  const double eps = opts.epsilon;

  // gamma_ij = exp((f_i + g_j - C_ij) / eps) a_i b_j
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n), g = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd tmp_m(m), tmp_n(n);
  double err = std::numeric_limits<double>::infinity();
  int it = 0;
  for (it = 1; it <= opts.max_iter; ++it) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j)
        tmp_m(j) = logb(j) + (g(j) - C(i, j)) / eps;
      f(i) = -eps * log_sum_exp(tmp_m);
    }
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < n; ++i)
        tmp_n(i) = loga(i) + (f(i) - C(i, j)) / eps;
      g(j) = -eps * log_sum_exp(tmp_n);
    }
    // columns are now exact; measure the row violation
    err = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j)
        tmp_m(j) = logb(j) + (g(j) - C(i, j)) / eps;
      err += std::abs(std::exp(log_sum_exp(tmp_m) + loga(i) + f(i) / eps) - a(i));
    }
    if (err <= opts.marginal_tol)
      break;
  }
  if (err > opts.marginal_tol)
    throw NoConvergence("entropic solver did not reach the marginal tolerance", opts.max_iter,
                        err);

  OTResult out;
  out.plan.source = mu;
  out.plan.target = nu;
  out.plan.coupling.resize(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      out.plan.coupling(i, j) = std::exp((f(i) + g(j) - C(i, j)) / eps + loga(i) + logb(j));
  out.plan.transport_cost = (out.plan.coupling.array() * C.array()).sum();
  const double shift = f(0);
  out.duals.u = f.array() - shift;
  out.duals.uc = g.array() + shift;
  out.gap = err;
  out.iterations = it;
  return out;
}

double w2(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const ManifoldSpec& spec,
          OTMethod method, const EntropicOptions& opts) {
  const OTResult r =
      method == OTMethod::Exact ? solve_exact(mu, nu, spec) : solve_entropic(mu, nu, spec, opts);
  return std::sqrt(std::max(0.0, 2.0 * r.plan.transport_cost));
}

DiscreteMeasure conditional_targets(const TransportPlan& plan, int i, const ManifoldSpec& spec) {
  if (i < 0 || i >= plan.coupling.rows())
    throw InvalidArgument("source atom index out of range");
  const double row = plan.coupling.row(i).sum();
  if (!(row > 0.0))
    throw InvalidArgument("plan row " + std::to_string(i) + " carries no mass");
  std::vector<Point> pts;
  std::vector<double> w;
  for (int j = 0; j < plan.coupling.cols(); ++j) {
    const double v = plan.coupling(i, j);
    if (v > kMapLikeRel * row) {
      pts.push_back(plan.target.point(j));
      w.push_back(v);
    }
  }
  return DiscreteMeasure::from_weights(spec, std::move(pts), std::move(w));
}

bool is_map_like(const TransportPlan& plan, int i) {
  const double row = plan.coupling.row(i).sum();
  int count = 0;
  for (int j = 0; j < plan.coupling.cols(); ++j)
    if (plan.coupling(i, j) > kMapLikeRel * row)
      ++count;
  return count == 1;
}

int dominant_target(const TransportPlan& plan, int i) {
  int best = 0;
  plan.coupling.row(i).maxCoeff(&best);
  return best;
}

} // namespace wbc
