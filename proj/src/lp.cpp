#include "wbc/lp.hpp"

#include "wbc/errors.hpp"

#include <cmath>
#include <limits>

namespace wbc {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kPriceTol = 1e-11;
constexpr int kRefactorEvery = 50;
constexpr int kDegenerateBeforeBland = 30;

class RevisedSimplex {
public:
  RevisedSimplex(const std::vector<Eigen::VectorXd>& marginals, const std::vector<double>& cost)
      : marg_(marginals), cost_(cost), m_(static_cast<int>(marginals.size())) {
    radix_.resize(m_);
    offset_.resize(m_);
    long total = 1;
    int rows = 0;
    for (int i = 0; i < m_; ++i) {
      radix_[i] = static_cast<int>(marginals[i].size());
      total *= radix_[i];
      offset_[i] = rows;
      rows += (i == 0) ? radix_[i] : radix_[i] - 1;
    }
    tuples_ = total;
    rows_ = rows;
    if (static_cast<long>(cost.size()) != tuples_)
      throw InvalidArgument("cost vector does not match the tuple count");
    b_.resize(rows_);
    for (int i = 0; i < m_; ++i) {
      const int keep = (i == 0) ? radix_[i] : radix_[i] - 1;
      for (int a = 0; a < keep; ++a)
        b_(offset_[i] + a) = marginals[i](a);
    }
  }

  MultiIndexLP solve() {
    // artificial columns are numbered tuples_ + r
    basis_.resize(rows_);
    for (int r = 0; r < rows_; ++r)
      basis_[r] = tuples_ + r;
    binv_ = Eigen::MatrixXd::Identity(rows_, rows_);
    xb_ = b_;

    run_phase(true);
    double infeas = 0.0;
    for (int r = 0; r < rows_; ++r)
      if (basis_[r] >= tuples_)
        infeas += xb_(r);
    if (infeas > 1e-9)
      throw Error("multi-marginal LP is infeasible (residual " + std::to_string(infeas) + ")");
    drive_out_artificials();
    run_phase(false);
    refactor();

    MultiIndexLP out;
    out.x.assign(tuples_, 0.0);
    for (int r = 0; r < rows_; ++r)
      if (basis_[r] < tuples_)
        out.x[basis_[r]] = std::max(0.0, xb_(r));
    out.duals = duals(false);
    out.primal = 0.0;
    for (long t = 0; t < tuples_; ++t)
      out.primal += out.x[t] * cost_[t];
    out.dual = out.duals.dot(b_);
    double min_rc = 0.0;
    for (long t = 0; t < tuples_; ++t)
      min_rc = std::min(min_rc, reduced_cost(t, out.duals, false));
    out.dual_infeasibility = -min_rc;
    out.iterations = iterations_;
    return out;
  }

private:
  void rows_of(long col, std::vector<int>& rows) const {
    rows.clear();
    if (col >= tuples_) {
      rows.push_back(static_cast<int>(col - tuples_));
      return;
    }
    long rem = col;
    for (int i = m_ - 1; i >= 0; --i) {
      const int a = static_cast<int>(rem % radix_[i]);
      rem /= radix_[i];
      if (i == 0 || a < radix_[i] - 1)
        rows.push_back(offset_[i] + a);
    }
  }

  double column_cost(long col, bool phase1) const {
    if (phase1)
      return col >= tuples_ ? 1.0 : 0.0;
    return col >= tuples_ ? 0.0 : cost_[col];
  }

  Eigen::VectorXd duals(bool phase1) const {
    Eigen::VectorXd cb(rows_);
    for (int r = 0; r < rows_; ++r)
      cb(r) = column_cost(basis_[r], phase1);
    return binv_.transpose() * cb;
  }

  double reduced_cost(long col, const Eigen::VectorXd& y, bool phase1) const {
    double s = column_cost(col, phase1);
    if (col >= tuples_)
      return s - y(static_cast<int>(col - tuples_));
    long rem = col;
    for (int i = m_ - 1; i >= 0; --i) {
      const int a = static_cast<int>(rem % radix_[i]);
      rem /= radix_[i];
      if (i == 0 || a < radix_[i] - 1)
        s -= y(offset_[i] + a);
    }
    return s;
  }

  void refactor() {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(rows_, rows_);
    std::vector<int> rows;
    for (int r = 0; r < rows_; ++r) {
      rows_of(basis_[r], rows);
      for (int k : rows)
        B(k, r) = 1.0;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    binv_ = lu.inverse();
    xb_ = binv_ * b_;
  }

  Eigen::VectorXd ftran(long col) const {
    std::vector<int> rows;
    rows_of(col, rows);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(rows_);
    for (int k : rows)
      w += binv_.col(k);
    return w;
  }

  void pivot(int leave_row, long enter, const Eigen::VectorXd& w) {
    const double p = w(leave_row);
    const double theta = xb_(leave_row) / p;
    xb_ -= theta * w;
    xb_(leave_row) = theta;
    const Eigen::RowVectorXd prow = binv_.row(leave_row) / p;
    for (int r = 0; r < rows_; ++r)
      if (r != leave_row && w(r) != 0.0)
        binv_.row(r) -= w(r) * prow;
    binv_.row(leave_row) = prow;
    basis_[leave_row] = enter;
    ++iterations_;
    if (++since_refactor_ >= kRefactorEvery) {
      refactor();
      since_refactor_ = 0;
    }
  }

  void run_phase(bool phase1) {
    std::vector<char> in_basis(tuples_ + rows_, 0);
    for (long c : basis_)
      in_basis[c] = 1;
    int degenerate = 0;
    const long limit = 50L * (tuples_ + rows_) + 10000;
    for (long guard = 0;; ++guard) {
      if (guard > limit)
        throw NoConvergence("multi-marginal simplex iteration limit", iterations_, 0.0);
      const Eigen::VectorXd y = duals(phase1);
      const bool bland = degenerate >= kDegenerateBeforeBland;
      long enter = -1;
      double best = -kPriceTol;
      for (long t = 0; t < tuples_; ++t) {
        if (in_basis[t])
          continue;
        const double rc = reduced_cost(t, y, phase1);
        if (rc < best) {
          enter = t;
          best = rc;
          if (bland)
            break;
        }
      }
      if (enter < 0)
        return;
      const Eigen::VectorXd w = ftran(enter);
      int leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (int r = 0; r < rows_; ++r) {
        if (w(r) <= kPivotTol)
          continue;
        const double q = std::max(0.0, xb_(r)) / w(r);
        if (q < ratio - 1e-15 ||
            (std::abs(q - ratio) <= 1e-15 && leave >= 0 && basis_[r] < basis_[leave])) {
          ratio = q;
          leave = r;
        }
      }
      if (leave < 0)
        throw Error("multi-marginal LP is unbounded");
      degenerate = (ratio <= 1e-15) ? degenerate + 1 : 0;
      in_basis[basis_[leave]] = 0;
      in_basis[enter] = 1;
      pivot(leave, enter, w);
    }
  }

  // Replace artificial basis columns sitting at zero by real columns.
  void drive_out_artificials() {
    std::vector<char> in_basis(tuples_ + rows_, 0);
    for (long c : basis_)
      in_basis[c] = 1;
    for (int r = 0; r < rows_; ++r) {
      if (basis_[r] < tuples_)
        continue;
      const Eigen::RowVectorXd brow = binv_.row(r);
      std::vector<int> rows;
      for (long t = 0; t < tuples_; ++t) {
        if (in_basis[t])
          continue;
        rows_of(t, rows);
        double v = 0.0;
        for (int k : rows)
          v += brow(k);
        if (std::abs(v) > 1e-7) {
          const Eigen::VectorXd w = ftran(t);
          in_basis[basis_[r]] = 0;
          in_basis[t] = 1;
          pivot(r, t, w);
          break;
        }
      }
    }
  }

  const std::vector<Eigen::VectorXd>& marg_;
  const std::vector<double>& cost_;
  int m_;
  std::vector<int> radix_;
  std::vector<int> offset_;
  long tuples_ = 0;
  int rows_ = 0;
  Eigen::VectorXd b_;
  std::vector<long> basis_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xb_;
  int iterations_ = 0;
  int since_refactor_ = 0;
};

} // namespace

MultiIndexLP solve_multi_index_transport(const std::vector<Eigen::VectorXd>& marginals,
                                         const std::vector<double>& cost) {
  if (marginals.empty())
    throw InvalidArgument("need at least one marginal");
  for (const auto& mg : marginals)
    if (mg.size() == 0 || (mg.array() < 0.0).any())
      throw InvalidArgument("marginals must be nonempty and nonnegative");
  RevisedSimplex lp(marginals, cost);
  return lp.solve();
}

} // namespace wbc
