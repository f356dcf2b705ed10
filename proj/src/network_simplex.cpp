#include "wbc/network_simplex.hpp"

#include "wbc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace wbc {

namespace {

class NetworkSimplex {
public:
  NetworkSimplex(const Eigen::MatrixXd& C, const Eigen::VectorXd& a, const Eigen::VectorXd& b)
      : C_(C), n_(static_cast<int>(a.size())), m_(static_cast<int>(b.size())),
        nodes_(n_ + m_ + 1), root_(n_ + m_), real_arcs_(static_cast<long>(n_) * m_) {
    supply_.resize(nodes_, 0.0);
    for (int i = 0; i < n_; ++i)
      supply_[i] = a(i);
    for (int j = 0; j < m_; ++j)
      supply_[n_ + j] = -b(j);

    const double cmax = C.size() > 0 ? C.cwiseAbs().maxCoeff() : 0.0;
    big_m_ = (cmax + 1.0) * (n_ + m_ + 1);
    eps_ = 1e-13 * big_m_;

    flow_.assign(real_arcs_ + nodes_, 0.0);
    adj_.assign(nodes_, {});
    for (int v = 0; v < root_; ++v) {
      const long arc = real_arcs_ + v;
      flow_[arc] = v < n_ ? supply_[v] : -supply_[v];
      adj_[v].push_back(arc);
      adj_[root_].push_back(arc);
    }
    parent_.assign(nodes_, -1);
    parent_arc_.assign(nodes_, -1);
    depth_.assign(nodes_, 0);
    pi_.assign(nodes_, 0.0);
    order_.reserve(nodes_);
    rebuild_tree();

    block_ = std::max<long>(10, static_cast<long>(std::sqrt(static_cast<double>(real_arcs_))));
  }

  int run(long max_pivots) {
    int pivots = 0;
    for (;;) {
      const long entering = find_entering();
      if (entering < 0)
        break;
      pivot(entering);
      ++pivots;
      if (max_pivots > 0 && pivots >= max_pivots)
        throw NoConvergence("network simplex pivot limit reached", pivots, 0.0);
    }
    return pivots;
  }

  TransportLP result() {
    TransportLP out;
    rebuild_tree();
    recompute_flows();
    for (int v = 0; v < root_; ++v)
      if (std::abs(flow_[real_arcs_ + v]) > 1e-9)
        throw Error("transportation problem: artificial arc carries flow");
    out.flow = Eigen::MatrixXd::Zero(n_, m_);
    for (int v = 0; v < nodes_; ++v) {
      const long arc = parent_arc_[v];
      if (arc >= 0 && arc < real_arcs_) {
        const double f = std::max(0.0, flow_[arc]);
        out.flow(static_cast<int>(arc / m_), static_cast<int>(arc % m_)) = f;
      }
    }
    out.u.resize(n_);
    out.v.resize(m_);
    for (int i = 0; i < n_; ++i)
      out.u(i) = -pi_[i];
    for (int j = 0; j < m_; ++j)
      out.v(j) = pi_[n_ + j];
    tighten_duals(out.u, out.v);
    const double shift = out.u(0);
    out.u.array() -= shift;
    out.v.array() += shift;

    out.primal = (out.flow.array() * C_.array()).sum();
    out.dual = 0.0;
    for (int i = 0; i < n_; ++i)
      out.dual += supply_[i] * out.u(i);
    for (int j = 0; j < m_; ++j)
      out.dual += -supply_[n_ + j] * out.v(j);
    return out;
  }

private:
  int src(long arc) const {
    if (arc < real_arcs_)
      return static_cast<int>(arc / m_);
    const int v = static_cast<int>(arc - real_arcs_);
    return v < n_ ? v : root_;
  }
  int dst(long arc) const {
    if (arc < real_arcs_)
      return n_ + static_cast<int>(arc % m_);
    const int v = static_cast<int>(arc - real_arcs_);
    return v < n_ ? root_ : v;
  }
  double cost(long arc) const {
    if (arc < real_arcs_)
      return C_(static_cast<int>(arc / m_), static_cast<int>(arc % m_));
    return big_m_;
  }
  double reduced(long arc) const { return cost(arc) + pi_[src(arc)] - pi_[dst(arc)]; }

  // BFS from the root over tree arcs: parents, depths and potentials.
  void rebuild_tree() {
    order_.clear();
    order_.push_back(root_);
    parent_[root_] = -1;
    parent_arc_[root_] = -1;
    depth_[root_] = 0;
    pi_[root_] = 0.0;
    for (std::size_t h = 0; h < order_.size(); ++h) {
      const int w = order_[h];
      for (long arc : adj_[w]) {
        if (arc == parent_arc_[w])
          continue;
        const int s = src(arc), t = dst(arc);
        const int child = (s == w) ? t : s;
        parent_[child] = w;
        parent_arc_[child] = arc;
        depth_[child] = depth_[w] + 1;
        // reduced cost zero on tree arcs: c + pi_s - pi_t = 0
        if (s == w)
          pi_[child] = pi_[w] + cost(arc);
        else
          pi_[child] = pi_[w] - cost(arc);
        order_.push_back(child);
      }
    }
  }

  long find_entering() {
    long best = -1;
    double best_rc = -eps_;
    long count = 0;
    for (long scanned = 0; scanned < real_arcs_; ++scanned) {
      const long arc = next_arc_;
      next_arc_ = (next_arc_ + 1 == real_arcs_) ? 0 : next_arc_ + 1;
      const double rc = reduced(arc);
      if (rc < best_rc) {
        best_rc = rc;
        best = arc;
      }
      if (++count == block_) {
        if (best >= 0)
          return best;
        count = 0;
      }
    }
    return best;
  }

  void pivot(long entering) {
    const int u = src(entering), v = dst(entering);
    int a = u, b = v;
    while (a != b) {
      if (depth_[a] > depth_[b])
        a = parent_[a];
      else if (depth_[b] > depth_[a])
        b = parent_[b];
      else {
        a = parent_[a];
        b = parent_[b];
      }
    }
    const int join = a;

    // Cycle orientation: join -> ... -> u -> v -> ... -> join.
    std::vector<int> u_path, v_path;
    for (int w = u; w != join; w = parent_[w])
      u_path.push_back(w);
    for (int w = v; w != join; w = parent_[w])
      v_path.push_back(w);

    // On the u side the cycle runs parent -> w, on the v side w -> parent.
    auto u_side_forward = [&](int w) { return dst(parent_arc_[w]) == w; };
    auto v_side_forward = [&](int w) { return src(parent_arc_[w]) == w; };

    double delta = std::numeric_limits<double>::infinity();
    for (int w : u_path)
      if (!u_side_forward(w))
        delta = std::min(delta, flow_[parent_arc_[w]]);
    for (int w : v_path)
      if (!v_side_forward(w))
        delta = std::min(delta, flow_[parent_arc_[w]]);
    if (!std::isfinite(delta))
      throw Error("transportation problem is unbounded");

    // Last blocking arc in cycle order starting from the join.
    int leave_node = -1;
    for (auto it = u_path.rbegin(); it != u_path.rend(); ++it)
      if (!u_side_forward(*it) && flow_[parent_arc_[*it]] <= delta)
        leave_node = *it;
    for (int w : v_path)
      if (!v_side_forward(w) && flow_[parent_arc_[w]] <= delta)
        leave_node = w;

    if (delta > 0.0) {
      for (int w : u_path)
        flow_[parent_arc_[w]] += u_side_forward(w) ? delta : -delta;
      for (int w : v_path)
        flow_[parent_arc_[w]] += v_side_forward(w) ? delta : -delta;
    }
    flow_[entering] = delta;

    const long leaving = parent_arc_[leave_node];
    flow_[leaving] = 0.0;
    auto drop = [&](int node) {
      auto& lst = adj_[node];
      lst.erase(std::find(lst.begin(), lst.end(), leaving));
    };
    drop(src(leaving));
    drop(dst(leaving));
    adj_[u].push_back(entering);
    adj_[v].push_back(entering);

    // Only the subtree cut off by the leaving arc moves; it hangs from the
    // entering arc afterwards.
    const bool on_u_side = std::find(u_path.begin(), u_path.end(), leave_node) != u_path.end();
    const int q = on_u_side ? u : v;
    const int p = on_u_side ? v : u;
    attach_subtree(q, p, entering);
  }

  void attach_subtree(int q, int p, long arc) {
    stack_.clear();
    set_child(q, p, arc);
    stack_.push_back(q);
    while (!stack_.empty()) {
      const int w = stack_.back();
      stack_.pop_back();
      for (long a : adj_[w]) {
        if (a == parent_arc_[w])
          continue;
        const int child = src(a) == w ? dst(a) : src(a);
        set_child(child, w, a);
        stack_.push_back(child);
      }
    }
  }

  void set_child(int child, int w, long arc) {
    parent_[child] = w;
    parent_arc_[child] = arc;
    depth_[child] = depth_[w] + 1;
    pi_[child] = src(arc) == w ? pi_[w] + cost(arc) : pi_[w] - cost(arc);
  }

  // Flows are determined by the tree and the supplies: process nodes from the
  // leaves upwards accumulating subtree supplies.
  void recompute_flows() {
    std::vector<double> sub(supply_);
    std::fill(flow_.begin(), flow_.end(), 0.0);
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
      const int w = *it;
      if (w == root_)
        continue;
      const long arc = parent_arc_[w];
      flow_[arc] = (src(arc) == w) ? sub[w] : -sub[w];
      sub[parent_[w]] += sub[w];
    }
  }

  // Components of the tree restricted to real arcs are internally tight but
  // may be offset against each other by multiples of the big-M cost. Shift
  // each component by shortest-path distances so the duals become tight
  // across components as well.
  void tighten_duals(Eigen::VectorXd& u, Eigen::VectorXd& v) const {
    std::vector<int> comp(root_, -1);
    int ncomp = 0;
    for (int start = 0; start < root_; ++start) {
      if (comp[start] >= 0)
        continue;
      std::vector<int> stack{start};
      comp[start] = ncomp;
      while (!stack.empty()) {
        const int w = stack.back();
        stack.pop_back();
        for (long arc : adj_[w]) {
          if (arc >= real_arcs_)
            continue;
          const int other = src(arc) == w ? dst(arc) : src(arc);
          if (comp[other] < 0) {
            comp[other] = ncomp;
            stack.push_back(other);
          }
        }
      }
      ++ncomp;
    }
    if (ncomp <= 1)
      return;
    const double inf = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd w = Eigen::MatrixXd::Constant(ncomp, ncomp, inf);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < m_; ++j) {
        const int k = comp[i], l = comp[n_ + j];
        w(k, l) = std::min(w(k, l), std::max(0.0, C_(i, j) - u(i) - v(j)));
      }
    // constraint s_l - s_k <= w(k, l); sink-only or source-only components
    // cannot exist because every node carries positive flow on a real arc
    std::vector<double> dist(ncomp, inf);
    std::vector<char> done(ncomp, 0);
    dist[comp[0]] = 0.0;
    for (int it = 0; it < ncomp; ++it) {
      int k = -1;
      for (int c = 0; c < ncomp; ++c)
        if (!done[c] && (k < 0 || dist[c] < dist[k]))
          k = c;
      if (k < 0 || !std::isfinite(dist[k]))
        break;
      done[k] = 1;
      for (int l = 0; l < ncomp; ++l)
        if (!done[l] && dist[k] + w(k, l) < dist[l])
          dist[l] = dist[k] + w(k, l);
    }
    for (int c = 0; c < ncomp; ++c)
      if (!std::isfinite(dist[c]))
        dist[c] = 0.0;
    for (int i = 0; i < n_; ++i)
      u(i) -= dist[comp[i]];
    for (int j = 0; j < m_; ++j)
      v(j) += dist[comp[n_ + j]];
  }

  const Eigen::MatrixXd& C_;
  int n_, m_, nodes_, root_;
  long real_arcs_;
  double big_m_ = 0.0, eps_ = 0.0;
  std::vector<double> supply_;
  std::vector<double> flow_;
  std::vector<std::vector<long>> adj_;
  std::vector<int> parent_;
  std::vector<long> parent_arc_;
  std::vector<int> depth_;
  std::vector<double> pi_;
  std::vector<int> order_;
  std::vector<int> stack_;
  long block_ = 10;
  long next_arc_ = 0;
};

} // namespace

TransportLP solve_transportation(const Eigen::MatrixXd& C, const Eigen::VectorXd& a,
                                 const Eigen::VectorXd& b, long max_pivots) {
  if (C.rows() != a.size() || C.cols() != b.size())
    throw InvalidArgument("cost matrix shape does not match the marginals");
  if (a.size() == 0 || b.size() == 0)
    throw InvalidArgument("empty marginal");
  if (std::abs(a.sum() - b.sum()) > 1e-9 * std::max(1.0, a.sum()))
    throw InvalidArgument("marginals have different total mass");
  NetworkSimplex ns(C, a, b);
  const int pivots = ns.run(max_pivots);
  TransportLP out = ns.result();
  out.pivots = pivots;
  return out;
}

} // namespace wbc
