#include "wbc/functionals.hpp"

#include "wbc/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace wbc {

namespace {

// Pairwise summation keeps the order fixed and the error O(log n).
double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

class TermParser {
public:
  explicit TermParser(const std::string& s) : s_(s) {}

  std::vector<EnergyTerm> parse() {
    std::vector<EnergyTerm> out;
    skip();
    double sign = 1.0;
    if (peek() == '+' || peek() == '-')
      sign = get() == '-' ? -1.0 : 1.0;
    for (;;) {
      EnergyTerm t = term();
      t.coefficient *= sign;
      out.push_back(t);
      skip();
      if (pos_ == s_.size())
        break;
      const char c = get();
      if (c != '+' && c != '-')
        fail("expected '+' or '-'");
      sign = c == '-' ? -1.0 : 1.0;
    }
    return out;
  }

private:
  EnergyTerm term() {
    EnergyTerm t{1.0, 0.0, 0};
    factor(t);
    for (;;) {
      skip();
      if (peek() != '*')
        return t;
      get();
      factor(t);
    }
  }

  void factor(EnergyTerm& t) {
    skip();
    if (s_.compare(pos_, 6, "log(r)") == 0) {
      pos_ += 6;
      if (++t.log_power > 1)
        fail("at most one log(r) factor per term");
      return;
    }
    if (peek() == 'r') {
      get();
      skip();
      double p = 1.0;
      if (peek() == '^') {
        get();
        p = number();
      }
      t.power += p;
      return;
    }
    t.coefficient *= number();
  }

  double number() {
    skip();
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin)
      fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  char get() { return pos_ < s_.size() ? s_[pos_++] : '\0'; }
  [[noreturn]] void fail(const std::string& what) const {
    throw InvalidArgument("energy expression '" + s_ + "': " + what + " at offset " +
                          std::to_string(pos_));
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

// c r^p log(r)^q, with the r -> 0 limits.
double term_value(const EnergyTerm& t, double r) {
  if (r > 0.0)
    return t.coefficient * std::pow(r, t.power) * (t.log_power ? std::log(r) : 1.0);
  if (t.power > 0.0)
    return 0.0;
  if (t.power == 0.0 && t.log_power == 0)
    return t.coefficient;
  return t.coefficient * (t.log_power ? -1.0 : 1.0) * std::numeric_limits<double>::infinity();
}

// r d/dr (c r^p log^q) - c r^p log^q = c[(p - 1) r^p log^q + q r^p log^{q-1}]
double term_pressure(const EnergyTerm& t, double r) {
  EnergyTerm a{t.coefficient * (t.power - 1.0), t.power, t.log_power};
  double v = a.coefficient == 0.0 ? 0.0 : term_value(a, r);
  if (t.log_power == 1)
    v += term_value(EnergyTerm{t.coefficient, t.power, 0}, r);
  return v;
}

bool same_reference(const ReferenceMeasure& a, const ReferenceMeasure& b) {
  if (a.kind != b.kind)
    return false;
  switch (a.kind) {
  case ReferenceMeasure::Kind::Zero:
    return true;
  case ReferenceMeasure::Kind::Gaussian:
    return a.variance == b.variance && a.center.size() == b.center.size() &&
           (a.center - b.center).norm() == 0.0;
  case ReferenceMeasure::Kind::Tabulated:
    return a.table == b.table;
  }
  return false;
}

} // namespace

EntropySpec EntropySpec::un(double N, ReferenceMeasure reference) {
  if (!(N > 1.0) || !std::isfinite(N))
    throw InvalidArgument("U_N needs a finite N > 1");
  EntropySpec s;
  s.family_ = EntropyFamily::UN;
  s.N_ = N;
  s.reference_ = std::move(reference);
  s.terms_ = {{-N, 1.0 - 1.0 / N, 0}, {N, 1.0, 0}};
  return s;
}

EntropySpec EntropySpec::u_infinity(ReferenceMeasure reference) {
  EntropySpec s;
  s.family_ = EntropyFamily::UInfinity;
  s.reference_ = std::move(reference);
  s.terms_ = {{1.0, 1.0, 1}};
  return s;
}

EntropySpec EntropySpec::custom(const std::string& expression, ReferenceMeasure reference) {
  EntropySpec s = custom(TermParser(expression).parse(), std::move(reference));
  s.expression_ = expression;
  return s;
}

EntropySpec EntropySpec::custom(std::vector<EnergyTerm> terms, ReferenceMeasure reference) {
  if (terms.empty())
    throw InvalidArgument("custom energy needs at least one term");
  for (const auto& t : terms)
    if (t.log_power < 0 || t.log_power > 1 || !std::isfinite(t.coefficient) ||
        !std::isfinite(t.power))
      throw InvalidArgument("custom energy term is malformed");
  EntropySpec s;
  s.family_ = EntropyFamily::Custom;
  s.N_ = std::numeric_limits<double>::quiet_NaN();
  s.reference_ = std::move(reference);
  s.terms_ = std::move(terms);
  return s;
}

void EntropySpec::validate(int dim) const {
  if (family_ == EntropyFamily::UN && !(N_ > dim))
    throw InvalidArgument("U_N requires N greater than the manifold dimension");
}

double EntropySpec::U(double r) const {
  if (!(r >= 0.0))
    throw InvalidArgument("U is defined for r >= 0");
  switch (family_) {
  case EntropyFamily::UInfinity:
    return r > 0.0 ? r * std::log(r) : 0.0;
  case EntropyFamily::UN:
    return -N_ * (std::pow(r, 1.0 - 1.0 / N_) - r);
  case EntropyFamily::Custom:
    break;
  }
  double s = 0.0;
  for (const auto& t : terms_)
    s += term_value(t, r);
  return s;
}

double EntropySpec::p(double r) const {
  if (!(r >= 0.0))
    throw InvalidArgument("p(r) is defined for r >= 0");
  switch (family_) {
  case EntropyFamily::UInfinity:
    return r;
  case EntropyFamily::UN:
    return std::pow(r, 1.0 - 1.0 / N_);
  case EntropyFamily::Custom:
    break;
  }
  double s = 0.0;
  for (const auto& t : terms_)
    s += term_pressure(t, r);
  return s;
}

std::string to_string(EntropyFamily family) {
  switch (family) {
  case EntropyFamily::UN: return "UN";
  case EntropyFamily::UInfinity: return "Uinf";
  case EntropyFamily::Custom: return "custom";
  }
  return "?";
}

double entropy(const EntropySpec& spec, const MeshDensity& md) {
  const Mesh& mesh = *md.mesh();
  if (!same_reference(spec.reference(), mesh.reference()))
    throw InvalidArgument("density and energy use different reference measures");
  const double total = mesh.total_volume();
  std::vector<double> parts(mesh.size());
  for (int c = 0; c < mesh.size(); ++c) {
    const double nu = mesh.volume(c) / total;
    parts[c] = spec.U(md.value(c) * total) * nu;
  }
  return pairwise_sum(parts);
}

double p_of_r(const EntropySpec& spec, double r) { return spec.p(r); }

double potential_energy(const ScalarField& V, const DiscreteMeasure& mu) {
  std::vector<double> parts(mu.size());
  for (int i = 0; i < mu.size(); ++i)
    parts[i] = V(mu.point(i)) * mu.mass(i);
  return pairwise_sum(parts);
}

double potential_energy(const ScalarField& V, const MeshDensity& md) {
  return potential_energy(V, to_discrete(md));
}

double interaction_energy(const Kernel& W, const DiscreteMeasure& mu) {
  std::vector<double> rows(mu.size());
  std::vector<double> parts(mu.size());
  for (int i = 0; i < mu.size(); ++i) {
    for (int j = 0; j < mu.size(); ++j)
      parts[j] = W(mu.point(i), mu.point(j)) * mu.mass(j);
    rows[i] = pairwise_sum(parts) * mu.mass(i);
  }
  return pairwise_sum(rows);
}

double interaction_energy(const Kernel& W, const MeshDensity& md) {
  return interaction_energy(W, to_discrete(md));
}

ConvexityCheck convexity_class_check(const EntropySpec& spec, int n, int grid) {
  if (n < 1 || grid < 3)
    throw InvalidArgument("convexity check needs n >= 1 and at least 3 grid points");
  ConvexityCheck out;
  const double dn = n;
  auto h = [&](double r) { return std::pow(r, dn) * spec.U(std::pow(r, -dn)); };
  const double lo = std::log(1e-6), hi = std::log(1e6);
  const double delta = 1e-4;
  for (int k = 0; k < grid; ++k) {
    const double r = std::exp(lo + (hi - lo) * k / (grid - 1));
    const double step = delta * r;
    const double hp = h(r + step), h0 = h(r), hm = h(r - step);
    const double d1 = (hp - hm) / (2.0 * step);
    const double d2 = (hp - 2.0 * h0 + hm) / (step * step);
    out.min_second_derivative = std::min(out.min_second_derivative, d2);
    out.max_first_derivative = std::max(out.max_first_derivative, d1);
    // U(r^-n) can cancel terms of size r^-n, so h carries rounding of order
    // one (r^n * r^-n) on top of its own magnitude.
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                         (std::abs(hp) + std::abs(h0) + std::abs(hm) + 3.0);
    if (out.pass && !(d2 >= -1e-9 - noise / (step * step))) {
      out.pass = false;
      out.witness = r;
      out.reason = "r^n U(r^-n) is not convex here";
    }
    if (out.pass && !(d1 <= 1e-9 + noise / step)) {
      out.pass = false;
      out.witness = r;
      out.reason = "r^n U(r^-n) is increasing here";
    }
  }
  return out;
}

double cd_condition(const ManifoldSpec& spec, const ReferenceMeasure& reference, double N,
                    int resolution) {
  const int n = spec.dim();
  if (!(N >= n))
    throw InvalidArgument("CD(K, N) needs N at least the dimension");
  if (N == n && reference.kind != ReferenceMeasure::Kind::Zero)
    throw InvalidArgument("N equal to the dimension needs a constant potential");
  const double ric = spec.kind() == ManifoldKind::Sphere ? (n - 1) / (spec.radius() * spec.radius())
                                                         : 0.0;
  switch (reference.kind) {
  case ReferenceMeasure::Kind::Zero:
    return ric;
  case ReferenceMeasure::Kind::Tabulated:
    throw Unsupported("tabulated potentials have no derivatives for Ric_N");
  case ReferenceMeasure::Kind::Gaussian:
    break;
  }
  if (spec.kind() == ManifoldKind::Sphere)
    throw Unsupported("Gaussian reference measures are only supported on flat spaces");
  if (spec.kind() == ManifoldKind::Torus)
    return -std::numeric_limits<double>::infinity();

  // Box: Hess V = I / s2, dV = (x - c) / s2. The rank-one term only lowers
  // the eigenvalue along x - c.
  const double s2 = reference.variance;
  if (!std::isfinite(N))
    return 1.0 / s2;
  const int res = std::max(1, resolution);
  double worst = std::numeric_limits<double>::infinity();
  std::vector<int> idx(n, 0);
  const int per_axis = 2 * res + 1; // nodes and centers interleaved
  long total = 1;
  for (int k = 0; k < n; ++k)
    total *= per_axis;
  for (long t = 0; t < total; ++t) {
    long code = t;
    Point x(n);
    for (int k = 0; k < n; ++k) {
      const int i = static_cast<int>(code % per_axis);
      code /= per_axis;
      x(k) = spec.lower()(k) + spec.lengths()(k) * i / (2.0 * res);
    }
    const double g2 = (x - reference.center).squaredNorm() / (s2 * s2);
    worst = std::min(worst, 1.0 / s2 - g2 / (N - n));
  }
  return worst;
}

} // namespace wbc
