#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace regpath {

/// Partition 0 = t_0 < t_1 < ... < t_M = T_e of the time interval.
/// Interval m (1-based) is [t_{m-1}, t_m) with length k_m and dual midpoint
/// t*_m = (t_{m-1} + t_m) / 2.
struct TimePartition {
  std::vector<double> nodes;

  int intervals() const { return static_cast<int>(nodes.size()) - 1; }
  double end_time() const { return nodes.back(); }
  double length(int m) const { return nodes[m] - nodes[m - 1]; }   // k_m, m in 1..M
  double midpoint(int m) const { return 0.5 * (nodes[m - 1] + nodes[m]); }
  double max_length() const {
    double k = 0.0;
    for (int m = 1; m <= intervals(); ++m) k = std::max(k, length(m));
    return k;
  }
  /// Interval index (1-based) containing t; the last interval is closed.
  int locate(double t) const {
    int lo = 1, hi = intervals();
    while (lo < hi) {
      const int mid = (lo + hi) / 2;
      if (t < nodes[mid]) hi = mid; else lo = mid + 1;
    }
    return lo;
  }
};

inline TimePartition build_uniform_partition(int M, double end_time) {
  if (M < 1) throw std::invalid_argument("build_uniform_partition: M must be >= 1");
  if (end_time <= 0.0)
    throw std::invalid_argument("build_uniform_partition: end time must be positive");
  TimePartition pt;
  pt.nodes.resize(M + 1);
  for (int m = 0; m <= M; ++m) pt.nodes[m] = end_time * m / M;
  pt.nodes[M] = end_time;
  return pt;
}

/// Scalar function that is linear on each interval of a TimePartition,
/// stored by its M+1 nodal values.
struct PiecewiseLinearScalar {
  std::vector<double> values;

  double at_node(int m) const { return values[m]; }
  double evaluate(const TimePartition& pt, double t) const {
    const int m = pt.locate(t);
    const double s = (t - pt.nodes[m - 1]) / pt.length(m);
    return (1.0 - s) * values[m - 1] + s * values[m];
  }
};

namespace detail {

struct GaussRule {
  std::vector<double> points;   // on [-1, 1]
  std::vector<double> weights;
};

inline const GaussRule& gauss_rule(int n) {
  static const std::vector<GaussRule> rules = {
      {{0.0}, {2.0}},
      {{-0.5773502691896257, 0.5773502691896257}, {1.0, 1.0}},
      {{-0.7745966692414834, 0.0, 0.7745966692414834},
       {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0}},
      {{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
        0.8611363115940526},
       {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
        0.3478548451374538}},
      {{-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
        0.9061798459386640},
       {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
        0.4786286704993665, 0.2369268850561891}}};
  if (n < 1 || n > static_cast<int>(rules.size()))
    throw std::invalid_argument("gauss_rule: unsupported point count");
  return rules[n - 1];
}

}  // namespace detail

/// Gauss-Legendre quadrature of f over [t0, t1]; exact for polynomials of
/// degree <= 2*points - 1. Evaluation points are interior to the interval.
inline double gauss_integrate(const std::function<double(double)>& f, double t0,
                              double t1, int points = 3) {
  const auto& rule = detail::gauss_rule(points);
  const double mid = 0.5 * (t0 + t1);
  const double half = 0.5 * (t1 - t0);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.points.size(); ++i)
    sum += rule.weights[i] * f(mid + half * rule.points[i]);
  return half * sum;
}

enum class TimeBasis { hat, characteristic };

/// Integral of f against a temporal basis function: the hat at node t_m
/// (m = 0..M) or the characteristic function of interval I_m (m = 1..M).
inline double quad_against_basis(const std::function<double(double)>& f,
                                 const TimePartition& pt, TimeBasis basis, int m,
                                 int points = 3) {
  if (points < 2) throw std::invalid_argument("quad_against_basis: need Gauss order >= 2");
  const int M = pt.intervals();
  if (basis == TimeBasis::characteristic) {
    if (m < 1 || m > M) throw std::invalid_argument("quad_against_basis: bad interval");
    return gauss_integrate(f, pt.nodes[m - 1], pt.nodes[m], points);
  }
  if (m < 0 || m > M) throw std::invalid_argument("quad_against_basis: bad node");
  double sum = 0.0;
  if (m >= 1) {  // rising part on I_m
    const double a = pt.nodes[m - 1], b = pt.nodes[m], k = b - a;
    sum += gauss_integrate([&](double t) { return f(t) * (t - a) / k; }, a, b, points);
  }
  if (m <= M - 1) {  // falling part on I_{m+1}
    const double a = pt.nodes[m], b = pt.nodes[m + 1], k = b - a;
    sum += gauss_integrate([&](double t) { return f(t) * (b - t) / k; }, a, b, points);
  }
  return sum;
}

}  // namespace regpath
