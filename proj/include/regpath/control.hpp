#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "regpath/mesh_fem.hpp"
#include "regpath/time_grid.hpp"

namespace regpath {

/// Constant control bounds a <= b. sigma() is the margin of the
/// sigma-condition a <= -sigma < 0 < sigma <= b, absent unless a < 0 < b.
struct AdmissibleBox {
  double lower = 0.0;
  double upper = 0.0;

  std::optional<double> sigma() const {
    if (lower < 0.0 && upper > 0.0) return std::min(-lower, upper);
    return std::nullopt;
  }
  double width() const { return upper - lower; }
  double midpoint() const { return 0.5 * (lower + upper); }
};

inline double project_box(double v, const AdmissibleBox& box) {
  return std::min(std::max(v, box.lower), box.upper);
}

/// The variationally discretized control: never stored on a grid, always the
/// pointwise clamp of -q(t)/alpha where q is the piecewise linear nodal
/// representation of B* p_kh.
struct ImplicitControl {
  const TimePartition* grid = nullptr;
  std::vector<double> q;  // size M+1, nodal values of B* p_kh
  double alpha = 1.0;
  AdmissibleBox box;

  double value(double t) const {
    return project_box(-PiecewiseLinearScalar{q}.evaluate(*grid, t) / alpha, box);
  }
};

/// Maximal subinterval on which the control is a single linear piece.
/// state: -1 clamped at the lower bound, 0 inactive, +1 clamped at the
/// upper bound.
struct ControlSegment {
  double t0, t1;
  double u0, u1;
  int state;
};

/// Split every time interval at the points where -q/alpha crosses a control
/// bound (at most two crossings per interval, solved in closed form).
inline std::vector<ControlSegment> control_segments(const ImplicitControl& u) {
  const TimePartition& pt = *u.grid;
  const int M = pt.intervals();
  std::vector<ControlSegment> segs;
  segs.reserve(M + 8);
  for (int m = 1; m <= M; ++m) {
    const double t0 = pt.nodes[m - 1], t1 = pt.nodes[m];
    const double v0 = -u.q[m - 1] / u.alpha;
    const double v1 = -u.q[m] / u.alpha;
    double cuts[4] = {t0, t1, 0, 0};
    int ncuts = 2;
    if (v0 != v1) {
      for (double bound : {u.box.lower, u.box.upper}) {
        const double s = (bound - v0) / (v1 - v0);
        if (s > 0.0 && s < 1.0) cuts[ncuts++] = t0 + s * (t1 - t0);
      }
    }
    std::sort(cuts, cuts + ncuts);
    for (int i = 0; i + 1 < ncuts; ++i) {
      const double a = cuts[i], b = cuts[i + 1];
      if (!(b > a)) continue;
      const double smid = ((0.5 * (a + b)) - t0) / (t1 - t0);
      const double vmid = v0 + smid * (v1 - v0);
      int state = 0;
      // ties on a bound count as active (measure-zero convention)
      if (vmid <= u.box.lower) state = -1;
      else if (vmid >= u.box.upper) state = +1;
      ControlSegment seg;
      seg.t0 = a;
      seg.t1 = b;
      if (state == -1) seg.u0 = seg.u1 = u.box.lower;
      else if (state == +1) seg.u0 = seg.u1 = u.box.upper;
      else {
        const double sa = (a - t0) / (t1 - t0), sb = (b - t0) / (t1 - t0);
        seg.u0 = v0 + sa * (v1 - v0);
        seg.u1 = v0 + sb * (v1 - v0);
      }
      seg.state = state;
      segs.push_back(seg);
    }
  }
  return segs;
}

// ---------------------------------------------------------------------------
// Exact integrals of piecewise linear functions of time.
// ---------------------------------------------------------------------------

struct LinSeg {
  double t0, t1, v0, v1;
};
using SegFn = std::vector<LinSeg>;

inline SegFn to_segments(const ImplicitControl& u) {
  SegFn out;
  for (const auto& s : control_segments(u)) out.push_back({s.t0, s.t1, s.u0, s.u1});
  return out;
}

inline SegFn pl_segments(const TimePartition& pt, const std::vector<double>& vals) {
  SegFn out;
  for (int m = 1; m <= pt.intervals(); ++m)
    out.push_back({pt.nodes[m - 1], pt.nodes[m], vals[m - 1], vals[m]});
  return out;
}

inline SegFn const_segments(double c, double end_time) {
  return {{0.0, end_time, c, c}};
}

namespace detail {

inline double eval_segfn(const SegFn& f, double t) {
  auto it = std::upper_bound(f.begin(), f.end(), t,
                             [](double x, const LinSeg& s) { return x < s.t1; });
  if (it == f.end()) it = std::prev(f.end());
  const LinSeg& s = *it;
  const double w = (s.t1 > s.t0) ? (t - s.t0) / (s.t1 - s.t0) : 0.0;
  return s.v0 + w * (s.v1 - s.v0);
}

inline std::vector<double> merged_breaks(const SegFn& a, const SegFn& b) {
  std::vector<double> br;
  br.reserve(a.size() + b.size() + 1);
  for (const auto& s : a) br.push_back(s.t0);
  for (const auto& s : b) br.push_back(s.t0);
  br.push_back(a.back().t1);
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  return br;
}

}  // namespace detail

/// Integral of the product of two piecewise linear functions on the merged
/// breakpoints; Simpson per piece is exact for the quadratic integrand.
inline double integrate_product(const SegFn& a, const SegFn& b) {
  double sum = 0.0;
  const auto br = detail::merged_breaks(a, b);
  for (std::size_t i = 0; i + 1 < br.size(); ++i) {
    const double t0 = br[i], t1 = br[i + 1];
    if (!(t1 > t0)) continue;
    const double tm = 0.5 * (t0 + t1);
    const double p0 = detail::eval_segfn(a, t0) * detail::eval_segfn(b, t0);
    const double pm = detail::eval_segfn(a, tm) * detail::eval_segfn(b, tm);
    const double p1 = detail::eval_segfn(a, t1) * detail::eval_segfn(b, t1);
    sum += (t1 - t0) / 6.0 * (p0 + 4.0 * pm + p1);
  }
  return sum;
}

/// Exact L1 norm of a piecewise linear function (splits at sign changes).
inline double integrate_abs(const SegFn& a) {
  double sum = 0.0;
  for (const auto& s : a) {
    const double len = s.t1 - s.t0;
    if (len <= 0.0) continue;
    if (s.v0 * s.v1 >= 0.0) {
      sum += 0.5 * (std::abs(s.v0) + std::abs(s.v1)) * len;
    } else {
      const double r = s.v0 / (s.v0 - s.v1);  // relative root position
      sum += 0.5 * (std::abs(s.v0) * r + std::abs(s.v1) * (1.0 - r)) * len;
    }
  }
  return sum;
}

inline SegFn shift_segments(SegFn a, double c) {
  for (auto& s : a) {
    s.v0 -= c;
    s.v1 -= c;
  }
  return a;
}

// ---------------------------------------------------------------------------
// Control-space quantities of the regularization path.
// ---------------------------------------------------------------------------

/// (L1, L2) distance between the implicit control and a constant reference,
/// exact via breakpoint splitting.
inline std::pair<double, double> control_error_norms(const ImplicitControl& u,
                                                     double reference) {
  const SegFn d = shift_segments(to_segments(u), reference);
  const double l1 = integrate_abs(d);
  const double l2 = std::sqrt(integrate_product(d, d));
  return {l1, l2};
}

/// Lebesgue measure of the inactive set {t : u(t) strictly inside (a,b)}.
inline double inactive_measure(const ImplicitControl& u) {
  double meas = 0.0;
  for (const auto& s : control_segments(u))
    if (s.state == 0) meas += s.t1 - s.t0;
  return meas;
}

/// Total variation integral of |u'|: |q'|/alpha on inactive segments,
/// zero where the control sits on a bound.
inline double control_derivative_l1(const ImplicitControl& u) {
  double tv = 0.0;
  for (const auto& s : control_segments(u))
    if (s.state == 0) tv += std::abs(s.u1 - s.u0);
  return tv;
}

/// Integrals of the control against the temporal hat functions, exact per
/// segment (linear times linear, 2-point Gauss). Entry m is the integral
/// against the hat at node t_m, m = 0..M.
inline std::vector<double> control_hat_integrals(const ImplicitControl& u) {
  const TimePartition& pt = *u.grid;
  const int M = pt.intervals();
  std::vector<double> out(M + 1, 0.0);
  static const double gp[2] = {-0.5773502691896257, 0.5773502691896257};
  for (const auto& s : control_segments(u)) {
    const int m = pt.locate(0.5 * (s.t0 + s.t1));  // containing interval, 1-based
    const double a = pt.nodes[m - 1], k = pt.length(m);
    const double half = 0.5 * (s.t1 - s.t0), mid = 0.5 * (s.t0 + s.t1);
    for (double g : gp) {
      const double t = mid + half * g;
      const double w = (t - s.t0) / (s.t1 - s.t0);
      const double uval = s.u0 + w * (s.u1 - s.u0);
      const double rise = (t - a) / k;
      out[m - 1] += half * uval * (1.0 - rise);
      out[m] += half * uval * rise;
    }
  }
  return out;
}

/// Located control operator B of a fixed spatial profile g1: stores the
/// interpolated profile and the weight vector w = M g1 reproducing the
/// L2(Omega) pairing with P1 fields.
struct LocatedControlOperator {
  NodalField g1;              // nodal interpolant, zero on the boundary
  Eigen::VectorXd weights;    // M_full * g1

  LocatedControlOperator() = default;
  LocatedControlOperator(const SpaceMesh& mesh, const SparseOperator& mass,
                         NodalField profile)
      : g1(std::move(profile)) {
    if (g1.size() != mesh.n_nodes())
      throw std::invalid_argument("LocatedControlOperator: profile size mismatch");
    weights = mass.full * g1;
  }
};

/// B* applied to a nodal-in-time family of spatial coefficient vectors:
/// q_m = (p_m, g1)_{L2}.
inline PiecewiseLinearScalar apply_B_star(const LocatedControlOperator& op,
                                          const std::vector<NodalField>& p_nodes) {
  PiecewiseLinearScalar q;
  q.values.resize(p_nodes.size());
  for (std::size_t m = 0; m < p_nodes.size(); ++m) {
    if (p_nodes[m].size() != op.weights.size())
      throw std::invalid_argument("apply_B_star: dimension mismatch");
    q.values[m] = op.weights.dot(p_nodes[m]);
  }
  return q;
}

/// CSV rows (t, u(t)) at the time nodes plus all clamp breakpoints.
inline void dump_control(const ImplicitControl& u, std::ostream& os) {
  os << "t,u\n";
  const auto segs = control_segments(u);
  for (const auto& s : segs) os << s.t0 << ',' << s.u0 << '\n';
  if (!segs.empty()) os << segs.back().t1 << ',' << segs.back().u1 << '\n';
}

}  // namespace regpath
