#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "regpath/control.hpp"

namespace regpath {

/// Control-space function handle understood by problem backends: the clamp
/// of -q/alpha, the raw (unclamped) nodal function q, or a constant.
struct CtrlFn {
  enum class Kind { clamped, raw, constant };
  Kind kind = Kind::constant;
  std::vector<double> q;
  double alpha = 1.0;
  double value = 0.0;

  static CtrlFn clamped(std::vector<double> q, double alpha) {
    CtrlFn f;
    f.kind = Kind::clamped;
    f.q = std::move(q);
    f.alpha = alpha;
    return f;
  }
  static CtrlFn raw(std::vector<double> q) {
    CtrlFn f;
    f.kind = Kind::raw;
    f.q = std::move(q);
    return f;
  }
  static CtrlFn constant(double c) {
    CtrlFn f;
    f.kind = Kind::constant;
    f.value = c;
    return f;
  }
};

// A problem backend provides (duck-typed, see LocatedHeatBackend and
// PoissonBackend):
//   int q_size() const;
//   std::vector<double> qmap(const std::vector<double>& q, double alpha) const;
//   AdmissibleBox box() const;
//   double domain_measure() const;
//   double inner(const CtrlFn&, const CtrlFn&) const;      // exact (.,.)_U
//   double state_diff_norm2(q_a, alpha_a, q_b, alpha_b) const;
//   void fill_record(RegPathRecord&) const;
// Consecutive qmap applications with identical input yield identical output.

struct FixedPointConfig {
  double tolerance = 1e-5;   // t_0, sup-norm threshold on B* p differences
  int max_iterations = 10000;
  enum class Start { lower_bound, upper_bound } start = Start::lower_bound;
  double damping = 1.0;      // 1 = plain fixed point
  bool warm_start = false;   // reuse previous level's q along a path
  std::ostream* log = nullptr;
};

struct FixedPointOutcome {
  std::vector<double> q;     // final B* p iterate
  int iterations = 0;
  bool converged = false;
  double last_diff = std::numeric_limits<double>::infinity();
};

namespace detail {

inline double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

/// q vector whose clamp equals the requested constant starting control.
inline std::vector<double> encode_start(int n, double alpha, const AdmissibleBox& box,
                                        FixedPointConfig::Start start) {
  const double u0 = (start == FixedPointConfig::Start::lower_bound) ? box.lower
                                                                    : box.upper;
  // -q/alpha strictly beyond the bound clamps to it
  const double q = (start == FixedPointConfig::Start::lower_bound)
                       ? -alpha * (u0 - 1.0)
                       : -alpha * (u0 + 1.0);
  return std::vector<double>(n, q);
}

}  // namespace detail

/// Fixed-point iteration on the projection formula u = P_box(-B*p(u)/alpha).
/// Stops when the sup-norm difference of consecutive B*p iterates drops
/// below the threshold; throws on non-convergence.
template <class Backend>
FixedPointOutcome solve_fixed_point(const Backend& backend, double alpha,
                                    const FixedPointConfig& cfg,
                                    const std::vector<double>* initial_q = nullptr) {
  if (alpha <= 0.0) throw std::invalid_argument("solve_fixed_point: alpha must be positive");
  if (cfg.tolerance <= 0.0 || cfg.max_iterations < 1)
    throw std::invalid_argument("solve_fixed_point: bad config");
  std::vector<double> q_prev =
      initial_q ? *initial_q
                : detail::encode_start(backend.q_size(), alpha, backend.box(), cfg.start);
  FixedPointOutcome out;
  for (int i = 1; i <= cfg.max_iterations; ++i) {
    std::vector<double> q = backend.qmap(q_prev, alpha);
    const double diff = detail::sup_diff(q, q_prev);
    if (cfg.damping != 1.0 && i > 1) {
      for (std::size_t j = 0; j < q.size(); ++j)
        q[j] = cfg.damping * q[j] + (1.0 - cfg.damping) * q_prev[j];
    }
    out.iterations = i;
    out.last_diff = diff;
    if (cfg.log)
      (*cfg.log) << "fixed-point alpha=" << alpha << " iter=" << i
                 << " sup-diff=" << diff << '\n';
    q_prev = std::move(q);
    // the first sup-difference compares against the encoded start, not a
    // computed adjoint; never accept it
    if (i >= 2 && diff < cfg.tolerance) {
      out.converged = true;
      break;
    }
  }
  out.q = std::move(q_prev);
  if (!out.converged)
    throw std::runtime_error("solve_fixed_point: no convergence after " +
                             std::to_string(cfg.max_iterations) +
                             " iterations (last sup-diff " +
                             std::to_string(out.last_diff) + ")");
  return out;
}

/// A posteriori optimality check: smallest value of
/// (alpha u + B*p(u), v - u)_U over the candidate directions v in
/// {a, b, (a+b)/2}; nonnegative up to tolerance at an optimum.
template <class Backend>
double variational_inequality_residual(const Backend& backend,
                                       const std::vector<double>& q, double alpha) {
  const std::vector<double> q_new = backend.qmap(q, alpha);
  const CtrlFn u = CtrlFn::clamped(q, alpha);
  const CtrlFn g = CtrlFn::raw(q_new);
  const AdmissibleBox box = backend.box();
  const double uu = backend.inner(u, u);
  const double gu = backend.inner(g, u);
  double res = std::numeric_limits<double>::infinity();
  for (double c : {box.lower, box.upper, box.midpoint()}) {
    const CtrlFn v = CtrlFn::constant(c);
    const double r = alpha * (backend.inner(u, v) - uu) + backend.inner(g, v) - gu;
    res = std::min(res, r);
  }
  return res;
}

/// Per-level results feeding tables and rate fits.
struct RegPathRecord {
  int level = 0;
  double alpha = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> q;  // final nodal values of B* p
  double err_l1 = std::numeric_limits<double>::quiet_NaN();
  double err_l2 = std::numeric_limits<double>::quiet_NaN();
  double state_err = std::numeric_limits<double>::quiet_NaN();
  double inactive_measure = std::numeric_limits<double>::quiet_NaN();
  double deriv_l1 = std::numeric_limits<double>::quiet_NaN();
  double objective = std::numeric_limits<double>::quiet_NaN();
};

/// One independent solve per level alpha = 2^{-l}. Failed levels are
/// reported as non-converged records; remaining levels still run.
template <class Backend>
std::vector<RegPathRecord> run_reg_path(const Backend& backend,
                                        const std::vector<int>& levels,
                                        const FixedPointConfig& cfg) {
  if (levels.empty()) throw std::invalid_argument("run_reg_path: no levels");
  std::vector<RegPathRecord> records;
  const std::vector<double>* warm = nullptr;
  for (int level : levels) {
    RegPathRecord rec;
    rec.level = level;
    rec.alpha = std::pow(2.0, -level);
    try {
      const FixedPointOutcome out = solve_fixed_point(backend, rec.alpha, cfg, warm);
      rec.iterations = out.iterations;
      rec.converged = out.converged;
      rec.q = out.q;
      backend.fill_record(rec);
    } catch (const std::exception& e) {
      rec.converged = false;
      if (cfg.log) (*cfg.log) << "level " << level << " failed: " << e.what() << '\n';
    }
    records.push_back(std::move(rec));
    if (cfg.warm_start && records.back().converged) warm = &records.back().q;
  }
  return records;
}

/// Signed slack RHS - LHS of the continuity inequality
///   ||y_a' - y_a||^2 + a' ||u_a' - u_a||^2 <= (a - a') (u_a, u_a' - u_a)_U
/// for two computed path records; nonnegative up to tolerance when both
/// records are optimal.
template <class Backend>
double check_monotonicity_inequality(const Backend& backend, const RegPathRecord& rec,
                                     const RegPathRecord& rec_prime) {
  const CtrlFn u = CtrlFn::clamped(rec.q, rec.alpha);
  const CtrlFn up = CtrlFn::clamped(rec_prime.q, rec_prime.alpha);
  const double uu = backend.inner(u, u);
  const double uup = backend.inner(u, up);
  const double upup = backend.inner(up, up);
  const double ydiff2 =
      backend.state_diff_norm2(rec.q, rec.alpha, rec_prime.q, rec_prime.alpha);
  const double lhs = ydiff2 + rec_prime.alpha * (upup - 2.0 * uup + uu);
  const double rhs = (rec.alpha - rec_prime.alpha) * (uup - uu);
  return rhs - lhs;
}

}  // namespace regpath
