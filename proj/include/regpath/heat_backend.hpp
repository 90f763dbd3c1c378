#pragma once

#include <cmath>
#include <vector>

#include "regpath/control.hpp"
#include "regpath/manufactured.hpp"
#include "regpath/mesh_fem.hpp"
#include "regpath/parabolic.hpp"
#include "regpath/tikhonov.hpp"
#include "regpath/time_grid.hpp"

namespace regpath {

/// Problem backend for the located-controls heat example: composes the
/// Petrov-Galerkin state/adjoint solvers, the located control operator and
/// the manufactured data into the q = B*p map driven by the fixed-point
/// solver. Immutable after construction.
class LocatedHeatBackend {
 public:
  LocatedHeatBackend(const ManufacturedProblem& problem, int n_per_side, int n_steps,
                     int gauss_points = 3)
      : problem_(problem),
        mesh_(build_uniform_mesh(n_per_side)),
        grid_(build_uniform_partition(n_steps, problem.end_time)),
        op_(mesh_, grid_),
        located_(mesh_, op_.mass(),
                 interpolate(mesh_, &ManufacturedProblem::g1)),
        y0_(interpolate(mesh_, &ManufacturedProblem::g1)) {
    const int M = grid_.intervals();
    // drift loads against the temporal hats (smooth, Gauss quadrature)
    drift_hat_.resize(M);
    for (int m = 0; m < M; ++m)
      drift_hat_[m] = quad_against_basis([&](double t) { return problem_.g0_time(t); },
                                         grid_, TimeBasis::hat, m, gauss_points);
    // tracking-term interval integrals, exact through the end-time singularity
    yd_interval_.resize(M + 1);
    for (int m = 1; m <= M; ++m)
      yd_interval_[m] = problem_.yd_time_antiderivative(grid_.nodes[m]) -
                        problem_.yd_time_antiderivative(grid_.nodes[m - 1]);
    g1_norm2_ = located_.g1.dot(located_.weights);
    gauss_points_ = gauss_points;
  }

  // op_ references mesh_/grid_ in place
  LocatedHeatBackend(const LocatedHeatBackend&) = delete;
  LocatedHeatBackend& operator=(const LocatedHeatBackend&) = delete;

  const ManufacturedProblem& problem() const { return problem_; }
  const SpaceMesh& mesh() const { return mesh_; }
  const TimePartition& grid() const { return grid_; }
  const ParabolicOperator& parabolic() const { return op_; }
  const LocatedControlOperator& located() const { return located_; }

  int q_size() const { return grid_.intervals() + 1; }
  AdmissibleBox box() const { return problem_.box; }
  double domain_measure() const { return problem_.end_time; }

  ImplicitControl make_control(const std::vector<double>& q, double alpha) const {
    return ImplicitControl{&grid_, q, alpha, problem_.box};
  }

  StateTrajectory solve_state_for(const ImplicitControl& u) const {
    const std::vector<double> uh = control_hat_integrals(u);
    return op_.solve_state(
        [&](int m) -> NodalField {
          return (drift_hat_[m] + uh[m]) * located_.weights;
        },
        y0_);
  }

  std::vector<double> qmap(const std::vector<double>& q, double alpha) const {
    const ImplicitControl u = make_control(q, alpha);
    const StateTrajectory y = solve_state_for(u);
    const AdjointTrajectory p = op_.solve_adjoint([&](int m) -> NodalField {
      return grid_.length(m) * (op_.mass().full * y.value(m)) -
             yd_interval_[m] * located_.weights;
    });
    return apply_B_star(located_, p.coeffs).values;
  }

  double inner(const CtrlFn& a, const CtrlFn& b) const {
    return integrate_product(segments_of(a), segments_of(b));
  }

  /// ||S B (u_a - u_b)||^2 in the discrete L2(I, L2(Omega)) norm, via one
  /// state solve of the control difference (drift and initial value cancel).
  double state_diff_norm2(const std::vector<double>& qa, double alpha_a,
                          const std::vector<double>& qb, double alpha_b) const {
    const std::vector<double> ha = control_hat_integrals(make_control(qa, alpha_a));
    const std::vector<double> hb = control_hat_integrals(make_control(qb, alpha_b));
    const StateTrajectory d = op_.solve_state(
        [&](int m) -> NodalField { return (ha[m] - hb[m]) * located_.weights; },
        NodalField::Zero(mesh_.n_nodes()));
    return op_.state_norm2(d);
  }

  void fill_record(RegPathRecord& rec) const {
    const ImplicitControl u = make_control(rec.q, rec.alpha);
    const auto [l1, l2] = control_error_norms(u, problem_.exact_control());
    rec.err_l1 = l1;
    rec.err_l2 = l2;
    rec.inactive_measure = regpath::inactive_measure(u);
    rec.deriv_l1 = control_derivative_l1(u);
    const StateTrajectory y = solve_state_for(u);
    rec.state_err = std::sqrt(state_error2(y));
    if (problem_.kappa <= 1.0) {
      const CtrlFn uf = CtrlFn::clamped(rec.q, rec.alpha);
      rec.objective = 0.5 * tracking_misfit2(y) + 0.5 * rec.alpha * inner(uf, uf);
    }
  }

  /// Squared discrete L2(I, L2(Omega)) distance to the exact state ybar.
  double state_error2(const StateTrajectory& y) const {
    double sum = 0.0;
    for (int m = 1; m <= grid_.intervals(); ++m) {
      const double km = grid_.length(m);
      const NodalField My = op_.mass().full * y.value(m);
      const double c1 = gauss_integrate(
          [&](double t) { return problem_.ybar_time(t); }, grid_.nodes[m - 1],
          grid_.nodes[m], gauss_points_);
      const double c2 = gauss_integrate(
          [&](double t) { const double c = problem_.ybar_time(t); return c * c; },
          grid_.nodes[m - 1], grid_.nodes[m], gauss_points_);
      sum += km * y.value(m).dot(My) - 2.0 * c1 * located_.g1.dot(My) +
             c2 * g1_norm2_;
    }
    return std::max(sum, 0.0);
  }

  /// ||y - y_d||^2 over space-time; finite only for kappa <= 1 where the
  /// tracking target is bounded.
  double tracking_misfit2(const StateTrajectory& y) const {
    double sum = 0.0;
    for (int m = 1; m <= grid_.intervals(); ++m) {
      const double km = grid_.length(m);
      const NodalField My = op_.mass().full * y.value(m);
      const double c2 = gauss_integrate(
          [&](double t) { const double c = problem_.yd_time(t); return c * c; },
          grid_.nodes[m - 1], grid_.nodes[m], gauss_points_);
      sum += km * y.value(m).dot(My) - 2.0 * yd_interval_[m] * located_.g1.dot(My) +
             c2 * g1_norm2_;
    }
    return std::max(sum, 0.0);
  }

 private:
  SegFn segments_of(const CtrlFn& f) const {
    switch (f.kind) {
      case CtrlFn::Kind::clamped: return to_segments(make_control(f.q, f.alpha));
      case CtrlFn::Kind::raw: return pl_segments(grid_, f.q);
      case CtrlFn::Kind::constant: return const_segments(f.value, grid_.end_time());
    }
    throw std::logic_error("segments_of: bad kind");
  }

  ManufacturedProblem problem_;
  SpaceMesh mesh_;
  TimePartition grid_;
  ParabolicOperator op_;
  LocatedControlOperator located_;
  NodalField y0_;
  std::vector<double> drift_hat_;    // int g0_time * hat_m, m = 0..M-1
  std::vector<double> yd_interval_;  // int_{I_m} yd_time, m = 1..M (exact)
  double g1_norm2_ = 0.0;            // g1' M g1
  int gauss_points_ = 3;
};

}  // namespace regpath
